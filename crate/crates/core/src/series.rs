//! Weekly surveillance counts indexed by ISO week.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};

use crate::epi::HolidayCalendar;
use crate::error::{Error, Result};

/// First and last ISO week of the surveillance window.
pub const SEASON_START_WEEK: u32 = 40;
pub const SEASON_END_WEEK: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IsoWeek {
    pub year: i32,
    pub week: u32,
}

impl IsoWeek {
    pub fn new(year: i32, week: u32) -> Result<Self> {
        let w = Self { year, week };
        w.try_monday().ok_or_else(|| Error::domain(format!("{w} is not a valid ISO week")))?;
        Ok(w)
    }

    fn try_monday(&self) -> Option<NaiveDate> {
        NaiveDate::from_isoywd_opt(self.year, self.week, Weekday::Mon)
    }

    pub fn monday(&self) -> NaiveDate {
        self.try_monday().expect("validated ISO week")
    }

    pub fn plus_weeks(&self, n: i64) -> Self {
        let iso = (self.monday() + chrono::Duration::weeks(n)).iso_week();
        Self { year: iso.year(), week: iso.week() }
    }

    /// Whole weeks from `self` to `later` (negative if `later` precedes `self`).
    pub fn weeks_until(&self, later: &IsoWeek) -> i64 {
        (later.monday() - self.monday()).num_days() / 7
    }

    /// First week of the season starting in `year`.
    pub fn season_start(year: i32) -> Self {
        Self { year, week: SEASON_START_WEEK }
    }

    /// Year in which the season containing this week started.
    pub fn season_year(&self) -> i32 {
        if self.week >= SEASON_START_WEEK {
            self.year
        } else {
            self.year - 1
        }
    }
}

impl fmt::Display for IsoWeek {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-W{:02}", self.year, self.week)
    }
}

impl FromStr for IsoWeek {
    type Err = Error;

    /// Accepts `2015-W08` or `2015-08`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("`{s}` is not an ISO week like 2015-W08"));
        let (y, w) = s.trim().split_once('-').ok_or_else(bad)?;
        let w = w.strip_prefix('W').or_else(|| w.strip_prefix('w')).unwrap_or(w);
        let year = y.parse().map_err(|_| bad())?;
        let week = w.parse().map_err(|_| bad())?;
        IsoWeek::new(year, week)
    }
}

/// Number of weeks from week 40 of `season_year` to week 20 of the next year.
pub fn season_length(season_year: i32) -> usize {
    let start = IsoWeek::season_start(season_year);
    let end = IsoWeek { year: season_year + 1, week: SEASON_END_WEEK };
    start.weeks_until(&end) as usize + 1
}

/// Weekly admission counts from week 40 of one season. `None` marks a week
/// with no report. Day 0 of the model is the Monday of the first week.
#[derive(Clone, Debug, PartialEq)]
pub struct SurveillanceSeries {
    label: String,
    start: IsoWeek,
    counts: Vec<Option<u64>>,
    calendar: HolidayCalendar,
}

impl SurveillanceSeries {
    pub fn new(season_year: i32, counts: Vec<Option<u64>>) -> Result<Self> {
        let len = season_length(season_year);
        if counts.len() > len {
            return Err(Error::domain(format!(
                "{} weeks exceed the {len}-week season starting {season_year}",
                counts.len()
            )));
        }
        Ok(Self {
            label: format!("{}/{:02}", season_year, (season_year + 1).rem_euclid(100)),
            start: IsoWeek::season_start(season_year),
            counts,
            calendar: HolidayCalendar::empty(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Attaches holidays, which must fall inside the full season window.
    pub fn with_calendar(mut self, calendar: HolidayCalendar) -> Result<Self> {
        calendar.check_within(7 * self.season_weeks() as u32)?;
        self.calendar = calendar;
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn start(&self) -> IsoWeek {
        self.start
    }

    pub fn season_year(&self) -> i32 {
        self.start.year
    }

    pub fn counts(&self) -> &[Option<u64>] {
        &self.counts
    }

    pub fn calendar(&self) -> &HolidayCalendar {
        &self.calendar
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Length of the full surveillance window.
    pub fn season_weeks(&self) -> usize {
        season_length(self.season_year())
    }

    pub fn week(&self, index: usize) -> IsoWeek {
        self.start.plus_weeks(index as i64)
    }

    pub fn index_of(&self, week: &IsoWeek) -> Option<usize> {
        let k = self.start.weeks_until(week);
        (k >= 0 && (k as usize) < self.season_weeks()).then_some(k as usize)
    }

    pub fn first_observed(&self) -> Option<usize> {
        self.counts.iter().position(Option::is_some)
    }

    /// Counts up to and including week `cut`; later weeks are dropped.
    pub fn truncated(&self, cut: usize) -> Vec<Option<u64>> {
        self.counts[..(cut + 1).min(self.counts.len())].to_vec()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iso_year", "iso_week", "count"])?;
        for (k, c) in self.counts.iter().enumerate() {
            let wk = self.week(k);
            w.write_record([wk.year.to_string(), wk.week.to_string(), c.map(|v| v.to_string()).unwrap_or_default()])?;
        }
        w.flush().map_err(|e| Error::io("<series>", e))?;
        Ok(())
    }

    /// Parses the `iso_year,iso_week,count` CSV. Absent weeks and empty
    /// counts become missing weeks.
    pub fn read_csv<R: Read>(input: R, origin: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["iso_year", "iso_week", "count"] {
            return Err(Error::parse(origin, 1, "expected header iso_year,iso_week,count"));
        }
        let mut rows: Vec<(usize, IsoWeek, Option<u64>)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let bad = |msg: String| Error::parse(origin, line, msg);
            if rec.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", rec.len())));
            }
            let year: i32 = rec[0].parse().map_err(|_| bad(format!("bad year `{}`", &rec[0])))?;
            let week: u32 = rec[1].parse().map_err(|_| bad(format!("bad week `{}`", &rec[1])))?;
            let wk = IsoWeek::new(year, week).map_err(|e| bad(e.to_string()))?;
            let count = match &rec[2] {
                "" => None,
                s if s.starts_with('-') => return Err(bad(format!("negative count {s}"))),
                s => Some(s.parse::<u64>().map_err(|_| bad(format!("count `{s}` is not a non-negative integer")))?),
            };
            if let Some(&(_, prev, _)) = rows.last() {
                if wk == prev {
                    return Err(bad(format!("duplicate week {wk}")));
                }
                if wk < prev {
                    return Err(bad(format!("week {wk} is out of order after {prev}")));
                }
            }
            rows.push((line, wk, count));
        }
        let Some(&(_, first, _)) = rows.first() else {
            return Err(Error::parse(origin, 1, "no data rows"));
        };
        let season_year = first.season_year();
        let start = IsoWeek::season_start(season_year);
        let len = season_length(season_year);
        let mut counts = Vec::new();
        for (line, wk, count) in rows {
            let k = start.weeks_until(&wk);
            if k < 0 || k as usize >= len {
                return Err(Error::parse(
                    origin,
                    line,
                    format!("week {wk} lies outside the {}/{} surveillance window", season_year, season_year + 1),
                ));
            }
            counts.resize(k as usize, None);
            counts.push(count);
        }
        SurveillanceSeries::new(season_year, counts)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, path)
    }
}

/// Reads and validates a series file.
pub fn load_series(path: impl AsRef<Path>) -> Result<SurveillanceSeries> {
    SurveillanceSeries::load(path)
}
