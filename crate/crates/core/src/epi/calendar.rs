use std::path::Path;

use crate::error::{Error, Result};
use crate::num::Real;

/// School-holiday intervals in whole days from season start.
///
/// An interval `[start, end]` covers days `start..=end`, i.e. the continuous
/// time span `[start, end + 1)`. Breakpoints therefore always fall on day
/// boundaries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HolidayCalendar {
    intervals: Vec<(u32, u32)>,
}

impl HolidayCalendar {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(intervals: Vec<(u32, u32)>) -> Result<Self> {
        for (k, &(start, end)) in intervals.iter().enumerate() {
            if start > end {
                return Err(Error::domain(format!("holiday interval {start},{end} ends before it starts")));
            }
            if k > 0 && start <= intervals[k - 1].1 {
                return Err(Error::domain(format!(
                    "holiday interval {start},{end} is not after {},{}",
                    intervals[k - 1].0,
                    intervals[k - 1].1
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[(u32, u32)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// True when `t` (days) falls inside a holiday.
    pub fn contains<T: Real>(&self, t: T) -> bool {
        self.intervals
            .iter()
            .any(|&(start, end)| t >= T::lit(start as f64) && t < T::lit(end as f64 + 1.0))
    }

    /// Whole-day check used by the integrator.
    pub fn contains_day(&self, day: u32) -> bool {
        self.intervals.iter().any(|&(start, end)| start <= day && day <= end)
    }

    /// Days at which the transmission rate may change.
    pub fn breakpoints(&self) -> Vec<u32> {
        self.intervals.iter().flat_map(|&(s, e)| [s, e + 1]).collect()
    }

    /// Fails if any holiday extends past the last day of a window of `days` days.
    pub fn check_within(&self, days: u32) -> Result<()> {
        match self.intervals.last() {
            Some(&(_, end)) if end >= days => Err(Error::domain(format!(
                "holiday ending on day {end} lies outside the {days}-day season"
            ))),
            _ => Ok(()),
        }
    }

    /// Parses the `start_day,end_day` per line format; `#` starts a comment.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut intervals = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::parse(origin, idx + 1, msg.to_string());
            let (a, b) = line.split_once(',').ok_or_else(|| bad("expected `start_day,end_day`"))?;
            let start: u32 = a.trim().parse().map_err(|_| bad("start day is not a non-negative integer"))?;
            let end: u32 = b.trim().parse().map_err(|_| bad("end day is not a non-negative integer"))?;
            if start > end {
                return Err(bad("end day precedes start day"));
            }
            if let Some(&(_, prev_end)) = intervals.last() {
                if start <= prev_end {
                    return Err(bad("intervals must be sorted and disjoint"));
                }
            }
            intervals.push((start, end));
        }
        Ok(Self { intervals })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        self.intervals.iter().map(|(s, e)| format!("{s},{e}\n")).collect()
    }
}
