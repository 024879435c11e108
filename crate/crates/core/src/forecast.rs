//! Posterior predictive bands, truncated refits and forecast scoring.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::epi::{integrate, weekly_incidence, HolidayCalendar};
use crate::error::{Error, Result};
use crate::inference::{
    diagnostics, mh_sample, ChainRng, DiagnosticsReport, ModelConstants, ParamVector, PosteriorDraws, PosteriorModel,
    PriorSpec, SamplerConfig,
};
use crate::observation::{expected_admissions, negbin_sample, DelayKernel};
use crate::series::{IsoWeek, SurveillanceSeries};
use crate::stats::quantile_sorted;

/// Quantile levels reported for each week.
pub const PREDICTIVE_LEVELS: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

/// ISO weeks of the new year at which prospective fits are cut.
pub const PROSPECTIVE_CUT_WEEKS: [u32; 4] = [3, 8, 13, 18];

/// Predictive draw `i` uses stream `PREDICTIVE_STREAM + i`, clear of the
/// streams used by MCMC chains.
const PREDICTIVE_STREAM: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Fitted,
    Forecast,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Fitted => "fitted",
            Phase::Forecast => "forecast",
        })
    }
}

/// Weekly quantiles of simulated admissions.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictiveSummary {
    start: IsoWeek,
    quantiles: Vec<[f64; 5]>,
    phases: Vec<Phase>,
    used: usize,
    dropped: usize,
}

impl PredictiveSummary {
    pub fn len(&self) -> usize {
        self.quantiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quantiles.is_empty()
    }

    pub fn week(&self, w: usize) -> IsoWeek {
        self.start.plus_weeks(w as i64)
    }

    /// Quantiles at [`PREDICTIVE_LEVELS`] for week `w`.
    pub fn quantiles(&self, w: usize) -> [f64; 5] {
        self.quantiles[w]
    }

    pub fn phase(&self, w: usize) -> Phase {
        self.phases[w]
    }

    pub fn median(&self, w: usize) -> f64 {
        self.quantiles[w][2]
    }

    pub fn width95(&self, w: usize) -> f64 {
        self.quantiles[w][4] - self.quantiles[w][0]
    }

    /// Draws that contributed, and draws dropped because the model failed.
    pub fn draw_counts(&self) -> (usize, usize) {
        (self.used, self.dropped)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["week", "q2.5", "q25", "q50", "q75", "q97.5", "phase"])?;
        for (k, (q, ph)) in self.quantiles.iter().zip(&self.phases).enumerate() {
            let mut rec = vec![self.week(k).to_string()];
            rec.extend(q.iter().map(f64::to_string));
            rec.push(ph.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<predictive>", e))?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// One negative-binomial realisation of the season for each retained draw,
/// summarised by week. Weeks `0..=last_fitted` are marked fitted.
///
/// Draw `i` has its own random stream, so the result is independent of
/// thread scheduling.
#[allow(clippy::too_many_arguments)]
pub fn posterior_predictive(
    draws: &PosteriorDraws,
    calendar: &HolidayCalendar,
    kernel: &DelayKernel<f64>,
    constants: &ModelConstants,
    start: IsoWeek,
    horizon_weeks: usize,
    last_fitted: Option<usize>,
    seed: u64,
) -> Result<PredictiveSummary> {
    let thetas = draws.param_vectors()?;
    if thetas.is_empty() {
        return Err(Error::domain("no posterior draws"));
    }
    let sims: Vec<Option<Vec<u64>>> = thetas
        .par_iter()
        .enumerate()
        .map(|(i, theta)| {
            let mut rng = ChainRng::seed_from_u64(seed);
            rng.set_stream(PREDICTIVE_STREAM + i as u64);
            match expected_counts(theta, calendar, kernel, constants, horizon_weeks) {
                Ok(mu) => Some(mu.iter().map(|&m| negbin_sample(m, theta.eta, &mut rng)).collect()),
                Err(e) => {
                    log::debug!("dropping predictive draw {i}: {e}");
                    None
                }
            }
        })
        .collect();
    let kept: Vec<Vec<u64>> = sims.into_iter().flatten().collect();
    let dropped = thetas.len() - kept.len();
    if dropped > 0 {
        log::warn!("{dropped} of {} predictive draws dropped after integration failures", thetas.len());
    }
    if kept.is_empty() {
        return Err(Error::domain("every predictive draw failed"));
    }
    let mut column = vec![0.0; kept.len()];
    let quantiles = (0..horizon_weeks)
        .map(|w| {
            for (c, sim) in column.iter_mut().zip(&kept) {
                *c = sim[w] as f64;
            }
            column.sort_by(f64::total_cmp);
            PREDICTIVE_LEVELS.map(|q| quantile_sorted(&column, q))
        })
        .collect();
    let phases = (0..horizon_weeks)
        .map(|w| if last_fitted.is_some_and(|c| w <= c) { Phase::Fitted } else { Phase::Forecast })
        .collect();
    Ok(PredictiveSummary { start, quantiles, phases, used: kept.len(), dropped })
}

/// Expected weekly admissions under `theta`.
pub fn expected_counts(
    theta: &ParamVector,
    calendar: &HolidayCalendar,
    kernel: &DelayKernel<f64>,
    constants: &ModelConstants,
    weeks: usize,
) -> Result<Vec<f64>> {
    let traj = integrate(&theta.epi(constants), calendar, (weeks * 7) as u32, constants.step)?;
    Ok(expected_admissions(&weekly_incidence(&traj)?, kernel, theta.p_icu))
}

/// Everything a fit needs besides the data.
#[derive(Clone, Debug)]
pub struct FitSetup {
    pub spec: PriorSpec,
    pub kernel: DelayKernel<f64>,
    pub constants: ModelConstants,
    pub sampler: SamplerConfig,
}

impl FitSetup {
    pub fn from_config(cfg: &RunConfig, season_year: i32) -> Result<Self> {
        Ok(Self {
            spec: cfg.priors.clone(),
            kernel: cfg.kernel.build()?,
            constants: cfg.constants(season_year)?,
            sampler: cfg.sampler.clone(),
        })
    }
}

/// Draws, diagnostics and predictive bands from one fit.
#[derive(Clone, Debug)]
pub struct ForecastRun {
    /// Index of the last week used for fitting.
    pub cut: usize,
    pub draws: PosteriorDraws,
    pub diagnostics: DiagnosticsReport,
    pub summary: PredictiveSummary,
}

/// Samples the posterior given `observed` (weeks from day 0).
pub fn fit_draws(observed: Vec<Option<u64>>, calendar: &HolidayCalendar, setup: &FitSetup) -> Result<PosteriorDraws> {
    let model = PosteriorModel::new(observed, setup.spec.clone(), calendar.clone(), setup.kernel.clone(), setup.constants);
    mh_sample(&model, &setup.sampler)
}

/// Fits weeks `0..=cut` and forecasts the rest of the season.
pub fn prospective_run(series: &SurveillanceSeries, cut: usize, setup: &FitSetup) -> Result<ForecastRun> {
    let first = series.first_observed().ok_or_else(|| Error::domain("series has no observations"))?;
    if cut < first {
        return Err(Error::domain(format!("cut {} precedes the first observation {}", series.week(cut), series.week(first))));
    }
    let horizon = series.season_weeks();
    if cut >= horizon {
        return Err(Error::domain(format!("cut week index {cut} lies beyond the {horizon}-week season")));
    }
    let draws = fit_draws(series.truncated(cut), series.calendar(), setup)?;
    let diagnostics = diagnostics(&draws)?;
    let summary = posterior_predictive(
        &draws,
        series.calendar(),
        &setup.kernel,
        &setup.constants,
        series.start(),
        horizon,
        Some(cut),
        setup.sampler.seed,
    )?;
    Ok(ForecastRun { cut, draws, diagnostics, summary })
}

/// Fits every observed week.
pub fn retrospective_fit(series: &SurveillanceSeries, setup: &FitSetup) -> Result<ForecastRun> {
    let last = series
        .counts()
        .iter()
        .rposition(Option::is_some)
        .ok_or_else(|| Error::domain("series has no observations"))?;
    prospective_run(series, last, setup)
}

/// Index of ISO week `week` of the year after the season starts.
pub fn new_year_cut(series: &SurveillanceSeries, week: u32) -> Result<usize> {
    let target = IsoWeek::new(series.season_year() + 1, week)?;
    series
        .index_of(&target)
        .ok_or_else(|| Error::domain(format!("{target} lies outside the surveillance window")))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForecastScore {
    /// Held-out weeks scored.
    pub weeks: usize,
    pub coverage95: f64,
    pub coverage50: f64,
    /// Mean absolute difference between predictive median and held-out count.
    pub mae: f64,
}

/// Scores forecast weeks against held-out counts indexed like the summary.
pub fn score_forecast(summary: &PredictiveSummary, held_out: &[Option<u64>]) -> Result<ForecastScore> {
    let mut n = 0usize;
    let (mut in95, mut in50, mut abs_err) = (0usize, 0usize, 0.0);
    for (w, x) in held_out.iter().enumerate().take(summary.len()) {
        let (Some(x), Phase::Forecast) = (x, summary.phase(w)) else { continue };
        let x = *x as f64;
        let q = summary.quantiles(w);
        n += 1;
        in95 += (q[0] <= x && x <= q[4]) as usize;
        in50 += (q[1] <= x && x <= q[3]) as usize;
        abs_err += (x - q[2]).abs();
    }
    if n == 0 {
        return Err(Error::domain("no held-out counts fall in forecast weeks"));
    }
    let n_f = n as f64;
    Ok(ForecastScore { weeks: n, coverage95: in95 as f64 / n_f, coverage50: in50 as f64 / n_f, mae: abs_err / n_f })
}
