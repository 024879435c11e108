use std::sync::atomic::{AtomicUsize, Ordering};

use super::params::{ModelConstants, Param, ParamVector};
use super::prior::{log_prior, PriorSpec};
use super::sampler::{ChainRng, LogDensity};
use crate::epi::{integrate, weekly_incidence, HolidayCalendar};
use crate::error::Result;
use crate::observation::{expected_admissions, series_loglik, DelayKernel};

/// Prior draws screened when choosing a chain's starting point.
const INIT_CANDIDATES: usize = 200;

/// Posterior of the six parameters given a weekly count series.
///
/// `observed[w]` is the count reported in week `w` (0-based from the first
/// day of the season); `None` weeks are skipped. The ODE is only integrated
/// up to the last observed week.
#[derive(Debug)]
pub struct PosteriorModel {
    observed: Vec<Option<u64>>,
    spec: PriorSpec,
    calendar: HolidayCalendar,
    kernel: DelayKernel<f64>,
    constants: ModelConstants,
    horizon_weeks: usize,
    solves: AtomicUsize,
}

/// Per-chain cache of the two most recent transmission-model solves. Two
/// slots cover the current state and a rejected proposal, so an observation
/// block move after a rejection does not re-solve.
#[derive(Debug, Default)]
pub struct PosteriorWorkspace {
    slots: [Option<CachedSolve>; 2],
    newest: usize,
}

#[derive(Debug)]
struct CachedSolve {
    key: [u64; 4],
    incidence: Option<Vec<f64>>,
}

impl PosteriorModel {
    pub fn new(
        observed: Vec<Option<u64>>,
        spec: PriorSpec,
        calendar: HolidayCalendar,
        kernel: DelayKernel<f64>,
        constants: ModelConstants,
    ) -> Self {
        let horizon_weeks = observed.iter().rposition(Option::is_some).map_or(0, |w| w + 1);
        Self { observed, spec, calendar, kernel, constants, horizon_weeks, solves: AtomicUsize::new(0) }
    }

    pub fn observed(&self) -> &[Option<u64>] {
        &self.observed
    }

    pub fn spec(&self) -> &PriorSpec {
        &self.spec
    }

    pub fn calendar(&self) -> &HolidayCalendar {
        &self.calendar
    }

    pub fn kernel(&self) -> &DelayKernel<f64> {
        &self.kernel
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    /// Number of ODE solves performed so far.
    pub fn ode_solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn log_prior(&self, theta: &ParamVector) -> f64 {
        log_prior(theta, &self.spec)
    }

    /// Weekly new infections over the first `weeks` weeks.
    pub fn incidence(&self, theta: &ParamVector, weeks: usize) -> Result<Vec<f64>> {
        self.solves.fetch_add(1, Ordering::Relaxed);
        let traj = integrate(&theta.epi(&self.constants), &self.calendar, (weeks * 7) as u32, self.constants.step)?;
        weekly_incidence(&traj)
    }

    fn log_likelihood_from_incidence(&self, theta: &ParamVector, incidence: &[f64]) -> f64 {
        let mu = expected_admissions(incidence, &self.kernel, theta.p_icu);
        series_loglik(&self.observed[..self.horizon_weeks], &mu, theta.eta).unwrap_or(f64::NEG_INFINITY)
    }

    /// Log likelihood of the observed weeks; `-inf` if the model cannot be solved.
    pub fn log_likelihood(&self, theta: &ParamVector) -> f64 {
        if self.horizon_weeks == 0 {
            return 0.0;
        }
        match self.incidence(theta, self.horizon_weeks) {
            Ok(inc) => self.log_likelihood_from_incidence(theta, &inc),
            Err(e) => {
                log::warn!("rejecting {theta:?}: {e}");
                f64::NEG_INFINITY
            }
        }
    }

    /// Unnormalised log posterior. Parameters outside the prior support are
    /// rejected before any integration.
    pub fn log_posterior(&self, theta: &ParamVector) -> f64 {
        let lp = self.log_prior(theta);
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        lp + self.log_likelihood(theta)
    }
}

impl LogDensity for PosteriorModel {
    type Workspace = PosteriorWorkspace;

    fn dim(&self) -> usize {
        Param::ALL.len()
    }

    fn names(&self) -> Vec<String> {
        Param::ALL.iter().map(|p| p.name().to_string()).collect()
    }

    fn workspace(&self) -> PosteriorWorkspace {
        PosteriorWorkspace::default()
    }

    fn log_density(&self, ws: &mut PosteriorWorkspace, z: &[f64]) -> f64 {
        let (theta, lp) = self.spec.log_prior_unconstrained(z);
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        if self.horizon_weeks == 0 {
            return lp;
        }
        let key = theta.transmission_key();
        let hit = ws.slots.iter().position(|s| s.as_ref().is_some_and(|s| s.key == key));
        let slot = match hit {
            Some(k) => k,
            None => {
                let incidence = match self.incidence(&theta, self.horizon_weeks) {
                    Ok(inc) => Some(inc),
                    Err(e) => {
                        log::warn!("rejecting {theta:?}: {e}");
                        None
                    }
                };
                let k = 1 - ws.newest;
                ws.slots[k] = Some(CachedSolve { key, incidence });
                k
            }
        };
        ws.newest = slot;
        match ws.slots[slot].as_ref().and_then(|s| s.incidence.as_ref()) {
            Some(inc) => lp + self.log_likelihood_from_incidence(&theta, inc),
            None => f64::NEG_INFINITY,
        }
    }

    fn to_reported(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let (theta, log_jac) = self.spec.from_unconstrained(z);
        (theta.to_array().to_vec(), log_jac)
    }

    /// Best of a batch of prior draws.
    fn initial_point(&self, ws: &mut PosteriorWorkspace, rng: &mut ChainRng) -> Vec<f64> {
        let mut best = None;
        let mut best_lp = f64::NEG_INFINITY;
        for _ in 0..INIT_CANDIDATES {
            let z = self.spec.to_unconstrained(&self.spec.sample(rng)).to_vec();
            let lp = self.log_density(ws, &z);
            if best.is_none() || lp > best_lp {
                best_lp = lp;
                best = Some(z);
            }
        }
        best.expect("at least one candidate")
    }
}
