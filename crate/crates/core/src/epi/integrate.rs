use super::model::derivatives;
use super::{initial_state, CompartmentState, EpiParams, HolidayCalendar};
use crate::error::{Error, Result};
use crate::num::Real;

/// Default fixed step in days.
pub const DEFAULT_STEP: f64 = 0.1;

/// Model states at whole days `0..=horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    states: Vec<CompartmentState<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(states: Vec<CompartmentState<T>>) -> Self {
        Self { states }
    }

    pub fn states(&self) -> &[CompartmentState<T>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of whole days covered.
    pub fn days(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn susceptible(&self) -> impl Iterator<Item = T> + '_ {
        self.states.iter().map(|s| s.s)
    }
}

/// Integrates the SEEIIR system from the initial state with classical RK4.
///
/// `step` must divide one day. Holiday breakpoints fall on day boundaries, so
/// each day is integrated as one constant-rate segment and no step straddles
/// a change in the transmission rate.
pub fn integrate<T: Real>(
    params: &EpiParams<T>,
    cal: &HolidayCalendar,
    horizon_days: u32,
    step: T,
) -> Result<Trajectory<T>> {
    let substeps = steps_per_day(step)?;
    let h = T::one() / T::lit(substeps as f64);
    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let (sigma, gamma, n_pop) = (params.sigma, params.gamma, params.n_pop);

    let start = initial_state(params)?;
    let mut states = Vec::with_capacity(horizon_days as usize + 1);
    states.push(start);
    let mut y = start.to_array();

    for day in 0..horizon_days {
        let beta_t = if cal.contains_day(day) { params.kappa * params.beta } else { params.beta };
        for _ in 0..substeps {
            let k1 = derivatives(&y, beta_t, sigma, gamma, n_pop);
            let y2 = axpy(&y, half, &k1);
            let k2 = derivatives(&y2, beta_t, sigma, gamma, n_pop);
            let y3 = axpy(&y, half, &k2);
            let k3 = derivatives(&y3, beta_t, sigma, gamma, n_pop);
            let y4 = axpy(&y, h, &k3);
            let k4 = derivatives(&y4, beta_t, sigma, gamma, n_pop);
            for j in 0..6 {
                y[j] += sixth * (k1[j] + two * (k2[j] + k3[j]) + k4[j]);
            }
        }
        let state = CompartmentState::from_array(T::lit((day + 1) as f64), y);
        if !state.is_finite() {
            return Err(Error::Integration { day: (day + 1) as f64, reason: format!("non-finite state {y:?}") });
        }
        states.push(state);
    }
    Ok(Trajectory { states })
}

#[inline(always)]
fn axpy<T: Real>(y: &[T; 6], a: T, k: &[T; 6]) -> [T; 6] {
    std::array::from_fn(|j| y[j] + a * k[j])
}

pub(crate) fn steps_per_day<T: Real>(step: T) -> Result<u32> {
    let step = step.as_f64();
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::domain(format!("step must lie in (0, 1] days, got {step}")));
    }
    let n = (1.0 / step).round();
    if ((1.0 / step) - n).abs() > 1e-6 * n {
        return Err(Error::domain(format!("step {step} does not divide one day")));
    }
    Ok(n as u32)
}

/// New infections per week, `S(7v - 7) - S(7v)` for weeks `v = 1..=V`.
pub fn weekly_incidence<T: Real>(trajectory: &Trajectory<T>) -> Result<Vec<T>> {
    let weeks = trajectory.days() / 7;
    if weeks == 0 {
        return Err(Error::domain(format!(
            "trajectory of {} days is shorter than one week",
            trajectory.days()
        )));
    }
    let st = trajectory.states();
    Ok((1..=weeks).map(|v| st[7 * v - 7].s - st[7 * v].s).collect())
}
