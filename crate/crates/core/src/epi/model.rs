use super::{CompartmentState, EpiParams, HolidayCalendar};
use crate::error::{Error, Result};
use crate::num::Real;

/// Piecewise-constant transmission rate: `kappa * beta` on holidays, `beta` otherwise.
pub fn beta_star<T: Real>(beta: T, kappa: T, t: T, cal: &HolidayCalendar) -> T {
    if cal.contains(t) {
        kappa * beta
    } else {
        beta
    }
}

/// Per-susceptible infection rate `beta_t * (I1 + I2) / N`.
pub fn force_of_infection<T: Real>(state: &CompartmentState<T>, beta_t: T, n_pop: T) -> Result<T> {
    if !(n_pop > T::zero()) {
        return Err(Error::domain(format!("population must be positive, got {n_pop}")));
    }
    Ok(foi(state.i1 + state.i2, beta_t, n_pop))
}

#[inline(always)]
fn foi<T: Real>(infectious: T, beta_t: T, n_pop: T) -> T {
    if infectious == T::zero() {
        T::zero()
    } else {
        beta_t * infectious / n_pop
    }
}

/// Right-hand side with the transmission rate already resolved.
#[inline(always)]
pub(crate) fn derivatives<T: Real>(y: &[T; 6], beta_t: T, sigma: T, gamma: T, n_pop: T) -> [T; 6] {
    let [s, e1, e2, i1, i2, _] = *y;
    let infection = foi(i1 + i2, beta_t, n_pop) * s;
    let latent1 = sigma * e1;
    let latent2 = sigma * e2;
    let recover1 = gamma * i1;
    let recover2 = gamma * i2;
    [
        -infection,
        infection - latent1,
        latent1 - latent2,
        latent2 - recover1,
        recover1 - recover2,
        recover2,
    ]
}

/// Time derivatives `(dS, dE1, dE2, dI1, dI2, dR)` at `state`.
pub fn ode_rhs<T: Real>(state: &CompartmentState<T>, params: &EpiParams<T>, cal: &HolidayCalendar) -> [T; 6] {
    let beta_t = beta_star(params.beta, params.kappa, state.t, cal);
    derivatives(&state.to_array(), beta_t, params.sigma, params.gamma, params.n_pop)
}

/// State at t = 0.
///
/// The infectious seed is split evenly over I1 and I2 and the same mass is
/// placed evenly over E1 and E2. The immune share `1 - pi` starts in R.
pub fn initial_state<T: Real>(params: &EpiParams<T>) -> Result<CompartmentState<T>> {
    params.validate()?;
    let half = params.i_tot0 / T::lit(2.0);
    let r = (T::one() - params.pi) * params.n_pop;
    let s = params.n_pop - half - half - half - half - r;
    if s < T::zero() {
        return Err(Error::domain(format!(
            "seed of {} exceeds the susceptible pool pi*N = {}",
            params.seed_mass(),
            params.pi * params.n_pop
        )));
    }
    Ok(CompartmentState { t: T::zero(), s, e1: half, e2: half, i1: half, i2: half, r })
}

/// Basic and effective reproduction numbers `(R0, Rn)`.
///
/// With two infectious stages of mean `1/gamma` each, `R0 = beta * d_I = 2 beta / gamma`
/// and `Rn = pi * R0`.
pub fn reproduction_numbers<T: Real>(params: &EpiParams<T>) -> (T, T) {
    let r0 = params.beta * params.infectious_period();
    (r0, r0 * params.pi)
}
