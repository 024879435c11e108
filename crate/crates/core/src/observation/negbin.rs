use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::num::Real;

/// Observation-layer parameters: admission probability given infection and
/// the variance-to-mean ratio of the counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObsParams<T> {
    pub p_icu: T,
    pub eta: T,
}

impl<T: Real> ObsParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_icu > T::zero() && self.p_icu < T::one()) {
            return Err(Error::domain(format!("admission probability must lie in (0, 1), got {}", self.p_icu)));
        }
        if !(self.eta > T::one() && self.eta <= T::lit(100.0)) {
            return Err(Error::domain(format!("overdispersion must lie in (1, 100], got {}", self.eta)));
        }
        Ok(())
    }
}

// Below this count the rising factorial is summed directly, which avoids
// cancellation between two large log-gamma values when r is large.
const DIRECT_SUM_LIMIT: u64 = 64;

/// Negative-binomial log pmf with mean `mu` and variance `eta * mu`.
///
/// Size `r = mu / (eta - 1)` and success probability `1 / eta`. A zero mean
/// is a point mass at zero. Returns NaN for `eta <= 1` or a negative mean.
pub fn negbin_logpmf<T: Real>(x: u64, mu: T, eta: T) -> T {
    if mu == T::zero() {
        return if x == 0 { T::zero() } else { T::neg_infinity() };
    }
    if !(mu > T::zero() && eta > T::one()) || !mu.is_finite() {
        return T::nan();
    }
    let excess = eta - T::one();
    let r = mu / excess;
    let xf = T::lit(x as f64);
    let rising = if x <= DIRECT_SUM_LIMIT {
        (0..x).fold(T::zero(), |acc, k| acc + (r + T::lit(k as f64)).ln())
    } else {
        (xf + r).log_gamma() - r.log_gamma()
    };
    rising - (xf + T::one()).log_gamma() - r * excess.ln_1p() + xf * (excess.ln() - eta.ln())
}

/// Draws a count via the gamma-Poisson mixture with mean `mu` and variance `eta * mu`.
pub fn negbin_sample<R: Rng + ?Sized>(mu: f64, eta: f64, rng: &mut R) -> u64 {
    if !(mu > 0.0) {
        return 0;
    }
    debug_assert!(eta > 1.0, "overdispersion must exceed 1");
    let excess = eta - 1.0;
    let rate = match Gamma::new(mu / excess, excess) {
        Ok(g) => g.sample(rng),
        Err(_) => return 0,
    };
    if !(rate > 0.0) {
        return 0;
    }
    match Poisson::new(rate) {
        Ok(p) => p.sample(rng) as u64,
        Err(_) => 0,
    }
}

/// Sum of per-week log pmfs; `None` weeks are skipped.
pub fn series_loglik<T: Real>(observed: &[Option<u64>], mu: &[T], eta: T) -> Result<T> {
    if observed.len() != mu.len() {
        return Err(Error::domain(format!(
            "{} observations but {} expected values",
            observed.len(),
            mu.len()
        )));
    }
    Ok(observed
        .iter()
        .zip(mu)
        .filter_map(|(x, m)| x.map(|x| negbin_logpmf(x, *m, eta)))
        .fold(T::zero(), |a, b| a + b))
}
