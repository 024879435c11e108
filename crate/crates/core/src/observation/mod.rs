//! Link from weekly infections to expected admissions and the count likelihood.

mod kernel;
mod negbin;

pub use kernel::{
    default_delay_kernel, DelayKernel, DEFAULT_KERNEL_MAX_WEEK, DEFAULT_KERNEL_MEAN_DAYS, DEFAULT_KERNEL_SHAPE,
    MAX_KERNEL_WEEK,
};
pub use negbin::{negbin_logpmf, negbin_sample, series_loglik, ObsParams};

use crate::num::Real;

/// Expected admissions per week, `mu_w = p * sum_{v <= w} f(w - v) * dI_v`.
pub fn expected_admissions<T: Real>(incidence: &[T], kernel: &DelayKernel<T>, p: T) -> Vec<T> {
    let f = kernel.probs();
    (0..incidence.len())
        .map(|w| {
            let lo = w.saturating_sub(f.len() - 1);
            let acc = (lo..=w).fold(T::zero(), |acc, v| acc + f[w - v] * incidence[v]);
            acc * p
        })
        .collect()
}
