use std::path::Path;

use statrs::distribution::{ContinuousCDF, Gamma};

use crate::error::{Error, Result};
use crate::num::Real;

/// Largest supported infection-to-admission lag in weeks.
pub const MAX_KERNEL_WEEK: usize = 8;
pub const DEFAULT_KERNEL_MEAN_DAYS: f64 = 9.0;
pub const DEFAULT_KERNEL_SHAPE: f64 = 4.0;
pub const DEFAULT_KERNEL_MAX_WEEK: usize = 4;

/// Weekly lag distribution from infection to admission; entry `w` is the
/// probability that `w` weeks elapse.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayKernel<T> {
    probs: Vec<T>,
}

impl<T: Real> DelayKernel<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() || probs.len() > MAX_KERNEL_WEEK + 1 {
            return Err(Error::domain(format!(
                "kernel needs between 1 and {} weekly entries, got {}",
                MAX_KERNEL_WEEK + 1,
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= T::zero())) {
            return Err(Error::domain(format!("kernel entry {bad} is not a probability")));
        }
        let total = probs.iter().fold(T::zero(), |a, b| a + *b);
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0 * probs.len() as f64));
        if (total - T::one()).abs() > tol {
            return Err(Error::domain(format!("kernel sums to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn max_week(&self) -> usize {
        self.probs.len() - 1
    }

    /// Reads one probability per line; blank lines and `#` comments are ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut probs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, format!("`{line}` is not a number")))?;
            probs.push(T::lit(v));
        }
        Self::new(probs).map_err(|e| Error::parse(path, 0, e.to_string()))
    }
}

/// Gamma-distributed delay with the given mean (days) and shape, binned into
/// weeks `[7w, 7w + 7)` for `w = 0..=max_week` and renormalised.
pub fn default_delay_kernel<T: Real>(mean_days: f64, shape: f64, max_week: usize) -> Result<DelayKernel<T>> {
    if !(mean_days > 0.0 && shape > 0.0 && mean_days.is_finite() && shape.is_finite()) {
        return Err(Error::domain(format!("gamma delay needs positive mean and shape, got {mean_days}, {shape}")));
    }
    if max_week > MAX_KERNEL_WEEK {
        return Err(Error::domain(format!("max_week {max_week} exceeds {MAX_KERNEL_WEEK}")));
    }
    let delay = Gamma::new(shape, shape / mean_days).map_err(|e| Error::domain(e.to_string()))?;
    let raw: Vec<f64> = (0..=max_week)
        .map(|w| delay.cdf(7.0 * (w + 1) as f64) - delay.cdf(7.0 * w as f64))
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::domain("gamma delay places no mass inside the kernel window"));
    }
    DelayKernel::new(raw.iter().map(|p| T::lit(p / total)).collect())
}
