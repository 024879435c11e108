use crate::error::{Error, Result};
use crate::num::Real;

/// Population split across the six compartments at time `t` (days from season start).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CompartmentState<T> {
    pub t: T,
    pub s: T,
    pub e1: T,
    pub e2: T,
    pub i1: T,
    pub i2: T,
    pub r: T,
}

impl<T: Real> CompartmentState<T> {
    pub fn from_array(t: T, y: [T; 6]) -> Self {
        let [s, e1, e2, i1, i2, r] = y;
        Self { t, s, e1, e2, i1, i2, r }
    }

    pub fn to_array(&self) -> [T; 6] {
        [self.s, self.e1, self.e2, self.i1, self.i2, self.r]
    }

    pub fn total(&self) -> T {
        self.s + self.e1 + self.e2 + self.i1 + self.i2 + self.r
    }

    pub fn infectious(&self) -> T {
        self.i1 + self.i2
    }

    pub fn is_nonnegative(&self) -> bool {
        self.to_array().iter().all(|v| *v >= T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Transmission parameters together with the constants assumed known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpiParams<T> {
    /// Initial susceptible proportion.
    pub pi: T,
    /// Initial infectious count, `I1(0) + I2(0)`.
    pub i_tot0: T,
    /// Base transmission rate per day.
    pub beta: T,
    /// Multiplier on `beta` during school holidays.
    pub kappa: T,
    /// Latent stage rate, `2 / d_L`.
    pub sigma: T,
    /// Infectious stage rate, `2 / d_I`.
    pub gamma: T,
    pub n_pop: T,
}

impl<T: Real> EpiParams<T> {
    /// Mean latent period `d_L` in days.
    pub fn latent_period(&self) -> T {
        T::lit(2.0) / self.sigma
    }

    /// Mean infectious period `d_I` in days.
    pub fn infectious_period(&self) -> T {
        T::lit(2.0) / self.gamma
    }

    /// Total seeded mass placed outside S and R at t = 0.
    pub fn seed_mass(&self) -> T {
        T::lit(2.0) * self.i_tot0
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v.is_finite();
        if !(ok(self.pi) && self.pi > T::zero() && self.pi <= T::one()) {
            return Err(Error::domain(format!("pi must lie in (0, 1], got {}", self.pi)));
        }
        if !(ok(self.i_tot0) && self.i_tot0 >= T::zero()) {
            return Err(Error::domain(format!("i_tot0 must be >= 0, got {}", self.i_tot0)));
        }
        if !(ok(self.beta) && self.beta >= T::zero()) {
            return Err(Error::domain(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(ok(self.kappa) && self.kappa > T::zero()) {
            return Err(Error::domain(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if !(ok(self.sigma) && self.sigma > T::zero() && ok(self.gamma) && self.gamma > T::zero()) {
            return Err(Error::domain("sigma and gamma must be positive"));
        }
        if !(ok(self.n_pop) && self.n_pop > T::zero()) {
            return Err(Error::domain(format!("population must be positive, got {}", self.n_pop)));
        }
        Ok(())
    }
}
