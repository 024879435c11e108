use std::fmt;
use std::str::FromStr;

use crate::epi::EpiParams;
use crate::error::{Error, Result};
use crate::observation::ObsParams;

pub const N_PARAMS: usize = 6;

/// Mid-season England populations.
pub const POPULATION_2012_13: f64 = 53_679_750.0;
pub const POPULATION_2013_14: f64 = 54_091_200.0;
pub const POPULATION_2014_15: f64 = 54_551_450.0;

/// Estimated parameters, in the order used by draws files and block definitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    Pi,
    ITot0,
    Beta,
    Eta,
    PIcu,
    Kappa,
}

impl Param {
    pub const ALL: [Param; N_PARAMS] = [Param::Pi, Param::ITot0, Param::Beta, Param::Eta, Param::PIcu, Param::Kappa];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::Pi => "pi",
            Param::ITot0 => "i_tot0",
            Param::Beta => "beta",
            Param::Eta => "eta",
            Param::PIcu => "p_icu",
            Param::Kappa => "kappa",
        }
    }

    /// Widest admissible support `(lower, upper]`.
    pub fn hard_bounds(self) -> (f64, f64) {
        match self {
            Param::Pi => (0.0, 1.0),
            Param::ITot0 => (0.0, 10_000.0),
            Param::Beta => (0.0, 1.12),
            Param::Eta => (1.0, 100.0),
            Param::PIcu => (0.0, 1.0),
            Param::Kappa => (0.0, 2.0),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown parameter `{s}`")))
    }
}

/// Natural-scale parameter vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamVector {
    pub pi: f64,
    pub i_tot0: f64,
    pub beta: f64,
    pub eta: f64,
    pub p_icu: f64,
    pub kappa: f64,
}

impl ParamVector {
    pub fn from_array(a: [f64; N_PARAMS]) -> Self {
        let [pi, i_tot0, beta, eta, p_icu, kappa] = a;
        Self { pi, i_tot0, beta, eta, p_icu, kappa }
    }

    pub fn from_slice(a: &[f64]) -> Result<Self> {
        let arr: [f64; N_PARAMS] = a
            .try_into()
            .map_err(|_| Error::domain(format!("expected {N_PARAMS} parameters, got {}", a.len())))?;
        Ok(Self::from_array(arr))
    }

    pub fn to_array(&self) -> [f64; N_PARAMS] {
        [self.pi, self.i_tot0, self.beta, self.eta, self.p_icu, self.kappa]
    }

    pub fn get(&self, p: Param) -> f64 {
        self.to_array()[p.index()]
    }

    pub fn epi(&self, c: &ModelConstants) -> EpiParams<f64> {
        EpiParams {
            pi: self.pi,
            i_tot0: self.i_tot0,
            beta: self.beta,
            kappa: self.kappa,
            sigma: c.sigma,
            gamma: c.gamma,
            n_pop: c.n_pop,
        }
    }

    pub fn obs(&self) -> ObsParams<f64> {
        ObsParams { p_icu: self.p_icu, eta: self.eta }
    }

    /// The parameters that enter the transmission model.
    pub(crate) fn transmission_key(&self) -> [u64; 4] {
        [self.pi, self.i_tot0, self.beta, self.kappa].map(f64::to_bits)
    }
}

/// Quantities held fixed during inference.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ModelConstants {
    /// Latent stage rate (per day).
    pub sigma: f64,
    /// Infectious stage rate (per day).
    pub gamma: f64,
    pub n_pop: f64,
    /// Integrator step (days).
    pub step: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        Self { sigma: 1.0, gamma: 0.5797, n_pop: POPULATION_2014_15, step: crate::epi::DEFAULT_STEP }
    }
}
