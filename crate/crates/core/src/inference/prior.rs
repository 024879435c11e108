use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::erfc;

use super::params::{Param, ParamVector, N_PARAMS};
use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Prior for one parameter. Supports are `(lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prior {
    Uniform { lower: f64, upper: f64 },
    /// Log-normal truncated to its support; the density is left unnormalised
    /// for the truncation, which only shifts the log prior by a constant.
    LogNormal { log_mean: f64, log_sd: f64, lower: f64, upper: f64 },
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

impl Prior {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Prior::Uniform { lower, upper } | Prior::LogNormal { lower, upper, .. } => (lower, upper),
        }
    }

    pub fn in_support(&self, x: f64) -> bool {
        let (lo, hi) = self.support();
        x > lo && x <= hi
    }

    pub fn log_density(&self, x: f64) -> f64 {
        if !self.in_support(x) {
            return f64::NEG_INFINITY;
        }
        match *self {
            Prior::Uniform { lower, upper } => -(upper - lower).ln(),
            Prior::LogNormal { log_mean, log_sd, .. } => {
                let z = (x.ln() - log_mean) / log_sd;
                -x.ln() - log_sd.ln() - LN_SQRT_2PI - 0.5 * z * z
            }
        }
    }

    /// Cumulative distribution, normalised over the support.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match *self {
            Prior::Uniform { lower, upper } => (x - lower) / (upper - lower),
            Prior::LogNormal { log_mean, log_sd, lower, upper } => {
                let raw = |v: f64| if v <= 0.0 { 0.0 } else { std_normal_cdf((v.ln() - log_mean) / log_sd) };
                (raw(x) - raw(lower)) / (raw(upper) - raw(lower))
            }
        }
    }

    /// Standard deviation of the untruncated distribution.
    pub fn sd(&self) -> f64 {
        match *self {
            Prior::Uniform { lower, upper } => (upper - lower) / 12f64.sqrt(),
            Prior::LogNormal { log_mean, log_sd, .. } => {
                let s2 = log_sd * log_sd;
                ((s2.exp() - 1.0) * (2.0 * log_mean + s2).exp()).sqrt()
            }
        }
    }

    pub fn median(&self) -> f64 {
        match *self {
            Prior::Uniform { lower, upper } => 0.5 * (lower + upper),
            Prior::LogNormal { log_mean, .. } => log_mean.exp(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (lo, hi) = self.support();
        match *self {
            Prior::Uniform { .. } => loop {
                let x = lo + (hi - lo) * rng.random::<f64>();
                if self.in_support(x) {
                    return x;
                }
            },
            Prior::LogNormal { log_mean, log_sd, .. } => loop {
                let z: f64 = StandardNormal.sample(rng);
                let x = (log_mean + log_sd * z).exp();
                if self.in_support(x) {
                    return x;
                }
            },
        }
    }

    /// Parses `uniform(lower, upper)` or `lognormal(log_mean, log_sd)`; the
    /// log-normal takes its support from the parameter bounds.
    pub fn parse_for(param: Param, text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse prior `{text}` for {param}"));
        let t = text.trim();
        let open = t.find('(').ok_or_else(bad)?;
        if !t.ends_with(')') {
            return Err(bad());
        }
        let args: Vec<f64> = t[open + 1..t.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let [a, b] = args[..] else { return Err(bad()) };
        let (lower, upper) = param.hard_bounds();
        let prior = match t[..open].trim().to_ascii_lowercase().as_str() {
            "uniform" => Prior::Uniform { lower: a, upper: b },
            "lognormal" => Prior::LogNormal { log_mean: a, log_sd: b, lower, upper },
            _ => return Err(bad()),
        };
        prior.check(param)?;
        Ok(prior)
    }

    fn check(&self, param: Param) -> Result<()> {
        let (lo, hi) = self.support();
        let (hard_lo, hard_hi) = param.hard_bounds();
        if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= hard_lo && hi <= hard_hi) {
            return Err(Error::Config(format!(
                "prior support ({lo}, {hi}] for {param} must lie inside ({hard_lo}, {hard_hi}]"
            )));
        }
        if let Prior::LogNormal { log_mean, log_sd, .. } = *self {
            if !(log_mean.is_finite() && log_sd > 0.0 && log_sd.is_finite()) {
                return Err(Error::Config(format!("log-normal prior for {param} needs finite mean and positive sd")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prior::Uniform { lower, upper } => write!(f, "uniform({lower}, {upper})"),
            Prior::LogNormal { log_mean, log_sd, .. } => write!(f, "lognormal({log_mean}, {log_sd})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorScenario {
    Uninformative,
    Informative,
}

impl FromStr for PriorScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uninformative" => Ok(PriorScenario::Uninformative),
            "informative" => Ok(PriorScenario::Informative),
            other => Err(Error::Config(format!("unknown prior scenario `{other}`"))),
        }
    }
}

impl fmt::Display for PriorScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorScenario::Uninformative => "uninformative",
            PriorScenario::Informative => "informative",
        })
    }
}

/// Independent priors for the six parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorSpec {
    priors: [Prior; N_PARAMS],
}

impl PriorSpec {
    /// Uniform on every parameter's full support.
    pub fn uninformative() -> Self {
        let priors = Param::ALL.map(|p| {
            let (lower, upper) = p.hard_bounds();
            Prior::Uniform { lower, upper }
        });
        Self { priors }
    }

    /// Sero-prevalence informed susceptibility and severity-study informed
    /// admission probability; the rest stay uniform.
    pub fn informative() -> Self {
        Self::uninformative()
            .with(Param::Pi, Prior::LogNormal { log_mean: 0.401f64.ln(), log_sd: 0.2, lower: 0.0, upper: 1.0 })
            .with(Param::PIcu, Prior::LogNormal { log_mean: 0.000239f64.ln(), log_sd: 1.0, lower: 0.0, upper: 1.0 })
    }

    pub fn for_scenario(s: PriorScenario) -> Self {
        match s {
            PriorScenario::Uninformative => Self::uninformative(),
            PriorScenario::Informative => Self::informative(),
        }
    }

    fn with(mut self, param: Param, prior: Prior) -> Self {
        self.priors[param.index()] = prior;
        self
    }

    pub fn set(&mut self, param: Param, prior: Prior) -> Result<()> {
        prior.check(param)?;
        self.priors[param.index()] = prior;
        Ok(())
    }

    pub fn get(&self, param: Param) -> &Prior {
        &self.priors[param.index()]
    }

    pub fn priors(&self) -> &[Prior; N_PARAMS] {
        &self.priors
    }

    pub fn in_support(&self, theta: &ParamVector) -> bool {
        self.priors.iter().zip(theta.to_array()).all(|(p, x)| p.in_support(x))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamVector {
        ParamVector::from_array(std::array::from_fn(|k| self.priors[k].sample(rng)))
    }

    /// Maps natural-scale values to the real line with a scaled logit on each support.
    pub fn to_unconstrained(&self, theta: &ParamVector) -> [f64; N_PARAMS] {
        let x = theta.to_array();
        std::array::from_fn(|k| {
            let (lo, hi) = self.priors[k].support();
            ((x[k] - lo) / (hi - x[k])).ln()
        })
    }

    /// Inverse of [`Self::to_unconstrained`], with the log absolute Jacobian `log |dx/dz|`.
    pub fn from_unconstrained(&self, z: &[f64]) -> (ParamVector, f64) {
        let mut log_jac = 0.0;
        let x = std::array::from_fn(|k| {
            let (lo, hi) = self.priors[k].support();
            let zk = z[k];
            log_jac += (hi - lo).ln() - softplus(zk) - softplus(-zk);
            lo + (hi - lo) * sigmoid(zk)
        });
        (ParamVector::from_array(x), log_jac)
    }

    /// Log prior density of the unconstrained coordinates.
    pub fn log_prior_unconstrained(&self, z: &[f64]) -> (ParamVector, f64) {
        let (theta, log_jac) = self.from_unconstrained(z);
        (theta, log_prior(&theta, self) + log_jac)
    }
}

/// Sum of independent log prior densities; `-inf` outside the support.
pub fn log_prior(theta: &ParamVector, spec: &PriorSpec) -> f64 {
    spec.priors.iter().zip(theta.to_array()).map(|(p, x)| p.log_density(x)).sum()
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn theta(pi: f64, i0: f64, beta: f64, eta: f64, p: f64, kappa: f64) -> ParamVector {
        ParamVector { pi, i_tot0: i0, beta, eta, p_icu: p, kappa }
    }

    #[test]
    fn uniform_prior_is_flat_inside() {
        let spec = PriorSpec::uninformative();
        let a = log_prior(&theta(0.3, 100.0, 0.5, 3.0, 0.01, 1.1), &spec);
        let b = log_prior(&theta(0.9, 9000.0, 1.1, 90.0, 0.9, 0.2), &spec);
        assert!(a.is_finite());
        assert_eq!(a, b);
    }

    #[test]
    fn outside_support_is_rejected() {
        let spec = PriorSpec::uninformative();
        assert_eq!(log_prior(&theta(0.5, 100.0, 1.2, 3.0, 0.01, 1.0), &spec), f64::NEG_INFINITY);
        assert_eq!(log_prior(&theta(0.5, 100.0, 0.5, 1.0, 0.01, 1.0), &spec), f64::NEG_INFINITY);
        assert_eq!(log_prior(&theta(0.5, 100.0, 0.5, 3.0, 0.01, 2.5), &spec), f64::NEG_INFINITY);
        assert!(log_prior(&theta(0.5, 100.0, 1.12, 3.0, 0.01, 2.0), &spec).is_finite());
    }

    #[test]
    fn informative_density_at_median() {
        let prior = *PriorSpec::informative().get(Param::Pi);
        let x: f64 = 0.401;
        let expected = -(x * 0.2 * (2.0 * std::f64::consts::PI).sqrt()).ln();
        assert!((prior.log_density(x) - expected).abs() < 1e-12);
        // density as the derivative of the log-normal CDF
        let n = Normal::new(0.401f64.ln(), 0.2).unwrap();
        let h = 1e-6;
        let numeric = (n.cdf((x + h).ln()) - n.cdf((x - h).ln())) / (2.0 * h);
        assert!((prior.log_density(x).exp() - numeric).abs() < 1e-6 * numeric);
    }

    #[test]
    fn parse_priors() {
        assert_eq!(
            Prior::parse_for(Param::Kappa, "uniform(0, 1.5)").unwrap(),
            Prior::Uniform { lower: 0.0, upper: 1.5 }
        );
        let ln = Prior::parse_for(Param::Pi, "lognormal(-0.9, 0.2)").unwrap();
        assert_eq!(ln.support(), (0.0, 1.0));
        assert!(Prior::parse_for(Param::Beta, "uniform(0, 2)").is_err());
        assert!(Prior::parse_for(Param::Beta, "gamma(1, 2)").is_err());
        assert!(Prior::parse_for(Param::Beta, "uniform(0.1)").is_err());
        assert!(Prior::parse_for(Param::Pi, "lognormal(0, -1)").is_err());
    }

    #[test]
    fn cdf_and_samples_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for prior in [*PriorSpec::informative().get(Param::PIcu), *PriorSpec::uninformative().get(Param::Eta)] {
            let m = prior.median();
            let below = (0..20_000).filter(|_| prior.sample(&mut rng) <= m).count() as f64 / 20_000.0;
            assert!((below - 0.5).abs() < 0.02);
            assert!((prior.cdf(m) - 0.5).abs() < 1e-6);
        }
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn unconstrained_density_carries_the_jacobian() {
        // Varying one coordinate of z, the unconstrained density must push
        // forward to the prior: mass on [a, b] equals F(x(b)) - F(x(a)).
        let spec = PriorSpec::informative();
        let base = spec.to_unconstrained(&theta(0.4, 5000.0, 0.56, 50.0, 0.0003, 1.0));
        for param in [Param::Pi, Param::PIcu, Param::Beta] {
            let k = param.index();
            let density = |zk: f64| {
                let mut z = base;
                z[k] = zk;
                spec.log_prior_unconstrained(&z).1.exp()
            };
            let total = simpson(density, -40.0, 40.0, 40_000);
            let (a, b) = (-6.0, -0.5);
            let part = simpson(density, a, b, 20_000);
            let x_at = |zk: f64| {
                let mut z = base;
                z[k] = zk;
                spec.from_unconstrained(&z).0.get(param)
            };
            let prior = spec.get(param);
            let expected = prior.cdf(x_at(b)) - prior.cdf(x_at(a));
            assert!((part / total - expected).abs() < 1e-8, "{param}: {} vs {expected}", part / total);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let spec = PriorSpec::uninformative();
        let z = [0.3, -1.2, 2.0, -3.0, -8.0, 0.1];
        let (_, lj) = spec.from_unconstrained(&z);
        let h = 1e-6;
        let numeric: f64 = (0..6)
            .map(|k| {
                let mut up = z;
                let mut dn = z;
                up[k] += h;
                dn[k] -= h;
                let hi = spec.from_unconstrained(&up).0.to_array()[k];
                let lo = spec.from_unconstrained(&dn).0.to_array()[k];
                ((hi - lo) / (2.0 * h)).ln()
            })
            .sum();
        assert!((lj - numeric).abs() < 1e-6, "{lj} vs {numeric}");
    }

    proptest! {
        #[test]
        fn transform_round_trip(u in prop::array::uniform6(0.001f64..0.999)) {
            for spec in [PriorSpec::uninformative(), PriorSpec::informative()] {
                let x = ParamVector::from_array(std::array::from_fn(|k| {
                    let (lo, hi) = spec.priors()[k].support();
                    lo + (hi - lo) * u[k]
                }));
                let z = spec.to_unconstrained(&x);
                let (back, lj) = spec.from_unconstrained(&z);
                prop_assert!(lj.is_finite());
                for (a, b) in x.to_array().iter().zip(back.to_array()) {
                    prop_assert!((a - b).abs() <= 1e-12 * a.abs());
                }
            }
        }
    }
}
