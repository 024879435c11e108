//! Run and scenario configuration files.
//!
//! Both are flat TOML tables. A run file only uses the keys below the
//! `scenario` marker; scenario files may add `mode`, `season`, `weeks`,
//! `label`, `holidays`, `seed` and `true_*` values.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::inference::{
    default_blocks, ModelConstants, Param, Prior, PriorScenario, PriorSpec, SamplerConfig, POPULATION_2012_13,
    POPULATION_2013_14, POPULATION_2014_15,
};
use crate::observation::{
    default_delay_kernel, DelayKernel, DEFAULT_KERNEL_MAX_WEEK, DEFAULT_KERNEL_MEAN_DAYS, DEFAULT_KERNEL_SHAPE,
};

/// Every key accepted in either kind of file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Option<String>,
    pub prior_pi: Option<String>,
    pub prior_i_tot0: Option<String>,
    pub prior_beta: Option<String>,
    pub prior_eta: Option<String>,
    pub prior_p_icu: Option<String>,
    pub prior_kappa: Option<String>,
    pub chains: Option<usize>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub seed: Option<u64>,
    /// Blocks separated by `;`, parameters by `,`.
    pub blocks: Option<String>,
    pub population: Option<f64>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    pub step: Option<f64>,
    pub kernel_mean_days: Option<f64>,
    pub kernel_shape: Option<f64>,
    pub kernel_max_week: Option<usize>,

    pub mode: Option<String>,
    pub season: Option<i32>,
    pub weeks: Option<usize>,
    pub label: Option<String>,
    pub holidays: Option<Vec<(u32, u32)>>,
    pub true_pi: Option<f64>,
    pub true_i_tot0: Option<f64>,
    pub true_beta: Option<f64>,
    pub true_eta: Option<f64>,
    pub true_p_icu: Option<f64>,
    pub true_kappa: Option<f64>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn scenario_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut check = |set: bool, k| {
            if set {
                keys.push(k)
            }
        };
        check(self.mode.is_some(), "mode");
        check(self.season.is_some(), "season");
        check(self.weeks.is_some(), "weeks");
        check(self.label.is_some(), "label");
        check(self.holidays.is_some(), "holidays");
        check(self.true_pi.is_some(), "true_pi");
        check(self.true_i_tot0.is_some(), "true_i_tot0");
        check(self.true_beta.is_some(), "true_beta");
        check(self.true_eta.is_some(), "true_eta");
        check(self.true_p_icu.is_some(), "true_p_icu");
        check(self.true_kappa.is_some(), "true_kappa");
        keys
    }

    pub fn true_value(&self, p: Param) -> Option<f64> {
        match p {
            Param::Pi => self.true_pi,
            Param::ITot0 => self.true_i_tot0,
            Param::Beta => self.true_beta,
            Param::Eta => self.true_eta,
            Param::PIcu => self.true_p_icu,
            Param::Kappa => self.true_kappa,
        }
    }

    fn prior_override(&self, p: Param) -> Option<&str> {
        match p {
            Param::Pi => self.prior_pi.as_deref(),
            Param::ITot0 => self.prior_i_tot0.as_deref(),
            Param::Beta => self.prior_beta.as_deref(),
            Param::Eta => self.prior_eta.as_deref(),
            Param::PIcu => self.prior_p_icu.as_deref(),
            Param::Kappa => self.prior_kappa.as_deref(),
        }
    }
}

/// Gamma infection-to-admission delay, binned by week.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub mean_days: f64,
    pub shape: f64,
    pub max_week: usize,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { mean_days: DEFAULT_KERNEL_MEAN_DAYS, shape: DEFAULT_KERNEL_SHAPE, max_week: DEFAULT_KERNEL_MAX_WEEK }
    }
}

impl KernelSpec {
    pub fn build(&self) -> Result<DelayKernel<f64>> {
        default_delay_kernel(self.mean_days, self.shape, self.max_week)
    }
}

/// Population for the seasons with published figures.
pub fn season_population(season_year: i32) -> Option<f64> {
    match season_year {
        2012 => Some(POPULATION_2012_13),
        2013 => Some(POPULATION_2013_14),
        2014 => Some(POPULATION_2014_15),
        _ => None,
    }
}

/// Parses `pi,i_tot0,beta,kappa;p_icu,eta` into index blocks.
pub fn parse_blocks(text: &str) -> Result<Vec<Vec<usize>>> {
    text.split(';')
        .map(|b| b.split(',').map(|p| p.parse::<Param>().map(Param::index)).collect())
        .collect()
}

fn format_blocks(blocks: &[Vec<usize>]) -> String {
    blocks
        .iter()
        .map(|b| b.iter().map(|&k| Param::ALL[k].name()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

/// Fully resolved settings for a fit.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: PriorScenario,
    pub priors: PriorSpec,
    pub sampler: SamplerConfig,
    /// `None` means "use the published population of the data's season".
    pub population: Option<f64>,
    pub sigma: f64,
    pub gamma: f64,
    pub step: f64,
    pub kernel: KernelSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = ModelConstants::default();
        Self {
            scenario: PriorScenario::Informative,
            priors: PriorSpec::informative(),
            sampler: SamplerConfig::default(),
            population: None,
            sigma: c.sigma,
            gamma: c.gamma,
            step: c.step,
            kernel: KernelSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        let extra = raw.scenario_keys();
        if !extra.is_empty() {
            return Err(Error::Config(format!("keys only valid in scenario files: {}", extra.join(", "))));
        }
        Self::from_raw(&raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Applies the run keys of `raw` on top of the defaults.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(s) = &raw.scenario {
            cfg.scenario = s.parse()?;
            cfg.priors = PriorSpec::for_scenario(cfg.scenario);
        }
        for p in Param::ALL {
            if let Some(text) = raw.prior_override(p) {
                cfg.priors.set(p, Prior::parse_for(p, text)?)?;
            }
        }
        let s = &mut cfg.sampler;
        s.n_chains = raw.chains.unwrap_or(s.n_chains);
        s.n_iter = raw.iterations.unwrap_or(s.n_iter);
        s.burn_in = raw.burn_in.unwrap_or(s.burn_in);
        s.thin = raw.thin.unwrap_or(s.thin);
        s.seed = raw.seed.unwrap_or(s.seed);
        s.blocks = match &raw.blocks {
            Some(b) => parse_blocks(b)?,
            None => default_blocks(),
        };
        s.validate(Param::ALL.len())?;
        cfg.population = raw.population;
        cfg.sigma = raw.sigma.unwrap_or(cfg.sigma);
        cfg.gamma = raw.gamma.unwrap_or(cfg.gamma);
        cfg.step = raw.step.unwrap_or(cfg.step);
        let k = &mut cfg.kernel;
        k.mean_days = raw.kernel_mean_days.unwrap_or(k.mean_days);
        k.shape = raw.kernel_shape.unwrap_or(k.shape);
        k.max_week = raw.kernel_max_week.unwrap_or(k.max_week);
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("sigma", self.sigma)?;
        positive("gamma", self.gamma)?;
        positive("step", self.step)?;
        crate::epi::steps_per_day(self.step).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(n) = self.population {
            positive("population", n)?;
        }
        self.kernel.build().map_err(|e| Error::Config(format!("kernel: {e}")))?;
        Ok(())
    }

    /// Model constants for a season, falling back to its published population.
    pub fn constants(&self, season_year: i32) -> Result<ModelConstants> {
        let n_pop = self.population.or_else(|| season_population(season_year)).ok_or_else(|| {
            Error::Config(format!("no published population for season {season_year}; set `population`"))
        })?;
        Ok(ModelConstants { sigma: self.sigma, gamma: self.gamma, n_pop, step: self.step })
    }

    /// Every setting written out explicitly, one `key = value` per line in a
    /// fixed order. Parsing the result yields an equal config.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let s = &self.sampler;
        let _ = writeln!(out, "scenario = \"{}\"", self.scenario);
        for p in Param::ALL {
            let _ = writeln!(out, "prior_{} = \"{}\"", p.name(), self.priors.get(p));
        }
        let _ = writeln!(out, "chains = {}", s.n_chains);
        let _ = writeln!(out, "iterations = {}", s.n_iter);
        let _ = writeln!(out, "burn_in = {}", s.burn_in);
        let _ = writeln!(out, "thin = {}", s.thin);
        let _ = writeln!(out, "seed = {}", s.seed);
        let _ = writeln!(out, "blocks = \"{}\"", format_blocks(&s.blocks));
        if let Some(n) = self.population {
            let _ = writeln!(out, "population = {}", toml_float(n));
        }
        let _ = writeln!(out, "sigma = {}", toml_float(self.sigma));
        let _ = writeln!(out, "gamma = {}", toml_float(self.gamma));
        let _ = writeln!(out, "step = {}", toml_float(self.step));
        let _ = writeln!(out, "kernel_mean_days = {}", toml_float(self.kernel.mean_days));
        let _ = writeln!(out, "kernel_shape = {}", toml_float(self.kernel.shape));
        let _ = writeln!(out, "kernel_max_week = {}", self.kernel.max_week);
        out
    }
}

/// Shortest round-trip decimal that TOML reads as a float.
pub(crate) fn toml_float(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E', 'n', 'i']) {
        s
    } else {
        format!("{s}.0")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::parse(
            r#"
            scenario = "uninformative"
            prior_kappa = "uniform(0.5, 1.5)"
            chains = 2
            iterations = 5000
            burn_in = 1000
            seed = 99
            blocks = "pi,i_tot0;beta,kappa;p_icu,eta"
            population = 1e6
            kernel_mean_days = 5.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.scenario, PriorScenario::Uninformative);
        assert_eq!(*cfg.priors.get(Param::Kappa), Prior::Uniform { lower: 0.5, upper: 1.5 });
        assert_eq!(cfg.sampler.n_chains, 2);
        assert_eq!(cfg.sampler.seed, 99);
        assert_eq!(cfg.sampler.blocks, vec![vec![0, 1], vec![2, 5], vec![4, 3]]);
        assert_eq!(cfg.constants(1999).unwrap().n_pop, 1e6);
        assert_eq!(cfg.kernel.mean_days, 5.0);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "bogus = 1",
            "scenario = \"flat\"",
            "prior_beta = \"uniform(0, 2)\"",
            "blocks = \"pi,beta\"",
            "burn_in = 200000",
            "true_beta = 0.5",
            "step = 0.3",
            "chains = \"four\"",
        ] {
            let r = RunConfig::parse(text);
            assert!(matches!(r, Err(Error::Config(_))), "{text}: {r:?}");
        }
    }

    #[test]
    fn canonical_round_trips() {
        let cfg = RunConfig::parse("scenario = \"uninformative\"\nprior_eta = \"lognormal(1, 0.5)\"\npopulation = 5e7\nseed = 3").unwrap();
        let text = cfg.canonical();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        assert_eq!(RunConfig::parse(&text).unwrap().canonical(), text);
        assert_eq!(RunConfig::default().canonical(), RunConfig::parse(&RunConfig::default().canonical()).unwrap().canonical());
    }

    #[test]
    fn population_falls_back_to_season() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.constants(2012).unwrap().n_pop, POPULATION_2012_13);
        assert!(cfg.constants(2020).is_err());
    }
}
