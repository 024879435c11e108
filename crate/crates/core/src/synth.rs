//! Synthetic seasons with known parameters, and parameter-recovery runs.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;

use crate::config::{KernelSpec, RawConfig, RunConfig};
use crate::epi::{integrate, weekly_incidence, HolidayCalendar, Trajectory};
use crate::error::{Error, Result};
use crate::forecast::{fit_draws, FitSetup};
use crate::inference::{
    diagnostics, ChainRng, DiagnosticsReport, ModelConstants, Param, ParamVector, PosteriorDraws, Prior,
    PriorScenario, PriorSpec, SamplerConfig, PSRF_THRESHOLD,
};
use crate::observation::{expected_admissions, negbin_sample, DelayKernel};
use crate::series::{season_length, SurveillanceSeries};
use crate::stats;

/// School holidays of the 2014/15 season, in days from the Monday of week 40.
pub const DEFAULT_HOLIDAYS: [(u32, u32); 3] = [(26, 34), (82, 97), (138, 146)];

/// Hospital-admission probability and delay used in pandemic mode.
pub const PANDEMIC_P_HOSP: f64 = 0.00239;
pub const PANDEMIC_KERNEL_MEAN_DAYS: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    SeasonalIcu,
    PandemicHospital,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::SeasonalIcu => "seasonal-icu",
            Mode::PandemicHospital => "pandemic-hospital",
        }
    }

    pub fn default_kernel(self) -> KernelSpec {
        match self {
            Mode::SeasonalIcu => KernelSpec::default(),
            Mode::PandemicHospital => KernelSpec { mean_days: PANDEMIC_KERNEL_MEAN_DAYS, ..KernelSpec::default() },
        }
    }

    /// Prior on the admission probability. In pandemic mode it is centred
    /// ten times higher than the ICU prior.
    pub fn admission_prior(self) -> Prior {
        let (lower, upper) = Param::PIcu.hard_bounds();
        let centre = match self {
            Mode::SeasonalIcu => 0.000239,
            Mode::PandemicHospital => PANDEMIC_P_HOSP,
        };
        Prior::LogNormal { log_mean: centre.ln(), log_sd: 1.0, lower, upper }
    }

    /// Priors for fitting data of this mode.
    pub fn prior_spec(self, scenario: PriorScenario) -> PriorSpec {
        let mut spec = PriorSpec::for_scenario(scenario);
        if scenario == PriorScenario::Informative {
            spec.set(Param::PIcu, self.admission_prior()).expect("admission prior lies in (0, 1)");
        }
        spec
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "seasonal-icu" => Ok(Mode::SeasonalIcu),
            "pandemic-hospital" => Ok(Mode::PandemicHospital),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Ground truth and settings for one synthetic season.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub mode: Mode,
    pub label: String,
    pub season_year: i32,
    pub weeks: usize,
    /// `p_icu` holds the hospital-admission probability in pandemic mode.
    pub truth: ParamVector,
    pub constants: ModelConstants,
    pub calendar: HolidayCalendar,
    pub kernel: DelayKernel<f64>,
    pub seed: u64,
}

impl Scenario {
    /// A 2014/15-like season with an informative-prior-median `pi` and `p_icu`.
    pub fn seasonal() -> Self {
        Self::for_mode(Mode::SeasonalIcu)
    }

    pub fn pandemic() -> Self {
        Self::for_mode(Mode::PandemicHospital)
    }

    pub fn for_mode(mode: Mode) -> Self {
        let p_icu = match mode {
            Mode::SeasonalIcu => 0.000239,
            Mode::PandemicHospital => PANDEMIC_P_HOSP,
        };
        Self {
            mode,
            label: format!("synthetic {mode}"),
            season_year: 2014,
            weeks: season_length(2014),
            truth: ParamVector { pi: 0.401, i_tot0: 800.0, beta: 0.85, eta: 3.0, p_icu, kappa: 1.2 },
            constants: ModelConstants::default(),
            calendar: HolidayCalendar::new(DEFAULT_HOLIDAYS.to_vec()).expect("sorted disjoint holidays"),
            kernel: mode.default_kernel().build().expect("valid default kernel"),
            seed: 1,
        }
    }

    /// Reads the scenario keys of a config file. The run keys in the same
    /// file are returned as the fit configuration.
    pub fn from_raw(raw: &RawConfig) -> Result<(Self, RunConfig)> {
        let mode = match &raw.mode {
            Some(m) => m.parse()?,
            None => Mode::SeasonalIcu,
        };
        let mut sc = Scenario::for_mode(mode);
        let mut run = RunConfig::from_raw(raw)?;
        if raw.prior_p_icu.is_none() {
            run.priors.set(Param::PIcu, *mode.prior_spec(run.scenario).get(Param::PIcu))?;
        }
        if let Some(y) = raw.season {
            sc.season_year = y;
            sc.weeks = season_length(y);
        }
        sc.weeks = raw.weeks.unwrap_or(sc.weeks);
        if let Some(l) = &raw.label {
            sc.label = l.clone();
        }
        if let Some(h) = &raw.holidays {
            sc.calendar = HolidayCalendar::new(h.clone()).map_err(|e| Error::Config(e.to_string()))?;
        }
        let mut truth = sc.truth.to_array();
        for p in Param::ALL {
            if let Some(v) = raw.true_value(p) {
                truth[p.index()] = v;
            }
        }
        sc.truth = ParamVector::from_array(truth);
        sc.seed = raw.seed.unwrap_or(sc.seed);
        if raw.kernel_mean_days.is_some() || raw.kernel_shape.is_some() || raw.kernel_max_week.is_some() {
            sc.kernel = run.kernel.build()?;
        } else {
            run.kernel = mode.default_kernel();
        }
        sc.constants = ModelConstants {
            n_pop: raw.population.unwrap_or(sc.constants.n_pop),
            sigma: run.sigma,
            gamma: run.gamma,
            step: run.step,
        };
        run.population = Some(sc.constants.n_pop);
        sc.validate()?;
        Ok((sc, run))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, RunConfig)> {
        let path = path.as_ref();
        Self::from_raw(&RawConfig::load(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// True values must lie inside the widest supports, `p_icu` may be 0.
    pub fn validate(&self) -> Result<()> {
        for p in Param::ALL {
            let v = self.truth.get(p);
            let (lo, hi) = p.hard_bounds();
            let ok = (v > lo || (p == Param::PIcu && v == 0.0) || (p == Param::ITot0 && v == 0.0)) && v <= hi;
            if !ok {
                return Err(Error::Config(format!("true {p} = {v} lies outside ({lo}, {hi}]")));
            }
        }
        if self.weeks > season_length(self.season_year) {
            return Err(Error::Config(format!("{} weeks exceed the season", self.weeks)));
        }
        self.calendar.check_within(7 * season_length(self.season_year) as u32)?;
        self.truth.epi(&self.constants).validate()
    }
}

/// Latent quantities behind a simulated series.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentTruth {
    pub trajectory: Trajectory<f64>,
    /// New infections per week.
    pub incidence: Vec<f64>,
    /// Expected admissions per week.
    pub mu: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub series: SurveillanceSeries,
    pub latent: LatentTruth,
}

impl Simulation {
    /// `iso_year,iso_week,s,e1,e2,i1,i2,r,incidence,mu`, compartments at the
    /// end of each week.
    pub fn write_latent_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iso_year", "iso_week", "s", "e1", "e2", "i1", "i2", "r", "incidence", "mu"])?;
        let states = self.latent.trajectory.states();
        for (k, (inc, mu)) in self.latent.incidence.iter().zip(&self.latent.mu).enumerate() {
            let wk = self.series.week(k);
            let st = &states[7 * (k + 1)];
            let mut rec = vec![wk.year.to_string(), wk.week.to_string()];
            rec.extend([st.s, st.e1, st.e2, st.i1, st.i2, st.r, *inc, *mu].iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<latent>", e))?;
        Ok(())
    }
}

/// Deterministic trajectory from the true parameters, then one
/// negative-binomial count per week.
pub fn simulate_series(sc: &Scenario) -> Result<Simulation> {
    sc.validate()?;
    let trajectory = integrate(&sc.truth.epi(&sc.constants), &sc.calendar, (7 * sc.weeks) as u32, sc.constants.step)?;
    let incidence = if sc.weeks == 0 { Vec::new() } else { weekly_incidence(&trajectory)? };
    let mu = expected_admissions(&incidence, &sc.kernel, sc.truth.p_icu);
    let mut rng = ChainRng::seed_from_u64(sc.seed);
    let counts = mu.iter().map(|&m| Some(negbin_sample(m, sc.truth.eta, &mut rng))).collect();
    let series = SurveillanceSeries::new(sc.season_year, counts)?
        .with_label(sc.label.clone())
        .with_calendar(sc.calendar.clone())?;
    Ok(Simulation { series, latent: LatentTruth { trajectory, incidence, mu } })
}

/// Posterior summary of one parameter against its true value.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamRecovery {
    pub param: Param,
    pub truth: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub in_cri: bool,
    /// Posterior sd over prior sd.
    pub contraction: f64,
    /// Kolmogorov-Smirnov distance of the pooled draws from the prior.
    pub ks_to_prior: f64,
    pub psrf: f64,
}

#[derive(Clone, Debug)]
pub struct RecoveryReport {
    pub params: Vec<ParamRecovery>,
    /// False when an identified parameter has PSRF above the threshold.
    pub valid: bool,
    pub draws: PosteriorDraws,
    pub diagnostics: DiagnosticsReport,
    pub simulation: Simulation,
}

impl RecoveryReport {
    pub fn get(&self, p: Param) -> &ParamRecovery {
        &self.params[p.index()]
    }
}

/// Simulates `sc`, fits it under `spec` and compares the posterior with the
/// truth. `identified` lists the parameters whose mixing decides validity.
pub fn recovery_experiment(
    sc: &Scenario,
    spec: &PriorSpec,
    sampler: &SamplerConfig,
    identified: &[Param],
) -> Result<RecoveryReport> {
    let simulation = simulate_series(sc)?;
    let setup = FitSetup { spec: spec.clone(), kernel: sc.kernel.clone(), constants: sc.constants, sampler: sampler.clone() };
    let draws = fit_draws(simulation.series.counts().to_vec(), &sc.calendar, &setup)?;
    let diagnostics = diagnostics(&draws)?;
    let params: Vec<ParamRecovery> = Param::ALL
        .iter()
        .map(|&p| {
            let mut xs = draws.column(p.index());
            xs.sort_by(f64::total_cmp);
            let prior = spec.get(p);
            let truth = sc.truth.get(p);
            let lower = stats::quantile_sorted(&xs, 0.025);
            let upper = stats::quantile_sorted(&xs, 0.975);
            ParamRecovery {
                param: p,
                truth,
                median: stats::quantile_sorted(&xs, 0.5),
                lower,
                upper,
                in_cri: lower <= truth && truth <= upper,
                contraction: stats::sd(&xs) / prior.sd(),
                ks_to_prior: stats::ks_distance(&xs, |x| prior.cdf(x)),
                psrf: diagnostics.params[p.index()].psrf,
            }
        })
        .collect();
    let valid = identified.iter().all(|p| params[p.index()].psrf <= PSRF_THRESHOLD);
    Ok(RecoveryReport { params, valid, draws, diagnostics, simulation })
}
