use flucast::config::RunConfig;
use flucast::forecast::{fit_draws, prospective_run, retrospective_fit, FitSetup, Phase};
use flucast::inference::{ChainRng, Param, PriorScenario, PriorSpec, SamplerConfig};
use flucast::series::SurveillanceSeries;
use flucast::synth::{simulate_series, Scenario};
use rand::SeedableRng;

fn quick_sampler(seed: u64) -> SamplerConfig {
    SamplerConfig { n_iter: 4_000, burn_in: 1_000, thin: 5, n_chains: 2, seed, ..Default::default() }
}

fn setup(sc: &Scenario) -> FitSetup {
    FitSetup { spec: PriorSpec::informative(), kernel: sc.kernel.clone(), constants: sc.constants, sampler: quick_sampler(3) }
}

#[test]
fn transforms_round_trip() {
    for scenario in [PriorScenario::Uninformative, PriorScenario::Informative] {
        let spec = PriorSpec::for_scenario(scenario);
        let mut rng = ChainRng::seed_from_u64(17);
        for _ in 0..10_000 {
            let theta = spec.sample(&mut rng);
            let (back, _) = spec.from_unconstrained(&spec.to_unconstrained(&theta));
            for p in Param::ALL {
                let (x, y) = (theta.get(p), back.get(p));
                assert!((x - y).abs() <= 1e-12 * x.abs(), "{p}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn stored_draws_stay_in_support() {
    let sc = Scenario::seasonal();
    let sim = simulate_series(&sc).unwrap();
    for scenario in [PriorScenario::Uninformative, PriorScenario::Informative] {
        let s = FitSetup { spec: PriorSpec::for_scenario(scenario), ..setup(&sc) };
        let draws = fit_draws(sim.series.counts().to_vec(), &sc.calendar, &s).unwrap();
        for theta in draws.param_vectors().unwrap() {
            assert!(s.spec.in_support(&theta), "{theta:?}");
        }
        assert!(draws.chains.iter().all(|c| c.log_posterior.iter().all(|lp| lp.is_finite())));
    }
}

#[test]
fn post_cut_data_never_reach_the_fit() {
    let sc = Scenario::seasonal();
    let sim = simulate_series(&sc).unwrap();
    let cut = 15;
    let mut perturbed = sim.series.counts().to_vec();
    for c in perturbed.iter_mut().skip(cut + 1) {
        *c = Some(c.unwrap() * 7 + 100);
    }
    let other = SurveillanceSeries::new(sc.season_year, perturbed).unwrap().with_calendar(sc.calendar.clone()).unwrap();
    let a = prospective_run(&sim.series, cut, &setup(&sc)).unwrap();
    let b = prospective_run(&other, cut, &setup(&sc)).unwrap();
    assert_eq!(a.draws, b.draws);
    assert_eq!(a.summary, b.summary);
    assert_eq!(a.summary.phase(cut), Phase::Fitted);
    assert_eq!(a.summary.phase(cut + 1), Phase::Forecast);
}

#[test]
fn final_week_cut_is_the_retrospective_fit() {
    let sc = Scenario::seasonal();
    let sim = simulate_series(&sc).unwrap();
    let retro = retrospective_fit(&sim.series, &setup(&sc)).unwrap();
    let last = prospective_run(&sim.series, sim.series.len() - 1, &setup(&sc)).unwrap();
    assert_eq!(retro.draws, last.draws);
    assert_eq!(retro.summary, last.summary);
    assert!((0..retro.summary.len()).all(|w| retro.summary.phase(w) == Phase::Fitted));
}

#[test]
fn cut_before_first_observation_is_rejected() {
    let sc = Scenario::seasonal();
    let mut counts = simulate_series(&sc).unwrap().series.counts().to_vec();
    for c in counts.iter_mut().take(5) {
        *c = None;
    }
    let series = SurveillanceSeries::new(2014, counts).unwrap();
    assert!(prospective_run(&series, 3, &setup(&sc)).is_err());
    assert!(prospective_run(&series, 40, &setup(&sc)).is_err());
}

#[test]
fn config_drives_the_fit_setup() {
    let cfg = RunConfig::parse("scenario = \"uninformative\"\nkernel_mean_days = 6.0\nchains = 2").unwrap();
    let s = FitSetup::from_config(&cfg, 2013).unwrap();
    assert_eq!(s.spec, PriorSpec::uninformative());
    assert_eq!(s.constants.n_pop, 54_091_200.0);
    assert_eq!(s.sampler.n_chains, 2);
    assert_eq!(s.kernel, flucast::observation::default_delay_kernel(6.0, 4.0, 4).unwrap());
}
