mod exit;
mod manifest;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flucast::config::RunConfig;
use flucast::epi::HolidayCalendar;
use flucast::forecast::{prospective_run, retrospective_fit, score_forecast, FitSetup, ForecastRun};
use flucast::inference::{derived_quantities, diagnostics, DiagnosticsReport, PosteriorDraws};
use flucast::observation::DelayKernel;
use flucast::series::{IsoWeek, SurveillanceSeries};
use flucast::stats::quantile;
use flucast::synth::{simulate_series, Mode, Scenario};

use exit::{input_error, run_error, CliError, CliResult};
use manifest::Manifest;

/// Directory searched for `--config` names and the default `flucast.toml`.
const CONFIG_DIR_ENV: &str = "FLUCAST_CONFIG_DIR";
const DEFAULT_CONFIG_NAME: &str = "flucast.toml";

#[derive(Parser)]
#[command(name = "flucast", version, about = "Fit and forecast weekly severe influenza admissions")]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a full season and write draws, diagnostics and predictive bands.
    Fit(FitArgs),
    /// Fit weeks up to a cut week and forecast the rest of the season.
    Forecast {
        #[command(flatten)]
        fit: FitArgs,
        /// Last ISO week used for fitting, e.g. 2015-W08.
        #[arg(long)]
        cut_week: IsoWeek,
    },
    /// Generate a synthetic season with known parameters.
    Simulate {
        /// Scenario file (flat TOML).
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// `seasonal-icu` or `pandemic-hospital`; ignored when a scenario file sets `mode`.
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Recompute PSRF and ESS from a draws file.
    Diagnose {
        #[arg(long)]
        draws: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FitArgs {
    /// Weekly counts, `iso_year,iso_week,count`.
    #[arg(long)]
    data: PathBuf,
    /// School holidays, one `start_day,end_day` per line.
    #[arg(long)]
    calendar: Option<PathBuf>,
    /// Run configuration (flat TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Delay kernel file, one weekly probability per line.
    #[arg(long)]
    kernel: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(cli.command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flucast: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command, args: Vec<String>) -> CliResult<()> {
    match command {
        Command::Fit(fit) => fit_command("fit", &fit, None, args),
        Command::Forecast { fit, cut_week } => fit_command("forecast", &fit, Some(cut_week), args),
        Command::Simulate { scenario, mode, seed, out } => simulate_command(scenario, mode, seed, &out, args),
        Command::Diagnose { draws, out } => diagnose_command(&draws, out.as_deref()),
    }
}

fn config_dir() -> Option<PathBuf> {
    std::env::var_os(CONFIG_DIR_ENV).map(PathBuf::from)
}

/// An explicit path, else that name inside the config directory, else the
/// directory's default file if present.
fn resolve_config(arg: Option<&Path>) -> CliResult<Option<PathBuf>> {
    match arg {
        Some(p) if p.exists() => Ok(Some(p.to_path_buf())),
        Some(p) => match config_dir().map(|d| d.join(p)).filter(|c| c.exists()) {
            Some(c) => Ok(Some(c)),
            None => Err(CliError::usage(format!("config file {} not found", p.display()))),
        },
        None => Ok(config_dir().map(|d| d.join(DEFAULT_CONFIG_NAME)).filter(|c| c.exists())),
    }
}

fn create_out_dir(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|e| CliError::usage(format!("cannot create {}: {e}", out.display())))
}

fn writer(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn fit_command(name: &str, a: &FitArgs, cut_week: Option<IsoWeek>, args: Vec<String>) -> CliResult<()> {
    let config_path = resolve_config(a.config.as_deref())?;
    let mut cfg = match &config_path {
        Some(p) => RunConfig::load(p).map_err(input_error)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.sampler.seed = seed;
    }
    let mut manifest = Manifest::new(name, args, cfg.sampler.seed, cfg.canonical());

    let mut series = SurveillanceSeries::load(&a.data).map_err(input_error)?;
    manifest.input("data", &a.data)?;
    if let Some(path) = &a.calendar {
        let cal = HolidayCalendar::load(path).map_err(input_error)?;
        series = series.with_calendar(cal).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        manifest.input("calendar", path)?;
    }
    if let Some(p) = &config_path {
        manifest.input("config", p)?;
    }
    let mut setup = FitSetup::from_config(&cfg, series.season_year()).map_err(input_error)?;
    if let Some(path) = &a.kernel {
        setup.kernel = DelayKernel::load(path).map_err(input_error)?;
        manifest.input("kernel", path)?;
    }

    let run = match cut_week {
        None => retrospective_fit(&series, &setup).map_err(run_error)?,
        Some(week) => {
            let cut = series.index_of(&week).ok_or_else(|| {
                CliError::usage(format!("cut week {week} lies outside the season starting {}", series.start()))
            })?;
            prospective_run(&series, cut, &setup).map_err(run_error)?
        }
    };
    log::info!("fitted weeks up to {}", series.week(run.cut));

    create_out_dir(&a.out)?;
    write_fit_outputs(&a.out, &run, &series, &setup, &mut manifest)?;
    manifest.save(&a.out.join("manifest.json"))?;

    report_diagnostics(&run.diagnostics);
    if run.diagnostics.any_flagged() {
        return Err(CliError::convergence(format!(
            "PSRF above threshold for {}",
            run.diagnostics.flagged().join(", ")
        )));
    }
    Ok(())
}

fn write_fit_outputs(
    out: &Path,
    run: &ForecastRun,
    series: &SurveillanceSeries,
    setup: &FitSetup,
    manifest: &mut Manifest,
) -> CliResult<()> {
    let save = |file: &str, f: &dyn Fn(BufWriter<File>) -> flucast::Result<()>| -> CliResult<PathBuf> {
        let path = out.join(file);
        f(writer(&path)?).map_err(run_error)?;
        Ok(path)
    };
    let p = save("draws.csv", &|w| run.draws.write_csv(w))?;
    manifest.output("draws", &p)?;
    let p = save("diagnostics.csv", &|w| run.diagnostics.write_csv(w))?;
    manifest.output("diagnostics", &p)?;
    let p = save("predictive.csv", &|w| run.summary.write_csv(w))?;
    manifest.output("predictive", &p)?;
    let p = save("summary.csv", &|w| write_summary(w, &run.draws, setup))?;
    manifest.output("summary", &p)?;
    if series.counts().iter().skip(run.cut + 1).any(Option::is_some) {
        if let Ok(score) = score_forecast(&run.summary, series.counts()) {
            let p = save("score.csv", &|w| {
                let mut w = csv::Writer::from_writer(w);
                w.write_record(["weeks", "coverage95", "coverage50", "mae"])?;
                w.write_record([
                    score.weeks.to_string(),
                    score.coverage95.to_string(),
                    score.coverage50.to_string(),
                    score.mae.to_string(),
                ])?;
                w.flush().map_err(|e| flucast::Error::Io { path: "score.csv".into(), source: e })
            })?;
            manifest.output("score", &p)?;
        }
    }
    Ok(())
}

/// Posterior quantiles of the parameters and reproduction numbers.
fn write_summary(out: BufWriter<File>, draws: &PosteriorDraws, setup: &FitSetup) -> flucast::Result<()> {
    let derived = derived_quantities(draws, &setup.constants)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantity", "q2.5", "q50", "q97.5"])?;
    let mut row = |name: &str, xs: &[f64]| {
        w.write_record([name.to_string(), quantile(xs, 0.025).to_string(), quantile(xs, 0.5).to_string(), quantile(xs, 0.975).to_string()])
    };
    for (k, name) in draws.names.iter().enumerate() {
        row(name, &draws.column(k))?;
    }
    row("r0", &derived.r0)?;
    row("rn", &derived.rn)?;
    let p = derived.prob_kappa_above_one.to_string();
    w.write_record(["pr_kappa_gt_1", p.as_str(), p.as_str(), p.as_str()])?;
    w.flush().map_err(|e| flucast::Error::Io { path: "summary.csv".into(), source: e })
}

fn report_diagnostics(report: &DiagnosticsReport) {
    println!("{:<10} {:>8} {:>10}", "parameter", "psrf", "ess");
    for p in &report.params {
        println!("{:<10} {:>8.4} {:>10.1}{}", p.name, p.psrf, p.ess, if p.flagged { "  FLAGGED" } else { "" });
    }
}

fn simulate_command(
    scenario: Option<PathBuf>,
    mode: Option<Mode>,
    seed: Option<u64>,
    out: &Path,
    args: Vec<String>,
) -> CliResult<()> {
    let (mut sc, run_cfg) = match &scenario {
        Some(path) => Scenario::load(path).map_err(input_error)?,
        None => {
            let raw = flucast::config::RawConfig {
                mode: mode.map(|m| m.name().to_string()),
                ..Default::default()
            };
            Scenario::from_raw(&raw).map_err(input_error)?
        }
    };
    if let Some(seed) = seed {
        sc.seed = seed;
    }
    let sim = simulate_series(&sc).map_err(run_error)?;
    let mut manifest = Manifest::new("simulate", args, sc.seed, run_cfg.canonical());
    if let Some(path) = &scenario {
        manifest.input("scenario", path)?;
    }
    create_out_dir(out)?;
    let series_path = out.join("series.csv");
    sim.series.write_csv(writer(&series_path)?).map_err(run_error)?;
    manifest.output("series", &series_path)?;
    let latent_path = out.join("latent.csv");
    sim.write_latent_csv(writer(&latent_path)?).map_err(run_error)?;
    manifest.output("latent", &latent_path)?;
    let cal_path = out.join("holidays.txt");
    fs::write(&cal_path, sc.calendar.to_text()).map_err(|e| CliError::runtime(e.to_string()))?;
    manifest.output("calendar", &cal_path)?;
    let cfg_path = out.join("fit.toml");
    fs::write(&cfg_path, run_cfg.canonical()).map_err(|e| CliError::runtime(e.to_string()))?;
    manifest.output("config", &cfg_path)?;
    manifest.save(&out.join("manifest.json"))?;
    println!("{} weeks of {} written to {}", sim.series.len(), sc.label, out.display());
    Ok(())
}

fn diagnose_command(draws: &Path, out: Option<&Path>) -> CliResult<()> {
    let draws = PosteriorDraws::load(draws).map_err(input_error)?;
    let report = diagnostics(&draws).map_err(|e| CliError::data(e.to_string()))?;
    match out {
        Some(path) => report.write_csv(writer(path)?).map_err(run_error)?,
        None => report.write_csv(std::io::stdout().lock()).map_err(run_error)?,
    }
    if out.is_some() {
        report_diagnostics(&report);
    }
    if report.any_flagged() {
        return Err(CliError::convergence(format!("PSRF above threshold for {}", report.flagged().join(", "))));
    }
    Ok(())
}
