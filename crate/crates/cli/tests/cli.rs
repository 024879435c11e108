use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const QUICK: &str = "iterations = 4000\nburn_in = 1000\nthin = 5\nchains = 2\n";

fn flucast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flucast"))
        .args(args)
        .current_dir(dir)
        .env_remove("FLUCAST_CONFIG_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// A synthetic season plus a short-run config inside `dir`.
fn workspace(dir: &Path) {
    let o = flucast(dir, &["simulate", "--seed", "3", "--out", "sim"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    fs::write(dir.join("quick.toml"), QUICK).unwrap();
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

const FIT: &[&str] =
    &["fit", "--data", "sim/series.csv", "--calendar", "sim/holidays.txt", "--config", "quick.toml", "--seed", "7", "--out", "out"];

#[test]
fn repeated_runs_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        workspace(d);
        let o = flucast(d, FIT);
        assert!(matches!(code(&o), 0 | 4), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(read_dir_bytes(&a.path().join("sim")), read_dir_bytes(&b.path().join("sim")));
    let fa = read_dir_bytes(&a.path().join("out"));
    let names: Vec<&str> = fa.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["diagnostics.csv", "draws.csv", "manifest.json", "predictive.csv", "summary.csv"]);
    assert_eq!(fa, read_dir_bytes(&b.path().join("out")));
}

#[test]
fn seed_changes_the_draws() {
    let d = tempfile::tempdir().unwrap();
    workspace(d.path());
    flucast(d.path(), FIT);
    let first = fs::read(d.path().join("out/draws.csv")).unwrap();
    let mut args = FIT.to_vec();
    args[8] = "8";
    flucast(d.path(), &args);
    assert_ne!(first, fs::read(d.path().join("out/draws.csv")).unwrap());
}

#[test]
fn manifest_records_inputs_and_seed() {
    let d = tempfile::tempdir().unwrap();
    workspace(d.path());
    flucast(d.path(), FIT);
    let m: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 7);
    assert_eq!(m["command"], "fit");
    let roles: Vec<&str> = m["inputs"].as_array().unwrap().iter().map(|i| i["role"].as_str().unwrap()).collect();
    assert_eq!(roles, ["data", "calendar", "config"]);
    assert!(m["config"].as_str().unwrap().contains("seed = 7\n"));
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn forecast_phase_flips_after_the_cut() {
    let d = tempfile::tempdir().unwrap();
    workspace(d.path());
    let mut args = FIT.to_vec();
    args[0] = "forecast";
    args.extend(["--cut-week", "2015-W08"]);
    let o = flucast(d.path(), &args);
    assert!(matches!(code(&o), 0 | 4), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(d.path().join("out/predictive.csv")).unwrap();
    let phase = |week: &str| text.lines().find(|l| l.starts_with(week)).unwrap().rsplit(',').next().unwrap().to_string();
    assert_eq!(phase("2014-W40"), "fitted");
    assert_eq!(phase("2015-W08"), "fitted");
    assert_eq!(phase("2015-W09"), "forecast");
    assert_eq!(phase("2015-W20"), "forecast");
    assert!(d.path().join("out/score.csv").exists());
}

#[test]
fn diagnose_agrees_with_the_fit() {
    let d = tempfile::tempdir().unwrap();
    workspace(d.path());
    let fit = flucast(d.path(), FIT);
    let o = flucast(d.path(), &["diagnose", "--draws", "out/draws.csv", "--out", "again.csv"]);
    assert_eq!(code(&o), code(&fit));
    assert_eq!(fs::read(d.path().join("again.csv")).unwrap(), fs::read(d.path().join("out/diagnostics.csv")).unwrap());
}

#[test]
fn diagnose_flags_non_mixing_chains() {
    let d = tempfile::tempdir().unwrap();
    let mut text = String::from("chain,iteration,pi,beta,log_posterior\n");
    for chain in 0..2 {
        for it in 0..200 {
            let wobble = (it % 7) as f64 * 1e-3;
            text.push_str(&format!("{chain},{it},{},{},-1\n", 0.3 + 0.4 * chain as f64 + wobble, 0.5 + wobble));
        }
    }
    fs::write(d.path().join("stuck.csv"), text).unwrap();
    let o = flucast(d.path(), &["diagnose", "--draws", "stuck.csv"]);
    assert_eq!(code(&o), 4);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().any(|l| l.starts_with("pi,") && l.ends_with(",true")), "{out}");
    assert!(out.lines().any(|l| l.starts_with("beta,") && l.ends_with(",false")), "{out}");
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    workspace(d.path());
    assert_eq!(code(&flucast(d.path(), &["fit", "--bogus"])), 2);
    assert_eq!(code(&flucast(d.path(), &["fit", "--data", "nope.csv"])), 2);
    fs::write(d.path().join("bad.toml"), "iterations = \"many\"\n").unwrap();
    assert_eq!(code(&flucast(d.path(), &["fit", "--data", "sim/series.csv", "--config", "bad.toml"])), 2);
    fs::write(d.path().join("neg.csv"), "iso_year,iso_week,count\n2014,40,3\n2014,41,-1\n").unwrap();
    let o = flucast(d.path(), &["fit", "--data", "neg.csv"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("neg.csv:3"));
    let o = flucast(d.path(), &["forecast", "--data", "sim/series.csv", "--config", "quick.toml", "--cut-week", "2016-W08"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&flucast(d.path(), &["diagnose", "--draws", "sim/series.csv"])), 3);
}

#[test]
fn config_directory_from_environment() {
    let d = tempfile::tempdir().unwrap();
    workspace(d.path());
    let cfg_dir = d.path().join("configs");
    fs::create_dir(&cfg_dir).unwrap();
    fs::write(cfg_dir.join("flucast.toml"), format!("{QUICK}seed = 11\n")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_flucast"))
        .args(["fit", "--data", "sim/series.csv", "--out", "out"])
        .current_dir(d.path())
        .env("FLUCAST_CONFIG_DIR", &cfg_dir)
        .output()
        .unwrap();
    assert!(matches!(code(&o), 0 | 4), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 11);
}

#[test]
fn pandemic_simulation_writes_its_fit_config() {
    let d = tempfile::tempdir().unwrap();
    let o = flucast(d.path(), &["simulate", "--mode", "pandemic-hospital", "--out", "p"]);
    assert_eq!(code(&o), 0);
    let cfg = fs::read_to_string(d.path().join("p/fit.toml")).unwrap();
    assert!(cfg.contains("kernel_mean_days = 5.0"), "{cfg}");
    assert!(cfg.contains(&format!("prior_p_icu = \"lognormal({}, 1)\"", 0.00239f64.ln())), "{cfg}");
    assert_eq!(code(&flucast(d.path(), &["simulate", "--mode", "endemic"])), 2);
}
