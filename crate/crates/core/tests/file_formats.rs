use std::fs;

use flucast::epi::HolidayCalendar;
use flucast::inference::PosteriorDraws;
use flucast::observation::DelayKernel;
use flucast::series::load_series;
use flucast::synth::{simulate_series, Scenario};
use flucast::Error;

#[test]
fn synthetic_season_survives_a_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate_series(&Scenario::seasonal()).unwrap();
    let path = dir.path().join("season.csv");
    sim.series.write_csv(fs::File::create(&path).unwrap()).unwrap();
    let back = load_series(&path).unwrap();
    assert_eq!(back.counts(), sim.series.counts());
    assert_eq!(back.len(), 33);

    let cal_path = dir.path().join("holidays.txt");
    fs::write(&cal_path, sim.series.calendar().to_text()).unwrap();
    assert_eq!(&HolidayCalendar::load(&cal_path).unwrap(), sim.series.calendar());
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(load_series("/nonexistent/season.csv"), Err(Error::Io { .. })));
}

#[test]
fn bad_rows_report_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "iso_year,iso_week,count\n2014,40,1\n2014,41,2\n2014,42,-4\n").unwrap();
    let err = load_series(&path).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
    assert!(err.to_string().contains("bad.csv:4"), "{err}");
}

#[test]
fn kernel_file_must_be_normalised() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("k.txt");
    fs::write(&good, "0.25\n0.5\n0.25\n").unwrap();
    assert_eq!(DelayKernel::<f64>::load(&good).unwrap().probs(), &[0.25, 0.5, 0.25]);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0.25\n0.5\n").unwrap();
    assert!(DelayKernel::<f64>::load(&bad).is_err());
}

#[test]
fn truncated_draws_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.csv");
    fs::write(&path, "chain,iteration,pi,log_posterior\n0,1,0.5,-3\n0,2,oops,-3\n").unwrap();
    assert!(matches!(PosteriorDraws::load(&path), Err(Error::Parse { line: 3, .. })));
}

#[test]
fn shipped_configs_parse() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    for name in ["informative.toml", "uninformative.toml", "quick.toml"] {
        flucast::config::RunConfig::load(root.join("configs").join(name)).unwrap();
    }
    Scenario::load(root.join("configs/pandemic-scenario.toml")).unwrap();
    let cal = HolidayCalendar::load(root.join("data/holidays-2014-15.txt")).unwrap();
    assert_eq!(cal.intervals(), &flucast::synth::DEFAULT_HOLIDAYS);
}
