use std::process::Command;

use cerlab::bijection::all_bijections;
use cerlab::model::sample_correlated;
use cerlab::{Graph, ModelParams, RandomSeed};
use cerlab_harness::experiments::run_estimate;
use cerlab_harness::{run, ExperimentConfig, ExperimentKind, HarnessError};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool")
        .install(f)
}

fn sweep_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::ThresholdSweep, 6, 99);
    c.alpha = Some(0.5);
    c.n_grid = Some(vec![120]);
    c.sweep_points = Some(3);
    c.estimator.estimators = Some(vec!["truth".into(), "map".into()]);
    c.estimator.budget = Some(20_000);
    c
}

fn rho_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::RhoCurve, 8, 5);
    c.lambda_grid = Some(vec![1.0, 2.0, 4.0]);
    c.n_grid = Some(vec![150, 300]);
    c
}

fn admissibility_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::Admissibility, 6, 17);
    c.alpha = Some(0.5);
    c.lambda_grid = Some(vec![1.5, 2.0]);
    c.n_grid = Some(vec![200]);
    c
}

#[test]
fn output_is_identical_across_thread_counts() {
    for config in [sweep_config(), rho_config(), admissibility_config()] {
        let one = in_pool(1, || run(&config).expect("run")).body;
        let eight = in_pool(8, || run(&config).expect("run")).body;
        assert!(!one.is_empty());
        assert_eq!(one, eight, "{}", config.experiment.as_str());
    }
}

#[test]
fn config_round_trips_and_rejects_zero_replicates() {
    let c = sweep_config();
    assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    let mut zero = c.clone();
    zero.replicates = 0;
    assert!(matches!(
        ExperimentConfig::from_json(&zero.to_json()),
        Err(HarnessError::Config(_))
    ));
    assert!(matches!(run(&zero), Err(HarnessError::Config(_))));
}

fn is_asymmetric(g: &Graph) -> bool {
    all_bijections(g.n())
        .iter()
        .filter(|pi| g.edges().all(|(u, v)| g.has_edge(pi.apply(u), pi.apply(v))))
        .count()
        == 1
}

#[test]
fn exact_copies_of_asymmetric_graphs_are_fully_recovered() {
    let params = ModelParams::new(8, 0.5, 1.0).unwrap();
    let mut c = ExperimentConfig::new(ExperimentKind::Estimate, 30, 8);
    c.model = Some(params);
    let rows = run_estimate(&c).unwrap();
    let mut checked = 0;
    for row in rows.iter().filter(|r| r.estimator == "map") {
        let sample = sample_correlated(&params, RandomSeed(c.seed).derive(row.replicate as u64)).unwrap();
        if is_asymmetric(&sample.g) {
            assert_eq!(row.overlap_fraction, 1.0, "replicate {}", row.replicate);
            checked += 1;
        }
    }
    assert!(checked >= 10, "only {checked} asymmetric samples");
}

fn cerlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cerlab"))
}

fn write_config(name: &str, config: &ExperimentConfig) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("cerlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, config.to_json()).unwrap();
    path
}

#[test]
fn exit_codes_distinguish_failure_kinds() {
    let ok = cerlab().args(["orbits", "--seed", "3"]).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8(ok.stdout)
        .unwrap()
        .starts_with("replicate,length,kind,special,count\n"));

    // a sweep config handed to another subcommand
    let path = write_config("sweep.json", &sweep_config());
    let mismatch = cerlab().arg("tv").arg("--config").arg(&path).output().unwrap();
    assert_eq!(mismatch.status.code(), Some(3));

    let mut zero = sweep_config();
    zero.replicates = 0;
    let path = write_config("zero.json", &zero);
    let invalid = cerlab()
        .arg("threshold-sweep")
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(invalid.status.code(), Some(3));

    // two draws of a nearly-always-empty orbit: zero spread, mean off the closed form
    let mut m = ExperimentConfig::new(ExperimentKind::MomentsCheck, 2, 1);
    m.k_grid = Some(vec![1]);
    m.p_grid = Some(vec![0.01]);
    m.s_grid = Some(vec![0.5]);
    m.theta_grid = Some(vec![1.0]);
    let path = write_config("moments.json", &m);
    let failed = cerlab()
        .arg("moments-check")
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(failed.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = std::env::temp_dir().join(format!("cerlab-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("tv.csv");
    let to_file = cerlab()
        .args(["tv", "--threads", "2", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(to_file.status.success());
    let to_stdout = cerlab().args(["tv", "--threads", "1"]).output().unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), to_stdout.stdout);
}
