use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mimo_mc::config::ExperimentConfig;
use mimo_mc::textio::{read_matrix, CsvTable};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mimo-mc"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sweep_writes_hashed_csv_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = configs().join("coherence-sweep.toml");
    let out = dir.path().join("sweep.csv");
    let cfg = cfg_path.to_str().unwrap();
    let o = run(&["coherence-sweep", "--config", cfg, "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let text = fs::read_to_string(&out).unwrap();
    let table = CsvTable::parse(&text).unwrap();
    let expected = ExperimentConfig::from_toml(&fs::read_to_string(&cfg_path).unwrap()).unwrap();
    assert_eq!(table.config_hash, expected.hash());
    assert_eq!(table.columns, ["M", "mu_measured", "mu0_bound"]);
    assert_eq!(table.rows.len(), expected.sweep.values.len());

    // same config, same bytes
    let again = run(&["coherence-sweep", "--config", cfg]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn overrides_change_seed_and_hash() {
    let cfg = configs().join("eta-sweep.toml");
    let cfg = cfg.to_str().unwrap();
    let a = stdout(&run(&["eta-sweep", "--config", cfg, "--set", "sweep.values=[32,64]"]));
    let b = stdout(&run(&["eta-sweep", "--config", cfg, "--seed", "9", "--set", "sweep.values=[32,64]"]));
    let (ta, tb) = (CsvTable::parse(&a).unwrap(), CsvTable::parse(&b).unwrap());
    assert_eq!(ta.rows.len(), 6);
    assert_eq!((ta.seed, tb.seed), (0, 9));
    assert_ne!(ta.config_hash, tb.config_hash);
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "kind = \"surface\"\nbogus = 1\n[tx]\nkind = \"ula\"\nwavelength = 1.0\n").unwrap();
    let missing = dir.path().join("missing.toml");
    let surface = configs().join("surface.toml");
    let cases: [&[&str]; 4] = [
        &["surface", "--config", bad.to_str().unwrap()],
        &["surface", "--config", missing.to_str().unwrap()],
        // kind does not match the subcommand
        &["bounds", "--config", surface.to_str().unwrap()],
        &["surface", "--config", surface.to_str().unwrap(), "--set", "tx.radius=-1"],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn complete_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("complete.toml");
    let est = dir.path().join("estimate.txt");
    let res = dir.path().join("residuals.csv");
    let o = run(&[
        "complete",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        est.to_str().unwrap(),
        "--residuals",
        res.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let x = read_matrix(&fs::read_to_string(&est).unwrap()).unwrap();
    assert_eq!((x.nrows(), x.ncols()), (16, 16));
    let hist = fs::read_to_string(&res).unwrap();
    assert!(hist.starts_with("iter,residual\n1,"));

    // the estimate is close to the generated truth
    let c = ExperimentConfig::from_toml(&fs::read_to_string(&cfg).unwrap()).unwrap();
    let inst = mimo_mc::harness::make_instance(&c, 0, 180).unwrap();
    let err = mimo_mc::solver::recovery_error(&x, &inst.truth).unwrap();
    assert!(err.rel_frob < 1e-3, "{err}");
}

#[test]
fn complete_reads_observation_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(&fs::read_to_string(configs().join("complete.toml")).unwrap()).unwrap();
    let inst = mimo_mc::harness::make_instance(&cfg, 0, 180).unwrap();
    let input = dir.path().join("obs.txt");
    fs::write(&input, mimo_mc::textio::write_observation(&inst.obs)).unwrap();
    let o = run(&["complete", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let x = read_matrix(&stdout(&o)).unwrap();
    assert!(mimo_mc::solver::recovery_error(&x, &inst.truth).unwrap().rel_frob < 1e-3);

    fs::write(&input, "3 3\ndelta 0\n0 0 1 0\n0 0 2 0\n").unwrap();
    assert_eq!(run(&["complete", "--input", input.to_str().unwrap()]).status.code(), Some(2));
}
