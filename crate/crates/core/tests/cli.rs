use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mmwave::channel::load_pool;
use mmwave::cli::{SAP_LOG_FILE, SLOT_TRACE_FILE, SUMMARY_FILE};

const LOS_WALK: &str = include_str!("../scenarios/los_walk.toml");

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mmwave-sim"))
}

fn exec(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

/// The bundled walk cut down to a fixed duration.
fn short_scenario(dir: &Path, duration: f64) -> PathBuf {
    let src = LOS_WALK.replace("max_distance = 200.0\n", &format!("duration = {duration}\n"));
    let p = dir.join("short.toml");
    std::fs::write(&p, src).unwrap();
    p
}

#[test]
fn validate_accepts_bundled_scenario() {
    let scen = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/los_walk.toml");
    let out = exec(bin().arg("validate").arg(scen));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

#[test]
fn validate_reports_key_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("bad.toml");
    std::fs::write(&p, LOS_WALK.replace("TDDControlDataPattern = \"ccdddddd\"", "TDDControlDataPattern = \"ccxddddd\"")).unwrap();
    let out = exec(bin().arg("validate").arg(&p));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    let line = LOS_WALK.lines().position(|l| l.starts_with("TDDControlDataPattern")).unwrap() + 1;
    assert!(err.contains("TDDControlDataPattern"), "{err}");
    assert!(err.contains(&format!("line {line}")), "{err}");
}

#[test]
fn missing_file_and_bad_override_exit_2() {
    let out = exec(bin().args(["run", "/nonexistent/scenario.toml"]));
    assert_eq!(out.status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let p = short_scenario(tmp.path(), 0.01);
    let out = exec(bin().arg("run").arg(&p).args(["--set", "radio.noise_figure_db=-3"]));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise_figure_db"));
}

#[test]
fn run_writes_outputs_and_seed_matters() {
    let tmp = tempfile::tempdir().unwrap();
    let p = short_scenario(tmp.path(), 0.05);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        let out = exec(bin().arg("run").arg(&p).arg("--out").arg(dir).args(["--seed", seed]));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("mean SINR"));
        for f in [SLOT_TRACE_FILE, SAP_LOG_FILE, SUMMARY_FILE] {
            assert!(dir.join(f).is_file(), "{f}");
        }
    }
    let ta = std::fs::read(a.join(SLOT_TRACE_FILE)).unwrap();
    let tb = std::fs::read(b.join(SLOT_TRACE_FILE)).unwrap();
    assert_ne!(ta, tb);
    let summary: toml::Table = std::fs::read_to_string(a.join(SUMMARY_FILE)).unwrap().parse().unwrap();
    let s = summary["summary"].as_table().unwrap();
    assert_eq!(s["seed"].as_integer(), Some(1));
    assert_eq!(s["miesm_sha256"].as_str().unwrap().len(), 64);
    assert!(summary["scenario"]["run"].is_table());
}

#[test]
fn replications_use_consecutive_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let p = short_scenario(tmp.path(), 0.02);
    let out_dir = tmp.path().join("reps");
    let out = exec(bin().arg("run").arg(&p).arg("--out").arg(&out_dir).args(["--seed", "5", "--replications", "3"]));
    assert_eq!(out.status.code(), Some(0));
    for k in 0..3 {
        let s: toml::Table = std::fs::read_to_string(out_dir.join(format!("rep_{k}")).join(SUMMARY_FILE))
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(s["summary"]["seed"].as_integer(), Some(5 + k));
    }
}

#[test]
fn genpool_is_deterministic_and_loads() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a.pool"), tmp.path().join("b.pool"));
    for p in [&a, &b] {
        let out = exec(bin().args(["genpool", "--seed", "9", "--count", "4", "--tx-antennas", "8", "--rx-antennas", "4", "--out"]).arg(p));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let pool = load_pool::<f64>(&a).unwrap();
    assert_eq!(pool.len(), 4);
    assert!(pool.entries().iter().all(|e| e.tx_antennas() == 8 && e.rx_antennas() == 4));

    let out = exec(bin().args(["genpool", "--seed", "9", "--count", "0", "--out"]).arg(tmp.path().join("c.pool")));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatched_pool_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let pool = tmp.path().join("small.pool");
    let out = exec(bin().args(["genpool", "--seed", "1", "--count", "2", "--tx-antennas", "4", "--rx-antennas", "2", "--out"]).arg(&pool));
    assert_eq!(out.status.code(), Some(0));
    let p = short_scenario(tmp.path(), 0.01);
    let out = exec(
        bin()
            .arg("run")
            .arg(&p)
            .arg("--out")
            .arg(tmp.path().join("o"))
            .arg("--set")
            .arg(format!("channel.pool_file={:?}", pool.display().to_string())),
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
