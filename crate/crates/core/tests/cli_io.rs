use std::fs;
use std::path::{Path, PathBuf};

use osl_core::cli::{cmd_mc, cmd_run, cmd_sweep, BatchArgs, CommonArgs, SweepArgs};
use osl_core::config::{parse_config, RunConfig};
use osl_core::output::{write_trajectory, SWEEP_HEADER, TRAJECTORY_HEADER};
use osl_core::sim::{run_episode, SwarmConfig, Variant};
use osl_core::OslError;
use proptest::prelude::*;
use serde_json::Value;

const SMALL: &str = "uav_count = 3\nk_max = 60\nseed = 21\n";

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn common(config: &Path, out: &Path) -> CommonArgs {
    CommonArgs {
        config: Some(config.to_path_buf()),
        seed: None,
        algo: None,
        out_dir: out.to_path_buf(),
    }
}

fn batch(config: &Path, out: &Path, runs: usize, workers: usize) -> BatchArgs {
    BatchArgs { common: common(config, out), runs: Some(runs), workers }
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cmd_run(&common(&cfg, &a)).unwrap();
    cmd_run(&common(&cfg, &b)).unwrap();
    for name in ["trajectory.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn trajectory_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    cmd_run(&common(&cfg, dir.path())).unwrap();
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
    let mut count = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 17, "{line}");
        for f in &fields {
            assert!(f.parse::<f64>().is_ok(), "{f}");
        }
        assert!(fields[14] == "0" || fields[14] == "1");
        count += 1;
    }
    assert!(count > 0);
}

#[test]
fn summary_energy_parts_add_up() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    cmd_mc(&batch(&cfg, dir.path(), 4, 1)).unwrap();
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["runs"], 4);
    assert_eq!(v["master_seed"], 21);
    assert_eq!(v["algo"], "muc-osl");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let runs = v["per_run"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    let successes = runs.iter().filter(|r| r["success"] == true).count();
    assert_eq!(v["successes"], successes);
    for r in runs {
        assert_eq!(r["success"].as_bool().unwrap(), !r["search_time"].is_null());
        for a in r["agents"].as_array().unwrap() {
            let get = |k: &str| a[k].as_f64().unwrap();
            let sum = get("E_f") + get("E_h") + get("E_b");
            assert!((get("E_M") - sum).abs() <= 1e-9 * sum.max(1.0), "{a}");
            assert!(get("E") >= get("E_M") - 1e-6);
        }
    }
    // the embedded configuration parses back to the same hash
    let embedded = parse_config(v["config"].as_str().unwrap()).unwrap();
    assert_eq!(embedded.hash(), v["config_hash"].as_str().unwrap());
}

#[test]
fn empty_episode_writes_header_only() {
    let config = SwarmConfig { k_max: 0, ..SwarmConfig::default() };
    let world = RunConfig::default().world();
    let r = run_episode(&config, &world, 0).unwrap();
    assert!(!r.success && r.trajectory.is_empty());
    let mut buf = Vec::new();
    write_trajectory(&r.trajectory, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("{TRAJECTORY_HEADER}\n"));
}

#[test]
fn mc_summary_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("one"), dir.path().join("four"));
    cmd_mc(&batch(&cfg, &a, 6, 1)).unwrap();
    cmd_mc(&batch(&cfg, &b, 6, 4)).unwrap();
    assert_eq!(fs::read(a.join("summary.json")).unwrap(), fs::read(b.join("summary.json")).unwrap());
}

#[test]
fn sweep_writes_table_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let args = SweepArgs { batch: batch(&cfg, dir.path(), 2, 1), sweep: "uav_count=1,2".into() };
    cmd_sweep(&args).unwrap();
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], SWEEP_HEADER);
    assert_eq!(lines.len(), 1 + 2 * Variant::ALL.len());
    for value in ["1", "2"] {
        for v in Variant::ALL {
            assert!(dir.path().join(format!("summary_uav_count_{value}_{v}.json")).exists());
            assert!(lines.iter().any(|l| l.starts_with(&format!("uav_count,{value},{v},"))));
        }
    }
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 6);
        assert_eq!(f[5], "2");
        assert!(f[4].parse::<f64>().is_ok());
        assert!(f[3].is_empty() || f[3].parse::<f64>().is_ok());
    }
}

#[test]
fn bad_config_reports_line() {
    let err = parse_config("uav_count = 2\nwind = 3\n").unwrap_err();
    assert!(matches!(err, OslError::Config { line: 2, .. }), "{err}");
    let err = parse_config("k_max = 10\nk_max = 20\n").unwrap_err();
    assert!(matches!(err, OslError::Config { line: 2, .. }), "{err}");
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "uav_count = 0\n");
    assert!(cmd_run(&common(&cfg, dir.path())).is_err());
    assert!(!dir.path().join("trajectory.csv").exists());
}

fn variant() -> impl Strategy<Value = Variant> {
    prop::sample::select(Variant::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn config_text_round_trips(
        uav in 1usize..8,
        radius in 0.0..200.0f64,
        algo in variant(),
        k_max in 1usize..2000,
        seed in any::<u64>(),
        runs in 1usize..500,
        q in 0.1..10.0f64,
        lx in 20.0..200.0f64,
        sx in prop::option::of(0.0..20.0f64),
        n in 20usize..400,
        scale in 0.01..5.0f64,
        threshold in prop::option::of(1e-6..1.0f64),
    ) {
        let mut text = format!(
            "uav_count = {uav}\ncomm_radius = {radius}\nalgo = {algo}\nk_max = {k_max}\nseed = {seed}\n\
             runs = {runs}\nq = {q}\nlx = {lx}\nn = {n}\nn_max = {n}\nenv_pu_scale = {scale}\n"
        );
        if let Some(x) = sx {
            text.push_str(&format!("source_x = {x}\n"));
        }
        if let Some(t) = threshold {
            text.push_str(&format!("conc_threshold = {t}\n"));
        }
        let parsed = parse_config(&text).unwrap();
        prop_assert_eq!(parsed.swarm.uav_count, uav);
        prop_assert_eq!(parsed.swarm.variant, algo);
        prop_assert_eq!(parsed.seed, seed);
        prop_assert_eq!(parsed.plume.q, q);
        prop_assert_eq!(parsed.volume.lx, lx);
        prop_assert_eq!(parsed.swarm.planner.conc_threshold, threshold);
        let canonical = parsed.to_canonical();
        let again = parse_config(&canonical).unwrap();
        prop_assert_eq!(again.to_canonical(), canonical);
        prop_assert_eq!(again.hash(), parsed.hash());
        prop_assert_eq!(again.world(), parsed.world());
        prop_assert_eq!(&again.swarm, &parsed.swarm);
    }
}
