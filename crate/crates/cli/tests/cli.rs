use std::fs;
use std::path::{Path, PathBuf};

use sdrd_cli::artifacts::{read_manifest, MANIFEST_FILE};
use sdrd_cli::commands::{self, SHIPPED_SCENARIOS};
use sdrd_cli::config::{parse_scenario, LoadedScenario};
use sdrd_cli::run_cli;

fn shipped(name: &str) -> &'static str {
    SHIPPED_SCENARIOS.iter().find(|(n, _)| *n == name).unwrap().1
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn sdrd(args: &[&str]) -> i32 {
    run_cli(std::iter::once("sdrd").chain(args.iter().copied()))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn zero_scenario_writes_zero_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.toml", shipped("zero"));
    let out = tmp.path().join("run");
    assert_eq!(sdrd(&["run", "--config", path(&cfg), "--out", path(&out)]), 0);
    let snaps: Vec<_> = fs::read_dir(out.join("main/snapshots"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_str().unwrap().starts_with("snapshot_"))
        .collect();
    assert_eq!(snaps.len(), 11);
    for p in snaps {
        let text = fs::read_to_string(p).unwrap();
        for line in text.lines().skip(1) {
            let u: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
            assert_eq!(u, 0.0);
        }
    }
    let m = read_manifest(&out).unwrap();
    assert!(m.files.contains_key("config.toml") && m.files.contains_key("main/diagnostics.jsonl"));
    assert!(!fs::read_to_string(out.join(MANIFEST_FILE)).unwrap().contains("time"));
}

#[test]
fn missing_time_step_is_a_config_error_naming_the_key() {
    let text = shipped("zero").replace("dt = 0.01\n", "");
    let err = parse_scenario(&text, None).unwrap_err();
    assert!(err.to_string().contains("solver.dt"), "{err}");
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", &text);
    assert_eq!(sdrd(&["run", "--config", path(&cfg), "--out", path(&tmp.path().join("o"))]), 2);
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn syntax_and_type_errors_carry_location() {
    let err = parse_scenario("name = \"x\"\n[grid\nlengths = [1.0]\n", None).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    let text = shipped("zero").replace("t_end = 0.1", "t_end = \"soon\"");
    let err = parse_scenario(&text, None).unwrap_err();
    assert!(err.to_string().contains("solver.t_end"), "{err}");
    let text = shipped("zero").replace("[solver]", "[solver]\nstep = 3");
    let err = parse_scenario(&text, None).unwrap_err();
    assert!(err.to_string().contains("step"), "{err}");
    let text = shipped("zero").replace("checks = [\"energy\"", "checks = [\"nonsense\"");
    assert!(parse_scenario(&text, None).is_err());
}

#[test]
fn barenblatt_run_reports_interface_radii() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "b.toml", shipped("barenblatt"));
    let loaded = sdrd_cli::config::load_scenario(&cfg, None).unwrap();
    let outcome = commands::run(&loaded, &tmp.path().join("run"), None, false).unwrap();
    assert!(outcome.passed());
    let iface = outcome.reports.iter().find(|r| r.name == "interface").unwrap();
    assert!(iface.samples.len() > 10);
    assert!(iface.samples.windows(2).all(|w| w[1].value >= w[0].value));
    let reports = fs::read_to_string(tmp.path().join("run/reports.json")).unwrap();
    for key in ["\"name\"", "\"passed\"", "\"margin\"", "\"samples\""] {
        assert!(reports.contains(key));
    }
}

#[test]
fn check_passes_on_fresh_runs_and_flags_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let zero = write_config(tmp.path(), "zero.toml", shipped("zero"));
    let run = tmp.path().join("zero");
    assert_eq!(sdrd(&["run", "--config", path(&zero), "--out", path(&run)]), 0);
    assert_eq!(sdrd(&["check", path(&run), "--checks", "energy"]), 0);
    assert_eq!(sdrd(&["check", path(&run), "--checks", "energy,not_a_check"]), 2);
    // paired checks need a pair
    assert_eq!(sdrd(&["check", path(&run), "--checks", "l1_contraction"]), 2);

    let pair = write_config(tmp.path(), "pair.toml", shipped("comparison_pair"));
    let prun = tmp.path().join("pair");
    assert_eq!(sdrd(&["run", "--config", path(&pair), "--out", path(&prun)]), 0);
    let outcome = commands::check(&prun, Some(&["l1_contraction".to_string()])).unwrap();
    assert!(outcome.passed() && outcome.reports[0].margin > 0.0);

    let snap = run.join("main/snapshots/snapshot_00003.csv");
    let mut text = fs::read_to_string(&snap).unwrap();
    text = text.replacen("0.0000000000000000e0", "1.0000000000000000e-3", 1);
    fs::write(&snap, text).unwrap();
    assert_eq!(sdrd(&["check", path(&run)]), 3);
    fs::write(run.join("extra.txt"), "x").unwrap();
    assert_eq!(sdrd(&["check", path(&prun.join("missing"))]), 2);
}

#[test]
fn synthetic_segment_has_dimension_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("seg");
    assert_eq!(sdrd(&["attractor", "--synthetic", "segment", "--out", path(&out)]), 0);
    let table = fs::read_to_string(out.join("covering.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "eps,count,log_inv_eps,log_count");
    assert_eq!(table.lines().count(), 6);
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("dimension.json")).unwrap()).unwrap();
    let d = fit["dimension"].as_f64().unwrap();
    assert!((d - 1.0).abs() <= 0.3, "{d}");
}

#[test]
fn attractor_needs_members() {
    let tmp = tempfile::tempdir().unwrap();
    let text = shipped("decay_attractor").replace("seeds = [20, 21, 22]", "seeds = []");
    let cfg = write_config(tmp.path(), "a.toml", &text);
    assert_eq!(sdrd(&["attractor", "--config", path(&cfg), "--out", path(&tmp.path().join("a"))]), 2);
    assert_eq!(sdrd(&["attractor", "--out", path(&tmp.path().join("b"))]), 2);
    let zero = write_config(tmp.path(), "zero.toml", shipped("zero"));
    assert_eq!(sdrd(&["attractor", "--config", path(&zero), "--out", path(&tmp.path().join("c"))]), 2);
}

#[test]
fn decay_family_collapses_at_rate_lambda() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.toml", shipped("decay_attractor"));
    let loaded = sdrd_cli::config::load_scenario(&cfg, None).unwrap();
    let outcome = commands::attractor(&loaded, &tmp.path().join("a"), None).unwrap();
    assert!(outcome.passed(), "{}", commands::render(&outcome));
    let dim = outcome.reports.iter().find(|r| r.name == "dimension").unwrap();
    assert_eq!(dim.metric("dimension"), Some(0.0));
    let rate = outcome.reports.iter().find(|r| r.name == "attraction_rate").unwrap();
    assert!((rate.metric("alpha").unwrap() - 5.0).abs() < 0.25);
    assert!(tmp.path().join("a/omega/member_02/index.csv").exists());
}

#[test]
fn seeds_fix_the_manifest_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.toml", shipped("monod_pair"));
    let text = shipped("monod_pair").replace("t_end = 1.0", "t_end = 0.05");
    fs::write(&cfg, text).unwrap();
    let hash = |dir: &str, seed: Option<u64>| {
        let loaded = sdrd_cli::config::load_scenario(&cfg, seed).unwrap();
        commands::run(&loaded, &tmp.path().join(dir), None, false).unwrap().manifest_hash.unwrap()
    };
    let a = hash("a", None);
    let b = hash("b", None);
    let c = hash("c", Some(99));
    assert_eq!(a, b);
    assert_ne!(a, c);
    // rerunning into an existing run directory replaces it
    assert_eq!(hash("a", None), a);
}

#[test]
fn reruns_refuse_foreign_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.toml", shipped("zero"));
    assert_eq!(sdrd(&["run", "--config", path(&cfg), "--out", path(tmp.path())]), 2);
    assert!(cfg.exists());
}

#[test]
fn initial_data_from_csv() {
    use sdrd_core::grid::{build_grid, RangeTag, StateField};
    use sdrd_core::io::snapshot_csv;
    use sdrd_core::solver::State;
    let tmp = tempfile::tempdir().unwrap();
    let g = build_grid(1, &[1.0], &[50]).unwrap();
    let u = StateField::from_fn(g, RangeTag::Signed, |x| 0.3 * (std::f64::consts::PI * x[0]).sin()).unwrap();
    fs::write(tmp.path().join("u0.csv"), snapshot_csv(0.0, &State::Scalar(u.clone()))).unwrap();
    let text = shipped("zero").replace("[initial.u]\npreset = \"zero\"", "[initial.u]\npreset = \"csv\"\npath = \"u0.csv\"");
    let cfg = write_config(tmp.path(), "csv.toml", &text);
    let loaded = sdrd_cli::config::load_scenario(&cfg, None).unwrap();
    let p = loaded.scenario.problem(&loaded.base_dir).unwrap();
    assert_eq!(p.initial.u().values(), u.values());
    let out = tmp.path().join("run");
    assert_eq!(sdrd(&["run", "--config", path(&cfg), "--out", path(&out), "--checks", "energy,energy_decay"]), 0);

    let bad = text.replace("u0.csv", "nope.csv");
    let cfg = write_config(tmp.path(), "bad.toml", &bad);
    assert_eq!(sdrd(&["run", "--config", path(&cfg), "--out", path(&tmp.path().join("x"))]), 2);
}

#[test]
fn solver_failure_keeps_partial_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let text = shipped("zero")
        .replace("kind = \"zero\"", "kind = \"scalar_decay\"\nlambda = -200.0")
        .replace("[initial.u]\npreset = \"zero\"", "[initial.u]\npreset = \"bump\"\ncenter = [0.5]\nradius = 0.4\nheight = 0.9")
        .replace("dt = 0.01", "dt = 0.1\nnewton_max_iter = 3")
        .replace("t_end = 0.1", "t_end = 1.0");
    let cfg = write_config(tmp.path(), "f.toml", &text);
    let out = tmp.path().join("run");
    assert_eq!(sdrd(&["run", "--config", path(&cfg), "--out", path(&out)]), 1);
    let m = read_manifest(&out).unwrap();
    assert!(m.runs[0].status.starts_with("failed"));
    assert!(out.join("main/snapshots/snapshot_00000.csv").exists());
}

#[test]
fn worker_and_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.toml", shipped("zero"));
    let out = tmp.path().join("o");
    assert_eq!(sdrd(&["--workers", "0", "run", "--config", path(&cfg), "--out", path(&out)]), 2);
    assert_eq!(sdrd(&["--workers", "2", "run", "--config", path(&cfg), "--out", path(&out)]), 0);
    assert_eq!(sdrd(&["frobnicate"]), 2);
    assert_eq!(sdrd(&["run", "--out", path(&out)]), 2);
    assert_eq!(sdrd(&["sweep", "--config", path(&cfg), "--out", path(&out)]), 2);
}

#[test]
fn every_shipped_scenario_parses() {
    for (name, text) in SHIPPED_SCENARIOS {
        let s = parse_scenario(text, None).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(&s.name, name);
        // the config copy written to run directories parses back to the same scenario
        let again = parse_scenario(&s.to_toml().unwrap(), None).unwrap();
        assert_eq!(again, s);
        let loaded = LoadedScenario {
            scenario: s,
            base_dir: PathBuf::from("."),
            source: text.to_string(),
        };
        loaded.scenario.problem(&loaded.base_dir).unwrap();
    }
}
