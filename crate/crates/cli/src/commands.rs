//! Subcommand implementations. Each returns an outcome; exit codes are chosen in `lib.rs`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use sdrd_core::attractor::{
    cover_counts, fit_attraction_rate_window, fractal_dimension_with, greedy_cover_with, sample_omega_limit,
    synthetic_family, CoverStrategy, SnapshotSet,
};
use sdrd_core::diagnostics::{DiagnosticReport, Sample};
use sdrd_core::grid::{build_grid, RangeTag, StateField};
use sdrd_core::io::write_snapshots;
use sdrd_core::solver::{r_sweep, solve, solve_with_r, Snapshot, State, SweepReport, Trajectory};

use crate::artifacts::{
    finalize, prepare_out_dir, read_run, verify, write_file, write_json, write_run, Manifest, CONFIG_FILE,
    REPORTS_FILE,
};
use crate::checks::{evaluate, validate_names, RunSet};
use crate::config::{parse_scenario, AttractorConfig, LoadedScenario, Scenario};
use crate::error::{from_core_runtime, CliError, CliResult};

pub const SWEEP_FILE: &str = "sweep.json";
pub const SELFTEST_FILE: &str = "selftest.json";

/// Scenario files shipped with the tool; `selftest` runs all of them.
pub const SHIPPED_SCENARIOS: &[(&str, &str)] = &[
    ("zero", include_str!("../../../scenarios/zero.toml")),
    ("barenblatt", include_str!("../../../scenarios/barenblatt.toml")),
    ("biofilm_sweep", include_str!("../../../scenarios/biofilm_sweep.toml")),
    ("barrier_eta01", include_str!("../../../scenarios/barrier_eta01.toml")),
    ("barrier_eta03", include_str!("../../../scenarios/barrier_eta03.toml")),
    ("monod_pair", include_str!("../../../scenarios/monod_pair.toml")),
    ("comparison_pair", include_str!("../../../scenarios/comparison_pair.toml")),
    ("decay_pair", include_str!("../../../scenarios/decay_pair.toml")),
    ("decay_attractor", include_str!("../../../scenarios/decay_attractor.toml")),
];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: String,
    pub manifest_hash: Option<String>,
    pub reports: Vec<DiagnosticReport>,
    pub failure: Option<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.reports.iter().all(|r| r.passed)
    }
}

fn fmt_num(x: f64) -> String {
    if x == 0.0 || (1e-3..1e4).contains(&x.abs()) {
        format!("{x:.4}")
    } else {
        format!("{x:.3e}")
    }
}

/// Summary table: one line per report with its margin and metrics.
pub fn render(outcome: &Outcome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", outcome.name);
    if let Some(f) = &outcome.failure {
        let _ = writeln!(out, "  FAILED  {f}");
    }
    for r in &outcome.reports {
        let metrics: Vec<String> = r.metrics.iter().map(|(k, v)| format!("{k}={}", fmt_num(*v))).collect();
        let _ = writeln!(
            out,
            "  {:<6} {:<16} margin={:<11} {}",
            if r.passed { "pass" } else { "FAIL" },
            r.name,
            fmt_num(r.margin),
            metrics.join(" ")
        );
    }
    if let Some(h) = &outcome.manifest_hash {
        let _ = writeln!(out, "  manifest {h}");
    }
    out
}

fn config_hash(scenario: &Scenario) -> String {
    crate::artifacts::sha256_hex(scenario.canonical_json().as_bytes())
}

/// `run`: solve (or sweep when the schedule has several entries), write
/// artifacts and evaluate the configured checks.
pub fn run(loaded: &LoadedScenario, out: &Path, checks: Option<&[String]>, force_sweep: bool) -> CliResult<Outcome> {
    let scenario = &loaded.scenario;
    let names: Vec<String> = checks.map_or_else(|| scenario.diagnostics.checks.clone(), <[String]>::to_vec);
    validate_names(&names)?;
    let problem = scenario.problem(&loaded.base_dir)?;
    let pair_problem = scenario.pair_problem(&loaded.base_dir)?;
    let schedule = scenario.solver.r_schedule.clone();
    let sweep = force_sweep || schedule.len() > 1;
    if sweep && schedule.len() < 3 {
        return Err(CliError::Config(format!(
            "an R sweep needs at least 3 entries in solver.r_schedule (got {})",
            schedule.len()
        )));
    }
    prepare_out_dir(out)?;
    write_file(&out.join(CONFIG_FILE), scenario.to_toml()?)?;
    let command = if sweep { "sweep" } else { "run" };
    let mut manifest = Manifest::new(command, &scenario.name, scenario.seed, config_hash(scenario));
    let r_last = *schedule.last().expect("validated schedule");

    let pair_solve = |p: &Option<sdrd_core::solver::Problem>| {
        p.as_ref().map(|p| solve_with_r(p, r_last))
    };
    let mut failure = None;
    let mut main = Vec::new();
    let mut sweep_report: Option<SweepReport> = None;
    let pair_result;
    if sweep {
        let (res, pair) = rayon::join(|| r_sweep(&problem, &schedule, scenario.diagnostics.sweep_tol), || pair_solve(&pair_problem));
        pair_result = pair;
        match res {
            Ok((report, trajs)) => {
                for (k, t) in trajs.iter().enumerate() {
                    manifest.runs.push(write_run(out, &format!("r{k}"), t, "ok")?);
                }
                write_json(&out.join(SWEEP_FILE), &report)?;
                sweep_report = Some(report);
                main = trajs;
            }
            Err(e) => failure = Some(format!("sweep: {e}")),
        }
    } else {
        let (res, pair) = rayon::join(|| solve(&problem), || pair_solve(&pair_problem));
        pair_result = pair;
        match res {
            Ok(t) => {
                manifest.runs.push(write_run(out, "main", &t, "ok")?);
                main.push(t);
            }
            Err(f) => {
                manifest.runs.push(write_run(out, "main", &f.partial, &format!("failed: {}", f.error))?);
                failure = Some(format!("main: {}", f.error));
            }
        }
    }
    let mut pair = None;
    match pair_result {
        Some(Ok(t)) => {
            manifest.runs.push(write_run(out, "pair", &t, "ok")?);
            pair = Some(t);
        }
        Some(Err(f)) => {
            manifest.runs.push(write_run(out, "pair", &f.partial, &format!("failed: {}", f.error))?);
            failure.get_or_insert(format!("pair: {}", f.error));
        }
        None => {}
    }

    let mut reports = Vec::new();
    if failure.is_none() {
        let runs = RunSet {
            main,
            pair,
            sweep: sweep_report,
        };
        for name in &names {
            reports.push(evaluate(name, scenario, &runs)?);
        }
    }
    write_json(&out.join(REPORTS_FILE), &reports)?;
    let hash = finalize(out, manifest)?;
    Ok(Outcome {
        name: scenario.name.clone(),
        manifest_hash: Some(hash),
        reports,
        failure,
    })
}

/// `check`: verify checksums, rebuild the runs from disk and evaluate `checks`.
pub fn check(run_dir: &Path, checks: Option<&[String]>) -> CliResult<Outcome> {
    if let Some(c) = checks {
        validate_names(c)?;
    }
    let manifest = verify(run_dir)?;
    let config_path = run_dir.join(CONFIG_FILE);
    let text = std::fs::read_to_string(&config_path)
        .map_err(|e| CliError::Integrity(format!("{}: {e}", config_path.display())))?;
    let scenario = parse_scenario(&text, None)?;
    if manifest.command == "attractor" {
        return Err(CliError::Usage("attractor directories carry their reports; nothing to check".into()));
    }
    let names: Vec<String> = checks.map_or_else(|| scenario.diagnostics.checks.clone(), <[String]>::to_vec);
    let grid = scenario.grid()?;
    let range = scenario.range()?;
    let mut main = Vec::new();
    let mut pair = None;
    for entry in &manifest.runs {
        let traj = read_run(run_dir, entry, &grid, range)?;
        if entry.label == "pair" {
            pair = Some(traj);
        } else {
            main.push(traj);
        }
    }
    if main.is_empty() {
        return Err(CliError::Integrity("manifest lists no runs".into()));
    }
    let failure = manifest
        .runs
        .iter()
        .find(|r| r.status != "ok")
        .map(|r| format!("{}: {}", r.label, r.status));
    let sweep_path = run_dir.join(SWEEP_FILE);
    let sweep = if sweep_path.exists() {
        let text = std::fs::read_to_string(&sweep_path).map_err(|e| CliError::Integrity(e.to_string()))?;
        Some(serde_json::from_str(&text).map_err(|e| CliError::Integrity(format!("{SWEEP_FILE}: {e}")))?)
    } else {
        None
    };
    let runs = RunSet { main, pair, sweep };
    let mut reports = Vec::new();
    for name in &names {
        reports.push(evaluate(name, &scenario, &runs)?);
    }
    Ok(Outcome {
        name: scenario.name,
        manifest_hash: None,
        reports,
        failure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Synthetic {
    Point,
    Segment,
    Square,
}

pub const SYNTHETIC_EPS: [f64; 5] = [0.3, 0.15, 0.08, 0.05, 0.03];

#[derive(Serialize)]
struct CoveringTable<'a> {
    strategy: CoverStrategy,
    eps: &'a [f64],
    counts: &'a [usize],
}

fn covering_csv(eps: &[f64], counts: &[usize]) -> String {
    let mut s = String::from("eps,count,log_inv_eps,log_count\n");
    for (e, c) in eps.iter().zip(counts) {
        let _ = writeln!(s, "{e:.6e},{c},{:.6e},{:.6e}", (1.0 / e).ln(), (*c as f64).ln());
    }
    s
}

/// Covering table, dimension fit and expectation reports written to `out`.
fn analyse_set(
    out: &Path,
    set: &SnapshotSet,
    eps: &[f64],
    strategy: CoverStrategy,
    expect_dimension: Option<f64>,
) -> CliResult<Vec<DiagnosticReport>> {
    let covering = cover_counts(set, eps, strategy).map_err(from_core_runtime)?;
    write_json(
        &out.join("covering.json"),
        &CoveringTable {
            strategy,
            eps: &covering.eps_list,
            counts: &covering.counts,
        },
    )?;
    write_file(&out.join("covering.csv"), covering_csv(&covering.eps_list, &covering.counts))?;
    let fit = fractal_dimension_with(set, eps, strategy).map_err(from_core_runtime)?;
    write_json(&out.join("dimension.json"), &fit)?;
    let samples = match expect_dimension {
        Some(e) => vec![Sample {
            t: 0.0,
            value: (fit.dimension - e).abs(),
            bound: 0.3,
        }],
        None => Vec::new(),
    };
    let mut report = DiagnosticReport::from_samples("dimension", samples)
        .with_metric("dimension", fit.dimension)
        .with_metric("r2", fit.r2)
        .with_metric("points", set.len() as f64);
    if fit.unstable {
        report = report.with_metric("unstable", 1.0);
    }
    Ok(vec![report])
}

fn write_set(dir: &Path, set: &SnapshotSet) -> CliResult<()> {
    let snaps = set
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok(Snapshot {
                t: i as f64,
                state: State::Scalar(StateField::new(*set.grid(), p.clone(), RangeTag::Signed)?),
            })
        })
        .collect::<sdrd_core::Result<Vec<_>>>()
        .map_err(from_core_runtime)?;
    write_snapshots(dir, &snaps).map_err(from_core_runtime)?;
    Ok(())
}

/// `attractor --synthetic`: k-parameter family with known dimension k.
pub fn attractor_synthetic(kind: Synthetic, out: &Path) -> CliResult<Outcome> {
    let (k, per_axis, name) = match kind {
        Synthetic::Point => (0, 2, "synthetic-point"),
        Synthetic::Segment => (1, 400, "synthetic-segment"),
        Synthetic::Square => (2, 150, "synthetic-square"),
    };
    let grid = build_grid(1, &[4.0], &[40]).map_err(from_core_runtime)?;
    let set = synthetic_family(&grid, k, per_axis).map_err(from_core_runtime)?;
    prepare_out_dir(out)?;
    let manifest = Manifest::new("attractor", name, 0, crate::artifacts::sha256_hex(name.as_bytes()));
    if kind != Synthetic::Square {
        write_set(&out.join("set"), &set)?;
    }
    let reports = analyse_set(out, &set, &SYNTHETIC_EPS, CoverStrategy::FarthestPoint, Some(k as f64))?;
    write_json(&out.join(REPORTS_FILE), &reports)?;
    let hash = finalize(out, manifest)?;
    Ok(Outcome {
        name: name.into(),
        manifest_hash: Some(hash),
        reports,
        failure: None,
    })
}

/// `attractor --config`: omega-limit sample over the member seeds, covering,
/// dimension and attraction-rate fit.
pub fn attractor(loaded: &LoadedScenario, out: &Path, seed_override: Option<u64>) -> CliResult<Outcome> {
    let scenario = &loaded.scenario;
    let cfg: &AttractorConfig = scenario
        .attractor
        .as_ref()
        .ok_or_else(|| CliError::Config("attractor analysis needs an [attractor] section".into()))?;
    if cfg.seeds.is_empty() {
        return Err(CliError::Config("empty scenario set: `attractor.seeds` lists no members".into()));
    }
    let seeds: Vec<u64> = match seed_override {
        Some(s) => (0..cfg.seeds.len() as u64).map(|i| s.wrapping_add(i)).collect(),
        None => cfg.seeds.clone(),
    };
    let mut problems = Vec::with_capacity(seeds.len());
    for &s in &seeds {
        let member = parse_scenario(&loaded.source, Some(s))?;
        problems.push(member.problem(&loaded.base_dir)?);
    }
    prepare_out_dir(out)?;
    write_file(&out.join(CONFIG_FILE), scenario.to_toml()?)?;
    let manifest = Manifest::new("attractor", &scenario.name, scenario.seed, config_hash(scenario));
    let sample =
        sample_omega_limit(&problems, cfg.burn_in, cfg.n_samples, cfg.gap, cfg.metric).map_err(from_core_runtime)?;
    for (i, traj) in sample.trajectories.iter().enumerate() {
        let window: Vec<Snapshot> = traj
            .snapshots
            .iter()
            .filter(|s| {
                (0..cfg.n_samples).any(|k| (s.t - cfg.burn_in - k as f64 * cfg.gap).abs() <= 0.5 * traj.dt)
            })
            .cloned()
            .collect();
        write_snapshots(&out.join(format!("omega/member_{i:02}")), &window).map_err(from_core_runtime)?;
    }
    let mut reports = analyse_set(out, &sample.set, &cfg.eps, cfg.strategy, cfg.expect_dimension)?;

    let balls = greedy_cover_with(&sample.set, cfg.collapse_eps, cfg.strategy)
        .map_err(from_core_runtime)?
        .counts[0];
    let samples = if cfg.expect_single_ball {
        vec![Sample {
            t: cfg.burn_in,
            value: balls as f64,
            bound: 1.0,
        }]
    } else {
        Vec::new()
    };
    reports.push(
        DiagnosticReport::from_samples("collapse", samples)
            .with_metric("eps", cfg.collapse_eps)
            .with_metric("balls", balls as f64),
    );

    let [from, until] = cfg.fit_window.unwrap_or([0.0, 0.5 * cfg.burn_in]);
    let trajs: Vec<Trajectory> = sample.trajectories.clone();
    let fit = fit_attraction_rate_window(&trajs, &sample.set, from, until).map_err(from_core_runtime)?;
    write_json(&out.join("rate.json"), &fit)?;
    let samples = match cfg.expect_rate {
        Some(rate) => vec![Sample {
            t: until,
            value: (fit.alpha - rate).abs() / rate.abs(),
            bound: 0.05,
        }],
        None => Vec::new(),
    };
    let mut rate = DiagnosticReport::from_samples("attraction_rate", samples).with_metric("r2", fit.r2);
    if fit.alpha.is_finite() {
        rate = rate.with_metric("alpha", fit.alpha).with_metric("q", fit.q);
    }
    if fit.saturated {
        rate = rate.with_metric("saturated", 1.0);
    }
    if fit.non_exponential {
        rate = rate.with_metric("non_exponential", 1.0);
    }
    reports.push(rate);
    write_json(&out.join(REPORTS_FILE), &reports)?;
    let hash = finalize(out, manifest)?;
    Ok(Outcome {
        name: scenario.name.clone(),
        manifest_hash: Some(hash),
        reports,
        failure: (!sample.warnings.is_empty()).then(|| sample.warnings.join("; ")),
    })
}

#[derive(Serialize)]
struct SelftestEntry {
    name: String,
    passed: bool,
    manifest_hash: String,
}

#[derive(Serialize)]
struct SelftestSummary {
    entries: Vec<SelftestEntry>,
    combined_hash: String,
}

/// `selftest`: every shipped scenario plus the point and segment synthetic sets.
pub fn selftest(out: &Path, seed_override: Option<u64>) -> CliResult<(Vec<Outcome>, String)> {
    prepare_out_dir(out)?;
    let mut outcomes = Vec::new();
    for (name, text) in SHIPPED_SCENARIOS {
        let scenario = parse_scenario(text, seed_override)?;
        let loaded = LoadedScenario {
            scenario,
            base_dir: PathBuf::from("."),
            source: text.to_string(),
        };
        let dir = out.join(name);
        let outcome = if loaded.scenario.attractor.is_some() {
            attractor(&loaded, &dir, seed_override)?
        } else {
            run(&loaded, &dir, None, false)?
        };
        outcomes.push(outcome);
    }
    for (kind, name) in [(Synthetic::Point, "synthetic_point"), (Synthetic::Segment, "synthetic_segment")] {
        outcomes.push(attractor_synthetic(kind, &out.join(name))?);
    }
    let entries: Vec<SelftestEntry> = outcomes
        .iter()
        .map(|o| SelftestEntry {
            name: o.name.clone(),
            passed: o.passed(),
            manifest_hash: o.manifest_hash.clone().unwrap_or_default(),
        })
        .collect();
    let joined: String = entries.iter().map(|e| e.manifest_hash.as_str()).collect::<Vec<_>>().join("\n");
    let summary = SelftestSummary {
        combined_hash: crate::artifacts::sha256_hex(joined.as_bytes()),
        entries,
    };
    write_json(&out.join(SELFTEST_FILE), &summary)?;
    let manifest = Manifest::new("selftest", "selftest", seed_override.unwrap_or(0), summary.combined_hash.clone());
    let hash = finalize(out, manifest)?;
    Ok((outcomes, hash))
}
