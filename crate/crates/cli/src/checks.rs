//! Named checks over the runs of one scenario.

use sdrd_core::diagnostics::{
    check_comparison, check_energy, check_energy_decay, check_interpolation, check_l1_contraction_forced,
    check_level_set_decay, track_interface, Barenblatt, DiagnosticReport, Sample,
};
use sdrd_core::grid::NormKind;
use sdrd_core::initial::InitialSpec;
use sdrd_core::solver::{barrier_bound, SweepReport, Trajectory};

use crate::config::{InitialSource, PhiConfig, Scenario};
use crate::error::{from_core_runtime, CliError, CliResult};

pub const CHECKS: &[&str] = &[
    "energy",
    "energy_decay",
    "l1_contraction",
    "comparison",
    "level_set_decay",
    "barrier",
    "interpolation",
    "interface",
    "barenblatt",
    "r_convergence",
];

/// Trajectories of one scenario: `main` holds one run per `R` (largest last).
pub struct RunSet {
    pub main: Vec<Trajectory>,
    pub pair: Option<Trajectory>,
    pub sweep: Option<SweepReport>,
}

impl RunSet {
    pub fn primary(&self) -> &Trajectory {
        self.main.last().expect("a run set holds at least one run")
    }

    fn all(&self) -> impl Iterator<Item = &Trajectory> {
        self.main.iter().chain(self.pair.iter())
    }

    fn paired(&self, check: &str) -> CliResult<(&Trajectory, &Trajectory)> {
        match &self.pair {
            Some(p) => Ok((self.primary(), p)),
            None => Err(CliError::Config(format!("check `{check}` needs a [pair] section"))),
        }
    }
}

pub fn validate_names(names: &[String]) -> CliResult<()> {
    match names.iter().find(|n| !CHECKS.contains(&n.as_str())) {
        Some(n) => Err(CliError::Usage(format!("unknown check `{n}` (known: {})", CHECKS.join(", ")))),
        None => Ok(()),
    }
}

fn merge(name: &str, reports: Vec<DiagnosticReport>) -> DiagnosticReport {
    if reports.len() == 1 {
        return reports.into_iter().next().unwrap();
    }
    let samples: Vec<Sample> = reports.iter().flat_map(|r| r.samples.iter().copied()).collect();
    let mut merged = DiagnosticReport::from_samples(name, samples);
    merged.passed = reports.iter().all(|r| r.passed);
    for (i, r) in reports.iter().enumerate() {
        for (k, v) in &r.metrics {
            merged.metrics.insert(format!("run{i}.{k}"), *v);
        }
    }
    merged
}

pub fn evaluate(name: &str, scenario: &Scenario, runs: &RunSet) -> CliResult<DiagnosticReport> {
    let diag = &scenario.diagnostics;
    let report = match name {
        "energy" => merge(name, runs.all().map(|t| check_energy(t, diag.energy_tol)).collect()),
        "energy_decay" => merge(name, runs.all().map(check_energy_decay).collect()),
        "l1_contraction" => {
            let (a, b) = runs.paired(name)?;
            let f = scenario.reaction_spec(&scenario.reaction)?;
            let g = scenario.pair_reaction()?;
            let l = f.lipschitz_bound().max(g.as_ref().map_or(0.0, |g| g.lipschitz_bound()));
            let forcing = g.as_ref().map(|g| (&f, g));
            check_l1_contraction_forced(a, b, l, diag.eps_d, forcing).map_err(from_core_runtime)?
        }
        "comparison" => {
            let (a, b) = runs.paired(name)?;
            let ua = a.snapshots[0].state.u().values();
            let ub = b.snapshots[0].state.u().values();
            let (lo, hi) = if ua.iter().zip(ub).all(|(x, y)| x <= y) {
                (a, b)
            } else if ua.iter().zip(ub).all(|(x, y)| y <= x) {
                (b, a)
            } else {
                return Err(CliError::Config("comparison needs ordered initial data in the pair".into()));
            };
            check_comparison(lo, hi, diag.comparison_tol).map_err(from_core_runtime)?
        }
        "level_set_decay" => {
            let (a, b) = runs.paired(name)?;
            let ls = diag
                .level_set
                .as_ref()
                .ok_or_else(|| CliError::Config("level_set_decay needs [diagnostics.level_set]".into()))?;
            let f = scenario.reaction_spec(&scenario.reaction)?;
            check_level_set_decay(a, b, &f, ls.theta, ls.beta, diag.eps_d).map_err(from_core_runtime)?
        }
        "barrier" => merge(name, runs.all().map(|t| barrier(scenario, t)).collect::<CliResult<_>>()?),
        "interpolation" => {
            let mut reports = Vec::new();
            for t in runs.all() {
                for s in [&t.snapshots[0], t.snapshots.last().unwrap()] {
                    reports.push(
                        check_interpolation(s.state.u(), diag.interpolation_alpha, None).map_err(from_core_runtime)?,
                    );
                }
            }
            merge(name, reports)
        }
        "interface" => interface(scenario, runs.primary())?,
        "barenblatt" => barenblatt(scenario, runs.primary())?,
        "r_convergence" => {
            let sweep = runs
                .sweep
                .as_ref()
                .ok_or_else(|| CliError::Config("r_convergence needs at least three entries in solver.r_schedule".into()))?;
            r_convergence(sweep)
        }
        other => return Err(CliError::Usage(format!("unknown check `{other}`"))),
    };
    Ok(report)
}

/// `max u <= 1 - delta + 10 h^2` at every step, `delta` from the barrier
/// supersolution with `eta = 1 - max u0` unless configured.
fn barrier(scenario: &Scenario, traj: &Trajectory) -> CliResult<DiagnosticReport> {
    let phi = scenario.phi_spec()?;
    let reaction = scenario.reaction_spec(&scenario.reaction)?;
    let u0 = traj.snapshots[0].state.u().norm(NormKind::Sup);
    let eta = scenario.diagnostics.barrier_eta.unwrap_or(1.0 - u0);
    let bb = barrier_bound(&traj.grid, &phi, reaction.sup_abs_f(), eta).map_err(from_core_runtime)?;
    let h = traj.grid.spacing().iter().copied().fold(0.0, f64::max);
    let bound = 1.0 - bb.delta + 10.0 * h * h;
    let samples = std::iter::once(Sample {
        t: 0.0,
        value: traj.snapshots[0].state.u().max(),
        bound,
    })
    .chain(traj.steps.iter().map(|s| Sample {
        t: s.t,
        value: s.max_u,
        bound,
    }))
    .collect();
    Ok(DiagnosticReport::from_samples("barrier", samples)
        .with_metric("eta", eta)
        .with_metric("delta", bb.delta)
        .with_metric("w_sup", bb.w_sup)
        .with_metric("max_u", traj.max_u()))
}

fn barenblatt_params(scenario: &Scenario) -> Option<(f64, f64, f64, Vec<f64>)> {
    match &scenario.initial.u {
        InitialSource::Preset(InitialSpec::Barenblatt { m, mass, t0, center }) => Some((*m, *mass, *t0, center.clone())),
        _ => None,
    }
}

/// Free-boundary radii per snapshot; the exponent of `r ~ (t + t0)^beta` is
/// reported when the initial data come from a Barenblatt preset.
fn interface(scenario: &Scenario, traj: &Trajectory) -> CliResult<DiagnosticReport> {
    let track = track_interface(traj, scenario.diagnostics.interface_threshold);
    let g = traj.grid;
    let diameter = g.extents().iter().map(|l| l * l).sum::<f64>().sqrt();
    let samples = track
        .times
        .iter()
        .zip(&track.radii)
        .map(|(&t, &r)| Sample {
            t,
            value: r,
            bound: diameter,
        })
        .collect();
    let mut report =
        DiagnosticReport::from_samples("interface", samples).with_metric("max_growth_rate", track.max_growth_rate);
    let offset = barenblatt_params(scenario).map_or(0.0, |p| p.2);
    let t_from = track.times.get(1).copied().unwrap_or(0.0);
    if let Ok(e) = track.exponent(t_from, offset) {
        report = report.with_metric("exponent", e);
    }
    Ok(report)
}

/// L1 distance to the closed-form profile at the final time and the
/// free-boundary exponent against `beta`.
fn barenblatt(scenario: &Scenario, traj: &Trajectory) -> CliResult<DiagnosticReport> {
    let (m, mass, t0, center) = barenblatt_params(scenario)
        .ok_or_else(|| CliError::Config("barenblatt check needs a barenblatt initial preset".into()))?;
    match scenario.phi {
        PhiConfig::Power { m: pm, .. } if pm == m => {}
        _ => return Err(CliError::Config("barenblatt check needs power phi with the preset's exponent".into())),
    }
    let g = traj.grid;
    let b = Barenblatt::new(m, mass, g.dim()).map_err(from_core_runtime)?;
    let last = traj.snapshots.last().unwrap();
    let t = t0 + last.t;
    let u = last.state.u().values();
    let mut err = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        let x = g.coords(k);
        let rel: Vec<f64> = (0..g.dim()).map(|i| x[i] - center[i]).collect();
        err += (uk - b.value(t, &rel).map_err(from_core_runtime)?).abs();
    }
    err *= g.cell_volume();
    let track = track_interface(traj, scenario.diagnostics.interface_threshold);
    let t_from = track.times.get(1).copied().unwrap_or(0.0);
    let exponent = track.exponent(t_from, t0).map_err(from_core_runtime)?;
    let rel_exp = (exponent - b.beta).abs() / b.beta;
    let samples = vec![
        Sample {
            t: last.t,
            value: err,
            bound: scenario.diagnostics.barenblatt_tol,
        },
        Sample {
            t: last.t,
            value: rel_exp,
            bound: scenario.diagnostics.exponent_tol,
        },
    ];
    Ok(DiagnosticReport::from_samples("barenblatt", samples)
        .with_metric("l1_error", err)
        .with_metric("exponent", exponent)
        .with_metric("beta", b.beta))
}

/// Successive gaps must shrink strictly and the last must fall below the tolerance.
fn r_convergence(sweep: &SweepReport) -> DiagnosticReport {
    let d = &sweep.distances;
    let mut samples: Vec<Sample> = d
        .windows(2)
        .enumerate()
        .map(|(k, w)| Sample {
            t: (k + 1) as f64,
            value: w[1],
            bound: w[0],
        })
        .collect();
    if let Some(&last) = d.last() {
        samples.push(Sample {
            t: d.len() as f64,
            value: last,
            bound: sweep.tolerance,
        });
    }
    let mut report = DiagnosticReport::from_samples("r_convergence", samples);
    report.passed = sweep.decreasing && sweep.converged;
    for (k, dk) in d.iter().enumerate() {
        report.metrics.insert(format!("d{k}"), *dk);
    }
    report
}
