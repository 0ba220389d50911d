//! Checks of the qualitative estimates on computed trajectories, plus the
//! source-type porous-medium oracle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{holder_seminorm_zero_extended, level_sets, NormKind, StateField};
use crate::nonlinearity::{regularize, PhiSpec, ReactionSpec};
use crate::solver::{State, Trajectory};

/// Default discretization allowance on contraction-type bounds.
pub const EPS_D: f64 = 0.05;
/// Relative tolerance of the per-step energy inequality.
pub const ENERGY_TOL: f64 = 1e-8;
/// Slack on the analytic interpolation constant (discrete norms vs continuous ones).
pub const INTERPOLATION_ALLOWANCE: f64 = 1.1;
/// Distances below this are treated as exact zeros in rate fits.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

impl Sample {
    pub fn slack(&self) -> f64 {
        self.bound - self.value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub name: String,
    pub passed: bool,
    /// Worst slack `bound - value` over the samples.
    pub margin: f64,
    pub samples: Vec<Sample>,
    /// Reported (not asserted) quantities.
    pub metrics: BTreeMap<String, f64>,
}

impl DiagnosticReport {
    pub fn from_samples(name: &str, samples: Vec<Sample>) -> Self {
        let margin = samples
            .iter()
            .map(Sample::slack)
            .fold(f64::INFINITY, |m, s| if s.is_nan() { f64::NEG_INFINITY } else { m.min(s) });
        let margin = if samples.is_empty() { 0.0 } else { margin };
        Self {
            name: name.to_string(),
            passed: margin >= 0.0,
            margin,
            samples,
            metrics: BTreeMap::new(),
        }
    }

    pub fn with_metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }
}

/// Least-squares line `y = slope * x + intercept` and its `R^2`
/// (`R^2 = 1` when `y` is constant).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Parameter("a line fit needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Parameter("line fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= 1e-300 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, intercept, r2))
}

fn check_paired(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Contract("trajectories live on different grids".into()));
    }
    if (a.dt - b.dt).abs() > 1e-15 * a.dt.abs().max(1.0) {
        return Err(Error::Contract(format!("time steps differ ({} vs {})", a.dt, b.dt)));
    }
    let (ta, tb) = (a.times(), b.times());
    if ta.len() != tb.len() || ta.iter().zip(&tb).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::Contract("snapshot times differ".into()));
    }
    Ok(())
}

fn trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0; t.len()];
    for k in 1..t.len() {
        acc[k] = acc[k - 1] + 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
    }
    acc
}

/// `||u1(t) - u2(t)||_L1 <= e^{Lt} ||u1(0) - u2(0)||_L1 (1 + eps_d)` at every snapshot.
pub fn check_l1_contraction(a: &Trajectory, b: &Trajectory, l: f64, eps_d: f64) -> Result<DiagnosticReport> {
    check_l1_contraction_forced(a, b, l, eps_d, None)
}

/// As [`check_l1_contraction`]; when the runs use different reactions `(f, f~)`,
/// `int_0^t ||f(u1) - f~(u1)||_L1` (trapezoid over snapshots) is added inside the bound.
pub fn check_l1_contraction_forced(
    a: &Trajectory,
    b: &Trajectory,
    l: f64,
    eps_d: f64,
    reactions: Option<(&ReactionSpec, &ReactionSpec)>,
) -> Result<DiagnosticReport> {
    check_paired(a, b)?;
    let times = a.times();
    let d0 = a.snapshots[0].state.l1_distance(&b.snapshots[0].state)?;
    let forcing = match reactions {
        None => vec![0.0; times.len()],
        Some((f, g)) => {
            let grid = a.grid;
            let gap: Vec<f64> = a
                .snapshots
                .iter()
                .map(|s| {
                    let u = s.state.u().values();
                    let v = s.state.v().map(|v| v.values());
                    (0..u.len())
                        .map(|k| {
                            let vk = v.map_or(0.0, |v| v[k]);
                            let x = grid.coords(k);
                            (f.eval_raw(x, u[k], vk).0 - g.eval_raw(x, u[k], vk).0).abs()
                        })
                        .sum::<f64>()
                        * grid.cell_volume()
                })
                .collect();
            trapezoid(&times, &gap)
        }
    };
    let mut samples = Vec::with_capacity(times.len());
    for (k, (sa, sb)) in a.snapshots.iter().zip(&b.snapshots).enumerate() {
        let d = sa.state.l1_distance(&sb.state)?;
        let bound = (l * sa.t).exp() * (d0 + forcing[k]) * (1.0 + eps_d);
        samples.push(Sample {
            t: sa.t,
            value: d,
            bound,
        });
    }
    let worst_ratio = samples
        .iter()
        .filter(|s| s.bound > 0.0)
        .map(|s| s.value / s.bound)
        .fold(0.0, f64::max);
    Ok(DiagnosticReport::from_samples("l1_contraction", samples)
        .with_metric("lipschitz", l)
        .with_metric("initial_distance", d0)
        .with_metric("worst_ratio", worst_ratio))
}

/// Nodewise `lower <= upper + tol` for `u` at every snapshot.
pub fn check_comparison(lower: &Trajectory, upper: &Trajectory, tol: f64) -> Result<DiagnosticReport> {
    check_paired(lower, upper)?;
    let samples = lower
        .snapshots
        .iter()
        .zip(&upper.snapshots)
        .map(|(a, b)| {
            let excess = a
                .state
                .u()
                .values()
                .iter()
                .zip(b.state.u().values())
                .map(|(x, y)| x - y)
                .fold(f64::NEG_INFINITY, f64::max);
            Sample {
                t: a.t,
                value: excess,
                bound: tol,
            }
        })
        .collect();
    Ok(DiagnosticReport::from_samples("comparison", samples))
}

/// Per-step `E(n+1) - E(n) + dt D(n+1) - dt F(n+1) <= tol (1 + |E(n+1)|)`, with
/// energy, dissipation and forcing as recorded by the solver under `phi_R`.
pub fn check_energy(traj: &Trajectory, tol: f64) -> DiagnosticReport {
    let mut prev = traj.initial_energy;
    let mut max_increase = f64::NEG_INFINITY;
    let mut samples = Vec::with_capacity(traj.steps.len());
    for s in &traj.steps {
        let residual = s.energy - prev + traj.dt * s.dissipation - traj.dt * s.forcing;
        max_increase = max_increase.max(s.energy - prev);
        samples.push(Sample {
            t: s.t,
            value: residual,
            bound: tol * (1.0 + s.energy.abs()),
        });
        prev = s.energy;
    }
    let worst_residual = samples.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
    DiagnosticReport::from_samples("energy", samples)
        .with_metric("max_energy_increase", if traj.steps.is_empty() { 0.0 } else { max_increase })
        .with_metric("worst_residual", if traj.steps.is_empty() { 0.0 } else { worst_residual })
}

/// `E(n+1) <= E(n)` up to rounding, for runs without reaction.
pub fn check_energy_decay(traj: &Trajectory) -> DiagnosticReport {
    let e = traj.energies();
    let samples = e
        .windows(2)
        .zip(&traj.steps)
        .map(|(w, s)| Sample {
            t: s.t,
            value: w[1] - w[0],
            bound: 1e-14 * (1.0 + w[0].abs()),
        })
        .collect();
    DiagnosticReport::from_samples("energy_decay", samples)
}

fn snapshot_near(traj: &Trajectory, t: f64) -> Result<&State> {
    traj.snapshots
        .iter()
        .find(|s| (s.t - t).abs() <= 0.5 * traj.dt)
        .map(|s| &s.state)
        .ok_or_else(|| Error::Contract(format!("no snapshot at t = {t}")))
}

/// `||phi_R(u)||_{H^1_0}` (the gradient norm).
pub fn phi_h1_norm(phi: &PhiSpec, r: f64, u: &StateField) -> Result<f64> {
    let phi_r = regularize(phi, r)?;
    let w: Vec<f64> = u.values().iter().map(|&z| phi_r.value(z)).collect();
    Ok(u.grid().h1_semi_sq(&w).sqrt())
}

/// Uniformity of `||phi_R(u(t))||_{H^1}` over a family of runs: the spread
/// `max / min` at the last of `times` must not exceed `max_spread`.
pub fn check_smoothing(
    phi: &PhiSpec,
    family: &[Trajectory],
    times: &[f64],
    max_spread: f64,
) -> Result<DiagnosticReport> {
    if family.is_empty() || times.is_empty() {
        return Err(Error::Parameter("smoothing check needs runs and sample times".into()));
    }
    let mut finals = Vec::with_capacity(family.len());
    let mut initials = Vec::with_capacity(family.len());
    let mut slopes = Vec::new();
    for traj in family {
        initials.push(phi_h1_norm(phi, traj.r, snapshot_near(traj, 0.0)?.u())?);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut last = 0.0;
        for &t in times {
            let n = phi_h1_norm(phi, traj.r, snapshot_near(traj, t)?.u())?;
            if n > 0.0 {
                xs.push((1.0 / t).ln());
                ys.push((n * n).ln());
            }
            last = n;
        }
        finals.push(last);
        if xs.len() >= 2 {
            if let Ok((slope, _, _)) = linear_fit(&xs, &ys) {
                slopes.push(slope);
            }
        }
    }
    let max = finals.iter().copied().fold(0.0, f64::max);
    let min = finals.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if max == 0.0 { 1.0 } else { max / min };
    let init_max = initials.iter().copied().fold(0.0, f64::max);
    let init_min = initials.iter().copied().fold(f64::INFINITY, f64::min);
    let initial_spread = if init_max == 0.0 { 1.0 } else { init_max / init_min };
    let kappa = if slopes.is_empty() {
        0.0
    } else {
        slopes.iter().sum::<f64>() / slopes.len() as f64
    };
    let t_last = *times.last().unwrap();
    let samples = vec![Sample {
        t: t_last,
        value: spread,
        bound: max_spread,
    }];
    Ok(DiagnosticReport::from_samples("smoothing", samples)
        .with_metric("spread", spread)
        .with_metric("initial_spread", initial_spread)
        .with_metric("kappa_hat", kappa)
        .with_metric("final_max", max)
        .with_metric("final_min", min))
}

/// Interpolation constant for zero-extended `alpha`-Hölder fields in dimension `dim`,
/// from the cone estimate around the maximum.
pub fn interpolation_constant(dim: usize, alpha: f64) -> f64 {
    let gamma_exp = alpha / (dim as f64 + alpha);
    let base = if dim == 1 {
        (alpha + 1.0) / (2.0 * alpha)
    } else {
        (alpha + 2.0) / (std::f64::consts::PI * alpha)
    };
    base.powf(gamma_exp)
}

/// `||w||_sup <= C0 ||w||_L1^gamma ([w]_alpha + ||w||_sup)^(1 - gamma)`,
/// `gamma = alpha / (n + alpha)`; `c0 = None` uses the frozen analytic constant.
pub fn check_interpolation(field: &StateField, alpha: f64, c0: Option<f64>) -> Result<DiagnosticReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("Hölder exponent must lie in (0, 1] (got {alpha})")));
    }
    let grid = field.grid();
    let gamma_exp = alpha / (grid.dim() as f64 + alpha);
    let c0 = c0.unwrap_or(INTERPOLATION_ALLOWANCE * interpolation_constant(grid.dim(), alpha));
    let sup = field.norm(NormKind::Sup);
    let l1 = field.norm(NormKind::L1);
    let holder = holder_seminorm_zero_extended(grid, field.values(), alpha)?;
    let scale = l1.powf(gamma_exp) * (holder + sup).powf(1.0 - gamma_exp);
    let realized = if sup == 0.0 { 0.0 } else { sup / scale };
    let samples = vec![Sample {
        t: 0.0,
        value: sup,
        bound: c0 * scale,
    }];
    Ok(DiagnosticReport::from_samples("interpolation", samples)
        .with_metric("gamma", gamma_exp)
        .with_metric("c0", c0)
        .with_metric("realized_constant", realized)
        .with_metric("holder", holder))
}

/// Samples `df/du` on `|u| < 5 theta` and fails unless it stays below `-beta`.
pub fn verify_sign_condition(reaction: &ReactionSpec, theta: f64, beta: f64) -> Result<()> {
    let lo = if reaction.nonnegative() { 0.0 } else { -5.0 * theta };
    let vs: Vec<f64> = if reaction.is_coupled() {
        (0..=20).map(|k| k as f64 / 20.0).collect()
    } else {
        vec![0.0]
    };
    for k in 0..=200 {
        let u = lo + (5.0 * theta - lo) * k as f64 / 200.0;
        let u = u.clamp(-1.0 + 1e-9, 1.0 - 1e-9).min(5.0 * theta * (1.0 - 1e-12));
        for &v in &vs {
            let fu = reaction.partials([0.0, 0.0], u, v).fu;
            if !(fu < -beta) {
                return Err(Error::Precondition(format!(
                    "df/du = {fu} is not below -{beta} at u = {u}, v = {v}"
                )));
            }
        }
    }
    Ok(())
}

/// Exponential decay of the difference of two runs with small states.
///
/// If both runs stay below `4 theta` the bound
/// `||u1(t) - u2(t)||_L1 <= e^{-beta (1 - eps_d) t} ||u1(0) - u2(0)||_L1` is asserted.
/// Otherwise only the restricted difference on `{|u1(0)| <= 4 theta}` at the final
/// time is compared with the initial difference, and the constant `C` multiplying
/// the space-time difference on `{|u1(0)| > 4 theta}` is reported.
pub fn check_level_set_decay(
    a: &Trajectory,
    b: &Trajectory,
    reaction: &ReactionSpec,
    theta: f64,
    beta: f64,
    eps_d: f64,
) -> Result<DiagnosticReport> {
    check_paired(a, b)?;
    if !(theta > 0.0 && beta > 0.0) {
        return Err(Error::Parameter("theta and beta must be positive".into()));
    }
    verify_sign_condition(reaction, theta, beta)?;
    let times = a.times();
    let distances = a
        .snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| x.state.l1_distance(&y.state))
        .collect::<Result<Vec<_>>>()?;
    let d0 = distances[0];
    let rate = decay_rate(&times, &distances);
    let small = a
        .snapshots
        .iter()
        .chain(&b.snapshots)
        .all(|s| s.state.u().norm(NormKind::Sup) < 4.0 * theta);
    if small {
        let samples = times
            .iter()
            .zip(&distances)
            .map(|(&t, &d)| Sample {
                t,
                value: d,
                bound: (-beta * (1.0 - eps_d) * t).exp() * d0,
            })
            .collect();
        let report = DiagnosticReport::from_samples("level_set_decay", samples)
            .with_metric("regime_small", 1.0)
            .with_metric("beta", beta);
        return Ok(match rate {
            Some(r) => report.with_metric("rate", r),
            None => report,
        });
    }

    let sets = level_sets(a.snapshots[0].state.u(), 4.0 * theta)?;
    let h = a.grid.cell_volume();
    let restricted = |s: &State, t: &State, mask: &[bool]| -> f64 {
        s.u()
            .values()
            .iter()
            .zip(t.u().values())
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|((x, y), _)| (x - y).abs())
            .sum::<f64>()
            * h
    };
    let mut small_mask = sets.s_mask.clone();
    for &k in &sets.boundary_nodes {
        small_mask[k] = true;
    }
    let last = a.snapshots.len() - 1;
    let restricted_t = restricted(&a.snapshots[last].state, &b.snapshots[last].state, &small_mask);
    let tube: Vec<f64> = a
        .snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| restricted(&x.state, &y.state, &sets.l_mask))
        .collect();
    let tube_norm = *trapezoid(&times, &tube).last().unwrap();
    let c = if tube_norm > 0.0 {
        ((restricted_t - 0.5 * d0) / tube_norm).max(0.0)
    } else {
        0.0
    };
    let samples = vec![Sample {
        t: times[last],
        value: restricted_t,
        bound: d0,
    }];
    let report = DiagnosticReport::from_samples("level_set_decay", samples)
        .with_metric("regime_small", 0.0)
        .with_metric("tube_norm", tube_norm)
        .with_metric("c_reported", c);
    Ok(match rate {
        Some(r) => report.with_metric("rate", r),
        None => report,
    })
}

/// `-slope` of `log d(t)` over the samples above the noise floor.
pub fn decay_rate(times: &[f64], distances: &[f64]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(distances)
        .filter(|(_, &d)| d > NOISE_FLOOR)
        .map(|(&t, &d)| (t, d.ln()))
        .unzip();
    linear_fit(&xs, &ys).ok().map(|(s, _, _)| -s)
}

/// Source-type solution of `u_t = Lap(u^m)` in `R^n` with prescribed mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    pub m: f64,
    pub dim: usize,
    pub mass: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
    pub c: f64,
}

impl Barenblatt {
    pub fn new(m: f64, mass: f64, dim: usize) -> Result<Self> {
        if !(m > 1.0) {
            return Err(Error::Parameter(format!("Barenblatt exponent must exceed 1 (got {m})")));
        }
        if !(mass > 0.0) {
            return Err(Error::Parameter(format!("mass must be positive (got {mass})")));
        }
        if dim != 1 && dim != 2 {
            return Err(Error::Parameter(format!("dimension must be 1 or 2 (got {dim})")));
        }
        let n = dim as f64;
        let alpha = n / (n * (m - 1.0) + 2.0);
        let beta = alpha / n;
        let k = alpha * (m - 1.0) / (2.0 * m * n);
        let p = 1.0 / (m - 1.0);
        let shape = std::f64::consts::PI.powf(0.5 * n) * gamma(p + 1.0) / gamma(p + 1.0 + 0.5 * n);
        let c = (mass * k.powf(0.5 * n) / shape).powf(1.0 / (p + 0.5 * n));
        Ok(Self {
            m,
            dim,
            mass,
            alpha,
            beta,
            k,
            c,
        })
    }

    /// Profile at time `t` and displacement `x` from the source.
    pub fn value(&self, t: f64, x: &[f64]) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain {
                what: "Barenblatt time",
                value: t,
            });
        }
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let inner = self.c - self.k * r2 * t.powf(-2.0 * self.beta);
        Ok(if inner <= 0.0 {
            0.0
        } else {
            t.powf(-self.alpha) * inner.powf(1.0 / (self.m - 1.0))
        })
    }

    /// Free-boundary radius `sqrt(C / k) t^beta`.
    pub fn radius(&self, t: f64) -> f64 {
        (self.c / self.k).sqrt() * t.powf(self.beta)
    }
}

pub fn barenblatt_profile(m: f64, mass: f64, dim: usize, t: f64, x: &[f64]) -> Result<f64> {
    Barenblatt::new(m, mass, dim)?.value(t, x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceTrack {
    pub centroid: [f64; 2],
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    pub max_growth_rate: f64,
}

impl InterfaceTrack {
    /// Power-law exponent of the radius over snapshots with `t >= t_from`, with
    /// physical time `t + t_offset`.
    pub fn exponent(&self, t_from: f64, t_offset: f64) -> Result<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.radii)
            .filter(|(&t, &r)| t >= t_from && r > 0.0 && t + t_offset > 0.0)
            .map(|(&t, &r)| ((t + t_offset).ln(), r.ln()))
            .unzip();
        linear_fit(&xs, &ys).map(|(s, _, _)| s)
    }
}

/// Support radius `max{|x - x0| : u(x) > threshold}` per snapshot, with `x0` the
/// centroid of the initial support.
pub fn track_interface(traj: &Trajectory, threshold: f64) -> InterfaceTrack {
    let grid = traj.grid;
    let u0 = traj.snapshots[0].state.u().values();
    let support: Vec<usize> = (0..u0.len()).filter(|&k| u0[k] > threshold).collect();
    let centroid = if support.is_empty() {
        grid.center()
    } else {
        let mut c = [0.0; 2];
        for &k in &support {
            let x = grid.coords(k);
            c[0] += x[0];
            c[1] += x[1];
        }
        [c[0] / support.len() as f64, c[1] / support.len() as f64]
    };
    let times = traj.times();
    let radii: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| {
            s.state
                .u()
                .values()
                .iter()
                .enumerate()
                .filter(|(_, &u)| u > threshold)
                .map(|(k, _)| grid.distance(grid.coords(k), centroid))
                .fold(0.0, f64::max)
        })
        .collect();
    let max_growth_rate = times
        .windows(2)
        .zip(radii.windows(2))
        .map(|(t, r)| (r[1] - r[0]) / (t[1] - t[0]))
        .fold(0.0, f64::max);
    InterfaceTrack {
        centroid,
        times,
        radii,
        max_growth_rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_slope() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let (s, i, r2) = linear_fit(&x, &y).unwrap();
        assert!((s - 2.0).abs() < 1e-14 && (i + 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
        let (s, _, r2) = linear_fit(&x, &[1.0; 4]).unwrap();
        assert_eq!((s, r2), (0.0, 1.0));
    }

    #[test]
    fn barenblatt_exponents_for_m2_in_one_dimension() {
        let b = Barenblatt::new(2.0, 1.0, 1).unwrap();
        assert!((b.alpha - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.beta - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.k - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(b.value(1.0, &[2.0 * b.radius(1.0)]).unwrap(), 0.0);
        assert!(b.value(0.0, &[0.0]).is_err());
    }

    #[test]
    fn empty_report_passes() {
        let r = DiagnosticReport::from_samples("x", vec![]);
        assert!(r.passed);
    }
}
