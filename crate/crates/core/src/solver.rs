//! Backward-Euler time stepping of the regularized problems, the degenerate-limit
//! sweep over the regularization index, and the stationary barrier bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CoupledState, Grid, NormKind, RangeTag, StateField};
use crate::linalg::BandedMatrix;
use crate::nonlinearity::{regularize, PhiSpec, ReactionSpec, RegularizedPhi};

/// Maximal number of step halvings in the damped Newton line search.
pub const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub r_schedule: Vec<f64>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub damping: f64,
    /// Requested snapshot times; each is rounded to the nearest step. `t = 0` and
    /// `t_end` are always recorded.
    pub snapshot_times: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            r_schedule: vec![1e4],
            newton_tol: 1e-10,
            newton_max_iter: 50,
            damping: 1.0,
            snapshot_times: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Parameter(format!("dt must be positive (got {})", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Parameter(format!(
                "t_end must be nonnegative (got {})",
                self.t_end
            )));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::Parameter("newton_tol must be positive".into()));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::Parameter("newton_max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Parameter(format!(
                "damping must lie in (0, 1] (got {})",
                self.damping
            )));
        }
        if self.r_schedule.is_empty() {
            return Err(Error::Parameter("R_schedule must not be empty".into()));
        }
        if self.r_schedule.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("R_schedule must be strictly increasing".into()));
        }
        if let Some(r) = self.r_schedule.iter().find(|&&r| !(r > 1.0)) {
            return Err(Error::Parameter(format!("regularization index {r} must exceed 1")));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Snapshot every `every` steps.
    pub fn with_snapshot_every(mut self, every: usize) -> Self {
        let every = every.max(1);
        self.snapshot_times = (0..=self.steps())
            .step_by(every)
            .map(|k| k as f64 * self.dt)
            .collect();
        self
    }

    fn snapshot_steps(&self) -> Vec<bool> {
        let n = self.steps();
        let mut marks = vec![false; n + 1];
        marks[0] = true;
        marks[n] = true;
        for &t in &self.snapshot_times {
            let k = (t / self.dt).round();
            if k >= 0.0 && (k as usize) <= n {
                marks[k as usize] = true;
            }
        }
        marks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Scalar(StateField),
    Coupled(CoupledState),
}

impl State {
    pub fn grid(&self) -> &Grid {
        self.u().grid()
    }

    pub fn u(&self) -> &StateField {
        match self {
            State::Scalar(u) => u,
            State::Coupled(c) => &c.u,
        }
    }

    pub fn v(&self) -> Option<&StateField> {
        match self {
            State::Scalar(_) => None,
            State::Coupled(c) => Some(&c.v),
        }
    }

    pub fn is_coupled(&self) -> bool {
        matches!(self, State::Coupled(_))
    }

    /// `||u1 - u2||_L1 (+ ||v1 - v2||_L1)`.
    pub fn l1_distance(&self, other: &State) -> Result<f64> {
        if self.grid() != other.grid() || self.is_coupled() != other.is_coupled() {
            return Err(Error::Contract("states differ in grid or kind".into()));
        }
        let g = self.grid();
        let diff = |a: &StateField, b: &StateField| -> f64 {
            a.values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>()
                * g.cell_volume()
        };
        let mut d = diff(self.u(), other.u());
        if let (Some(a), Some(b)) = (self.v(), other.v()) {
            d += diff(a, b);
        }
        Ok(d)
    }

    pub fn l1_norm(&self) -> f64 {
        self.u().norm(NormKind::L1) + self.v().map_or(0.0, |v| v.norm(NormKind::L1))
    }

    /// `u` values followed by `v` values, if any.
    pub fn flat_values(&self) -> Vec<f64> {
        let mut out = self.u().values().to_vec();
        if let Some(v) = self.v() {
            out.extend_from_slice(v.values());
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub phi: PhiSpec,
    pub reaction: ReactionSpec,
    pub initial: State,
    pub config: SolverConfig,
}

impl Problem {
    pub fn grid(&self) -> &Grid {
        self.initial.grid()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub state: State,
}

/// Per-step record; energy terms are evaluated at the new time level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    pub max_u: f64,
    /// `<Phi_R(u), 1>`.
    pub energy: f64,
    /// `d_u ||grad phi_R(u)||^2`.
    pub dissipation: f64,
    /// `<f(u, v), phi_R(u)>`.
    pub forcing: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub r: f64,
    pub dt: f64,
    pub initial_energy: f64,
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        &self.snapshots.last().expect("trajectory holds t = 0").state
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Largest `u` over all snapshots and steps.
    pub fn max_u(&self) -> f64 {
        let from_steps = self.steps.iter().map(|s| s.max_u).fold(f64::NEG_INFINITY, f64::max);
        let from_snaps = self
            .snapshots
            .iter()
            .map(|s| s.state.u().max())
            .fold(f64::NEG_INFINITY, f64::max);
        from_steps.max(from_snaps)
    }

    /// Energy sequence `E(t_0), E(t_1), ...` over every step.
    pub fn energies(&self) -> Vec<f64> {
        std::iter::once(self.initial_energy)
            .chain(self.steps.iter().map(|s| s.energy))
            .collect()
    }
}

/// A run that stopped early; `partial` holds everything computed before `error`.
#[derive(Debug, Clone)]
pub struct SolveFailure {
    pub partial: Trajectory,
    pub error: Error,
}

impl std::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} ({} snapshots retained)",
            self.error,
            self.partial.snapshots.len()
        )
    }
}

impl std::error::Error for SolveFailure {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl From<&SolverConfig> for NewtonOptions {
    fn from(c: &SolverConfig) -> Self {
        Self {
            tol: c.newton_tol,
            max_iter: c.newton_max_iter,
            damping: c.damping,
        }
    }
}

impl Default for NewtonOptions {
    fn default() -> Self {
        (&SolverConfig::default()).into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Energy, dissipation and forcing of `state` under `phi_r`.
pub fn energy_terms(phi_r: &RegularizedPhi, reaction: &ReactionSpec, state: &State) -> (f64, f64, f64) {
    let grid = state.grid();
    let u = state.u().values();
    let phi_u: Vec<f64> = u.iter().map(|&z| phi_r.value(z)).collect();
    let energy = u.iter().map(|&z| phi_r.primitive(z)).sum::<f64>() * grid.cell_volume();
    let (du, _) = reaction.diffusion();
    let dissipation = du * grid.h1_semi_sq(&phi_u);
    let v = state.v().map(|v| v.values());
    let forcing = (0..u.len())
        .map(|k| {
            let vk = v.map_or(0.0, |v| v[k]);
            reaction.eval_raw(grid.coords(k), u[k], vk).0 * phi_u[k]
        })
        .sum::<f64>()
        * grid.cell_volume();
    (energy, dissipation, forcing)
}

/// Reusable backward-Euler stepper for one grid, `phi_R`, reaction and `dt`.
pub struct Stepper<'a> {
    grid: Grid,
    phi_r: &'a RegularizedPhi,
    reaction: &'a ReactionSpec,
    dt: f64,
    newton: NewtonOptions,
    coords: Vec<[f64; 2]>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        grid: Grid,
        phi_r: &'a RegularizedPhi,
        reaction: &'a ReactionSpec,
        dt: f64,
        newton: NewtonOptions,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Parameter(format!("dt must be positive (got {dt})")));
        }
        let coords = (0..grid.len()).map(|k| grid.coords(k)).collect();
        Ok(Self {
            grid,
            phi_r,
            reaction,
            dt,
            newton,
            coords,
        })
    }

    fn inv_h2(&self) -> [f64; 2] {
        let h = self.grid.spacing();
        let hy = if self.grid.dim() == 2 { h[1] } else { f64::INFINITY };
        [1.0 / (h[0] * h[0]), 1.0 / (hy * hy)]
    }

    /// Neighbours of node `k` with their `1/h^2` weights; ghosts are omitted.
    fn neighbours(&self, k: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let n = self.grid.counts();
        let [ix2, iy2] = self.inv_h2();
        let (i, j) = (k % n[0], k / n[0]);
        if i > 0 {
            out.push((k - 1, ix2));
        }
        if i + 1 < n[0] {
            out.push((k + 1, ix2));
        }
        if self.grid.dim() == 2 {
            if j > 0 {
                out.push((k - n[0], iy2));
            }
            if j + 1 < n[1] {
                out.push((k + n[0], iy2));
            }
        }
    }

    fn centre_weight(&self) -> f64 {
        let [ix2, iy2] = self.inv_h2();
        2.0 * ix2 + if self.grid.dim() == 2 { 2.0 * iy2 } else { 0.0 }
    }

    fn scalar_residual(&self, u: &[f64], old: &[f64], out: &mut [f64]) {
        let (du, _) = self.reaction.diffusion();
        let phi_u: Vec<f64> = u.iter().map(|&z| self.phi_r.value(z)).collect();
        self.grid
            .laplacian_apply(&phi_u, out)
            .expect("stepper buffers match the grid");
        for k in 0..u.len() {
            let f = self.reaction.eval_raw(self.coords[k], u[k], 0.0).0;
            out[k] = u[k] - old[k] - self.dt * (du * out[k] + f);
        }
    }

    /// One backward-Euler step of `u_t = d_u Lap phi_R(u) + f(x, u)`.
    pub fn step_scalar(&self, state: &StateField, t_new: f64) -> Result<(StateField, NewtonStats)> {
        if state.grid() != &self.grid {
            return Err(Error::Contract("state grid differs from stepper grid".into()));
        }
        let n = self.grid.len();
        let old = state.values();
        let mut u = old.to_vec();
        let mut res = vec![0.0; n];
        self.scalar_residual(&u, old, &mut res);
        let mut norm = sup(&res);
        let (du, _) = self.reaction.diffusion();
        let centre = self.centre_weight();
        let mut nbrs = Vec::with_capacity(4);
        let mut jac = BandedMatrix::zeros(n, self.grid.stride());
        let mut trial = vec![0.0; n];
        let mut trial_res = vec![0.0; n];
        let mut iterations = 0;
        while iterations == 0 || !(norm < self.newton.tol) {
            if iterations >= self.newton.max_iter || !norm.is_finite() {
                return Err(Error::NewtonNonConvergence {
                    t: t_new,
                    iterations,
                    residual: norm,
                });
            }
            jac.clear();
            let slope: Vec<f64> = u.iter().map(|&z| self.phi_r.derivative(z)).collect();
            for k in 0..n {
                let fu = self.reaction.partials(self.coords[k], u[k], 0.0).fu;
                jac.add(k, k, 1.0 + self.dt * du * centre * slope[k] - self.dt * fu);
                self.neighbours(k, &mut nbrs);
                for &(m, w) in &nbrs {
                    jac.add(k, m, -self.dt * du * w * slope[m]);
                }
            }
            let mut delta: Vec<f64> = res.iter().map(|r| -r).collect();
            jac.solve_in_place(&mut delta)?;
            let mut lambda = self.newton.damping;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                for k in 0..n {
                    trial[k] = u[k] + lambda * delta[k];
                }
                self.scalar_residual(&trial, old, &mut trial_res);
                let trial_norm = sup(&trial_res);
                if trial_norm < norm || trial_norm < self.newton.tol {
                    std::mem::swap(&mut u, &mut trial);
                    std::mem::swap(&mut res, &mut trial_res);
                    norm = trial_norm;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            iterations += 1;
            if !accepted {
                return Err(Error::NewtonNonConvergence {
                    t: t_new,
                    iterations,
                    residual: norm,
                });
            }
        }
        if let Some(bad) = u.iter().find(|&&z| !state.range().contains(z)) {
            return Err(Error::Stability { t: t_new, value: *bad });
        }
        let next = StateField::new(self.grid, u, state.range())?;
        Ok((
            next,
            NewtonStats {
                iterations,
                residual: norm,
            },
        ))
    }

    fn coupled_residual(&self, x: &[f64], old: &[f64], out: &mut [f64]) {
        let n = self.grid.len();
        let (du, dv) = self.reaction.diffusion();
        let phi_u: Vec<f64> = (0..n).map(|k| self.phi_r.value(x[2 * k])).collect();
        let v: Vec<f64> = (0..n).map(|k| x[2 * k + 1]).collect();
        let lap_phi = self.grid.laplacian(&phi_u).expect("grid-sized buffer");
        let lap_v = self.grid.laplacian(&v).expect("grid-sized buffer");
        for k in 0..n {
            let (f, g) = self.reaction.eval_raw(self.coords[k], x[2 * k], v[k]);
            out[2 * k] = x[2 * k] - old[2 * k] - self.dt * (du * lap_phi[k] + f);
            out[2 * k + 1] = v[k] - old[2 * k + 1] - self.dt * (dv * lap_v[k] + g);
        }
    }

    /// One backward-Euler step of the coupled `(u, v)` system, solved as one
    /// interleaved block system.
    pub fn step_coupled(&self, state: &CoupledState, t_new: f64) -> Result<(CoupledState, NewtonStats)> {
        if state.u.grid() != &self.grid {
            return Err(Error::Contract("state grid differs from stepper grid".into()));
        }
        let n = self.grid.len();
        let mut old = vec![0.0; 2 * n];
        for k in 0..n {
            old[2 * k] = state.u.values()[k];
            old[2 * k + 1] = state.v.values()[k];
        }
        let mut x = old.clone();
        let mut res = vec![0.0; 2 * n];
        self.coupled_residual(&x, &old, &mut res);
        let mut norm = sup(&res);
        let (du, dv) = self.reaction.diffusion();
        let centre = self.centre_weight();
        let mut nbrs = Vec::with_capacity(4);
        let mut jac = BandedMatrix::zeros(2 * n, 2 * self.grid.stride());
        let mut trial = vec![0.0; 2 * n];
        let mut trial_res = vec![0.0; 2 * n];
        let mut iterations = 0;
        while iterations == 0 || !(norm < self.newton.tol) {
            if iterations >= self.newton.max_iter || !norm.is_finite() {
                return Err(Error::NewtonNonConvergence {
                    t: t_new,
                    iterations,
                    residual: norm,
                });
            }
            jac.clear();
            let slope: Vec<f64> = (0..n).map(|k| self.phi_r.derivative(x[2 * k])).collect();
            for k in 0..n {
                let p = self.reaction.partials(self.coords[k], x[2 * k], x[2 * k + 1]);
                let (iu, iv) = (2 * k, 2 * k + 1);
                jac.add(iu, iu, 1.0 + self.dt * du * centre * slope[k] - self.dt * p.fu);
                jac.add(iu, iv, -self.dt * p.fv);
                jac.add(iv, iv, 1.0 + self.dt * dv * centre - self.dt * p.gv);
                jac.add(iv, iu, -self.dt * p.gu);
                self.neighbours(k, &mut nbrs);
                for &(m, w) in &nbrs {
                    jac.add(iu, 2 * m, -self.dt * du * w * slope[m]);
                    jac.add(iv, 2 * m + 1, -self.dt * dv * w);
                }
            }
            let mut delta: Vec<f64> = res.iter().map(|r| -r).collect();
            jac.solve_in_place(&mut delta)?;
            let mut lambda = self.newton.damping;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                for k in 0..2 * n {
                    trial[k] = x[k] + lambda * delta[k];
                }
                self.coupled_residual(&trial, &old, &mut trial_res);
                let trial_norm = sup(&trial_res);
                if trial_norm < norm || trial_norm < self.newton.tol {
                    std::mem::swap(&mut x, &mut trial);
                    std::mem::swap(&mut res, &mut trial_res);
                    norm = trial_norm;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            iterations += 1;
            if !accepted {
                return Err(Error::NewtonNonConvergence {
                    t: t_new,
                    iterations,
                    residual: norm,
                });
            }
        }
        let u: Vec<f64> = (0..n).map(|k| x[2 * k]).collect();
        let v: Vec<f64> = (0..n).map(|k| x[2 * k + 1]).collect();
        if let Some(bad) = u.iter().find(|&&z| !RangeTag::NonNegative.contains(z)) {
            return Err(Error::Stability { t: t_new, value: *bad });
        }
        if let Some(bad) = v.iter().find(|&&z| !RangeTag::Unit.contains(z)) {
            return Err(Error::Invariant(format!(
                "nutrient left [0, 1] at t = {t_new} (value {bad})"
            )));
        }
        let next = CoupledState::new(
            StateField::new(self.grid, u, RangeTag::NonNegative)?,
            StateField::new(self.grid, v, RangeTag::Unit)?,
        )?;
        Ok((
            next,
            NewtonStats {
                iterations,
                residual: norm,
            },
        ))
    }

    pub fn step(&self, state: &State, t_new: f64) -> Result<(State, NewtonStats)> {
        match state {
            State::Scalar(u) => self.step_scalar(u, t_new).map(|(s, n)| (State::Scalar(s), n)),
            State::Coupled(c) => self.step_coupled(c, t_new).map(|(s, n)| (State::Coupled(s), n)),
        }
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

pub fn step_scalar(
    state: &StateField,
    dt: f64,
    phi_r: &RegularizedPhi,
    reaction: &ReactionSpec,
    newton: NewtonOptions,
) -> Result<StateField> {
    let stepper = Stepper::new(*state.grid(), phi_r, reaction, dt, newton)?;
    stepper.step_scalar(state, dt).map(|(s, _)| s)
}

pub fn step_coupled(
    state: &CoupledState,
    dt: f64,
    phi_r: &RegularizedPhi,
    reaction: &ReactionSpec,
    newton: NewtonOptions,
) -> Result<CoupledState> {
    let stepper = Stepper::new(*state.u.grid(), phi_r, reaction, dt, newton)?;
    stepper.step_coupled(state, dt).map(|(s, _)| s)
}

/// Integrates the problem with its single regularization index.
pub fn solve(problem: &Problem) -> std::result::Result<Trajectory, SolveFailure> {
    let r = match problem.config.r_schedule.as_slice() {
        [r] => *r,
        other => {
            return Err(SolveFailure {
                partial: empty_trajectory(problem, f64::NAN),
                error: Error::Parameter(format!(
                    "solve needs exactly one regularization index (got {})",
                    other.len()
                )),
            })
        }
    };
    solve_with_r(problem, r)
}

fn empty_trajectory(problem: &Problem, r: f64) -> Trajectory {
    Trajectory {
        grid: *problem.grid(),
        r,
        dt: problem.config.dt,
        initial_energy: f64::NAN,
        snapshots: Vec::new(),
        steps: Vec::new(),
    }
}

/// Integrates the problem with regularization index `r`, ignoring `config.r_schedule`.
pub fn solve_with_r(problem: &Problem, r: f64) -> std::result::Result<Trajectory, SolveFailure> {
    let fail = |partial, error| Err(SolveFailure { partial, error });
    let config = &problem.config;
    let mut traj = empty_trajectory(problem, r);
    let mut single = config.clone();
    single.r_schedule = vec![r];
    if let Err(e) = single.validate() {
        return fail(traj, e);
    }
    if problem.initial.is_coupled() != problem.reaction.is_coupled() {
        return fail(
            traj,
            Error::Contract("coupled reactions need a coupled initial state and vice versa".into()),
        );
    }
    let phi_r = match regularize(&problem.phi, r) {
        Ok(p) => p,
        Err(e) => return fail(traj, e),
    };
    let stepper = match Stepper::new(*problem.grid(), &phi_r, &problem.reaction, config.dt, config.into()) {
        Ok(s) => s,
        Err(e) => return fail(traj, e),
    };
    let marks = config.snapshot_steps();
    let mut state = problem.initial.clone();
    traj.initial_energy = energy_terms(&phi_r, &problem.reaction, &state).0;
    traj.snapshots.push(Snapshot { t: 0.0, state: state.clone() });
    for step in 1..marks.len() {
        let t = step as f64 * config.dt;
        let (next, stats) = match stepper.step(&state, t) {
            Ok(x) => x,
            Err(e) => return fail(traj, e),
        };
        let (energy, dissipation, forcing) = energy_terms(&phi_r, &problem.reaction, &next);
        traj.steps.push(StepRecord {
            step,
            t,
            newton_iterations: stats.iterations,
            residual: stats.residual,
            max_u: next.u().max(),
            energy,
            dissipation,
            forcing,
        });
        state = next;
        if marks[step] {
            traj.snapshots.push(Snapshot { t, state: state.clone() });
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schedule: Vec<f64>,
    pub times: Vec<f64>,
    /// `d_k = max_t ||u_{R_k}(t) - u_{R_{k+1}}(t)||_L1`.
    pub distances: Vec<f64>,
    /// Per pair, the distance at each snapshot time.
    pub per_time: Vec<Vec<f64>>,
    /// `d_{k+1} / d_k`.
    pub ratios: Vec<f64>,
    pub tolerance: f64,
    pub decreasing: bool,
    pub converged: bool,
}

/// Runs the problem for every `R` in `schedule` (concurrently) and measures the
/// Cauchy gaps between consecutive indices.
pub fn r_sweep(problem: &Problem, schedule: &[f64], tolerance: f64) -> Result<(SweepReport, Vec<Trajectory>)> {
    if schedule.len() < 3 {
        return Err(Error::Parameter(format!(
            "an R sweep needs at least 3 indices (got {})",
            schedule.len()
        )));
    }
    if schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("R_schedule must be strictly increasing".into()));
    }
    let runs: Vec<_> = schedule.par_iter().map(|&r| solve_with_r(problem, r)).collect();
    let mut trajectories = Vec::with_capacity(runs.len());
    for run in runs {
        trajectories.push(run.map_err(|f| f.error)?);
    }
    let times = trajectories[0].times();
    let mut per_time = Vec::new();
    for pair in trajectories.windows(2) {
        let mut row = Vec::with_capacity(times.len());
        for (a, b) in pair[0].snapshots.iter().zip(&pair[1].snapshots) {
            row.push(a.state.l1_distance(&b.state)?);
        }
        per_time.push(row);
    }
    let distances: Vec<f64> = per_time.iter().map(|row| row.iter().copied().fold(0.0, f64::max)).collect();
    let ratios = distances
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let all_zero = distances.iter().all(|&d| d == 0.0);
    let decreasing = all_zero || distances.windows(2).all(|w| w[1] < w[0]);
    let converged = decreasing && *distances.last().unwrap() < tolerance;
    Ok((
        SweepReport {
            schedule: schedule.to_vec(),
            times,
            distances,
            per_time,
            ratios,
            tolerance,
            decreasing,
            converged,
        },
        trajectories,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierBound {
    pub delta: f64,
    pub w_sup: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Solves `-Lap w = f_sup` with `w = phi(1 - eta/2)` on the boundary and returns
/// `delta = 1 - phi^-1(||w||_sup + 1)`.
pub fn barrier_bound(grid: &Grid, phi: &PhiSpec, f_sup: f64, eta: f64) -> Result<BarrierBound> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Parameter(format!("eta must lie in (0, 1) (got {eta})")));
    }
    if !(f_sup >= 0.0) {
        return Err(Error::Parameter(format!("f_sup must be nonnegative (got {f_sup})")));
    }
    let c1 = f_sup;
    let c2 = phi.phi(1.0 - 0.5 * eta)?;
    let n = grid.len();
    let h = grid.spacing();
    let counts = grid.counts();
    let mut a = BandedMatrix::zeros(n, grid.stride());
    let mut b = vec![c1; n];
    for k in 0..n {
        let i = k % counts[0];
        let j = k / counts[0];
        let mut axes = vec![(i, counts[0], 1usize, h[0])];
        if grid.dim() == 2 {
            axes.push((j, counts[1], counts[0], h[1]));
        }
        for (idx, len, stride, hh) in axes {
            let w = 1.0 / (hh * hh);
            a.add(k, k, 2.0 * w);
            if idx > 0 {
                a.add(k, k - stride, -w);
            } else {
                b[k] += w * c2;
            }
            if idx + 1 < len {
                a.add(k, k + stride, -w);
            } else {
                b[k] += w * c2;
            }
        }
    }
    a.solve_in_place(&mut b)?;
    let w_sup = b.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x.abs()));
    let delta = 1.0 - phi.inverse(w_sup + 1.0)?;
    Ok(BarrierBound { delta, w_sup, c1, c2 })
}
