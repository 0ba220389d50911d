//! Long-time analysis: omega-limit sampling, greedy epsilon-nets, box-counting
//! dimension and exponential attraction rates in the discrete L1 metric.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{linear_fit, NOISE_FLOOR};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{solve_with_r, Problem, State, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    L1,
    L2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub t: f64,
}

/// Finite point cloud of grid states; coupled states are stored as `u` followed by `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    grid: Grid,
    points: Vec<Vec<f64>>,
    pub metric: Metric,
    pub provenance: Vec<Provenance>,
}

impl SnapshotSet {
    pub fn from_states(states: &[State], metric: Metric, provenance: Vec<Provenance>) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::Parameter("a snapshot set built from states needs at least one".into()));
        };
        let tag = |s: &State| (s.u().range(), s.is_coupled());
        for s in states {
            if s.grid() != first.grid() || tag(s) != tag(first) {
                return Err(Error::Contract("snapshot set points must share grid and range".into()));
            }
        }
        Ok(Self {
            grid: *first.grid(),
            points: states.iter().map(State::flat_values).collect(),
            metric,
            provenance,
        })
    }

    /// Raw point cloud; every point must have `grid.len()` or `2 grid.len()` values.
    pub fn from_values(grid: Grid, points: Vec<Vec<f64>>, metric: Metric) -> Result<Self> {
        if let Some(first) = points.first() {
            if first.len() != grid.len() && first.len() != 2 * grid.len() {
                return Err(Error::Parameter("point length does not match the grid".into()));
            }
            if points.iter().any(|p| p.len() != first.len()) {
                return Err(Error::Contract("snapshot set points differ in length".into()));
            }
        }
        Ok(Self {
            grid,
            points,
            metric,
            provenance: Vec::new(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn distance_to(&self, i: usize, x: &[f64]) -> f64 {
        metric_distance(self.metric, self.grid.cell_volume(), &self.points[i], x)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance_to(i, &self.points[j])
    }

    /// Full symmetric distance matrix, rows computed concurrently.
    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .into_par_iter()
            .map(|i| (0..self.len()).map(|j| self.distance(i, j)).collect())
            .collect()
    }
}

fn metric_distance(metric: Metric, vol: f64, a: &[f64], b: &[f64]) -> f64 {
    match metric {
        Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * vol,
        Metric::L2 => (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() * vol).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverStrategy {
    /// Next center is the point farthest from all current centers (ties: lowest index).
    #[default]
    FarthestPoint,
    /// Next center is the point whose `eps`-ball holds the most uncovered points.
    MaxCoverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringResult {
    pub eps_list: Vec<f64>,
    pub counts: Vec<usize>,
    pub centers: Vec<Vec<usize>>,
}

pub fn greedy_cover(set: &SnapshotSet, eps: f64) -> Result<CoveringResult> {
    greedy_cover_with(set, eps, CoverStrategy::FarthestPoint)
}

pub fn greedy_cover_with(set: &SnapshotSet, eps: f64, strategy: CoverStrategy) -> Result<CoveringResult> {
    let centers = cover_centers(set, eps, strategy)?;
    Ok(CoveringResult {
        eps_list: vec![eps],
        counts: vec![centers.len()],
        centers: vec![centers],
    })
}

/// Covers for each `eps` in `eps_list` (sorted to decreasing order).
pub fn cover_counts(set: &SnapshotSet, eps_list: &[f64], strategy: CoverStrategy) -> Result<CoveringResult> {
    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    let centers = eps_sorted
        .par_iter()
        .map(|&e| cover_centers(set, e, strategy))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoveringResult {
        counts: centers.iter().map(Vec::len).collect(),
        eps_list: eps_sorted,
        centers,
    })
}

fn cover_centers(set: &SnapshotSet, eps: f64, strategy: CoverStrategy) -> Result<Vec<usize>> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("covering radius must be positive (got {eps})")));
    }
    if set.is_empty() {
        return Ok(Vec::new());
    }
    let n = set.len();
    let mut nearest = vec![f64::INFINITY; n];
    let mut centers = Vec::new();
    match strategy {
        CoverStrategy::FarthestPoint => {
            let mut next = 0;
            loop {
                centers.push(next);
                let c = &set.points[next];
                nearest
                    .par_iter_mut()
                    .enumerate()
                    .for_each(|(i, d)| *d = d.min(set.distance_to(i, c)));
                let (far, dist) = nearest
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
                if dist <= eps {
                    break;
                }
                next = far;
            }
        }
        CoverStrategy::MaxCoverage => {
            let dm = set.distance_matrix();
            let mut covered = vec![false; n];
            while covered.iter().any(|c| !c) {
                let (best, _) = (0..n)
                    .map(|i| (i, (0..n).filter(|&j| !covered[j] && dm[i][j] <= eps).count()))
                    .fold((0, 0), |b, (i, c)| if c > b.1 { (i, c) } else { b });
                centers.push(best);
                for j in 0..n {
                    if dm[best][j] <= eps {
                        covered[j] = true;
                    }
                    nearest[j] = nearest[j].min(dm[best][j]);
                }
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| !(nearest[i] <= eps)) {
        return Err(Error::Invariant(format!(
            "point {i} is {} from the nearest center (eps {eps})",
            nearest[i]
        )));
    }
    Ok(centers)
}

/// `log2` of the greedy covering number.
pub fn epsilon_entropy(set: &SnapshotSet, eps: f64) -> Result<f64> {
    let n = cover_centers(set, eps, CoverStrategy::FarthestPoint)?.len();
    Ok(if n == 0 { 0.0 } else { (n as f64).log2() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionFit {
    pub dimension: f64,
    pub intercept: f64,
    pub r2: f64,
    pub unstable: bool,
    pub covering: CoveringResult,
}

/// Least-squares slope of `log N_eps` against `log(1/eps)`.
pub fn fractal_dimension(set: &SnapshotSet, eps_list: &[f64]) -> Result<DimensionFit> {
    fractal_dimension_with(set, eps_list, CoverStrategy::FarthestPoint)
}

pub fn fractal_dimension_with(set: &SnapshotSet, eps_list: &[f64], strategy: CoverStrategy) -> Result<DimensionFit> {
    if eps_list.len() < 4 {
        return Err(Error::Parameter(format!(
            "dimension fit needs at least 4 radii (got {})",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::Parameter("covering radii must be positive and finite".into()));
    }
    let max = eps_list.iter().copied().fold(0.0, f64::max);
    let min = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    if max / min < 10.0 * (1.0 - 1e-12) {
        return Err(Error::Parameter(format!(
            "covering radii must span a decade (got {min}..{max})"
        )));
    }
    let covering = cover_counts(set, eps_list, strategy)?;
    if covering.counts.contains(&0) {
        return Err(Error::Parameter("dimension of an empty set is undefined".into()));
    }
    let xs: Vec<f64> = covering.eps_list.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = covering.counts.iter().map(|&c| (c as f64).ln()).collect();
    let (dimension, intercept, r2) = linear_fit(&xs, &ys)?;
    Ok(DimensionFit {
        dimension,
        intercept,
        r2,
        unstable: r2 < 0.9,
        covering,
    })
}

#[derive(Debug, Clone)]
pub struct OmegaSample {
    pub set: SnapshotSet,
    pub trajectories: Vec<Trajectory>,
    pub warnings: Vec<String>,
}

fn window_times(burn_in: f64, n_samples: usize, gap: f64) -> Vec<f64> {
    (0..n_samples).map(|k| burn_in + k as f64 * gap).collect()
}

/// Integrates each problem past `burn_in` and records states every `sample_gap`,
/// pooling all runs into one set. The problems' own snapshot times up to the end
/// of the window are kept in the returned trajectories. A failing run keeps the
/// samples it reached.
pub fn sample_omega_limit(
    problems: &[Problem],
    burn_in: f64,
    n_samples: usize,
    sample_gap: f64,
    metric: Metric,
) -> Result<OmegaSample> {
    if problems.is_empty() {
        return Err(Error::Parameter("omega-limit sampling needs at least one scenario".into()));
    }
    if !(burn_in >= 1.0) {
        return Err(Error::Parameter(format!("burn-in must be at least 1 (got {burn_in})")));
    }
    if n_samples < 2 || !(sample_gap > 0.0) {
        return Err(Error::Parameter("need at least 2 samples and a positive gap".into()));
    }
    let runs: Vec<_> = problems
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut p = p.clone();
            p.config.t_end = burn_in + (n_samples - 1) as f64 * sample_gap;
            let t_end = p.config.t_end;
            p.config.snapshot_times.retain(|&t| t <= t_end);
            p.config.snapshot_times.extend(window_times(burn_in, n_samples, sample_gap));
            let r = *p.config.r_schedule.last().unwrap_or(&f64::NAN);
            (i, p.config.dt, solve_with_r(&p, r))
        })
        .collect();
    let mut states = Vec::new();
    let mut provenance = Vec::new();
    let mut trajectories = Vec::new();
    let mut warnings = Vec::new();
    for (i, dt, run) in runs {
        let traj = match run {
            Ok(t) => t,
            Err(f) => {
                warnings.push(format!("scenario {i}: {}", f.error));
                f.partial
            }
        };
        let window = window_times(burn_in, n_samples, sample_gap);
        for s in traj
            .snapshots
            .iter()
            .filter(|s| window.iter().any(|&w| (s.t - w).abs() <= 0.5 * dt))
        {
            states.push(s.state.clone());
            provenance.push(Provenance {
                source: format!("scenario-{i}"),
                t: s.t,
            });
        }
        trajectories.push(traj);
    }
    if states.is_empty() {
        return Err(Error::Numerical {
            what: format!("omega-limit sampling ({})", warnings.join("; ")),
            residual: f64::NAN,
        });
    }
    Ok(OmegaSample {
        set: SnapshotSet::from_states(&states, metric, provenance)?,
        trajectories,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionFit {
    pub alpha: f64,
    pub q: f64,
    pub r2: f64,
    pub saturated: bool,
    /// Set when the log-linear fit is poor, i.e. decay is not clearly exponential.
    pub non_exponential: bool,
    pub samples: Vec<(f64, f64)>,
}

/// Fits `d(t) ~ Q e^{-alpha t}`, `d(t)` the distance from each trajectory state
/// to the candidate set; samples below the noise floor are dropped.
pub fn fit_attraction_rate(trajectories: &[Trajectory], candidate: &SnapshotSet) -> Result<AttractionFit> {
    fit_attraction_rate_from(trajectories, candidate, 0.0)
}

/// As [`fit_attraction_rate`], using only snapshots with `t >= t_from`.
pub fn fit_attraction_rate_from(
    trajectories: &[Trajectory],
    candidate: &SnapshotSet,
    t_from: f64,
) -> Result<AttractionFit> {
    fit_attraction_rate_window(trajectories, candidate, t_from, f64::INFINITY)
}

/// As [`fit_attraction_rate`], using only snapshots with `t_from <= t <= t_until`.
pub fn fit_attraction_rate_window(
    trajectories: &[Trajectory],
    candidate: &SnapshotSet,
    t_from: f64,
    t_until: f64,
) -> Result<AttractionFit> {
    if candidate.is_empty() {
        return Err(Error::Parameter("candidate set is empty".into()));
    }
    if let Some(start) = candidate.provenance.iter().map(|p| p.t).reduce(f64::min) {
        let reach = trajectories
            .iter()
            .flat_map(|t| t.snapshots.last().map(|s| s.t))
            .fold(f64::NEG_INFINITY, f64::max);
        if reach < start {
            return Err(Error::Precondition(format!(
                "trajectories end at {reach}, before the candidate window starts at {start}"
            )));
        }
    }
    let mut samples = Vec::new();
    for traj in trajectories {
        if traj.grid != *candidate.grid() {
            return Err(Error::Contract("trajectory and candidate grids differ".into()));
        }
        for s in traj.snapshots.iter().filter(|s| s.t >= t_from && s.t <= t_until) {
            let x = s.state.flat_values();
            if x.len() != candidate.points[0].len() {
                return Err(Error::Contract("trajectory and candidate kinds differ".into()));
            }
            let d = (0..candidate.len())
                .map(|i| candidate.distance_to(i, &x))
                .fold(f64::INFINITY, f64::min);
            samples.push((s.t, d));
        }
    }
    let (ts, logs): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|(_, d)| *d > NOISE_FLOOR)
        .map(|&(t, d)| (t, d.ln()))
        .unzip();
    let distinct_times = ts.iter().any(|&t| (t - ts[0]).abs() > 0.0);
    if ts.len() < 2 || !distinct_times {
        return Ok(AttractionFit {
            alpha: f64::INFINITY,
            q: 0.0,
            r2: 1.0,
            saturated: true,
            non_exponential: false,
            samples,
        });
    }
    let (slope, intercept, r2) = linear_fit(&ts, &logs)?;
    Ok(AttractionFit {
        alpha: -slope,
        q: intercept.exp(),
        r2,
        saturated: false,
        non_exponential: r2 < 0.9,
        samples,
    })
}

/// `k`-parameter affine family `sum_i s_i w_i` with `per_axis` values of each
/// `s_i` in `[0, 1]`; the `w_i` have unit L1 norm and disjoint supports.
pub fn synthetic_family(grid: &Grid, k: usize, per_axis: usize) -> Result<SnapshotSet> {
    if k > 3 || per_axis < 2 {
        return Err(Error::Parameter("synthetic families need k <= 3 and at least 2 values per axis".into()));
    }
    let n = grid.len();
    if k == 0 {
        return SnapshotSet::from_values(*grid, vec![vec![0.0; n]], Metric::L1);
    }
    let block = n / k;
    if block == 0 {
        return Err(Error::Parameter("grid too small for the family".into()));
    }
    let height = 1.0 / (block as f64 * grid.cell_volume());
    let mut points = Vec::new();
    let total = per_axis.pow(k as u32);
    for idx in 0..total {
        let mut p = vec![0.0; n];
        let mut rest = idx;
        for axis in 0..k {
            let s = (rest % per_axis) as f64 / (per_axis - 1) as f64;
            rest /= per_axis;
            for v in &mut p[axis * block..(axis + 1) * block] {
                *v = s * height;
            }
        }
        points.push(p);
    }
    SnapshotSet::from_values(*grid, points, Metric::L1)
}
