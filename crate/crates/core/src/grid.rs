//! Uniform tensor grids on rectangles with homogeneous Dirichlet boundary data.
//!
//! Node `k` of a 2D grid sits at `((i + 1) hx, (j + 1) hy)` with `k = i + nx * j`;
//! boundary (ghost) values are identically zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack below zero tolerated for nonnegative fields after a nonlinear solve.
pub const RANGE_TOL: f64 = 1e-10;
/// Maximum number of point pairs visited by the Hölder seminorm.
pub const HOLDER_MAX_PAIRS: usize = 1_000_000;
pub const HOLDER_SEED: u64 = 0x5eed_0f_401de5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    extents: [f64; 2],
    n: [usize; 2],
    h: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L1,
    L2,
    H1Semi,
    Sup,
}

pub fn build_grid(dim: usize, extents: &[f64], n: &[usize]) -> Result<Grid> {
    Grid::new(dim, extents, n)
}

impl Grid {
    pub fn new(dim: usize, extents: &[f64], n: &[usize]) -> Result<Self> {
        if !(1..=2).contains(&dim) || extents.len() != dim || n.len() != dim {
            return Err(Error::Parameter(format!(
                "grid needs dim in {{1, 2}} with one extent and count per axis \
                 (dim {dim}, {} extents, {} counts)",
                extents.len(),
                n.len()
            )));
        }
        let mut g = Grid {
            dim,
            extents: [1.0, 1.0],
            n: [1, 1],
            h: [1.0, 1.0],
        };
        for axis in 0..dim {
            if !(extents[axis] > 0.0) || !extents[axis].is_finite() {
                return Err(Error::Parameter(format!(
                    "extent along axis {axis} must be positive (got {})",
                    extents[axis]
                )));
            }
            if n[axis] < 3 {
                return Err(Error::Parameter(format!(
                    "need at least 3 interior nodes along axis {axis} (got {})",
                    n[axis]
                )));
            }
            g.extents[axis] = extents[axis];
            g.n[axis] = n[axis];
            g.h[axis] = extents[axis] / (n[axis] + 1) as f64;
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents[..self.dim]
    }

    pub fn counts(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h[..self.dim]
    }

    /// Smallest spacing over all axes.
    pub fn h_min(&self) -> f64 {
        self.spacing().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.n[0] * if self.dim == 2 { self.n[1] } else { 1 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// Offset between neighbours along the slowest axis, i.e. the stencil half-bandwidth.
    pub fn stride(&self) -> usize {
        if self.dim == 2 {
            self.n[0]
        } else {
            1
        }
    }

    pub fn coords(&self, k: usize) -> [f64; 2] {
        let i = k % self.n[0];
        let j = k / self.n[0];
        let x = (i + 1) as f64 * self.h[0];
        let y = if self.dim == 2 {
            (j + 1) as f64 * self.h[1]
        } else {
            0.0
        };
        [x, y]
    }

    pub fn center(&self) -> [f64; 2] {
        let y = if self.dim == 2 { 0.5 * self.extents[1] } else { 0.0 };
        [0.5 * self.extents[0], y]
    }

    pub fn distance(&self, p: [f64; 2], q: [f64; 2]) -> f64 {
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }

    fn check_len(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.len() {
            return Err(Error::Contract(format!(
                "field has {} values on a grid of {} nodes",
                w.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// Second-order centred Laplacian with zero ghost values.
    pub fn laplacian_apply(&self, w: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(w)?;
        self.check_len(out)?;
        let (nx, ny) = (self.n[0], if self.dim == 2 { self.n[1] } else { 1 });
        let ix2 = 1.0 / (self.h[0] * self.h[0]);
        let iy2 = 1.0 / (self.h[1] * self.h[1]);
        for j in 0..ny {
            for i in 0..nx {
                let k = i + nx * j;
                let left = if i > 0 { w[k - 1] } else { 0.0 };
                let right = if i + 1 < nx { w[k + 1] } else { 0.0 };
                let mut acc = (left - 2.0 * w[k] + right) * ix2;
                if self.dim == 2 {
                    let down = if j > 0 { w[k - nx] } else { 0.0 };
                    let up = if j + 1 < ny { w[k + nx] } else { 0.0 };
                    acc += (down - 2.0 * w[k] + up) * iy2;
                }
                out[k] = acc;
            }
        }
        Ok(())
    }

    pub fn laplacian(&self, w: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; w.len()];
        self.laplacian_apply(w, &mut out)?;
        Ok(out)
    }

    /// Discrete `L^2` inner product `sum a b * cell volume`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.cell_volume()
    }

    /// Squared forward-difference gradient norm over all edges, ghosts included.
    pub fn h1_semi_sq(&self, w: &[f64]) -> f64 {
        let (nx, ny) = (self.n[0], if self.dim == 2 { self.n[1] } else { 1 });
        let at = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
                0.0
            } else {
                w[i as usize + nx * j as usize]
            }
        };
        let mut sum = 0.0;
        for j in 0..ny as isize {
            for i in -1..nx as isize {
                let d = (at(i + 1, j) - at(i, j)) / self.h[0];
                sum += d * d;
            }
        }
        if self.dim == 2 {
            for j in -1..ny as isize {
                for i in 0..nx as isize {
                    let d = (at(i, j + 1) - at(i, j)) / self.h[1];
                    sum += d * d;
                }
            }
        }
        sum * self.cell_volume()
    }

    pub fn norm(&self, w: &[f64], kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => w.iter().map(|x| x.abs()).sum::<f64>() * self.cell_volume(),
            NormKind::L2 => self.inner(w, w).sqrt(),
            NormKind::H1Semi => self.h1_semi_sq(w).sqrt(),
            NormKind::Sup => w.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// Coordinates of the boundary (ghost) nodes surrounding the interior.
    fn ghost_coords(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        if self.dim == 1 {
            out.push([0.0, 0.0]);
            out.push([self.extents[0], 0.0]);
        } else {
            let (nx, ny) = (self.n[0], self.n[1]);
            for i in 0..nx + 2 {
                let x = i as f64 * self.h[0];
                out.push([x, 0.0]);
                out.push([x, self.extents[1]]);
            }
            for j in 1..ny + 1 {
                let y = j as f64 * self.h[1];
                out.push([0.0, y]);
                out.push([self.extents[0], y]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeTag {
    /// Values in `(-1, 1)`.
    Signed,
    /// Values in `[0, 1)`.
    NonNegative,
    /// Values in `[0, 1]`.
    Unit,
}

impl RangeTag {
    pub fn contains(self, x: f64) -> bool {
        match self {
            RangeTag::Signed => x > -1.0 && x < 1.0,
            RangeTag::NonNegative => (-RANGE_TOL..1.0).contains(&x),
            RangeTag::Unit => (-RANGE_TOL..=1.0 + RANGE_TOL).contains(&x),
        }
    }
}

/// Grid function with a range tag; all values lie inside the tagged range.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    grid: Grid,
    values: Vec<f64>,
    range: RangeTag,
}

impl StateField {
    pub fn new(grid: Grid, values: Vec<f64>, range: RangeTag) -> Result<Self> {
        grid.check_len(&values)?;
        if let Some(bad) = values.iter().find(|&&x| !range.contains(x)) {
            return Err(Error::Domain {
                what: "state value",
                value: *bad,
            });
        }
        Ok(Self {
            grid,
            values,
            range,
        })
    }

    pub fn zeros(grid: Grid, range: RangeTag) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            range,
        }
    }

    pub fn from_fn(grid: Grid, range: RangeTag, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(grid.coords(k))).collect();
        Self::new(grid, values, range)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> RangeTag {
        self.range
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        self.grid.norm(&self.values, kind)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Biomass-type `u` in `[0, 1)` with nutrient-type `v` in `[0, 1]` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub u: StateField,
    pub v: StateField,
}

impl CoupledState {
    pub fn new(u: StateField, v: StateField) -> Result<Self> {
        if u.grid != v.grid {
            return Err(Error::Contract("u and v live on different grids".into()));
        }
        if u.range != RangeTag::NonNegative || v.range != RangeTag::Unit {
            return Err(Error::Contract(
                "coupled states need u tagged [0,1) and v tagged [0,1]".into(),
            ));
        }
        Ok(Self { u, v })
    }
}

/// Level sets `L(theta) = {|u0| > theta}` and `S(theta) = {|u0| < theta}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSets {
    pub theta: f64,
    pub l_mask: Vec<bool>,
    pub s_mask: Vec<bool>,
    /// Nodes with `|u0| = theta` exactly.
    pub boundary_nodes: Vec<usize>,
}

pub fn level_sets(u0: &StateField, theta: f64) -> Result<LevelSets> {
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!("theta must be positive (got {theta})")));
    }
    let mut l_mask = Vec::with_capacity(u0.values.len());
    let mut s_mask = Vec::with_capacity(u0.values.len());
    let mut boundary_nodes = Vec::new();
    for (k, &x) in u0.values.iter().enumerate() {
        let a = x.abs();
        l_mask.push(a > theta);
        s_mask.push(a < theta);
        if a == theta {
            boundary_nodes.push(k);
        }
    }
    Ok(LevelSets {
        theta,
        l_mask,
        s_mask,
        boundary_nodes,
    })
}

/// Nodes of `S(theta)` with a grid neighbour outside `S(theta)`.
fn discrete_s_boundary(grid: &Grid, sets: &LevelSets) -> Vec<usize> {
    let nx = grid.n[0];
    let ny = if grid.dim == 2 { grid.n[1] } else { 1 };
    let mut out = Vec::new();
    for k in 0..grid.len() {
        if !sets.s_mask[k] {
            continue;
        }
        let (i, j) = (k % nx, k / nx);
        let mut nbrs = Vec::with_capacity(4);
        if i > 0 {
            nbrs.push(k - 1);
        }
        if i + 1 < nx {
            nbrs.push(k + 1);
        }
        if grid.dim == 2 {
            if j > 0 {
                nbrs.push(k - nx);
            }
            if j + 1 < ny {
                nbrs.push(k + nx);
            }
        }
        if nbrs.iter().any(|&m| !sets.s_mask[m]) {
            out.push(k);
        }
    }
    out
}

/// Minimal node distance between the discrete boundaries of `S(theta + delta)` and
/// `S(theta)`; `None` when either boundary is empty.
pub fn level_set_separation(u0: &StateField, theta: f64, delta: f64) -> Result<Option<f64>> {
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("delta must be positive (got {delta})")));
    }
    let grid = &u0.grid;
    let inner = discrete_s_boundary(grid, &level_sets(u0, theta)?);
    let outer = discrete_s_boundary(grid, &level_sets(u0, theta + delta)?);
    if inner.is_empty() || outer.is_empty() {
        return Ok(None);
    }
    let mut best = f64::INFINITY;
    for &a in &outer {
        for &b in &inner {
            best = best.min(grid.distance(grid.coords(a), grid.coords(b)));
        }
    }
    Ok(Some(best))
}

fn holder_over_points(points: &[([f64; 3], f64)], alpha: f64, seed: u64) -> f64 {
    let p = points.len();
    if p < 2 {
        return 0.0;
    }
    let quotient = |a: &([f64; 3], f64), b: &([f64; 3], f64)| -> f64 {
        let dt = (a.0[0] - b.0[0]).abs();
        let dx = ((a.0[1] - b.0[1]).powi(2) + (a.0[2] - b.0[2]).powi(2)).sqrt();
        let d = dt + dx;
        if d == 0.0 {
            0.0
        } else {
            (a.1 - b.1).abs() / d.powf(alpha)
        }
    };
    let total = p * (p - 1) / 2;
    let mut best: f64 = 0.0;
    if total <= HOLDER_MAX_PAIRS {
        for i in 0..p {
            for j in i + 1..p {
                best = best.max(quotient(&points[i], &points[j]));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..HOLDER_MAX_PAIRS {
            let i = rng.random_range(0..p);
            let mut j = rng.random_range(0..p - 1);
            if j >= i {
                j += 1;
            }
            best = best.max(quotient(&points[i], &points[j]));
        }
    }
    best
}

/// Space-time Hölder seminorm `sup |u(t,x) - u(s,y)| / (|t - s| + |x - y|)^alpha` over
/// interior nodes of the given snapshots, subsampled with a fixed seed above
/// [`HOLDER_MAX_PAIRS`] pairs.
pub fn holder_seminorm(grid: &Grid, slice: &[(f64, &[f64])], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1] (got {alpha})")));
    }
    let mut points = Vec::with_capacity(slice.len() * grid.len());
    for (t, w) in slice {
        grid.check_len(w)?;
        for (k, &val) in w.iter().enumerate() {
            let c = grid.coords(k);
            points.push(([*t, c[0], c[1]], val));
        }
    }
    Ok(holder_over_points(&points, alpha, HOLDER_SEED))
}

/// Spatial Hölder seminorm of a single field extended by zero onto the boundary nodes.
pub fn holder_seminorm_zero_extended(grid: &Grid, w: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1] (got {alpha})")));
    }
    grid.check_len(w)?;
    let mut points: Vec<([f64; 3], f64)> = w
        .iter()
        .enumerate()
        .map(|(k, &val)| {
            let c = grid.coords(k);
            ([0.0, c[0], c[1]], val)
        })
        .collect();
    points.extend(grid.ghost_coords().into_iter().map(|c| ([0.0, c[0], c[1]], 0.0)));
    Ok(holder_over_points(&points, alpha, HOLDER_SEED))
}
