use serde::{Deserialize, Serialize};

use super::table::PhiTable;
use crate::error::{Error, Result};

/// Below this magnitude the biofilm `phi` is summed from its power series.
const SERIES_CUTOFF: f64 = 0.5;
/// Integer `b` at most this large uses the partial-fraction closed form above the cutoff.
const CLOSED_FORM_MAX_B: f64 = 8.0;
const QUADRATURE_RTOL: f64 = 1e-10;
const LATTICE: usize = 10_000;
/// `phi(1 - 1e-6)` must exceed this for the singularity check.
const SINGULAR_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiKind {
    /// `phi(z) = int_0^z s^b / (1 - s)^a ds`.
    Biofilm { a: f64, b: f64 },
    /// `phi(z) = z^m`; no singularity, used for porous-medium reference runs.
    Power { m: f64 },
    Tabulated { table: PhiTable },
}

/// Diffusion nonlinearity on `[0, z_max)`, optionally extended as an odd function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiSpec {
    pub kind: PhiKind,
    pub symmetric_extension: bool,
}

/// Sampled structural checks of a [`PhiSpec`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub strictly_increasing: bool,
    pub degenerate_at_zero: bool,
    pub singular_at_one: bool,
    pub convex_concave_split: bool,
    /// `(c1, c2, exponent)` with `|phi(z)| <= c1 (1 - |z|)^(1 - exponent) + c2` on the lattice.
    pub growth_bound: Option<(f64, f64, f64)>,
}

impl PhiSpec {
    pub fn biofilm(a: f64, b: f64) -> Result<Self> {
        if !(a >= 1.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Parameter(format!(
                "biofilm phi needs a >= 1 and b > 0 (got a = {a}, b = {b})"
            )));
        }
        Ok(Self {
            kind: PhiKind::Biofilm { a, b },
            symmetric_extension: true,
        })
    }

    pub fn power(m: f64) -> Result<Self> {
        if !(m > 1.0) || !m.is_finite() {
            return Err(Error::Parameter(format!("power phi needs m > 1 (got {m})")));
        }
        Ok(Self {
            kind: PhiKind::Power { m },
            symmetric_extension: true,
        })
    }

    pub fn tabulated(table: PhiTable) -> Self {
        Self {
            kind: PhiKind::Tabulated { table },
            symmetric_extension: true,
        }
    }

    pub fn with_symmetric_extension(mut self, on: bool) -> Self {
        self.symmetric_extension = on;
        self
    }

    /// Right end of the interval on which `phi` is defined (exclusive unless tabulated).
    pub fn upper_limit(&self) -> f64 {
        match &self.kind {
            PhiKind::Tabulated { table } => table.z_max(),
            _ => 1.0,
        }
    }

    fn fold(&self, z: f64, what: &'static str) -> Result<(f64, f64)> {
        let s = z.abs();
        let inside = match &self.kind {
            PhiKind::Tabulated { table } => s <= table.z_max(),
            _ => s < 1.0,
        };
        if !inside || !z.is_finite() || (z < 0.0 && !self.symmetric_extension) {
            return Err(Error::Domain { what, value: z });
        }
        Ok((if z < 0.0 { -1.0 } else { 1.0 }, s))
    }

    pub fn phi(&self, z: f64) -> Result<f64> {
        let (sign, s) = self.fold(z, "phi")?;
        Ok(sign * self.phi_pos(s)?)
    }

    pub fn derivative(&self, z: f64) -> Result<f64> {
        let (_, s) = self.fold(z, "phi'")?;
        Ok(self.derivative_pos(s))
    }

    pub fn second_derivative(&self, z: f64) -> Result<f64> {
        let (sign, s) = self.fold(z, "phi''")?;
        Ok(sign * self.second_derivative_pos(s))
    }

    /// `Phi(z) = int_0^z phi`, even and convex.
    pub fn primitive(&self, z: f64) -> Result<f64> {
        let (_, s) = self.fold(z, "Phi")?;
        self.primitive_pos(s)
    }

    /// Inverse of `phi` by bisection to `1e-12` in `z`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !y.is_finite() || (y < 0.0 && !self.symmetric_extension) {
            return Err(Error::Domain {
                what: "phi^-1",
                value: y,
            });
        }
        let target = y.abs();
        let upper = self.upper_limit();
        if let PhiKind::Tabulated { table } = &self.kind {
            if target > table.value(upper) {
                return Err(Error::Domain {
                    what: "phi^-1",
                    value: y,
                });
            }
        } else if let PhiKind::Power { .. } = self.kind {
            if target >= 1.0 {
                return Err(Error::Domain {
                    what: "phi^-1",
                    value: y,
                });
            }
        }
        let (mut lo, mut hi) = (0.0_f64, upper);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if mid >= hi || mid <= lo {
                break;
            }
            if self.phi_pos(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(y.signum() * 0.5 * (lo + hi))
    }

    pub(crate) fn phi_pos(&self, s: f64) -> Result<f64> {
        match &self.kind {
            PhiKind::Biofilm { a, b } => biofilm_phi(*a, *b, s),
            PhiKind::Power { m } => Ok(s.powf(*m)),
            PhiKind::Tabulated { table } => Ok(table.value(s)),
        }
    }

    pub(crate) fn derivative_pos(&self, s: f64) -> f64 {
        match &self.kind {
            PhiKind::Biofilm { a, b } => s.powf(*b) / (1.0 - s).powf(*a),
            PhiKind::Power { m } => m * s.powf(m - 1.0),
            PhiKind::Tabulated { table } => table.derivative(s),
        }
    }

    pub(crate) fn second_derivative_pos(&self, s: f64) -> f64 {
        match &self.kind {
            PhiKind::Biofilm { a, b } => {
                let q = 1.0 - s;
                b * s.powf(b - 1.0) / q.powf(*a) + a * s.powf(*b) / q.powf(a + 1.0)
            }
            PhiKind::Power { m } => m * (m - 1.0) * s.powf(m - 2.0),
            PhiKind::Tabulated { table } => table.second_derivative(s),
        }
    }

    pub(crate) fn primitive_pos(&self, s: f64) -> Result<f64> {
        match &self.kind {
            PhiKind::Biofilm { a, b } => {
                if s <= SERIES_CUTOFF {
                    Ok(biofilm_series(*a, *b, s, true))
                } else {
                    // Integration by parts: Phi = s phi_{a,b}(s) - phi_{a,b+1}(s).
                    Ok(s * biofilm_phi(*a, *b, s)? - biofilm_phi(*a, b + 1.0, s)?)
                }
            }
            PhiKind::Power { m } => Ok(s.powf(m + 1.0) / (m + 1.0)),
            PhiKind::Tabulated { table } => Ok(table.primitive(s)),
        }
    }

    /// Lattice checks of monotonicity, degeneracy, singularity, the convex/concave
    /// split and (for the biofilm kind) the growth bound near `|z| = 1`.
    pub fn check_structure(&self) -> StructureReport {
        let top = match &self.kind {
            PhiKind::Tabulated { table } => table.z_max(),
            _ => 1.0 - 1e-4,
        };
        let zs: Vec<f64> = (1..=LATTICE)
            .map(|k| top * k as f64 / LATTICE as f64)
            .collect();
        let vals: Vec<f64> = zs
            .iter()
            .map(|&s| self.phi_pos(s).unwrap_or(f64::NAN))
            .collect();

        let strictly_increasing =
            vals[0] > 0.0 && vals.windows(2).all(|w| w[1] > w[0] && w[1].is_finite());
        let degenerate_at_zero = self.derivative_pos(0.0).abs() <= 1e-12;
        let singular_at_one = match self.kind {
            PhiKind::Tabulated { .. } => false,
            _ => self.phi_pos(1.0 - 1e-6).is_ok_and(|v| v > SINGULAR_THRESHOLD),
        };
        let convex_concave_split = vals.windows(3).all(|w| {
            let second = w[2] - 2.0 * w[1] + w[0];
            second >= -1e-8 * w[1].abs().max(f64::MIN_POSITIVE)
        });
        let growth_bound = match self.kind {
            PhiKind::Biofilm { a, .. } => {
                let exponent = if a > 1.0 { a } else { 1.5 };
                let c2 = 1.0;
                let c1 = zs
                    .iter()
                    .zip(&vals)
                    .map(|(&s, &v)| ((v - c2) * (1.0 - s).powf(exponent - 1.0)).max(0.0))
                    .fold(0.0, f64::max);
                Some((c1, c2, exponent))
            }
            _ => None,
        };
        StructureReport {
            strictly_increasing,
            degenerate_at_zero,
            singular_at_one,
            convex_concave_split,
            growth_bound,
        }
    }
}

fn biofilm_phi(a: f64, b: f64, s: f64) -> Result<f64> {
    if s <= SERIES_CUTOFF {
        return Ok(biofilm_series(a, b, s, false));
    }
    if b.fract() == 0.0 && b <= CLOSED_FORM_MAX_B {
        return Ok(biofilm_closed_form(a, b as u32, s));
    }
    // Panels [x_i, x_{i+1}] halving the distance to the singularity keep the
    // integrand within a factor 2^a on each panel.
    let f = |x: f64| x.powf(b) / (1.0 - x).powf(a);
    let mut total = biofilm_series(a, b, SERIES_CUTOFF, false);
    let mut lo = SERIES_CUTOFF;
    while lo < s {
        let hi = (1.0 - 0.5 * (1.0 - lo)).min(s);
        let rough = (hi - lo) * f(0.5 * (lo + hi));
        let tol = 0.1 * QUADRATURE_RTOL * rough;
        let out = quadrature::integrate(f, lo, hi, tol);
        if !(out.error_estimate <= 10.0 * tol) || !out.integral.is_finite() {
            return Err(Error::Numerical {
                what: format!("quadrature of phi at {s}"),
                residual: out.error_estimate,
            });
        }
        total += out.integral;
        lo = hi;
    }
    Ok(total)
}

/// `sum_j (a)_j / j! * s^(b+j+1) / (b+j+1)`, or its primitive when `primitive` is set.
fn biofilm_series(a: f64, b: f64, s: f64, primitive: bool) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let mut power = if primitive {
        s.powf(b + 2.0)
    } else {
        s.powf(b + 1.0)
    };
    let mut coeff = 1.0;
    let mut sum = 0.0;
    for j in 0..4000 {
        let k = b + j as f64 + 1.0;
        let term = if primitive {
            coeff * power / (k * (k + 1.0))
        } else {
            coeff * power / k
        };
        sum += term;
        if term <= 1e-17 * sum && j as f64 > a {
            break;
        }
        coeff *= (a + j as f64) / (j as f64 + 1.0);
        power *= s;
    }
    sum
}

/// Binomial expansion of `(1 - t)^b` under the substitution `t = 1 - s`.
fn biofilm_closed_form(a: f64, b: u32, s: f64) -> f64 {
    let t0 = 1.0 - s;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 0..=b {
        let e = k as f64 - a + 1.0;
        let piece = if e.abs() < 1e-12 {
            -t0.ln()
        } else {
            (1.0 - t0.powf(e)) / e
        };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * piece;
        binom = binom * (b - k) as f64 / (k + 1) as f64;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_closed_form_agree_across_the_cutoff() {
        for &(a, b) in &[(1.0, 1.0), (2.0, 2.0), (1.5, 3.0), (4.0, 1.0)] {
            for &s in &[0.3, 0.45, 0.5] {
                let series = biofilm_series(a, b, s, false);
                let closed = biofilm_closed_form(a, b as u32, s);
                assert!(
                    (series - closed).abs() <= 1e-12 * series.abs().max(1e-3),
                    "a={a} b={b} s={s}: {series} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn closed_form_a1_b1_matches_logarithm() {
        let s: f64 = 0.9;
        let expected = -s - (1.0 - s).ln();
        assert!((biofilm_closed_form(1.0, 1, s) - expected).abs() < 1e-14);
    }

    #[test]
    fn quadrature_path_is_continuous_with_series() {
        let spec = PhiSpec::biofilm(1.3, 0.7).unwrap();
        let below = spec.phi(0.5).unwrap();
        let above = spec.phi(0.5 + 1e-9).unwrap();
        assert!((above - below).abs() < 1e-8);
    }

    #[test]
    fn negative_arguments_need_symmetric_extension() {
        let spec = PhiSpec::biofilm(1.0, 1.0).unwrap();
        assert!((spec.phi(-0.5).unwrap() + spec.phi(0.5).unwrap()).abs() < 1e-15);
        let one_sided = spec.with_symmetric_extension(false);
        assert!(matches!(one_sided.phi(-0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn domain_errors_at_and_beyond_one() {
        let spec = PhiSpec::biofilm(1.0, 1.0).unwrap();
        assert!(spec.phi(1.0).is_err());
        assert!(spec.primitive(-1.2).is_err());
        assert!(PhiSpec::biofilm(0.5, 1.0).is_err());
        assert!(PhiSpec::power(1.0).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        let spec = PhiSpec::biofilm(1.0, 1.0).unwrap();
        for &z in &[-0.95, -0.2, 0.0, 0.4, 0.999] {
            let y = spec.phi(z).unwrap();
            assert!((spec.inverse(y).unwrap() - z).abs() < 1e-11);
        }
        let pme = PhiSpec::power(2.0).unwrap();
        assert!(pme.inverse(1.5).is_err());
    }
}
