use super::phi::PhiSpec;
use super::{smoothstep, smoothstep_slope};
use crate::error::{Error, Result};

/// Non-degenerate, non-singular approximation `phi_R` of a [`PhiSpec`].
///
/// On `[0, 1)` it is built in three pieces:
/// * `phi(z) + m_R * Psi(z)` with `Psi(z) = z` for `z <= 1/R`, blended to a
///   constant by a quintic partition,
/// * a derivative blend `phi' + chi * (M_R - phi')` over the mollifier window
///   just below the cut point `1 - 1/R`,
/// * the linear extension with slope `M_R = phi'(1 - 1/R)`.
///
/// The result is odd, `C^2` away from the origin, convex on `[0, inf)` and
/// concave on `(-inf, 0]`, with `m_R <= phi_R' <= M_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedPhi {
    base: PhiSpec,
    r: f64,
    m_lower: f64,
    m_upper: f64,
    mollifier_width: f64,
    floor_start: f64,
    floor_end: f64,
    cut: f64,
    phi_cut: f64,
    primitive_cut: f64,
}

pub fn regularize(spec: &PhiSpec, r: f64) -> Result<RegularizedPhi> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::Parameter(format!(
            "regularization index must exceed 1 (got {r})"
        )));
    }
    let cut = (1.0 - 1.0 / r).min(spec.upper_limit());
    let width = (1.0 / (r * r)).min(1e-4).min(0.25 * cut);
    let floor_start = (1.0 / r).min(0.25 * cut);
    let m_lower = 0.5 * spec.derivative_pos(floor_start);
    if !(m_lower > 0.0) {
        return Err(Error::Parameter(format!(
            "phi' vanishes at {floor_start}; cannot build a slope floor"
        )));
    }

    // Widen the floor partition until the subtracted slope keeps phi_R convex.
    let floor_cap = 0.5 * (cut - width);
    let mut floor_end = (4.0 * floor_start).min(floor_cap);
    for stretch in [4.0, 8.0, 16.0, 32.0, 64.0] {
        floor_end = (stretch * floor_start).min(floor_cap);
        let len = floor_end - floor_start;
        let convex = (1..64).all(|k| {
            let t = k as f64 / 64.0;
            let s = floor_start + t * len;
            spec.second_derivative_pos(s) >= 1.2 * m_lower * smoothstep_slope(t) / len
        });
        if convex || floor_end >= floor_cap {
            break;
        }
    }

    let mut reg = RegularizedPhi {
        base: spec.clone(),
        r,
        m_lower,
        m_upper: spec.derivative_pos(cut),
        mollifier_width: width,
        floor_start,
        floor_end,
        cut,
        phi_cut: 0.0,
        primitive_cut: 0.0,
    };
    let (blend, blend_moment) = reg.blend_integrals(cut);
    reg.phi_cut = spec.phi_pos(cut)? + m_lower * reg.floor(cut) + blend;
    reg.primitive_cut = spec.primitive_pos(cut)? + m_lower * reg.floor_primitive(cut) + blend_moment;
    Ok(reg)
}

impl RegularizedPhi {
    pub fn base(&self) -> &PhiSpec {
        &self.base
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `(m_R, M_R)`.
    pub fn slope_bounds(&self) -> (f64, f64) {
        (self.m_lower, self.m_upper)
    }

    pub fn mollifier_width(&self) -> f64 {
        self.mollifier_width
    }

    /// Start of the linear extension, `1 - 1/R` (or the table end).
    pub fn cut_point(&self) -> f64 {
        self.cut
    }

    pub fn value(&self, z: f64) -> f64 {
        let s = z.abs();
        let v = if s >= self.cut {
            self.phi_cut + self.m_upper * (s - self.cut)
        } else {
            let core = self.base.phi_pos(s).unwrap_or(f64::NAN) + self.m_lower * self.floor(s);
            if s > self.cut - self.mollifier_width {
                core + self.blend_integrals(s).0
            } else {
                core
            }
        };
        z.signum() * v
    }

    pub fn derivative(&self, z: f64) -> f64 {
        let s = z.abs();
        if s >= self.cut {
            return self.m_upper;
        }
        let d = self.base.derivative_pos(s);
        let window_start = self.cut - self.mollifier_width;
        if s > window_start {
            let chi = smoothstep((s - window_start) / self.mollifier_width);
            d + chi * (self.m_upper - d)
        } else {
            d + self.m_lower * self.floor_slope(s)
        }
    }

    /// `Phi_R(z) = int_0^z phi_R`.
    pub fn primitive(&self, z: f64) -> f64 {
        let s = z.abs();
        if s >= self.cut {
            let e = s - self.cut;
            return self.primitive_cut + self.phi_cut * e + 0.5 * self.m_upper * e * e;
        }
        let core =
            self.base.primitive_pos(s).unwrap_or(f64::NAN) + self.m_lower * self.floor_primitive(s);
        if s > self.cut - self.mollifier_width {
            core + self.blend_integrals(s).1
        } else {
            core
        }
    }

    /// Inverse of `phi_R` (defined on all of R) by bisection to `1e-13`.
    pub fn inverse(&self, y: f64) -> f64 {
        let target = y.abs();
        let mut hi = self.cut;
        if self.value(hi) < target {
            return y.signum() * (self.cut + (target - self.phi_cut) / self.m_upper);
        }
        let mut lo = 0.0;
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        y.signum() * 0.5 * (lo + hi)
    }

    fn floor_slope(&self, s: f64) -> f64 {
        if s <= self.floor_start {
            1.0
        } else if s >= self.floor_end {
            0.0
        } else {
            1.0 - smoothstep((s - self.floor_start) / (self.floor_end - self.floor_start))
        }
    }

    fn floor(&self, s: f64) -> f64 {
        let (z1, len) = (self.floor_start, self.floor_end - self.floor_start);
        if s <= z1 {
            s
        } else if s >= self.floor_end {
            z1 + 0.5 * len
        } else {
            let t = (s - z1) / len;
            z1 + len * (t - smoothstep_integral(t))
        }
    }

    fn floor_primitive(&self, s: f64) -> f64 {
        let (z1, len) = (self.floor_start, self.floor_end - self.floor_start);
        if s <= z1 {
            0.5 * s * s
        } else if s >= self.floor_end {
            let at_end = 0.5 * z1 * z1 + z1 * len + len * len * (0.5 - 1.0 / 7.0);
            at_end + (z1 + 0.5 * len) * (s - self.floor_end)
        } else {
            let t = (s - z1) / len;
            0.5 * z1 * z1 + z1 * len * t + len * len * (0.5 * t * t - smoothstep_second_integral(t))
        }
    }

    /// Contributions of the upper derivative blend to `phi_R` and `Phi_R` at `s`.
    fn blend_integrals(&self, s: f64) -> (f64, f64) {
        let start = self.cut - self.mollifier_width;
        if s <= start {
            return (0.0, 0.0);
        }
        let gap = |x: f64| {
            let chi = smoothstep((x - start) / self.mollifier_width);
            chi * (self.m_upper - self.base.derivative_pos(x))
        };
        let scale = self.m_upper * self.mollifier_width;
        let tol = 1e-15 * scale.max(f64::MIN_POSITIVE);
        let first = quadrature::integrate(gap, start, s, tol).integral;
        let second = quadrature::integrate(|x| (s - x) * gap(x), start, s, tol * self.mollifier_width)
            .integral;
        (first, second)
    }
}

fn smoothstep_integral(t: f64) -> f64 {
    t.powi(4) * (t * (t - 3.0) + 2.5)
}

fn smoothstep_second_integral(t: f64) -> f64 {
    t.powi(5) * (t * (t / 7.0 - 0.5) + 0.5)
}
