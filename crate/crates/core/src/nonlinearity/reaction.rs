use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ReactionFn = dyn Fn([f64; 2], f64, f64) -> (f64, f64) + Send + Sync;

/// User-supplied `(x, u, v) -> (f, g)`; partial derivatives are taken by central differences.
#[derive(Clone)]
pub struct CustomReaction {
    pub name: String,
    func: Arc<ReactionFn>,
    /// Whether `u` lives in `[0, 1)` (coupled systems) instead of `(-1, 1)`.
    pub nonnegative: bool,
}

impl CustomReaction {
    pub fn new<F>(name: impl Into<String>, nonnegative: bool, func: F) -> Self
    where
        F: Fn([f64; 2], f64, f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            func: Arc::new(func),
            nonnegative,
        }
    }
}

impl fmt::Debug for CustomReaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomReaction")
            .field("name", &self.name)
            .field("nonnegative", &self.nonnegative)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum ReactionKind {
    /// `f = -lambda u`, no `g`.
    ScalarDecay { lambda: f64 },
    /// Biofilm kinetics: `f = -K2 u + K3 u v / (K4 + v)`, `g = -K1 u v / (K4 + v)`;
    /// `d1` diffuses the nutrient `v`, `d2` scales the biomass diffusion.
    Monod {
        k1: f64,
        k2: f64,
        k3: f64,
        k4: f64,
        d1: f64,
        d2: f64,
    },
    Custom(CustomReaction),
}

/// `[df/du, df/dv, dg/du, dg/dv]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub fu: f64,
    pub fv: f64,
    pub gu: f64,
    pub gv: f64,
}

#[derive(Debug, Clone)]
pub struct ReactionSpec {
    pub kind: ReactionKind,
    pub lipschitz_l: f64,
}

impl ReactionSpec {
    pub fn scalar_decay(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Parameter(format!("decay rate must be finite (got {lambda})")));
        }
        Ok(Self::with_kind(ReactionKind::ScalarDecay { lambda }))
    }

    pub fn zero() -> Self {
        Self::with_kind(ReactionKind::ScalarDecay { lambda: 0.0 })
    }

    pub fn monod(k1: f64, k2: f64, k3: f64, k4: f64, d1: f64, d2: f64) -> Result<Self> {
        let finite = [k1, k2, k3, k4, d1, d2].iter().all(|x| x.is_finite());
        if !finite || k1 < 0.0 || k2 < 0.0 || k3 < 0.0 || !(k4 > 0.0) || !(d1 > 0.0) || !(d2 > 0.0)
        {
            return Err(Error::Parameter(format!(
                "monod kinetics need K1..K3 >= 0, K4 > 0, d1, d2 > 0 \
                 (got K = [{k1}, {k2}, {k3}, {k4}], d = [{d1}, {d2}])"
            )));
        }
        Ok(Self::with_kind(ReactionKind::Monod {
            k1,
            k2,
            k3,
            k4,
            d1,
            d2,
        }))
    }

    /// A custom reaction; the Lipschitz constant is sampled unless supplied.
    pub fn custom(reaction: CustomReaction, lipschitz: Option<f64>) -> Self {
        let mut spec = Self {
            kind: ReactionKind::Custom(reaction),
            lipschitz_l: 0.0,
        };
        spec.lipschitz_l = lipschitz.unwrap_or_else(|| spec.lipschitz_bound());
        spec
    }

    fn with_kind(kind: ReactionKind) -> Self {
        let mut spec = Self {
            kind,
            lipschitz_l: 0.0,
        };
        spec.lipschitz_l = spec.lipschitz_bound();
        spec
    }

    /// Whether the `u` argument is restricted to `[0, 1)`.
    pub fn nonnegative(&self) -> bool {
        match &self.kind {
            ReactionKind::ScalarDecay { .. } => false,
            ReactionKind::Monod { .. } => true,
            ReactionKind::Custom(c) => c.nonnegative,
        }
    }

    pub fn is_coupled(&self) -> bool {
        matches!(self.kind, ReactionKind::Monod { .. })
    }

    /// Diffusion coefficients `(u, v)`.
    pub fn diffusion(&self) -> (f64, f64) {
        match self.kind {
            ReactionKind::Monod { d1, d2, .. } => (d2, d1),
            _ => (1.0, 1.0),
        }
    }

    /// Checked evaluation `(f, g)`; `g` is zero for scalar kinds.
    pub fn eval(&self, x: [f64; 2], u: f64, v: f64) -> Result<(f64, f64)> {
        if self.nonnegative() {
            if !(0.0..1.0).contains(&u) {
                return Err(Error::Domain {
                    what: "reaction u",
                    value: u,
                });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain {
                    what: "reaction v",
                    value: v,
                });
            }
        } else if !(u > -1.0 && u < 1.0) {
            return Err(Error::Domain {
                what: "reaction u",
                value: u,
            });
        }
        Ok(self.eval_raw(x, u, v))
    }

    /// Unchecked evaluation used inside nonlinear iterations.
    pub(crate) fn eval_raw(&self, x: [f64; 2], u: f64, v: f64) -> (f64, f64) {
        match &self.kind {
            ReactionKind::ScalarDecay { lambda } => (-lambda * u, 0.0),
            ReactionKind::Monod { k1, k2, k3, k4, .. } => {
                let v = v.max(0.0);
                let sat = v / (k4 + v);
                (-k2 * u + k3 * u * sat, -k1 * u * sat)
            }
            ReactionKind::Custom(c) => (c.func)(x, u, v),
        }
    }

    pub(crate) fn partials(&self, x: [f64; 2], u: f64, v: f64) -> Partials {
        match &self.kind {
            ReactionKind::ScalarDecay { lambda } => Partials {
                fu: -lambda,
                fv: 0.0,
                gu: 0.0,
                gv: 0.0,
            },
            ReactionKind::Monod { k1, k2, k3, k4, .. } => {
                let v = v.max(0.0);
                let sat = v / (k4 + v);
                let dsat = k4 / ((k4 + v) * (k4 + v));
                Partials {
                    fu: -k2 + k3 * sat,
                    fv: k3 * u * dsat,
                    gu: -k1 * sat,
                    gv: -k1 * u * dsat,
                }
            }
            ReactionKind::Custom(c) => {
                let e = 1e-7;
                let (fp, gp) = (c.func)(x, u + e, v);
                let (fm, gm) = (c.func)(x, u - e, v);
                let (fq, gq) = (c.func)(x, u, v + e);
                let (fr, gr) = (c.func)(x, u, v - e);
                Partials {
                    fu: (fp - fm) / (2.0 * e),
                    fv: (fq - fr) / (2.0 * e),
                    gu: (gp - gm) / (2.0 * e),
                    gv: (gq - gr) / (2.0 * e),
                }
            }
        }
    }

    fn lattice(&self) -> (Vec<f64>, Vec<f64>) {
        let n = 41;
        let us: Vec<f64> = if self.nonnegative() {
            (0..n).map(|k| k as f64 / n as f64).collect()
        } else {
            (0..n).map(|k| -1.0 + (2 * k + 1) as f64 / n as f64).collect()
        };
        let vs: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        (us, vs)
    }

    /// Lipschitz constant valid both per component in the max norm and for the
    /// summed `|f| + |g|` increments against `|du| + |dv|`.
    pub fn lipschitz_bound(&self) -> f64 {
        match &self.kind {
            ReactionKind::ScalarDecay { lambda } => lambda.abs(),
            ReactionKind::Monod { k1, k2, k3, k4, .. } => {
                let componentwise = (k2 + k3).max(*k1) + k3.max(*k1) / k4;
                let summed = (k1 + k2 + k3).max((k1 + k3) / k4);
                componentwise.max(summed)
            }
            ReactionKind::Custom(_) => {
                let (us, vs) = self.lattice();
                let mut best_u: f64 = 0.0;
                let mut best_v: f64 = 0.0;
                for &u in &us {
                    for &v in &vs {
                        let p = self.partials([0.0, 0.0], u.clamp(-1.0 + 1e-6, 1.0 - 1e-6), v);
                        best_u = best_u.max(p.fu.abs() + p.gu.abs());
                        best_v = best_v.max(p.fv.abs() + p.gv.abs());
                    }
                }
                best_u.max(best_v)
            }
        }
    }

    /// `sup |f|` over the admissible `(u, v)` range.
    pub fn sup_abs_f(&self) -> f64 {
        match &self.kind {
            ReactionKind::ScalarDecay { lambda } => lambda.abs(),
            ReactionKind::Monod { k2, k3, k4, .. } => {
                let rate_at_full_nutrient = -k2 + k3 / (k4 + 1.0);
                k2.max(rate_at_full_nutrient.abs())
            }
            ReactionKind::Custom(_) => {
                let (us, vs) = self.lattice();
                let mut sup: f64 = 0.0;
                for &u in &us {
                    for &v in &vs {
                        sup = sup.max(self.eval_raw([0.0, 0.0], u, v).0.abs());
                    }
                }
                sup
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monod_boundary_signs() {
        let r = ReactionSpec::monod(0.7, 0.3, 1.2, 0.5, 1.0, 0.1).unwrap();
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            let (f0, _) = r.eval([0.0; 2], 0.0, s).unwrap();
            assert!(f0 >= 0.0);
            let u = 0.999 * s;
            let (_, g0) = r.eval([0.0; 2], u, 0.0).unwrap();
            let (_, g1) = r.eval([0.0; 2], u, 1.0).unwrap();
            assert!(g0 >= 0.0 && g1 <= 1.0);
        }
    }

    #[test]
    fn out_of_range_arguments_fail() {
        let r = ReactionSpec::monod(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(r.eval([0.0; 2], -0.1, 0.5).is_err());
        assert!(r.eval([0.0; 2], 0.5, 1.1).is_err());
        let s = ReactionSpec::scalar_decay(1.0).unwrap();
        assert!(s.eval([0.0; 2], 1.0, 0.0).is_err());
        assert!(s.eval([0.0; 2], -0.99, 0.0).is_ok());
    }

    #[test]
    fn monod_rejects_bad_constants() {
        assert!(ReactionSpec::monod(1.0, 1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(ReactionSpec::monod(-1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn custom_partials_match_analytic() {
        let c = CustomReaction::new("quad", false, |_, u, _| (-2.0 * u + u * u, 0.0));
        let r = ReactionSpec::custom(c, None);
        let p = r.partials([0.0; 2], 0.3, 0.0);
        assert!((p.fu - (-2.0 + 0.6)).abs() < 1e-7);
        assert!((r.lipschitz_l - 4.0).abs() < 0.1);
    }
}
