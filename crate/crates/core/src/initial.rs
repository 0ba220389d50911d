//! Initial-data presets evaluated on a grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::Barenblatt;
use crate::error::{Error, Result};
use crate::grid::{Grid, RangeTag, StateField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitialSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `height * cos^2(pi d / (2 radius))` for `d < radius`, zero outside.
    Bump {
        center: Vec<f64>,
        radius: f64,
        height: f64,
    },
    /// Piecewise linear in the distance `d`: `peak * (1 - d / half_width)_+`.
    Tent {
        center: Vec<f64>,
        half_width: f64,
        peak: f64,
    },
    /// Source-type porous-medium profile at time `t0`.
    Barenblatt {
        m: f64,
        mass: f64,
        t0: f64,
        center: Vec<f64>,
    },
    /// Random sine series with `modes` modes per axis, rescaled to sup norm `amplitude`.
    Random {
        amplitude: f64,
        modes: usize,
        seed: u64,
        #[serde(default)]
        nonnegative: bool,
    },
    /// Node values in grid order.
    Values {
        values: Vec<f64>,
    },
}

impl InitialSpec {
    pub fn build(&self, grid: &Grid, range: RangeTag) -> Result<StateField> {
        let point = |c: &[f64]| -> Result<[f64; 2]> {
            if c.len() != grid.dim() {
                return Err(Error::Parameter(format!(
                    "center has {} coordinates, grid has dimension {}",
                    c.len(),
                    grid.dim()
                )));
            }
            Ok([c[0], c.get(1).copied().unwrap_or(0.0)])
        };
        match self {
            InitialSpec::Zero => Ok(StateField::zeros(*grid, range)),
            InitialSpec::Constant { value } => StateField::from_fn(*grid, range, |_| *value),
            InitialSpec::Bump {
                center,
                radius,
                height,
            } => {
                positive("bump radius", *radius)?;
                let c = point(center)?;
                StateField::from_fn(*grid, range, |x| {
                    let d = grid.distance(x, c);
                    if d < *radius {
                        height * (0.5 * std::f64::consts::PI * d / radius).cos().powi(2)
                    } else {
                        0.0
                    }
                })
            }
            InitialSpec::Tent {
                center,
                half_width,
                peak,
            } => {
                positive("tent half-width", *half_width)?;
                let c = point(center)?;
                StateField::from_fn(*grid, range, |x| {
                    peak * (1.0 - grid.distance(x, c) / half_width).max(0.0)
                })
            }
            InitialSpec::Barenblatt { m, mass, t0, center } => {
                let b = Barenblatt::new(*m, *mass, grid.dim())?;
                let c = point(center)?;
                let values = (0..grid.len())
                    .map(|k| {
                        let x = grid.coords(k);
                        b.value(*t0, &[x[0] - c[0], x[1] - c[1]][..grid.dim()])
                    })
                    .collect::<Result<Vec<_>>>()?;
                StateField::new(*grid, values, range)
            }
            InitialSpec::Random {
                amplitude,
                modes,
                seed,
                nonnegative,
            } => {
                if *modes == 0 {
                    return Err(Error::Parameter("random field needs at least one mode".into()));
                }
                let values = random_series(grid, *amplitude, *modes, *seed, *nonnegative);
                StateField::new(*grid, values, range)
            }
            InitialSpec::Values { values } => {
                if values.len() != grid.len() {
                    return Err(Error::Parameter(format!(
                        "{} initial values for a grid of {} nodes",
                        values.len(),
                        grid.len()
                    )));
                }
                StateField::new(*grid, values.clone(), range)
            }
        }
    }
}

fn positive(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{what} must be positive (got {x})")))
    }
}

fn random_series(grid: &Grid, amplitude: f64, modes: usize, seed: u64, nonnegative: bool) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ny = if grid.dim() == 2 { modes } else { 1 };
    let coef: Vec<f64> = (0..modes * ny).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ext = grid.extents();
    let pi = std::f64::consts::PI;
    let mut values: Vec<f64> = (0..grid.len())
        .map(|k| {
            let x = grid.coords(k);
            let mut s = 0.0;
            for j in 0..ny {
                let sy = if grid.dim() == 2 {
                    ((j + 1) as f64 * pi * x[1] / ext[1]).sin()
                } else {
                    1.0
                };
                for i in 0..modes {
                    s += coef[i + modes * j] * ((i + 1) as f64 * pi * x[0] / ext[0]).sin() * sy;
                }
            }
            if nonnegative {
                s.abs()
            } else {
                s
            }
        })
        .collect();
    let sup = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if sup > 0.0 {
        for v in &mut values {
            *v *= amplitude / sup;
        }
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn random_field_is_seeded_and_scaled() {
        let g = build_grid(1, &[1.0], &[99]).unwrap();
        let spec = InitialSpec::Random {
            amplitude: 0.6,
            modes: 8,
            seed: 3,
            nonnegative: false,
        };
        let a = spec.build(&g, RangeTag::Signed).unwrap();
        let b = spec.build(&g, RangeTag::Signed).unwrap();
        assert_eq!(a, b);
        let sup = a.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!((sup - 0.6).abs() < 1e-14);
    }

    #[test]
    fn bump_is_compactly_supported() {
        let g = build_grid(1, &[2.0], &[199]).unwrap();
        let u = InitialSpec::Bump {
            center: vec![1.0],
            radius: 0.25,
            height: 0.5,
        }
        .build(&g, RangeTag::NonNegative)
        .unwrap();
        assert!((u.max() - 0.5).abs() < 1e-12);
        for k in 0..g.len() {
            if (g.coords(k)[0] - 1.0).abs() >= 0.25 {
                assert_eq!(u.values()[k], 0.0);
            }
        }
    }

    #[test]
    fn out_of_range_preset_is_rejected() {
        let g = build_grid(1, &[1.0], &[9]).unwrap();
        let spec = InitialSpec::Constant { value: 1.0 };
        assert!(spec.build(&g, RangeTag::Signed).is_err());
        assert!(spec.build(&g, RangeTag::Unit).is_ok());
    }
}
