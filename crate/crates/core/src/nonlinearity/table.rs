use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone piecewise-cubic (PCHIP) interpolant of a tabulated `phi` on `[0, z_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct PhiTable {
    z: Vec<f64>,
    phi: Vec<f64>,
    slope: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    z: Vec<f64>,
    phi: Vec<f64>,
}

impl TryFrom<RawTable> for PhiTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        PhiTable::new(raw.z, raw.phi)
    }
}

impl From<PhiTable> for RawTable {
    fn from(t: PhiTable) -> Self {
        RawTable { z: t.z, phi: t.phi }
    }
}

impl PhiTable {
    pub fn new(z: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if z.len() < 3 || z.len() != phi.len() {
            return Err(Error::Parameter(
                "phi table needs at least 3 (z, phi) pairs of equal length".into(),
            ));
        }
        if z[0] != 0.0 || phi[0] != 0.0 {
            return Err(Error::Parameter("phi table must start at (0, 0)".into()));
        }
        for k in 1..z.len() {
            if !(z[k] > z[k - 1]) || !(phi[k] > phi[k - 1]) {
                return Err(Error::Parameter(format!(
                    "phi table must be strictly increasing (row {k})"
                )));
            }
        }
        if !(z[z.len() - 1] < 1.0) {
            return Err(Error::Parameter("phi table must end below z = 1".into()));
        }
        let slope = pchip_slopes(&z, &phi);
        let mut cumulative = vec![0.0; z.len()];
        for k in 0..z.len() - 1 {
            let h = z[k + 1] - z[k];
            cumulative[k + 1] = cumulative[k]
                + h * (phi[k] + phi[k + 1]) / 2.0
                + h * h * (slope[k] - slope[k + 1]) / 12.0;
        }
        Ok(Self {
            z,
            phi,
            slope,
            cumulative,
        })
    }

    pub fn z_max(&self) -> f64 {
        self.z[self.z.len() - 1]
    }

    fn interval(&self, s: f64) -> (usize, f64, f64) {
        let last = self.z.len() - 2;
        let k = self.z.partition_point(|&zk| zk <= s).saturating_sub(1).min(last);
        let h = self.z[k + 1] - self.z[k];
        (k, h, (s - self.z[k]) / h)
    }

    pub(crate) fn value(&self, s: f64) -> f64 {
        let (k, h, t) = self.interval(s);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.phi[k]
            + (t3 - 2.0 * t2 + t) * h * self.slope[k]
            + (-2.0 * t3 + 3.0 * t2) * self.phi[k + 1]
            + (t3 - t2) * h * self.slope[k + 1]
    }

    pub(crate) fn derivative(&self, s: f64) -> f64 {
        let (k, h, t) = self.interval(s);
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) * self.phi[k] / h
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slope[k]
            + (-6.0 * t2 + 6.0 * t) * self.phi[k + 1] / h
            + (3.0 * t2 - 2.0 * t) * self.slope[k + 1]
    }

    pub(crate) fn second_derivative(&self, s: f64) -> f64 {
        let (k, h, t) = self.interval(s);
        ((12.0 * t - 6.0) * self.phi[k]
            + (6.0 * t - 4.0) * h * self.slope[k]
            + (-12.0 * t + 6.0) * self.phi[k + 1]
            + (6.0 * t - 2.0) * h * self.slope[k + 1])
            / (h * h)
    }

    pub(crate) fn primitive(&self, s: f64) -> f64 {
        let (k, h, t) = self.interval(s);
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        self.cumulative[k]
            + h * ((t4 / 2.0 - t3 + t) * self.phi[k]
                + (t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0) * h * self.slope[k]
                + (-t4 / 2.0 + t3) * self.phi[k + 1]
                + (t4 / 4.0 - t3 / 3.0) * h * self.slope[k + 1])
    }
}

fn pchip_slopes(z: &[f64], y: &[f64]) -> Vec<f64> {
    let n = z.len();
    let h: Vec<f64> = z.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if d[k - 1] * d[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    m[0] = pchip_end(h[0], h[1], d[0], d[1]);
    m[n - 1] = pchip_end(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

fn pchip_end(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_a_cubic_free_quadratic_table() {
        let z: Vec<f64> = (0..=40).map(|k| k as f64 * 0.02).collect();
        let phi: Vec<f64> = z.iter().map(|s| s * s).collect();
        let t = PhiTable::new(z, phi).unwrap();
        for &s in &[0.05, 0.33, 0.71] {
            assert!((t.value(s) - s * s).abs() < 1e-4);
            assert!((t.primitive(s) - s * s * s / 3.0).abs() < 1e-4);
        }
    }

    #[test]
    fn rejects_non_monotone_rows() {
        assert!(PhiTable::new(vec![0.0, 0.5, 0.4], vec![0.0, 1.0, 2.0]).is_err());
        assert!(PhiTable::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 2.0]).is_err());
    }
}
