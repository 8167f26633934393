//! Sampled potentials on a uniform grid, interpolated by monotone cubic
//! Hermite (PCHIP) pieces.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    length: f64,
    samples: Vec<f64>,
    slopes: Vec<f64>,
}

/// Smooth compactly supported bump `height·exp(1 − 1/(1 − r²))`, `|r| < 1`.
pub fn bump(x: f64, center: f64, half_width: f64, height: f64) -> f64 {
    let r = (x - center) / half_width;
    if r.abs() >= 1.0 {
        0.0
    } else {
        height * (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

impl Potential {
    /// Samples `V(i·L/(n−1))`, `i = 0..n`.
    pub fn from_samples(length: f64, samples: Vec<f64>) -> Result<Self> {
        let n = samples.len();
        if n < 3 {
            return Err(Error::InvalidModel("a potential needs at least three samples".into()));
        }
        if samples.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidModel("potential samples must be finite and non-negative".into()));
        }
        let h = length / (n - 1) as f64;
        let delta: Vec<f64> = samples.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            let (a, b) = (delta[i - 1], delta[i]);
            slopes[i] = if a * b <= 0.0 { 0.0 } else { 2.0 * a * b / (a + b) };
        }
        slopes[0] = end_slope(delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        slopes[n - 1] = end_slope(delta[n - 2], delta[n.saturating_sub(3)]);
        Ok(Self { length, samples, slopes })
    }

    /// A bump centred at `center` with half-width `half_width`, sampled at `n` points.
    pub fn bump(length: f64, center: f64, half_width: f64, height: f64, n: usize) -> Result<Self> {
        let h = length / (n - 1) as f64;
        Self::from_samples(length, (0..n).map(|i| bump(i as f64 * h, center, half_width, height)).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.samples.len() - 1) as f64
    }

    /// Sample range; PCHIP stays inside it.
    pub fn range(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    }

    /// Checks that the grid matches `length` and the support avoids both endpoints.
    pub fn validate_for(&self, length: f64) -> Result<()> {
        if (self.length - length).abs() > 1e-12 * length {
            return Err(Error::InvalidModel(format!("potential grid spans {}, model length {length}", self.length)));
        }
        let n = self.samples.len();
        if self.samples[0] != 0.0 || self.samples[1] != 0.0 || self.samples[n - 1] != 0.0 || self.samples[n - 2] != 0.0 {
            return Err(Error::InvalidModel("potential support must stay away from the endpoints".into()));
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        let h = self.spacing();
        let n = self.samples.len();
        let u = (x / h).clamp(0.0, (n - 1) as f64);
        let i = (u.floor() as usize).min(n - 2);
        let s = u - i as f64;
        let (y0, y1) = (self.samples[i], self.samples[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }
}

/// Three-point end slope, limited to keep the interpolant shape-preserving.
fn end_slope(d0: f64, d1: f64) -> f64 {
    let m = 1.5 * d0 - 0.5 * d1;
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}
