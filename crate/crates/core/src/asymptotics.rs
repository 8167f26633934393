//! Large-|x| expansion of `log det Q(x)` along the negative axis,
//!
//! `log det Q(x) ≈ Σ_{j ≥ −(d−1)} π_j |x|^{−j/2} + Σ_{j=0}^{d−1} q_j |x|^{j/2} log|x|`,
//!
//! fitted by weighted least squares. The constant `π₀` gives the local
//! constant `c = e^{−π₀}`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtn_models::DtnOperator;
use crate::error::{Error, Result};
use crate::model_geometries::IntervalModel;

/// Largest accepted condition number of the column-scaled design matrix.
pub const MAX_CONDITION: f64 = 1e10;

/// One sample `(x, log det Q(x), error)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub logdetq: f64,
    pub err: f64,
}

/// Fitted expansion. Keys of `pi` and `q` are the indices `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub d: u32,
    pub j_max: i32,
    pub pi: BTreeMap<i32, f64>,
    pub q: BTreeMap<i32, f64>,
    /// Max relative deviation on the sample grid.
    pub residual: f64,
    #[serde(rename = "cond")]
    pub condition_number: f64,
}

impl ExpansionFit {
    pub fn pi0(&self) -> f64 {
        self.pi.get(&0).copied().unwrap_or(0.0)
    }

    pub fn q0(&self) -> f64 {
        self.q.get(&0).copied().unwrap_or(0.0)
    }

    /// Evaluates the fitted expansion at `x < 0`.
    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        let p: f64 = self.pi.iter().map(|(&j, &c)| c * a.powf(-j as f64 / 2.0)).sum();
        let q: f64 = self.q.iter().map(|(&j, &c)| c * a.powf(j as f64 / 2.0) * a.ln()).sum();
        p + q
    }
}

/// Geometric grid of `count` points with `|x|` from `abs_min` to `abs_max`,
/// negative and in descending order.
pub fn geometric_grid(abs_min: f64, abs_max: f64, count: usize) -> Vec<f64> {
    assert!(abs_min > 0.0 && abs_max > abs_min && count >= 2);
    (0..count)
        .map(|i| -abs_min * (abs_max / abs_min).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Samples `log det Q` on the grid (in parallel, order preserved).
pub fn sample_logdetq(op: &DtnOperator, grid: &[f64]) -> Result<Vec<Sample>> {
    grid.par_iter()
        .map(|&x| {
            if !(x < 0.0) {
                return Err(Error::ConfigInvalid(format!("sample point {x} is not negative")));
            }
            let r = op.logdet_q(x)?;
            Ok(Sample {
                x,
                logdetq: r.value,
                err: r.error_estimate,
            })
        })
        .collect()
}

/// Default number of inverse powers, `d + 3`.
pub fn default_j_max(d: u32) -> i32 {
    d as i32 + 3
}

/// Weighted least-squares fit of the expansion.
pub fn fit_expansion(samples: &[Sample], d: u32, j_max: i32) -> Result<ExpansionFit> {
    if d == 0 {
        return Err(Error::ConfigInvalid("dimension must be at least 1".into()));
    }
    let j_min = -(d as i32 - 1);
    if j_max < 0 {
        return Err(Error::ConfigInvalid(format!("j_max = {j_max} must be non-negative")));
    }
    let pi_idx: Vec<i32> = (j_min..=j_max).collect();
    let q_idx: Vec<i32> = (0..d as i32).collect();
    let n_coef = pi_idx.len() + q_idx.len();
    if samples.is_empty() {
        return Err(Error::ConfigInvalid("no samples".into()));
    }
    if samples.len() < 3 * n_coef {
        return Err(Error::ConfigInvalid(format!(
            "{} samples for {n_coef} coefficients; need at least three per coefficient",
            samples.len()
        )));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), s| (a.min(s.x.abs()), b.max(s.x.abs())));
    if samples.iter().any(|s| !(s.x < 0.0) || !s.logdetq.is_finite()) {
        return Err(Error::ConfigInvalid("samples must have x < 0 and finite values".into()));
    }
    if hi / lo < 999.0 {
        return Err(Error::ConfigInvalid(format!("sample grid spans {:.2} decades, need three", (hi / lo).log10())));
    }
    let basis = |a: f64| -> Vec<f64> {
        pi_idx
            .iter()
            .map(|&j| a.powf(-j as f64 / 2.0))
            .chain(q_idx.iter().map(|&j| a.powf(j as f64 / 2.0) * a.ln()))
            .collect()
    };
    let m = samples.len();
    let mut a = DMatrix::<f64>::zeros(m, n_coef);
    let mut b = DVector::<f64>::zeros(m);
    for (i, s) in samples.iter().enumerate() {
        let w = 1.0 / (s.err + 1e-14 * (1.0 + s.logdetq.abs()));
        for (k, v) in basis(s.x.abs()).into_iter().enumerate() {
            a[(i, k)] = v * w;
        }
        b[i] = s.logdetq * w;
    }
    let scales: Vec<f64> = (0..n_coef).map(|k| a.column(k).amax()).collect();
    for (k, &sc) in scales.iter().enumerate() {
        a.column_mut(k).scale_mut(1.0 / sc);
    }
    let svd = a.clone().svd(true, true);
    let condition = svd.singular_values.max() / svd.singular_values.min();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(format!("design matrix condition number {condition:.3e}")));
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::IllConditioned(format!("least squares failed: {e}")))?;
    let coef: Vec<f64> = coef.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let fit = ExpansionFit {
        d,
        j_max,
        pi: pi_idx.iter().copied().zip(coef.iter().copied()).collect(),
        q: q_idx.iter().copied().zip(coef[pi_idx.len()..].iter().copied()).collect(),
        residual: 0.0,
        condition_number: condition,
    };
    let residual = samples
        .iter()
        .map(|s| (fit.eval(s.x) - s.logdetq).abs() / s.logdetq.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(ExpansionFit { residual, ..fit })
}

/// Fits and enforces a residual tolerance.
pub fn fit_checked(samples: &[Sample], d: u32, j_max: i32, max_residual: f64) -> Result<ExpansionFit> {
    let fit = fit_expansion(samples, d, j_max)?;
    if fit.residual > max_residual {
        return Err(Error::ResidualTooLarge(format!(
            "residual {:.3e} exceeds {max_residual:.1e}",
            fit.residual
        )));
    }
    Ok(fit)
}

/// `c = e^{−π₀}`.
pub fn local_constant(fit: &ExpansionFit) -> f64 {
    (-fit.pi0()).exp()
}

/// Change of `π₀` when the decade of smallest `|x|` is dropped. The grid
/// must span a little over four decades so that the reduced fit still
/// spans three.
pub fn decade_drop_drift(samples: &[Sample], d: u32, j_max: i32) -> Result<f64> {
    let full = fit_expansion(samples, d, j_max)?;
    let lo = samples.iter().map(|s| s.x.abs()).fold(f64::INFINITY, f64::min);
    let kept: Vec<Sample> = samples.iter().copied().filter(|s| s.x.abs() >= 10.0 * lo * (1.0 - 1e-12)).collect();
    let reduced = fit_expansion(&kept, d, j_max)?;
    Ok((full.pi0() - reduced.pi0()).abs())
}

/// Outcome of [`locality_audit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityAudit {
    pub pi0_base: f64,
    pub pi0_perturbed: f64,
    pub q0_base: f64,
    pub q0_perturbed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares the fits of an interval with and without an interior potential.
pub fn locality_audit(base: &IntervalModel, perturbed: &IntervalModel, grid: &[f64]) -> Result<LocalityAudit> {
    let j_max = default_j_max(1);
    let fb = fit_expansion(&sample_logdetq(&DtnOperator::Interval(base.clone()), grid)?, 1, j_max)?;
    let fp = fit_expansion(&sample_logdetq(&DtnOperator::Interval(perturbed.clone()), grid)?, 1, j_max)?;
    let tolerance = 1e-4;
    let pass = (fb.pi0() - fp.pi0()).abs() < tolerance && (fb.q0() - fp.q0()).abs() < tolerance;
    Ok(LocalityAudit {
        pi0_base: fb.pi0(),
        pi0_perturbed: fp.pi0(),
        q0_base: fb.q0(),
        q0_perturbed: fp.q0(),
        tolerance,
        pass,
    })
}
