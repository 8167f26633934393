//! Dirichlet-to-Neumann operators `Q(z)` of the model geometries and the
//! regularized `log det Q(z)`.
//!
//! Sign convention: outward normal derivative, so `Q(z)` is positive on
//! the negative real axis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discrete_lab::scalar_interpolation_integral;
use crate::error::{Error, Result};
use crate::model_geometries::bessel::bessel_i_next_ratios;
use crate::model_geometries::{CircleModel, DiskModel, IntervalModel};
use crate::numerics::{dopri45, hurwitz_zeta, CompensatedSum, OdeOptions};

/// Boundary correspondence operator of a model geometry.
#[derive(Debug, Clone, PartialEq)]
pub enum DtnOperator {
    /// 2×2 matrix acting on the values at both ends of `[0, L]`.
    Interval(IntervalModel),
    /// Scalar jump-of-normal-derivative operator at the cut.
    CutCircle(CircleModel),
    /// Rotation-invariant operator on the boundary circle, given by modes.
    Disk(DiskModel),
    /// The degenerate family `B₁ = B₀`, where `Q ≡ I`.
    Identity,
}

/// Regularized `log det Q(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizedLogDet {
    pub value: f64,
    /// Largest mode index summed explicitly (0 for matrix cases).
    pub mode_cutoff: usize,
    /// Coefficients `a_p`, `p = 2, 3, …`, of the subtracted large-`n`
    /// expansion `log(Rλ_n/n) ≈ Σ a_p n^{−p}`.
    pub tail_model: Vec<f64>,
    pub error_estimate: f64,
}

/// Result of [`positivity_selfadjointness_audit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityAudit {
    pub points: usize,
    /// Smallest eigenvalue (or mode value) seen.
    pub min_eigenvalue: f64,
    /// Largest `‖Q − Qᵀ‖/‖Q‖` seen.
    pub max_asymmetry: f64,
    pub pass: bool,
}

fn mu_of(m: f64, z: Complex64) -> Complex64 {
    (Complex64::new(m * m, 0.0) - z).sqrt()
}

/// `(coth μL, 1/sinh μL)` without overflow, with `EigenvalueHit` at zeros of `sinh μL`.
fn coth_csch(mu: Complex64, l: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let e = (-mu * l).exp();
    let denom = one - e * e;
    if denom.norm() < 1e-14 {
        return Err(Error::EigenvalueHit(z.to_string()));
    }
    Ok(((one + e * e) / denom, 2.0 * e / denom))
}

/// Closed-form interval DtN map `(μ/sinh μL)[[cosh μL, −1], [−1, cosh μL]]`,
/// `μ = √(m² − z)` (principal branch).
pub fn dtn_interval(z: Complex64, m: f64, l: f64) -> Result<DMatrix<Complex64>> {
    let mu = mu_of(m, z);
    let (coth, csch) = coth_csch(mu, l, z)?;
    let d = mu * coth;
    let o = -mu * csch;
    Ok(DMatrix::from_row_slice(2, 2, &[d, o, o, d]))
}

/// Cut-circle operator `2μ tanh(μL/2)`.
pub fn dtn_cut_circle(z: Complex64, m: f64, l: f64) -> Result<Complex64> {
    let mu = mu_of(m, z);
    let (coth, csch) = coth_csch(mu, l, z)?;
    // sum of the entries of one row pair: 2μ(coth − csch) = 2μ tanh(μL/2)
    Ok(2.0 * mu * (coth - csch))
}

/// Disk mode value `λ_n(z) = μ I_n′(μR)/I_n(μR)`.
pub fn dtn_disk_mode(n: i64, z: f64, m: f64, r: f64) -> f64 {
    let mu = (m * m - z).sqrt();
    crate::model_geometries::bessel_i_ratio(n.unsigned_abs() as usize, mu * r) * mu
}

/// Interval DtN map and its log determinant for a general potential, by
/// Riccati integration (real `z < m²`).
///
/// With `φ(0) = 1, φ′(0) = 0` and `ψ(0) = 0, ψ′(0) = 1` the map is
/// `[[φ/ψ, −1/ψ], [−1/ψ, ψ′/ψ]]` at `L`, and `det Q = φ′(L)/ψ(L)`. The
/// integrated quantities are `σ = ψ/ψ′`, `log(ψ/x)`, `ρ = φ′/φ` and
/// `log φ`, all bounded or slowly growing.
pub fn dtn_interval_ode(model: &IntervalModel, z: f64) -> Result<(DMatrix<f64>, f64)> {
    if z >= model.mass * model.mass {
        return Err(Error::InvalidModel(format!("Riccati DtN needs z < m², got {z}")));
    }
    let rhs = |x: f64, y: &[f64; 4]| {
        let k = model.q(x) - z;
        let log_psi_rate = if x == 0.0 { 0.0 } else { 1.0 / y[0] - 1.0 / x };
        [1.0 - k * y[0] * y[0], log_psi_rate, k - y[2] * y[2], y[2]]
    };
    let opts = OdeOptions {
        max_step: model.potential.as_ref().map_or(f64::INFINITY, |p| p.spacing()),
        ..OdeOptions::default()
    };
    let [sigma, ell, rho, log_phi] = dopri45(rhs, 0.0, model.length, [0.0; 4], opts)?;
    let log_psi = ell + model.length.ln();
    let q11 = (log_phi - log_psi).exp();
    let q12 = -(-log_psi).exp();
    let q22 = 1.0 / sigma;
    let log_det = rho.ln() + log_phi - log_psi;
    Ok((DMatrix::from_row_slice(2, 2, &[q11, q12, q12, q22]), log_det))
}

/// Large-`n` expansion of `log(Rλ_n/n) = log(1 + x I_{n+1}(x)/(n I_n(x)))`,
/// coefficients of `n^{−2} … n^{−8}` as polynomials in `x = μR`.
pub fn disk_tail_coefficients(x: f64) -> Vec<f64> {
    let x2 = x * x;
    vec![
        x2 / 2.0,
        -x2 / 2.0,
        -x2 * (x2 - 2.0) / 4.0,
        x2 * (3.0 * x2 - 2.0) / 4.0,
        x2 * (2.0 * x2 * x2 - 21.0 * x2 + 6.0) / 12.0,
        -x2 * (15.0 * x2 * x2 - 60.0 * x2 + 8.0) / 16.0,
        -x2 * (x2 * x2 * x2 - 30.0 * x2 * x2 + 62.0 * x2 - 4.0) / 8.0,
    ]
}

/// `d/dx` of [`disk_tail_coefficients`].
fn disk_tail_coefficients_dx(x: f64) -> Vec<f64> {
    let x2 = x * x;
    vec![
        x,
        -x,
        -(4.0 * x2 * x - 4.0 * x) / 4.0,
        (12.0 * x2 * x - 4.0 * x) / 4.0,
        (12.0 * x2 * x2 * x - 84.0 * x2 * x + 12.0 * x) / 12.0,
        -(90.0 * x2 * x2 * x - 240.0 * x2 * x + 16.0 * x) / 16.0,
        -(8.0 * x2 * x2 * x2 * x - 180.0 * x2 * x2 * x + 248.0 * x2 * x - 8.0 * x) / 8.0,
    ]
}

/// Explicit mode count for `x = μR`.
fn disk_mode_cutoff(x: f64, min_modes: usize) -> usize {
    min_modes.max((30.0 * x).ceil() as usize)
}

fn tail_value(coeffs: &[f64], n: f64) -> f64 {
    coeffs.iter().enumerate().map(|(i, c)| c * n.powi(-(i as i32 + 2))).sum()
}

/// Regularized `log det Q` of the disk:
/// `log λ₀ + log(2πR) + 2 Σ_{n≥1} log(Rλ_n/n)`, where the sum runs
/// explicitly to `N` and the remainder is resummed from the tail model
/// with Hurwitz zeta values.
fn disk_logdet(disk: &DiskModel, z: f64, min_modes: usize) -> Result<RegularizedLogDet> {
    let mu = (disk.mass * disk.mass - z).sqrt();
    let x = mu * disk.radius;
    let n_max = disk_mode_cutoff(x, min_modes);
    let ratios = bessel_i_next_ratios(n_max, x);
    let coeffs = disk_tail_coefficients(x);
    let f = |n: usize| (x * ratios[n] / n as f64).ln_1p();
    let half = n_max / 2;
    let mut acc = CompensatedSum::new();
    let mut acc_half = 0.0;
    for n in 1..=n_max {
        acc.add(f(n));
        if n == half {
            acc_half = acc.value();
        }
    }
    let tail = |from: usize| -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * hurwitz_zeta((i + 2) as f64, (from + 1) as f64))
            .sum()
    };
    // remainder audit: after subtraction the terms must decay faster than n^{-3}
    let rem = |n: usize| (f(n) - tail_value(&coeffs, n as f64)).abs();
    let (r_half, r_full) = (rem(half), rem(n_max));
    let noise = 1e-15 * f(n_max).abs() + 1e-300;
    if r_full > noise && r_full > r_half / 8.0 {
        return Err(Error::TailModelMismatch(format!(
            "remainder {r_full:.3e} at n = {n_max} vs {r_half:.3e} at n = {half}"
        )));
    }
    let lambda0 = x * ratios[0] / disk.radius;
    let base = lambda0.ln() + (2.0 * std::f64::consts::PI * disk.radius).ln();
    let value = base + 2.0 * (acc.value() + tail(n_max));
    let value_half = base + 2.0 * (acc_half + tail(half));
    let rounding = 1e-15 * (n_max as f64).sqrt() * value.abs().max(1.0);
    Ok(RegularizedLogDet {
        value,
        mode_cutoff: n_max,
        tail_model: coeffs,
        error_estimate: (value - value_half).abs() + 2.0 * r_full * n_max as f64 + rounding,
    })
}

impl DtnOperator {
    /// Matrix form for the interval (2×2) and cut circle (1×1).
    pub fn matrix(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        match self {
            DtnOperator::Interval(model) if model.potential.is_none() => dtn_interval(z, model.mass, model.length),
            DtnOperator::Interval(model) => {
                if z.im != 0.0 {
                    return Err(Error::InvalidModel("the DtN map with a potential is evaluated for real z only".into()));
                }
                Ok(dtn_interval_ode(model, z.re)?.0.map(|v| Complex64::new(v, 0.0)))
            }
            DtnOperator::CutCircle(c) => Ok(DMatrix::from_element(1, 1, dtn_cut_circle(z, c.mass, c.circumference)?)),
            DtnOperator::Disk(_) => Err(Error::InvalidModel("the disk operator is given by modes".into())),
            DtnOperator::Identity => Ok(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0))),
        }
    }

    /// Mode values `λ_n(z)` (disk) or eigenvalues (matrix cases), real `z`.
    pub fn mode(&self, n: i64, z: f64) -> Result<f64> {
        match self {
            DtnOperator::Disk(d) => Ok(dtn_disk_mode(n, z, d.mass, d.radius)),
            DtnOperator::Identity => Ok(1.0),
            _ => Err(Error::InvalidModel("modes exist only for rotation-invariant geometries".into())),
        }
    }

    /// `log det Q(z)` for complex `z` in the matrix cases (principal log,
    /// to be branch-tracked by the caller).
    pub fn log_det_complex(&self, z: Complex64) -> Result<Complex64> {
        match self {
            DtnOperator::Disk(_) => Err(Error::InvalidModel("complex z is not supported for the disk".into())),
            DtnOperator::Identity => Ok(Complex64::new(0.0, 0.0)),
            DtnOperator::Interval(m) if m.potential.is_none() => {
                // det = μ², computed from the matrix itself
                let q = self.matrix(z)?;
                Ok((q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)]).ln())
            }
            _ => Ok(self.matrix(z)?.determinant().ln()),
        }
    }

    /// Regularized `log det Q(z)` for real `z ≤ 0`.
    pub fn logdet_q(&self, z: f64) -> Result<RegularizedLogDet> {
        self.logdet_q_with(z, 256)
    }

    /// As [`logdet_q`](Self::logdet_q) with at least `min_modes` explicit disk modes.
    pub fn logdet_q_with(&self, z: f64, min_modes: usize) -> Result<RegularizedLogDet> {
        let plain = |value: f64| RegularizedLogDet {
            value,
            mode_cutoff: 0,
            tail_model: Vec::new(),
            error_estimate: 1e-15 * value.abs().max(1.0),
        };
        match self {
            DtnOperator::Interval(model) if model.potential.is_some() => {
                let (_, l) = dtn_interval_ode(model, z)?;
                Ok(RegularizedLogDet {
                    error_estimate: 1e-10 * l.abs().max(1.0),
                    ..plain(l)
                })
            }
            DtnOperator::Interval(_) | DtnOperator::CutCircle(_) | DtnOperator::Identity => {
                let v = self.log_det_complex(Complex64::new(z, 0.0))?;
                if v.im.abs() > 1e-12 {
                    return Err(Error::NotSpd(format!("log det Q({z}) = {v} is not real")));
                }
                Ok(plain(v.re))
            }
            DtnOperator::Disk(d) => disk_logdet(d, z, min_modes),
        }
    }

    /// `d/dz` of the regularized disk log determinant, from the mode
    /// derivatives `λ_n′/λ_n` with the same subtraction; matrix cases use
    /// a centred difference.
    pub fn logdet_q_derivative(&self, z: f64) -> Result<f64> {
        let DtnOperator::Disk(d) = self else {
            let h = 1e-5 * (1.0 + z.abs());
            return Ok((self.logdet_q(z + h)?.value - self.logdet_q(z - h)?.value) / (2.0 * h));
        };
        let mu = (d.mass * d.mass - z).sqrt();
        let x = mu * d.radius;
        let dx_dz = -d.radius / (2.0 * mu);
        let n_max = disk_mode_cutoff(x, 256);
        let ratios = bessel_i_next_ratios(n_max, x);
        let mut acc = CompensatedSum::new();
        let mode_log_dx = |n: usize| {
            // g = n + x r_n; Rλ_n = g; with ρ = n/x + r_n, dρ/dx = 1 − ρ² − ρ/x + n²/x²
            let nf = n as f64;
            let rho = nf / x + ratios[n];
            let drho = 1.0 - rho * rho - rho / x + nf * nf / (x * x);
            (rho + x * drho) / (x * rho)
        };
        for n in 1..=n_max {
            acc.add(mode_log_dx(n));
        }
        let dc = disk_tail_coefficients_dx(x);
        let tail: f64 = dc
            .iter()
            .enumerate()
            .map(|(i, c)| c * hurwitz_zeta((i + 2) as f64, (n_max + 1) as f64))
            .sum();
        Ok((mode_log_dx(0) + 2.0 * (acc.value() + tail)) * dx_dz)
    }
}

/// Checks symmetry and positivity of `Q(z)` on a grid of the negative axis.
/// Disk modes are checked for `|n| ≤ 200`.
pub fn positivity_selfadjointness_audit(op: &DtnOperator, z_grid: &[f64]) -> Result<PositivityAudit> {
    let mut min_eig = f64::INFINITY;
    let mut max_asym = 0.0f64;
    for &z in z_grid {
        if z > 0.0 {
            return Err(Error::ConfigInvalid(format!("audit grid point {z} is not on the negative axis")));
        }
        match op {
            DtnOperator::Disk(_) => {
                for n in 0..=200i64 {
                    let (a, b) = (op.mode(n, z)?, op.mode(-n, z)?);
                    max_asym = max_asym.max((a - b).abs() / a.abs());
                    min_eig = min_eig.min(a);
                }
            }
            _ => {
                let q = op.matrix(Complex64::new(z, 0.0))?;
                let im = q.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
                let re = q.map(|v| v.re);
                let norm = re.norm();
                max_asym = max_asym.max(((&re - re.transpose()).norm() + im) / norm);
                let sym = (&re + re.transpose()) * 0.5;
                min_eig = min_eig.min(sym.symmetric_eigenvalues().min());
            }
        }
    }
    Ok(PositivityAudit {
        points: z_grid.len(),
        min_eigenvalue: min_eig,
        max_asymmetry: max_asym,
        pass: min_eig > 0.0 && max_asym <= 1e-12,
    })
}

/// Largest deviation of the scalar interpolation integral
/// `∫₀¹ (λ−1)/(1+t(λ−1)) dt` from `log λ` over the disk modes `0..=n_max`.
pub fn scalar_mode_audit(op: &DtnOperator, z: f64, n_max: i64) -> Result<f64> {
    let mut worst = 0.0f64;
    for n in 0..=n_max {
        let l = op.mode(n, z)?;
        worst = worst.max((scalar_interpolation_integral(l, 1e-13)? - l.ln()).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_det_is_mu_squared() {
        for z in [-3.0, -0.5, 0.0, 0.5] {
            let q = dtn_interval(Complex64::new(z, 0.0), 1.3, 0.8).unwrap();
            let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
            assert_relative_eq!(det.re, 1.69 - z, max_relative = 1e-12);
        }
    }

    #[test]
    fn riccati_matches_closed_form() {
        let model = IntervalModel::new(1.5, 0.7).unwrap();
        for z in [0.0, -2.0, -1e4] {
            let (q, l) = dtn_interval_ode(&model, z).unwrap();
            let exact = dtn_interval(Complex64::new(z, 0.0), 0.7, 1.5).unwrap().map(|v| v.re);
            for (a, b) in q.iter().zip(exact.iter()) {
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-300) + 1e-300, "{a} vs {b} at z = {z}");
            }
            assert_relative_eq!(l, (0.49 - z).ln(), max_relative = 1e-10);
        }
    }

    #[test]
    fn cut_circle_value() {
        let v = dtn_cut_circle(Complex64::new(0.0, 0.0), 1.0, 2.0 * std::f64::consts::PI).unwrap();
        assert!((v.re - 2.0 * std::f64::consts::PI.tanh()).abs() < 1e-14);
        assert!((v.re - 1.992544152).abs() < 1e-9);
    }

    #[test]
    fn eigenvalue_hit() {
        let z = Complex64::new(1.0 + std::f64::consts::PI.powi(2), 0.0);
        assert!(matches!(dtn_interval(z, 1.0, 1.0), Err(Error::EigenvalueHit(_))));
    }

    #[test]
    fn tail_expansion_matches_modes() {
        let x = 2.0;
        let ratios = bessel_i_next_ratios(400, x);
        let c = disk_tail_coefficients(x);
        for n in [100usize, 200, 400] {
            let f = (x * ratios[n] / n as f64).ln_1p();
            let r = (f - tail_value(&c, n as f64)).abs();
            assert!(r < 1e-10 * f, "{n}: {r:e} vs {f:e}");
        }
    }
}
