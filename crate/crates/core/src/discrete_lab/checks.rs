//! Identity checks on discrete problems.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{q_matrix, spectrum, DiscreteBoundaryProblem};
use crate::contour::{contour_zeta_difference, ContourSpec, GrowthModel};
use crate::error::{Error, Result};
use crate::numerics::{adaptive_gauss, gauss_legendre_on, CompensatedSum};
use crate::report::CheckRecord;

fn cz(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Spectral norm of a complex matrix.
pub(crate) fn op_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Log-determinant of a small complex matrix via LU.
pub(crate) fn log_det_lu(m: &DMatrix<Complex64>) -> Result<Complex64> {
    let lu = m.clone().lu();
    let mut acc = cz(0.0);
    for v in lu.u().diagonal().iter() {
        if v.norm() == 0.0 {
            return Err(Error::SingularSystem {
                t: f64::NAN,
                z: "n/a".into(),
                condition: f64::INFINITY,
            });
        }
        acc += v.ln();
    }
    if lu.p().determinant::<f64>() < 0.0 {
        acc += Complex64::new(0.0, std::f64::consts::PI);
    }
    Ok(acc)
}

/// `log det Q(z)` for a discrete problem (argument on an arbitrary branch).
pub fn log_det_q(problem: &DiscreteBoundaryProblem, z: Complex64) -> Result<Complex64> {
    log_det_lu(&q_matrix(problem, z)?)
}

/// Relative defect of `det(A − z, B₁) = det(A − z, B₀) · det Q(z)`.
pub fn schur_identity_check(problem: &DiscreteBoundaryProblem, z: Complex64) -> Result<f64> {
    let l1 = problem.log_det(1.0, z)?;
    let l0 = problem.log_det(0.0, z)?;
    let lq = log_det_q(problem, z)?;
    Ok((cz(1.0) - (l0 + lq - l1).exp()).norm())
}

/// Outcome of a centred-difference derivative check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    /// Operator-norm errors at steps `h` and `h/2`.
    pub errors: [f64; 2],
    /// Observed order `log₂(e(h)/e(h/2))`; infinite when both sides vanish.
    pub order: f64,
    /// Both differences agree with the formula to roundoff.
    pub exact: bool,
}

fn derivative_check<F>(h: f64, exact_norm: f64, mut err_at: F) -> Result<DerivativeCheck>
where
    F: FnMut(f64) -> Result<f64>,
{
    let e1 = err_at(h)?;
    let e2 = err_at(0.5 * h)?;
    let exact = e1 <= 1e-13 * exact_norm.max(1e-300) || (e1 == 0.0 && e2 == 0.0);
    let order = if exact { f64::INFINITY } else { (e1 / e2).log2() };
    Ok(DerivativeCheck {
        errors: [e1, e2],
        order,
        exact,
    })
}

/// Compares `∂_t R_t(z)` by centred differences with `−P_t(z) B′ R_t(z)`.
pub fn dt_resolvent_check(problem: &DiscreteBoundaryProblem, t: f64, z: Complex64, h: f64) -> Result<DerivativeCheck> {
    let (r, p) = problem.inverse_blocks(t, z)?;
    let bp = problem.boundary_derivative().map(cz);
    let formula = -(&p * &bp * &r);
    let scale = op_norm(&formula).max(op_norm(&r));
    derivative_check(h, scale, |step| {
        let rp = problem.resolvent_matrix(t + step, z)?;
        let rm = problem.resolvent_matrix(t - step, z)?;
        let diff = (rp - rm) / cz(2.0 * step);
        Ok(op_norm(&(diff - &formula)))
    })
}

/// Compares `∂_z P_t(z)` by centred differences with `R_t(z) S P_t(z)`,
/// where `S` is the interior selector.
pub fn dz_poisson_check(problem: &DiscreteBoundaryProblem, t: f64, z: Complex64, h: f64) -> Result<DerivativeCheck> {
    let (r, p) = problem.inverse_blocks(t, z)?;
    let sel = problem.interior_selector.map(cz);
    let formula = &r * &sel * &p;
    let scale = op_norm(&formula).max(op_norm(&p));
    derivative_check(h, scale, |step| {
        let pp = problem.poisson_matrix(t, z + step)?;
        let pm = problem.poisson_matrix(t, z - step)?;
        let diff = (pp - pm) / cz(2.0 * step);
        Ok(op_norm(&(diff - &formula)))
    })
}

/// Logarithm of a symmetric positive definite matrix by diagonalization.
pub fn matrix_log_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::NotSpd(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    let norm = m.norm();
    let asym = (m - m.transpose()).norm();
    if asym > 1e-10 * norm {
        return Err(Error::NotSpd(format!("asymmetry {asym:.3e} relative to norm {norm:.3e}")));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if let Some(bad) = eig.eigenvalues.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::NotSpd(format!("eigenvalue {bad:.3e}")));
    }
    let logs = eig.eigenvalues.map(f64::ln);
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&logs) * v.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

/// `∫₀¹ (b1 − b0) P_t(z) dt` by Gauss–Legendre with `node_count` nodes.
pub fn interpolation_integral(problem: &DiscreteBoundaryProblem, z: f64, node_count: usize) -> Result<DMatrix<f64>> {
    let (ts, ws) = gauss_legendre_on(node_count, 0.0, 1.0);
    let bp = problem.boundary_derivative().map(cz);
    let mut acc = DMatrix::<f64>::zeros(problem.n_bdy, problem.n_bdy);
    for (t, w) in ts.into_iter().zip(ws) {
        let p = problem.poisson_matrix(t, cz(z))?;
        acc += (&bp * p).map(|v| v.re) * w;
    }
    Ok(acc)
}

/// Real symmetric `Q(z)` for real `z`, rejecting a non-negligible imaginary part.
fn real_q(problem: &DiscreteBoundaryProblem, z: f64) -> Result<DMatrix<f64>> {
    let q = q_matrix(problem, cz(z))?;
    let im = q.map(|v| v.im).norm();
    let re = q.map(|v| v.re);
    if im > 1e-12 * re.norm() {
        return Err(Error::NotSpd(format!("Q({z}) has imaginary part {im:.3e}")));
    }
    Ok(re)
}

/// Relative operator-norm deviation of the interpolation integral from
/// `log Q(z)`.
pub fn interpolation_integral_check(problem: &DiscreteBoundaryProblem, z: f64, node_count: usize) -> Result<f64> {
    let log_q = matrix_log_spd(&real_q(problem, z)?)?;
    let integral = interpolation_integral(problem, z, node_count)?;
    let to_c = |m: &DMatrix<f64>| m.map(cz);
    let diff = op_norm(&to_c(&(integral - &log_q)));
    let denom = op_norm(&to_c(&log_q));
    // In the degenerate family both sides vanish and the check is absolute.
    Ok(if denom > 1e-12 { diff / denom } else { diff })
}

/// `∫₀¹ (λ − 1)/(1 + t(λ − 1)) dt`, the single-mode form of the
/// interpolation integral, by adaptive quadrature.
pub fn scalar_interpolation_integral(lambda: f64, tol: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NotSpd(format!("mode value {lambda} is not positive")));
    }
    let a = lambda - 1.0;
    adaptive_gauss(|t| a / (1.0 + t * a), 0.0, 1.0, tol)
}

/// `Σ_j λ_j^{−s}` over the spectrum of `A_t`, principal branch.
pub fn finite_zeta(problem: &DiscreteBoundaryProblem, t: f64, s: Complex64) -> Result<Complex64> {
    let ev = spectrum(problem, t)?;
    zeta_of_values(&ev, s)
}

pub(crate) fn zeta_of_values(ev: &[Complex64], s: Complex64) -> Result<Complex64> {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for &l in ev {
        if l.re <= 0.0 && l.im.abs() <= 1e-12 * l.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::BranchCutHit(format!("{l}")));
        }
        let v = (-s * l.ln()).exp();
        re.add(v.re);
        im.add(v.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// Contour with `ε` at half the smallest eigenvalue modulus of `A₀` and `A₁`.
pub fn default_contour(problem: &DiscreteBoundaryProblem) -> Result<ContourSpec> {
    let mut lo = f64::INFINITY;
    for t in [0.0, 1.0] {
        for l in spectrum(problem, t)? {
            lo = lo.min(l.norm());
        }
    }
    Ok(ContourSpec::with_epsilon(0.5 * lo))
}

/// Relative defect of `ζ₁(s) − ζ₀(s) = (s/2πi) ∮ z^{−s−1} log det Q(z) dz`.
///
/// The error is taken relative to `|ζ₁ − ζ₀|`; when that difference is
/// negligible against the individual values (degenerate family) it is taken
/// relative to `max(|ζ₀|, |ζ₁|, 1)`.
pub fn contour_zeta_check(problem: &DiscreteBoundaryProblem, s: Complex64, contour: &ContourSpec) -> Result<f64> {
    let ev0 = spectrum(problem, 0.0)?;
    let ev1 = spectrum(problem, 1.0)?;
    contour.check_encloses(&ev0)?;
    contour.check_encloses(&ev1)?;
    let z0 = zeta_of_values(&ev0, s)?;
    let z1 = zeta_of_values(&ev1, s)?;
    let lhs = z1 - z0;
    // log det Q is bounded on the ray; bound it by its largest sampled modulus.
    let ratio = contour.r_max / contour.epsilon;
    let probe: Vec<f64> = (0..12).map(|k| contour.epsilon * ratio.powf(k as f64 / 11.0)).collect();
    let mut gmax = 0.0f64;
    for r in probe {
        gmax = gmax.max(log_det_q(problem, cz(-r))?.norm());
    }
    let growth = GrowthModel::new(4.0 * gmax + 1.0, 0.0);
    let rhs = contour_zeta_difference(s, |z| log_det_q(problem, z), &growth, contour)?;
    let scale = z0.norm().max(z1.norm());
    let denom = if lhs.norm() > 1e-12 * scale { lhs.norm() } else { scale.max(1.0) };
    Ok((lhs - rhs.value).norm() / denom)
}

/// Runs the discrete-lab checks on one problem and returns JSON records.
pub fn lab_records(problem: &DiscreteBoundaryProblem, label: &str) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let inputs = |extra: serde_json::Value| json!({"problem": label, "params": extra});
    for z in [-0.5, -1.0, -5.0] {
        let e = schur_identity_check(problem, cz(z))?;
        out.push(CheckRecord::below("schur_identity", inputs(json!({"z": z})), e, 1e-10));
    }
    let dt = dt_resolvent_check(problem, 0.3, cz(-1.0), 1e-3)?;
    out.push(CheckRecord::at_least("dt_resolvent_order", inputs(json!({"t": 0.3, "z": -1.0, "h": 1e-3})), finite_order(&dt), 1.9));
    let dz = dz_poisson_check(problem, 0.5, cz(-2.0), 1e-3)?;
    out.push(CheckRecord::at_least("dz_poisson_order", inputs(json!({"t": 0.5, "z": -2.0, "h": 1e-3})), finite_order(&dz), 1.9));
    for z in [-0.5, -1.0, -5.0] {
        let e = interpolation_integral_check(problem, z, 64)?;
        out.push(CheckRecord::below("interpolation_integral", inputs(json!({"z": z, "nodes": 64})), e, 1e-8));
    }
    let audit = q_positivity_audit(problem, &[-0.1, -1.0, -10.0, -100.0])?;
    out.push(CheckRecord::below("q_positivity", inputs(json!({"z_grid": [-0.1, -1.0, -10.0, -100.0]})), audit, 1e-12));
    let contour = default_contour(problem)?;
    for s in [0.5, 1.0, 2.0] {
        let e = contour_zeta_check(problem, cz(s), &contour)?;
        out.push(CheckRecord::below("contour_zeta_finite", inputs(json!({"s": s})), e, 1e-6));
    }
    Ok(out)
}

/// Orders are capped for reporting; an exact derivative counts as order 99.
fn finite_order(c: &DerivativeCheck) -> f64 {
    if c.order.is_finite() {
        c.order
    } else {
        99.0
    }
}

/// Symmetry and positivity of `Q(z)` on a grid of negative `z`.
///
/// Returns the worst relative asymmetry; fails with `NotSpd` if some `Q(z)`
/// has a non-positive eigenvalue.
pub fn q_positivity_audit(problem: &DiscreteBoundaryProblem, z_grid: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &z in z_grid {
        let q = real_q(problem, z)?;
        let asym = (&q - q.transpose()).norm() / q.norm();
        worst = worst.max(asym);
        let eig = SymmetricEigen::new((&q + q.transpose()) * 0.5);
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::NotSpd(format!("Q({z}) has a non-positive eigenvalue")));
        }
    }
    Ok(worst)
}
