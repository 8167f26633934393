//! Finite-dimensional boundary problems.
//!
//! A [`DiscreteBoundaryProblem`] stores the interior rows of a discretized
//! operator together with two boundary functionals `b0` and `b1`. For a
//! parameter `t` and spectral value `z` the square system
//!
//! ```text
//! [ interior_rows − z·interior_selector ]
//! [ (1 − t)·b0 + t·b1                   ]
//! ```
//!
//! plays the role of `(A − z, B_t)`. Its inverse splits into the resolvent
//! columns (interior data) and the Poisson columns (boundary data).

mod checks;
pub mod generator;

pub use checks::{
    dt_resolvent_check, dz_poisson_check, finite_zeta, interpolation_integral_check, matrix_log_spd,
    contour_zeta_check, schur_identity_check, DerivativeCheck,
    default_contour, lab_records, log_det_q, q_positivity_audit, scalar_interpolation_integral, interpolation_integral,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivot ratio above which an assembled system is treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e12;

/// Matrix model of the family `(A − z, B_t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemJson", into = "ProblemJson")]
pub struct DiscreteBoundaryProblem {
    pub n_total: usize,
    pub n_bdy: usize,
    /// (n_total − n_bdy) × n_total.
    pub interior_rows: DMatrix<f64>,
    /// (n_total − n_bdy) × n_total 0/1 matrix.
    pub interior_selector: DMatrix<f64>,
    /// n_bdy × n_total.
    pub b0: DMatrix<f64>,
    /// n_bdy × n_total.
    pub b1: DMatrix<f64>,
    pub symmetric_flag: bool,
}

/// Row-major JSON layout of a problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProblemJson {
    n_total: usize,
    n_bdy: usize,
    interior_rows: Vec<Vec<f64>>,
    interior_selector: Vec<Vec<f64>>,
    b0: Vec<Vec<f64>>,
    b1: Vec<Vec<f64>>,
    symmetric_flag: bool,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(name: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::ConfigInvalid(format!("{name} must have shape {nrows} x {ncols}")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl From<DiscreteBoundaryProblem> for ProblemJson {
    fn from(p: DiscreteBoundaryProblem) -> Self {
        ProblemJson {
            n_total: p.n_total,
            n_bdy: p.n_bdy,
            interior_rows: to_rows(&p.interior_rows),
            interior_selector: to_rows(&p.interior_selector),
            b0: to_rows(&p.b0),
            b1: to_rows(&p.b1),
            symmetric_flag: p.symmetric_flag,
        }
    }
}

impl TryFrom<ProblemJson> for DiscreteBoundaryProblem {
    type Error = Error;

    fn try_from(j: ProblemJson) -> Result<Self> {
        let n_int = j
            .n_total
            .checked_sub(j.n_bdy)
            .ok_or_else(|| Error::ConfigInvalid("n_bdy exceeds n_total".into()))?;
        DiscreteBoundaryProblem::new(
            from_rows("interior_rows", &j.interior_rows, n_int, j.n_total)?,
            from_rows("interior_selector", &j.interior_selector, n_int, j.n_total)?,
            from_rows("b0", &j.b0, j.n_bdy, j.n_total)?,
            from_rows("b1", &j.b1, j.n_bdy, j.n_total)?,
            j.symmetric_flag,
        )
    }
}

/// Square system `[interior_rows − z·selector ; (1 − t)·b0 + t·b1]`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub t: f64,
    pub z: Complex64,
    pub matrix: DMatrix<Complex64>,
}

/// LU factorization of an assembled system with a singularity guard.
struct Factored {
    matrix: DMatrix<Complex64>,
    row_scale: Vec<f64>,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factored {
    fn new(sys: &AssembledSystem) -> Result<Self> {
        // Equilibrate rows first so the pivot ratio reflects conditioning
        // rather than the different scales of interior and boundary rows.
        let n = sys.matrix.nrows();
        let mut scaled = sys.matrix.clone();
        let mut row_scale = vec![1.0; n];
        for i in 0..n {
            let m = scaled.row(i).iter().map(|v| v.norm()).fold(0.0, f64::max);
            if m > 0.0 {
                row_scale[i] = 1.0 / m;
                scaled.row_mut(i).scale_mut(1.0 / m);
            }
        }
        let lu = scaled.lu();
        let diag: Vec<f64> = lu.u().diagonal().iter().map(|v| v.norm()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(condition < SINGULAR_THRESHOLD) {
            return Err(Error::SingularSystem {
                t: sys.t,
                z: format!("{}", sys.z),
                condition,
            });
        }
        Ok(Self {
            matrix: sys.matrix.clone(),
            row_scale,
            lu,
        })
    }

    /// Solves `matrix · X = rhs` with one step of iterative refinement.
    fn solve(&self, rhs: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let scale = |m: &DMatrix<Complex64>| {
            let mut m = m.clone();
            for (i, s) in self.row_scale.iter().enumerate() {
                m.row_mut(i).scale_mut(*s);
            }
            m
        };
        let mut x = self.lu.solve(&scale(rhs)).expect("factorization checked");
        let residual = rhs - &self.matrix * &x;
        if let Some(dx) = self.lu.solve(&scale(&residual)) {
            x += dx;
        }
        x
    }

    fn log_det(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in self.lu.u().diagonal().iter() {
            acc += v.ln();
        }
        for s in &self.row_scale {
            acc -= s.ln();
        }
        if self.lu.p().determinant::<f64>() < 0.0 {
            acc += Complex64::new(0.0, std::f64::consts::PI);
        }
        acc
    }
}

impl DiscreteBoundaryProblem {
    /// Builds a problem after checking block shapes.
    pub fn new(
        interior_rows: DMatrix<f64>,
        interior_selector: DMatrix<f64>,
        b0: DMatrix<f64>,
        b1: DMatrix<f64>,
        symmetric_flag: bool,
    ) -> Result<Self> {
        let n_total = interior_rows.ncols();
        let n_bdy = b0.nrows();
        let n_int = interior_rows.nrows();
        if n_int + n_bdy != n_total
            || interior_selector.shape() != (n_int, n_total)
            || b0.shape() != (n_bdy, n_total)
            || b1.shape() != (n_bdy, n_total)
        {
            return Err(Error::InvalidModel(format!(
                "inconsistent block shapes: interior {:?}, selector {:?}, b0 {:?}, b1 {:?}",
                interior_rows.shape(),
                interior_selector.shape(),
                b0.shape(),
                b1.shape()
            )));
        }
        Ok(Self {
            n_total,
            n_bdy,
            interior_rows,
            interior_selector,
            b0,
            b1,
            symmetric_flag,
        })
    }

    pub fn n_interior(&self) -> usize {
        self.n_total - self.n_bdy
    }

    /// `B_t = (1 − t)·b0 + t·b1`.
    pub fn boundary_block(&self, t: f64) -> DMatrix<f64> {
        &self.b0 * (1.0 - t) + &self.b1 * t
    }

    /// `B′ = b1 − b0`.
    pub fn boundary_derivative(&self) -> DMatrix<f64> {
        &self.b1 - &self.b0
    }

    /// Numerical rank of the stacked matrix `[b0; b1]`.
    pub fn complementarity_rank(&self) -> usize {
        let mut stacked = DMatrix::zeros(2 * self.n_bdy, self.n_total);
        stacked.rows_mut(0, self.n_bdy).copy_from(&self.b0);
        stacked.rows_mut(self.n_bdy, self.n_bdy).copy_from(&self.b1);
        let svd = stacked.svd(false, false);
        let smax = svd.singular_values.max();
        svd.rank(smax * 1e-10)
    }

    /// Whether `[b0; b1]` has full row rank `2·n_bdy`.
    pub fn is_complementary(&self) -> bool {
        self.complementarity_rank() == 2 * self.n_bdy
    }

    /// Square system for arbitrary real `t`; used internally when finite
    /// differences step slightly outside [0, 1].
    fn system(&self, t: f64, z: Complex64) -> AssembledSystem {
        let n_int = self.n_interior();
        let mut m = DMatrix::<Complex64>::zeros(self.n_total, self.n_total);
        for i in 0..n_int {
            for j in 0..self.n_total {
                m[(i, j)] = Complex64::new(self.interior_rows[(i, j)], 0.0) - z * self.interior_selector[(i, j)];
            }
        }
        let bt = self.boundary_block(t);
        for i in 0..self.n_bdy {
            for j in 0..self.n_total {
                m[(n_int + i, j)] = Complex64::new(bt[(i, j)], 0.0);
            }
        }
        AssembledSystem { t, z, matrix: m }
    }

    fn factor(&self, t: f64, z: Complex64) -> Result<Factored> {
        Factored::new(&self.system(t, z))
    }

    /// Full inverse of the assembled system, split as `[R | P]`.
    fn inverse_blocks(&self, t: f64, z: Complex64) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
        let f = self.factor(t, z)?;
        let inv = f.solve(&DMatrix::identity(self.n_total, self.n_total));
        let n_int = self.n_interior();
        Ok((inv.columns(0, n_int).into_owned(), inv.columns(n_int, self.n_bdy).into_owned()))
    }

    /// Resolvent matrix `R_t(z)`: n_total × n_interior.
    pub fn resolvent_matrix(&self, t: f64, z: Complex64) -> Result<DMatrix<Complex64>> {
        Ok(self.inverse_blocks(t, z)?.0)
    }

    /// Poisson matrix `P_t(z)`: n_total × n_bdy.
    pub fn poisson_matrix(&self, t: f64, z: Complex64) -> Result<DMatrix<Complex64>> {
        let f = self.factor(t, z)?;
        let mut rhs = DMatrix::zeros(self.n_total, self.n_bdy);
        for j in 0..self.n_bdy {
            rhs[(self.n_interior() + j, j)] = Complex64::new(1.0, 0.0);
        }
        Ok(f.solve(&rhs))
    }

    /// Log-determinant of the assembled system (any branch of the argument).
    pub fn log_det(&self, t: f64, z: Complex64) -> Result<Complex64> {
        Ok(self.factor(t, z)?.log_det())
    }

    /// Basis of `ker B_t` with orthonormal columns (n_total × n_interior).
    pub fn kernel_basis(&self, t: f64) -> Result<DMatrix<f64>> {
        let bt = self.boundary_block(t);
        let svd = bt.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let rank = if smax > 0.0 { svd.rank(smax * 1e-12) } else { 0 };
        if rank < self.n_bdy {
            return Err(Error::DefectiveReduction {
                rank,
                expected: self.n_bdy,
            });
        }
        let qr = bt.transpose().qr();
        let mut qt = DMatrix::<f64>::identity(self.n_total, self.n_total);
        qr.q_tr_mul(&mut qt);
        let q = qt.transpose();
        Ok(q.columns(self.n_bdy, self.n_interior()).into_owned())
    }

    /// The operator `A_t` on `ker B_t`, written in the coordinates of
    /// [`Self::kernel_basis`]: `Ã = (S·N)⁻¹ (A·N)`.
    pub fn reduced_operator(&self, t: f64) -> Result<DMatrix<f64>> {
        let n = self.kernel_basis(t)?;
        let an = &self.interior_rows * &n;
        let sn = &self.interior_selector * &n;
        let lu = sn.lu();
        lu.solve(&an).ok_or(Error::DefectiveReduction {
            rank: 0,
            expected: self.n_interior(),
        })
    }

    /// Checks that the whole problem data is symmetric in the sense of the
    /// generator: the reduced operator at `t = 0` is symmetric.
    fn reduced_is_symmetric(a: &DMatrix<f64>) -> bool {
        let norm = a.norm().max(f64::MIN_POSITIVE);
        (a - a.transpose()).norm() <= 1e-10 * norm
    }
}

/// Stacked square system for `(t, z)`.
///
/// # Panics
/// If `t` is outside [0, 1].
pub fn assemble(problem: &DiscreteBoundaryProblem, t: f64, z: Complex64) -> AssembledSystem {
    assert!((0.0..=1.0).contains(&t), "t = {t} outside [0, 1]");
    problem.system(t, z)
}

/// Solves `interior = f`, `B_t u = 0`.
pub fn resolvent(problem: &DiscreteBoundaryProblem, t: f64, z: Complex64, f: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    assert_eq!(f.len(), problem.n_interior(), "interior data has wrong length");
    let fac = problem.factor(t, z)?;
    let mut rhs = DMatrix::zeros(problem.n_total, 1);
    rhs.rows_mut(0, problem.n_interior()).copy_from(f);
    Ok(fac.solve(&rhs).column(0).into_owned())
}

/// Solves `interior = 0`, `B_t u = g`.
pub fn poisson(problem: &DiscreteBoundaryProblem, t: f64, z: Complex64, g: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    assert_eq!(g.len(), problem.n_bdy, "boundary data has wrong length");
    let fac = problem.factor(t, z)?;
    let mut rhs = DMatrix::zeros(problem.n_total, 1);
    rhs.rows_mut(problem.n_interior(), problem.n_bdy).copy_from(g);
    Ok(fac.solve(&rhs).column(0).into_owned())
}

/// `Q(z) = b1 · P_0(z)`.
pub fn q_matrix(problem: &DiscreteBoundaryProblem, z: Complex64) -> Result<DMatrix<Complex64>> {
    let p = problem.poisson_matrix(0.0, z)?;
    Ok(problem.b1.map(|v| Complex64::new(v, 0.0)) * p)
}

/// Eigenvalues of `A_t`, i.e. the `z` where the assembled system is singular.
///
/// Symmetric reduced operators are diagonalized with a symmetric solver
/// (real output); otherwise a real Schur form is used.
pub fn spectrum(problem: &DiscreteBoundaryProblem, t: f64) -> Result<Vec<Complex64>> {
    let a = problem.reduced_operator(t)?;
    let mut eig: Vec<Complex64> = if DiscreteBoundaryProblem::reduced_is_symmetric(&a) {
        let sym = (&a + a.transpose()) * 0.5;
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect()
    } else {
        a.complex_eigenvalues().iter().copied().collect()
    };
    eig.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::generator::{dirichlet_chain, random_chain};
    use super::*;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn assemble_endpoints_use_exact_blocks() {
        let p = random_chain(3, 12);
        let n_int = p.n_interior();
        let s0 = assemble(&p, 0.0, c(-1.0));
        let s1 = assemble(&p, 1.0, c(-1.0));
        for i in 0..p.n_bdy {
            for j in 0..p.n_total {
                assert_eq!(s0.matrix[(n_int + i, j)].re, p.b0[(i, j)]);
                assert_eq!(s1.matrix[(n_int + i, j)].re, p.b1[(i, j)]);
            }
        }
    }

    #[test]
    fn resolvent_of_zero_is_zero() {
        let p = random_chain(5, 10);
        let u = resolvent(&p, 0.4, c(-1.0), &DVector::zeros(p.n_interior())).unwrap();
        assert!(u.norm() == 0.0);
    }

    #[test]
    fn resolvent_matches_inverse_dirichlet_matrix() {
        let n = 5;
        let h = 1.0 / (n as f64 + 1.0);
        let p = dirichlet_chain(n, h);
        let mut f = DVector::zeros(n);
        f[0] = c(1.0);
        let u = resolvent(&p, 0.0, c(0.0), &f).unwrap();
        let t = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0 / (h * h),
            1 => -1.0 / (h * h),
            _ => 0.0,
        });
        let inv = t.try_inverse().unwrap();
        for i in 0..n {
            assert_relative_eq!(u[i + 1].re, inv[(i, 0)], epsilon = 1e-14);
        }
        assert!(u[0].norm() < 1e-15 && u[n + 1].norm() < 1e-15);
    }

    #[test]
    fn eigenvalue_gives_singular_system() {
        let p = random_chain(11, 20);
        let ev = spectrum(&p, 0.0).unwrap();
        let err = resolvent(&p, 0.0, ev[0], &DVector::from_element(p.n_interior(), c(1.0))).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { .. }), "{err}");
    }

    #[test]
    fn dirichlet_chain_spectrum_is_classical() {
        let n = 9;
        let h = 0.1;
        let p = dirichlet_chain(n, h);
        let ev = spectrum(&p, 0.0).unwrap();
        for (k, e) in ev.iter().enumerate() {
            let kf = (k + 1) as f64;
            let exact = (2.0 - 2.0 * (kf * std::f64::consts::PI / (n as f64 + 1.0)).cos()) / (h * h);
            assert_relative_eq!(e.re, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = random_chain(2, 8);
        let s = serde_json::to_string(&p).unwrap();
        let back: DiscreteBoundaryProblem = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn json_shape_mismatch_is_rejected() {
        let p = random_chain(2, 8);
        let mut v = serde_json::to_value(&p).unwrap();
        v["b0"] = serde_json::json!([[1.0]]);
        assert!(serde_json::from_value::<DiscreteBoundaryProblem>(v).is_err());
    }
}
