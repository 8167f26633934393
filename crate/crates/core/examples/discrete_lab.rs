//! Discrete lab: the finite-dimensional identities on a seeded random chain
//! and a small grid.
//!
//! cargo run --release --example discrete_lab

use bfk_lab::discrete_lab::generator::{random_chain, random_grid};
use bfk_lab::discrete_lab::{lab_records, q_matrix, schur_identity_check};
use num_complex::Complex64;

fn main() -> bfk_lab::Result<()> {
    for (label, problem) in [("chain", random_chain(7, 40)), ("grid", random_grid(7, 6, 6))] {
        println!("{label}: n_total = {}, n_bdy = {}", problem.n_total, problem.n_bdy);
        for z in [-0.5, -5.0] {
            let e = schur_identity_check(&problem, Complex64::new(z, 0.0))?;
            let q = q_matrix(&problem, Complex64::new(z, 0.0))?;
            println!("  z = {z:>5}: det Q = {:.6e}, Schur defect {e:.1e}", q.determinant().re);
        }
        for r in lab_records(&problem, label)? {
            println!("  {:<40} {:>10.2e} (tol {:.1e}) {}", r.name, r.value, r.tolerance, if r.pass { "pass" } else { "FAIL" });
        }
    }
    Ok(())
}
