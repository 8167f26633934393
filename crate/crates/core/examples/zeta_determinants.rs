//! Zeta-regularized determinants of the model spectra, compared with closed
//! forms: 2 sinh(mL)/m for the Dirichlet interval and 4 sinh²(mL/2) for the
//! circle.
//!
//! cargo run --release --example zeta_determinants

use bfk_lab::model_geometries::{gelfand_yaglom_det, BoundaryCondition, CircleModel, DiskModel, IntervalModel};
use bfk_lab::zeta_engine::{zeta, zeta_prime_zero, SpectrumSource};
use num_complex::Complex64;

fn main() -> bfk_lab::Result<()> {
    let interval = IntervalModel::new(1.0, 1.0)?;
    let src = SpectrumSource::interval(&interval, BoundaryCondition::Dirichlet, 8e5)?;
    let r = zeta_prime_zero(&src)?;
    let gy = gelfand_yaglom_det(&interval, BoundaryCondition::Dirichlet)?;
    println!("interval Dirichlet: det {:.10} (Gelfand-Yaglom {gy:.10}), error estimate {:.1e}", r.determinant, r.error_estimate);

    let circle = CircleModel::new(2.0 * std::f64::consts::PI, 1.0)?;
    let r = zeta_prime_zero(&SpectrumSource::circle(&circle, 3.2e6)?)?;
    println!("circle: det {:.6} (closed form {:.6})", r.determinant, 4.0 * std::f64::consts::PI.sinh().powi(2));
    let z2 = zeta(&SpectrumSource::circle(&circle, 3.2e6)?, Complex64::new(2.0, 0.0))?;
    println!("circle: zeta(2) = {:.10}", z2.value.re);

    let disk = DiskModel::new(1.0, 1.0)?;
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
        let r = zeta_prime_zero(&SpectrumSource::disk(&disk, bc, 1.6e5, None)?)?;
        println!("disk {bc:?}: zeta'(0) = {:.9}, det {:.9}", r.zeta_prime_zero, r.determinant);
    }
    Ok(())
}
