//! The contour representation of a zeta difference: on the interval the
//! Neumann and Dirichlet spectra differ by the single mode m², so the
//! contour integral of log det Q must return m^(-2s).
//!
//! cargo run --release --example contour_zeta

use bfk_lab::bfk::interval_contour_record;
use bfk_lab::discrete_lab::generator::random_chain;
use bfk_lab::discrete_lab::{default_contour, contour_zeta_check};
use bfk_lab::model_geometries::IntervalModel;
use num_complex::Complex64;

fn main() -> bfk_lab::Result<()> {
    for m in [1.0, 2.0] {
        let model = IntervalModel::new(1.0, m)?;
        for s in [0.5, 1.0, 2.0] {
            let r = interval_contour_record(&model, s, 12)?;
            println!("interval m = {m}, s = {s}: {} relative error {:.1e}", r.inputs["rhs"], r.value);
        }
    }
    let p = random_chain(3, 30);
    let contour = default_contour(&p)?;
    for s in [0.5, 1.0, 2.0] {
        println!("discrete chain, s = {s}: relative error {:.1e}", contour_zeta_check(&p, Complex64::new(s, 0.0), &contour)?);
    }
    Ok(())
}
