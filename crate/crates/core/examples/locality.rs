//! An interior potential changes every determinant but not the local
//! constant.
//!
//! cargo run --release --example locality

use bfk_lab::bfk::{verify_interval, Resolution};
use bfk_lab::model_geometries::{IntervalModel, Potential};

fn main() -> bfk_lab::Result<()> {
    let res = Resolution::default();
    let base = verify_interval(&IntervalModel::new(1.0, 1.0)?, &res)?;
    println!("no potential: det_A0 {:.8} det_A1 {:.8} det_Q {:.8} c {:.10}", base.det_a0.value, base.det_a1.value, base.det_q, base.c);
    for height in [5.0, 20.0] {
        let pot = Potential::bump(1.0, 0.5, 0.2, height, 401)?;
        let r = verify_interval(&IntervalModel::with_potential(1.0, 1.0, Some(pot))?, &res)?;
        println!(
            "bump {height:>4}:   det_A0 {:.8} det_A1 {:.8} det_Q {:.8} c {:.10}  closes to {:.1e}",
            r.det_a0.value, r.det_a1.value, r.det_q, r.c, r.relative_error
        );
    }
    Ok(())
}
