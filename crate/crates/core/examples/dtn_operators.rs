//! Dirichlet-to-Neumann operators and log det Q(z) on the model geometries.
//!
//! cargo run --release --example dtn_operators

use bfk_lab::dtn_models::{dtn_interval, positivity_selfadjointness_audit, DtnOperator};
use bfk_lab::model_geometries::{CircleModel, DiskModel, IntervalModel, Potential};
use num_complex::Complex64;

fn main() -> bfk_lab::Result<()> {
    let q = dtn_interval(Complex64::new(0.0, 0.0), 2.0, 1.0)?;
    println!("interval m=2, L=1, Q(0) =\n{}", q.map(|v| v.re));

    let bump = Potential::bump(1.0, 0.5, 0.2, 10.0, 401)?;
    let ops = [
        ("interval", DtnOperator::Interval(IntervalModel::new(1.0, 2.0)?)),
        ("interval + bump", DtnOperator::Interval(IntervalModel::with_potential(1.0, 1.0, Some(bump))?)),
        ("cut circle", DtnOperator::CutCircle(CircleModel::new(2.0 * std::f64::consts::PI, 1.0)?)),
        ("disk", DtnOperator::Disk(DiskModel::new(1.0, 1.0)?)),
    ];
    for (name, op) in &ops {
        let at0 = op.logdet_q(0.0)?;
        let deep = op.logdet_q(-1e4)?;
        let audit = positivity_selfadjointness_audit(op, &[-0.1, -10.0, -1e3])?;
        println!(
            "{name:<16} log det Q(0) = {:>12.9}  log det Q(-1e4) = {:>12.6}  min eigenvalue {:.3e}",
            at0.value, deep.value, audit.min_eigenvalue
        );
    }
    Ok(())
}
