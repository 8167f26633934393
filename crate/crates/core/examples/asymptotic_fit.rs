//! Fits the large-|x| expansion of log det Q(x) and reads off the local
//! constant c = exp(-pi_0) for each model geometry.
//!
//! cargo run --release --example asymptotic_fit

use bfk_lab::asymptotics::{fit_expansion, geometric_grid, local_constant, sample_logdetq};
use bfk_lab::dtn_models::DtnOperator;
use bfk_lab::model_geometries::{CircleModel, DiskModel, IntervalModel};

fn main() -> bfk_lab::Result<()> {
    let cases = [
        ("interval", DtnOperator::Interval(IntervalModel::new(1.0, 1.0)?), 1, (1e4, 1e8), 4),
        ("cut circle", DtnOperator::CutCircle(CircleModel::new(1.0, 2.0)?), 1, (4e4, 4e8), 4),
        ("disk", DtnOperator::Disk(DiskModel::new(1.0, 1.0)?), 2, (1e2, 1e5), 5),
    ];
    for (name, op, d, (lo, hi), j_max) in cases {
        let samples = sample_logdetq(&op, &geometric_grid(lo, hi, 48))?;
        let fit = fit_expansion(&samples, d, j_max)?;
        println!(
            "{name:<10} pi_0 = {:>13.10}  c = {:.8}  q_0 = {:.8}  residual {:.1e}  cond {:.1e}",
            fit.pi0(),
            local_constant(&fit),
            fit.q0(),
            fit.residual,
            fit.condition_number
        );
    }
    Ok(())
}
