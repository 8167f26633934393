//! End-to-end verification of det A1 / det A0 = c det Q on every model
//! geometry, with a CSV summary on stdout.
//!
//! cargo run --release --example verify_suite

use bfk_lab::bfk::{default_suite, run_suite, Resolution, VerificationReport};

fn main() -> bfk_lab::Result<()> {
    let suite = default_suite()?;
    println!("{}", VerificationReport::csv_header());
    let mut failures = 0;
    for result in run_suite(&suite, &Resolution::default(), None) {
        let report = result?;
        failures += usize::from(!report.pass);
        println!("{}", report.csv_row());
    }
    eprintln!("{} of {} verifications pass", suite.len() - failures, suite.len());
    Ok(())
}
