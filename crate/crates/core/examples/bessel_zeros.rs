//! Bessel zeros and the on-disk zero cache.
//!
//! cargo run --release --example bessel_zeros

use bfk_lab::model_geometries::bessel::{bessel_j_zero, bessel_jp_zero, ZeroKind};
use bfk_lab::model_geometries::cache::BesselZeroCache;

fn main() -> bfk_lab::Result<()> {
    println!("j_0,1 = {:.15}", bessel_j_zero(0, 1));
    println!("j_1,1 = {:.15}", bessel_j_zero(1, 1));
    println!("j'_1,1 = {:.15}", bessel_jp_zero(1, 1));

    let dir = std::env::temp_dir().join(format!("bfk-example-cache-{}", std::process::id()));
    let cache = BesselZeroCache::new(&dir);
    let count = cache.build(80.0)?;
    println!("cached {count} zeros below 80 in {}", dir.display());
    let audit = cache.verify(0.05, 1)?;
    println!("re-derived {} zeros, max relative error {:.1e}", audit.checked, audit.max_relative_error);
    let below_10 = cache.zeros_below(ZeroKind::J, 10.0)?;
    println!("{} Dirichlet zeros below 10, largest {:.6}", below_10.len(), below_10.iter().map(|z| z.value).fold(0.0, f64::max));
    cache.clear()?;
    Ok(())
}
