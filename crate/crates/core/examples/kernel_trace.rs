//! Traces, truncation radii and base-locus minima along the default tower.
//!
//! ```text
//! cargo run --release --example kernel_trace
//! ```

use std::f64::consts::PI;

use covertower::{make_product_tower, BundleParams, LevelKernel, TruncationPolicy};

fn main() -> covertower::Result<()> {
    let tower = make_product_tower(PI.sqrt(), 2, 4)?;
    let p = BundleParams::new(2, tower.d0())?;
    println!("{:>2} {:>8} {:>4} {:>8} {:>10} {:>12} {:>10}", "j", "tau", "I", "radius", "tail", "trace", "min diag");
    for j in 0..tower.depth() {
        let k = LevelKernel::new(&tower, p, j, TruncationPolicy::default())?;
        let (min, _) = k.base_locus_min(32)?;
        println!(
            "{j:>2} {:>8.4} {:>4} {:>8.3} {:>10.2e} {:>12.9} {:>10.6}",
            k.tau(),
            k.index(),
            k.radius(),
            k.tail_bound(),
            k.trace(32)?,
            min
        );
    }
    Ok(())
}
