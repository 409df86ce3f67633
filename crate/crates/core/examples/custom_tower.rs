//! A non-product tower from explicit integer step matrices.

use std::f64::consts::PI;

use covertower::{BundleParams, Lattice, LevelKernel, Tower, TruncationPolicy};

fn main() -> covertower::Result<()> {
    let base = Lattice::square(PI.sqrt())?;
    let tower = Tower::from_matrices(base, &[[[2, 1], [0, 3]], [[1, 1], [-1, 1]]])?;
    let p = BundleParams::new(2, tower.d0())?;
    for (j, level) in tower.levels().iter().enumerate() {
        let k = LevelKernel::new(&tower, p, j, TruncationPolicy::default())?;
        println!(
            "j={j}: basis ({:.3}, {:.3}), index {}, tau {:.4}, trace {:.10}, gap {:.3e}",
            level.lattice.g1(),
            level.lattice.g2(),
            level.index,
            level.tau,
            k.trace(32)?,
            k.stability_gap(10)?.value
        );
    }
    Ok(())
}
