//! Draw one random section per level and locate its zeros.
//!
//! Writes `zeros.csv` into the current directory.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;

use covertower::rng::{derive_seed, ids, stream};
use covertower::zeros::{locate_zeros, write_zeros_csv};
use covertower::{make_product_tower, BundleParams, CoherentFrame, TruncationPolicy};

fn main() -> covertower::Result<()> {
    let tower = make_product_tower(PI.sqrt(), 2, 3)?;
    let p = BundleParams::new(2, tower.d0())?;
    let mut out = BufWriter::new(File::create("zeros.csv")?);
    for j in 0..tower.depth() {
        let frame = CoherentFrame::build(&tower, p, j, TruncationPolicy::default())?;
        let s = frame.sample_sphere(&mut stream(7, ids::SPHERE, j as u64));
        let zs = locate_zeros(&s, 1e-10)?;
        let worst = zs.zeros.iter().map(|z| s.wmag(z.point)).fold(0.0, f64::max);
        println!(
            "j={j}: frame cond {:.1e}, {} zeros, {} multiple, max |s| at zeros {worst:.1e}",
            frame.cond(),
            zs.total,
            zs.flagged
        );
        write_zeros_csv(&mut out, derive_seed(7, ids::SPHERE, j as u64), &zs, j == 0)?;
    }
    Ok(())
}
