//! The flat model kernel: closed form, reproducing quadrature and Agmon decay.

use covertower::fock::{agmon_check, fock_kernel, reproducing_residual};
use covertower::BundleParams;
use num_complex::Complex64;

fn main() -> covertower::Result<()> {
    for n in [2u32, 4, 8] {
        let p = BundleParams::new(n, 1)?;
        let z = Complex64::new(0.3, 0.0);
        let w = Complex64::new(0.0, 0.1);
        let k = fock_kernel(&p, z, w);
        let res = reproducing_residual(&p, z, w, 6.0, 256)?;
        let dists: Vec<f64> = (0..=40).map(|i| 1.0 + 0.1 * i as f64).collect();
        println!(
            "N={n}: K(z,w) = {:.6}, wmag = {:.6}, reproducing residual {res:.1e}, Agmon ratio {:.4} ≤ N/π = {:.4}",
            k.coef,
            k.wmag,
            agmon_check(&p, &dists)?,
            p.peak()
        );
    }
    Ok(())
}
