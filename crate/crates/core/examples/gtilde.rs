//! The variance kernel G̃ by series and by quadrature.

use covertower::currents::{gtilde, gtilde_integral};

fn main() -> covertower::Result<()> {
    for t in [0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0] {
        let s = gtilde(t)?;
        let i = gtilde_integral(t)?;
        println!("t={t:<5} series {s:.15}  integral {i:.15}  t²/24 {:.15}", t * t / 24.0);
    }
    Ok(())
}
