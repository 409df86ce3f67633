//! Mean pairing of random zero sets with test forms against the Bergman
//! metric prediction.

use covertower::currents::{empirical_stats, expected_pairing_theory};
use covertower::experiments::ExperimentConfig;
use covertower::CoherentFrame;

fn main() -> covertower::Result<()> {
    let cfg = ExperimentConfig::default();
    let tower = cfg.tower()?;
    let p = cfg.params(&tower)?;
    let forms = cfg.forms(&tower)?;
    let n = 300;
    for j in 0..2 {
        let frame = CoherentFrame::build(&tower, p, j, cfg.truncation)?;
        let stats = empirical_stats(&frame, &forms, n, cfg.sampling.master_seed)?;
        for (psi, st) in forms.iter().zip(&stats) {
            let theory = expected_pairing_theory(frame.kernel(), psi, 32)?;
            println!("j={j} {:<6} theory {theory:+.4}  empirical {:+.4} ± {:.4}", psi.id, st.mean, st.stderr);
        }
    }
    Ok(())
}
