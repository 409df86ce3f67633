//! Theoretical variance of linear statistics along the tower.

use covertower::currents::variance_theory;
use covertower::experiments::ExperimentConfig;
use covertower::LevelKernel;

fn main() -> covertower::Result<()> {
    let cfg = ExperimentConfig::default();
    let tower = cfg.tower()?;
    let p = cfg.params(&tower)?;
    let forms = cfg.forms(&tower)?;
    for j in 0..tower.depth() {
        let k = LevelKernel::new(&tower, p, j, cfg.truncation)?;
        let row: Vec<String> = forms
            .iter()
            .map(|psi| {
                variance_theory(&k, psi, 12, cfg.quadrature.budget, 0).map(|v| format!("{}={:.4e}", psi.id, v.value))
            })
            .collect::<covertower::Result<_>>()?;
        println!("j={j} tau={:.3}: {}", k.tau(), row.join("  "));
    }
    Ok(())
}
