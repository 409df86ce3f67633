//! Distance between level kernels and the flat kernel, with the fitted
//! exponential rate for several bundle powers.

use covertower::experiments::runners::stability_scan;
use covertower::experiments::ExperimentConfig;

fn main() -> covertower::Result<()> {
    let cfg = ExperimentConfig::default();
    let tower = cfg.tower()?;
    for n in [2, 4, 8] {
        let s = stability_scan(&cfg, &tower, n)?;
        let gaps: Vec<String> = s.ln_gaps.iter().map(|g| format!("{:.3e}", g.exp())).collect();
        println!("N={n}: gaps [{}], sigma {:.2}, r2 {:.4}", gaps.join(", "), s.sigma(), s.fit.r2);
    }
    Ok(())
}
