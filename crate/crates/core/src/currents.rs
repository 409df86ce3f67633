//! Linear statistics of zero sets and their theoretical moments.
//!
//! A test function `ψ` on the base torus is paired with the normalized zero
//! current of a level-`j` section, `I_j^{-1} Σ_k ψ(q_j(z_k))`. Its mean is
//! `(1/π)∫_{F_0} ψ λ_j dm`, with `λ_j` the Bergman metric density, and its
//! variance is the double integral of `(Δψ/2)⊗(Δψ/2)` against
//! `I_j^{-1} Σ_{γ̂} G̃(P_j(z+γ̂, w))`, where `γ̂` runs over `Γ_0/Γ_j`. The
//! density of `i∂∂̄ψ` against `dx∧dy` is `Δψ/2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::quadrature::{cell_nodes, pairwise_sum, periodic_trapezoid, tanh_sinh};
use crate::quotient::LevelKernel;
use crate::rng::{ids, stream};
use crate::sections::CoherentFrame;
use crate::zeros::{locate_zeros, pushforward_zeros, ZeroSet};

/// One Fourier mode `a·cos(2π⟨λ, z⟩ + φ)`, with `⟨λ, z⟩ = Re(λ̄ z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub lambda: Complex64,
    pub amp: f64,
    pub phase: f64,
}

/// A real trigonometric polynomial on the base torus.
#[derive(Clone, Debug, PartialEq)]
pub struct TestForm {
    pub id: String,
    pub terms: Vec<Mode>,
}

/// Names accepted by [`TestForm::preset`].
pub const PRESETS: [&str; 5] = ["one", "cos10", "cos11", "cos20", "mixed"];

impl TestForm {
    /// Builds a form from integer coordinates `(k1, k2)` against the dual basis
    /// of `base`, so every mode is `Γ_0`-periodic by construction.
    pub fn from_dual(id: &str, base: &Lattice, modes: &[(i64, i64, f64, f64)]) -> Self {
        let (b1, b2) = base.dual_basis();
        let terms = modes
            .iter()
            .map(|&(k1, k2, amp, phase)| Mode {
                lambda: b1 * k1 as f64 + b2 * k2 as f64,
                amp,
                phase,
            })
            .collect();
        Self { id: id.to_string(), terms }
    }

    /// Builds a form from explicit frequencies, which must lie in `Γ_0^*`.
    pub fn new(id: &str, base: &Lattice, terms: Vec<Mode>) -> Result<Self> {
        for m in &terms {
            // ⟨λ, g⟩ ∈ ℤ for both generators
            for g in [base.g1(), base.g2()] {
                let p = (m.lambda.conj() * g).re;
                if (p - p.round()).abs() > 1e-9 {
                    return Err(Error::Domain(format!("frequency {} is not in the dual lattice", m.lambda)));
                }
            }
        }
        Ok(Self { id: id.to_string(), terms })
    }

    /// The shipped dictionary: the constant, the three lowest frequency
    /// shells and one mixed form.
    pub fn preset(id: &str, base: &Lattice) -> Result<Self> {
        let modes: &[(i64, i64, f64, f64)] = match id {
            "one" => &[(0, 0, 1.0, 0.0)],
            "cos10" => &[(1, 0, 1.0, 0.0)],
            "cos11" => &[(1, 1, 1.0, 0.0)],
            "cos20" => &[(2, 0, 1.0, 0.0)],
            "mixed" => &[(1, 0, 1.0, 0.0), (0, 1, 0.5, -0.5 * PI), (1, 1, 0.25, 1.0), (2, 0, 0.5, 0.3)],
            _ => return Err(Error::Config(format!("unknown test form preset `{id}`"))),
        };
        Ok(Self::from_dual(id, base, modes))
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|m| m.amp * (2.0 * PI * (m.lambda.conj() * z).re + m.phase).cos())
            .sum()
    }

    /// `Δψ(z)`.
    pub fn laplacian(&self, z: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|m| -4.0 * PI * PI * m.lambda.norm_sqr() * m.amp * (2.0 * PI * (m.lambda.conj() * z).re + m.phase).cos())
            .sum()
    }

    /// Density `Δψ/2` of `i∂∂̄ψ` against `dx∧dy`.
    pub fn ddbar(&self, z: Complex64) -> f64 {
        0.5 * self.laplacian(z)
    }

    /// Multiplies every amplitude by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let terms = self.terms.iter().map(|m| Mode { amp: m.amp * c, ..*m }).collect();
        Self { id: self.id.clone(), terms }
    }

    /// True when `Δψ ≡ 0`, i.e. `ψ` is constant.
    pub fn is_harmonic(&self) -> bool {
        self.terms.iter().all(|m| m.lambda.norm_sqr() == 0.0 || m.amp == 0.0)
    }

    /// `‖i∂∂̄ψ‖_{L¹(F_0)} = ∫_{F_0} |Δψ/2| dm`.
    pub fn ddbar_l1(&self, base: &Lattice, grid: usize) -> f64 {
        periodic_trapezoid(base, grid, grid, |z| self.ddbar(z).abs())
    }

    /// `∫_{F_0} ψ dm`.
    pub fn integral(&self, base: &Lattice, grid: usize) -> f64 {
        periodic_trapezoid(base, grid, grid, |z| self.eval(z))
    }
}

/// `I_j^{-1} Σ_k m_k ψ(q_j(z_k))`.
pub fn pair_current(zs: &ZeroSet, base: &Lattice, index: u64, psi: &TestForm) -> f64 {
    let vals: Vec<f64> = pushforward_zeros(zs, base)
        .iter()
        .map(|z| z.multiplicity as f64 * psi.eval(z.point))
        .collect();
    pairwise_sum(&vals) / index as f64
}

/// `(1/π)∫_{F_0} ψ λ_j dm`.
pub fn expected_pairing_theory(kernel: &LevelKernel, psi: &TestForm, grid: usize) -> Result<f64> {
    let nodes = cell_nodes(kernel.base(), grid, grid);
    let vals: Vec<Result<f64>> = nodes
        .par_iter()
        .map(|&z| kernel.metric_density(z).map(|m| m.value * psi.eval(z)))
        .collect();
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_sum(&vals) * kernel.base().area() / (nodes.len() as f64 * PI))
}

/// Dilogarithm `Li₂(x)` for `x ∈ [0, 1]`.
///
/// The power series is used on `[0, 1/2]`, where its ratio is at most 1/2;
/// larger arguments go through the reflection
/// `Li₂(x) = π²/6 − ln x · ln(1−x) − Li₂(1−x)`.
pub fn dilog_unit(x: f64) -> f64 {
    if x <= 0.5 {
        dilog_series(x, usize::MAX)
    } else if x >= 1.0 {
        PI * PI / 6.0
    } else {
        PI * PI / 6.0 - x.ln() * (-x).ln_1p() - dilog_series(1.0 - x, usize::MAX)
    }
}

/// Compensated partial sums of `Σ_{n≥1} x^n/n²`, stopping at `max_terms` or
/// once terms fall below the rounding level.
pub fn dilog_series(x: f64, max_terms: usize) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut pow = x;
    let mut n = 1usize;
    while n <= max_terms && pow != 0.0 {
        let term = pow / (n * n) as f64;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term <= 1e-18 * sum {
            break;
        }
        pow *= x;
        n += 1;
    }
    sum
}

/// `G̃(t) = (1/4π²) Σ_{n≥1} t^{2n}/n² = Li₂(t²)/(4π²)` on `[0, 1]`.
pub fn gtilde(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("G̃ needs t in [0,1], got {t}")));
    }
    Ok(gtilde_unchecked(t))
}

#[inline]
fn gtilde_unchecked(t: f64) -> f64 {
    dilog_unit(t * t) / (4.0 * PI * PI)
}

/// `G̃(t) = −(1/4π²)∫_0^{t²} log(1−s)/s ds` by tanh–sinh quadrature.
pub fn gtilde_integral(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("G̃ needs t in [0,1], got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let v = tanh_sinh(0.0, t * t, 1e-15, |s| if s == 0.0 { -1.0 } else { (-s).ln_1p() / s });
    Ok(-v / (4.0 * PI * PI))
}

/// How the variance double integral was evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarianceMethod {
    /// Tensor trapezoid with this many nodes per axis and cell.
    Grid(usize),
    /// Monte Carlo over this many `(z, w)` pairs.
    MonteCarlo(usize),
}

/// Theoretical variance of the pairing with its evaluation method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceTheory {
    pub value: f64,
    /// Standard error; zero for the deterministic grid rule.
    pub stderr: f64,
    pub method: VarianceMethod,
}

/// `∫∫_{F_0×F_0} (Δψ(z)/2)(Δψ(w)/2) I_j^{-1} Σ_{γ̂} G̃(P_j(z+γ̂, w)) dm dm`.
///
/// The tensor trapezoid rule costs `grid⁴·I_j` kernel evaluations; above
/// `budget` the integral is estimated by Monte Carlo with `budget/I_j` pairs
/// drawn from the stream `(seed, MC_QUADRATURE, j)`.
pub fn variance_theory(kernel: &LevelKernel, psi: &TestForm, grid: usize, budget: u64, seed: u64) -> Result<VarianceTheory> {
    if grid < 8 {
        return Err(Error::Domain(format!("variance grid {grid} < 8")));
    }
    if psi.is_harmonic() {
        return Ok(VarianceTheory {
            value: 0.0,
            stderr: 0.0,
            method: VarianceMethod::Grid(grid),
        });
    }
    let base = *kernel.base();
    let reps = kernel.coset_reps().to_vec();
    let index = kernel.index() as f64;
    let cost = (grid as u64).pow(4).saturating_mul(kernel.index());
    // the diagonal is Γ_0-periodic, so D(z + γ̂) = D(z)
    let inner = |z: Complex64, w: Complex64, dz: f64, dw: f64| -> f64 {
        let g: Vec<f64> = reps
            .iter()
            .map(|&r| gtilde_unchecked(kernel.normalized_with(z + r, w, dz, dw)))
            .collect();
        pairwise_sum(&g) / index
    };
    if cost <= budget {
        let nodes = cell_nodes(&base, grid, grid);
        let diag: Vec<f64> = nodes.iter().map(|&z| kernel.diag(z)).collect();
        if let Some(d) = diag.iter().find(|d| !(**d > 0.0)) {
            return Err(Error::BaseLocus(format!("diagonal {d:e}")));
        }
        let lap: Vec<f64> = nodes.iter().map(|&z| psi.ddbar(z)).collect();
        let rows: Vec<f64> = (0..nodes.len())
            .into_par_iter()
            .map(|a| {
                let row: Vec<f64> = (0..nodes.len())
                    .map(|b| lap[b] * inner(nodes[a], nodes[b], diag[a], diag[b]))
                    .collect();
                lap[a] * pairwise_sum(&row)
            })
            .collect();
        let h = base.area() / nodes.len() as f64;
        let value = pairwise_sum(&rows) * h * h;
        Ok(VarianceTheory {
            value: clamp_nonneg(value)?,
            stderr: 0.0,
            method: VarianceMethod::Grid(grid),
        })
    } else {
        let pairs = (budget / kernel.index()).max(2) as usize;
        let chunk = 4096;
        let chunks = pairs.div_ceil(chunk);
        let parts: Vec<(f64, f64, usize)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream(seed, ids::MC_QUADRATURE, ((kernel.level() as u64) << 32) | c as u64);
                let n = chunk.min(pairs - c * chunk);
                let (mut s, mut s2) = (0.0, 0.0);
                for _ in 0..n {
                    let z = base.from_coords(rng.gen(), rng.gen());
                    let w = base.from_coords(rng.gen(), rng.gen());
                    let v = psi.ddbar(z) * psi.ddbar(w) * inner(z, w, kernel.diag(z), kernel.diag(w));
                    s += v;
                    s2 += v * v;
                }
                (s, s2, n)
            })
            .collect();
        let n: usize = parts.iter().map(|p| p.2).sum();
        let s: f64 = parts.iter().map(|p| p.0).sum();
        let s2: f64 = parts.iter().map(|p| p.1).sum();
        let mean = s / n as f64;
        let var = (s2 / n as f64 - mean * mean).max(0.0);
        let a2 = base.area() * base.area();
        Ok(VarianceTheory {
            value: (mean * a2).max(0.0),
            stderr: (var / n as f64).sqrt() * a2,
            method: VarianceMethod::MonteCarlo(n),
        })
    }
}

fn clamp_nonneg(v: f64) -> Result<f64> {
    if v < -1e-12 {
        return Err(Error::Statistical(format!("negative variance quadrature {v:e}")));
    }
    Ok(v.max(0.0))
}

/// `[e^{−ĉ τ_{⌊j/2⌋}} + 2^{−j/2}] · ‖i∂∂̄ψ‖²_{L¹}`.
pub fn variance_bound(taus: &[f64], j: usize, psi: &TestForm, base: &Lattice, c_hat: f64) -> Result<f64> {
    if !(c_hat > 0.0) {
        return Err(Error::Domain(format!("ĉ must be positive, got {c_hat}")));
    }
    let tau = *taus.get(j / 2).ok_or(Error::LevelOutOfRange { j, depth: taus.len() })?;
    let l1 = psi.ddbar_l1(base, 64);
    Ok(((-c_hat * tau).exp() + 2f64.powf(-0.5 * j as f64)) * l1 * l1)
}

/// Summary of one statistic over Monte Carlo samples.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingStats {
    pub psi_id: String,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    /// `sqrt(var / samples)`.
    pub stderr: f64,
    /// Bootstrap standard error of `var`.
    pub var_stderr: f64,
    pub samples: usize,
    pub failed: usize,
    pub theory_mean: Option<f64>,
    pub theory_var: Option<f64>,
    pub bound: Option<f64>,
}

/// Mean, unbiased variance and standard error.
pub fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = if xs.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
    (mean, var, (var / n).sqrt())
}

/// Bootstrap standard error of the sample variance.
pub fn bootstrap_var_stderr(xs: &[f64], resamples: usize, seed: u64, stream_index: u64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mut rng = stream(seed, ids::BOOTSTRAP, stream_index);
    let mut buf = vec![0.0; xs.len()];
    let vars: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.gen_range(0..xs.len())];
            }
            moments(&buf).1
        })
        .collect();
    moments(&vars).1.sqrt()
}

/// Number of bootstrap resamples for variance error bars.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Stream index of sample `i` at level `j`.
pub fn sample_index(j: usize, i: u64) -> u64 {
    ((j as u64) << 40) | i
}

/// Zero sets of `n` sphere samples, `None` where the zero finder failed.
///
/// Sample `i` draws from the stream `(seed, SPHERE, sample_index(j, i))`.
pub fn sample_zero_sets(frame: &CoherentFrame, n: usize, seed: u64) -> Vec<Option<ZeroSet>> {
    let j = frame.level();
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, ids::SPHERE, sample_index(j, i));
            let s = frame.sample_sphere(&mut rng);
            locate_zeros(&s, 1e-10).ok()
        })
        .collect()
}

/// Pairing statistics of each form over precomputed zero sets.
///
/// Failed samples are excluded and counted; more than 1% failures is an
/// error.
pub fn empirical_stats_from(zero_sets: &[Option<ZeroSet>], kernel: &LevelKernel, forms: &[TestForm], seed: u64) -> Result<Vec<PairingStats>> {
    let ok: Vec<&ZeroSet> = zero_sets.iter().flatten().collect();
    let failed = zero_sets.len() - ok.len();
    if failed * 100 > zero_sets.len() {
        return Err(Error::SamplingFailures { failed, total: zero_sets.len() });
    }
    if ok.len() < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    Ok(forms
        .iter()
        .enumerate()
        .map(|(k, psi)| {
            let xs: Vec<f64> = ok.iter().map(|zs| pair_current(zs, kernel.base(), kernel.index(), psi)).collect();
            let (mean, var, stderr) = moments(&xs);
            PairingStats {
                psi_id: psi.id.clone(),
                mean,
                var,
                stderr,
                var_stderr: bootstrap_var_stderr(&xs, BOOTSTRAP_RESAMPLES, seed, sample_index(kernel.level(), k as u64)),
                samples: xs.len(),
                failed,
                theory_mean: None,
                theory_var: None,
                bound: None,
            }
        })
        .collect())
}

/// Samples `n` sphere sections and summarizes their pairings with `forms`.
pub fn empirical_stats(frame: &CoherentFrame, forms: &[TestForm], n: usize, seed: u64) -> Result<Vec<PairingStats>> {
    if n < 2 {
        return Err(Error::Domain(format!("need n_samples ≥ 2, got {n}")));
    }
    let zs = sample_zero_sets(frame, n, seed);
    empirical_stats_from(&zs, frame.kernel(), forms, seed)
}

/// Basis-averaged squared deviation `d^{-1} Σ_k (Z_{s_k} − mean, ψ)²` over
/// a Haar-random orthonormal basis drawn from `(seed, ONB, sample_index(j, i))`.
pub fn onb_deviation(frame: &CoherentFrame, psi: &TestForm, theory_mean: f64, seed: u64, i: u64) -> Result<f64> {
    let mut rng = stream(seed, ids::ONB, sample_index(frame.level(), i));
    let basis = frame.sample_onb(&mut rng);
    let k = frame.kernel();
    let devs: Vec<Result<f64>> = basis
        .par_iter()
        .map(|s| {
            let zs = locate_zeros(s, 1e-10)?;
            Ok((pair_current(&zs, k.base(), k.index(), psi) - theory_mean).powi(2))
        })
        .collect();
    let devs: Vec<f64> = devs.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_sum(&devs) / devs.len() as f64)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut k, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && k < b.len() {
        let x = a[i].min(b[k]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while k < b.len() && b[k] <= x {
            k += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - k as f64 / b.len() as f64).abs());
    }
    d
}

/// Rejection threshold of the two-sample KS test at level 1%.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n * m) as f64).sqrt()
}
