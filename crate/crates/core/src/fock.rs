//! The universal-cover model: the weighted Fock space on ℂ.
//!
//! Normalization is fixed once for the whole crate. The bundle metric has
//! local weight `e^{-N|z|²}`, its curvature form is Lebesgue measure
//! `dx∧dy` and distances are Euclidean. The reproducing kernel of the
//! space of entire functions square integrable against `e^{-N|z|²} dm` is
//!
//! ```text
//! K(z, w) = (N/π) · exp(N z w̄)
//! ```
//!
//! and its pointwise norm is `|K(z,w)| e^{-N(|z|²+|w|²)/2} = (N/π) e^{-N|z-w|²/2}`.
//!
//! Numerics work with the *weighted* value
//! `K(z,w) e^{-N(|z|²+|w|²)/2}`, a complex number whose modulus is the
//! gauge-invariant magnitude and whose phase is `N·Im(z w̄)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tensor power `N` of the line bundle and degree `d0` over the base torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BundleParams {
    n: u32,
    d0: u32,
}

impl BundleParams {
    /// `N·d0` must be even so that the lattice translation operators form a
    /// genuine commuting representation and no theta characteristic appears.
    pub fn new(n: u32, d0: u32) -> Result<Self> {
        if n < 1 || d0 < 1 {
            return Err(Error::Domain(format!("need N ≥ 1 and d0 ≥ 1, got N={n}, d0={d0}")));
        }
        if (n as u64 * d0 as u64) % 2 != 0 {
            return Err(Error::Quantization(format!("N·d0 = {} must be even", n * d0)));
        }
        Ok(Self { n, d0 })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d0(&self) -> u32 {
        self.d0
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Diagonal density `N/π` of the Fock kernel.
    pub fn peak(&self) -> f64 {
        self.n as f64 / PI
    }
}

/// A kernel evaluation at a pair of points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    /// Coefficient against the holomorphic frame, `Φ(z,w)`.
    pub coef: Complex64,
    /// `coef · e^{-N(|z|²+|w|²)/2}`.
    pub weighted: Complex64,
    /// Pointwise norm `|weighted|`.
    pub wmag: f64,
}

impl KernelValue {
    pub(crate) fn from_weighted(p: &BundleParams, z: Complex64, w: Complex64, weighted: Complex64) -> Self {
        let scale = (0.5 * p.nf() * (z.norm_sqr() + w.norm_sqr())).exp();
        Self {
            coef: weighted * scale,
            weighted,
            wmag: weighted.norm(),
        }
    }
}

/// Weighted Fock kernel `(N/π) e^{-N|z-w|²/2 + iN Im(z w̄)}`.
#[inline]
pub fn fock_weighted(n: f64, z: Complex64, w: Complex64) -> Complex64 {
    let re = -0.5 * n * (z - w).norm_sqr();
    let im = n * (z * w.conj()).im;
    Complex64::from_polar((n / PI) * re.exp(), im)
}

/// Bergman kernel of the universal cover at `(z, w)`.
pub fn fock_kernel(p: &BundleParams, z: Complex64, w: Complex64) -> KernelValue {
    let n = p.nf();
    let weighted = fock_weighted(n, z, w);
    KernelValue {
        coef: (n / PI) * (n * z * w.conj()).exp(),
        weighted,
        wmag: weighted.norm(),
    }
}

/// Decay rate used for the Agmon comparison, `e^{-β√N d}` with `β = 1/2`.
pub const AGMON_BETA: f64 = 0.5;

/// `max_d wmag(d) / e^{-β√N·d}` over the given distances, each at least one.
///
/// For `d ≥ 1` one has `N d²/2 ≥ (√N/2)·√N·d`, so the result never exceeds `N/π`.
pub fn agmon_check(p: &BundleParams, dists: &[f64]) -> Result<f64> {
    let n = p.nf();
    let mut worst = 0.0f64;
    for &d in dists {
        if !(d >= 1.0) {
            return Err(Error::Domain(format!("Agmon distances must be ≥ 1, got {d}")));
        }
        let wmag = p.peak() * (-0.5 * n * d * d).exp();
        let ratio = wmag / (-AGMON_BETA * n.sqrt() * d).exp();
        worst = worst.max(ratio);
    }
    Ok(worst)
}

/// Relative deviation of the quadrature value of
/// `∫_{|u|≤R} K(z,u) conj(K(w,u)) e^{-N|u|²} dm(u)` from `K(z,w)`.
///
/// Trapezoid rule on a `grid × grid` mesh of `[-R, R]²` masked to the disk.
/// This is an independent check of the closed form: only pointwise
/// kernel values enter the integrand.
pub fn reproducing_residual(p: &BundleParams, z: Complex64, w: Complex64, radius: f64, grid: usize) -> Result<f64> {
    if grid < 16 {
        return Err(Error::Domain(format!("grid {grid} < 16")));
    }
    let n = p.nf();
    let h = 2.0 * radius / grid as f64;
    let r2 = radius * radius;
    let mut rows = Vec::with_capacity(grid + 1);
    for a in 0..=grid {
        let x = -radius + a as f64 * h;
        let mut row = Complex64::new(0.0, 0.0);
        for b in 0..=grid {
            let y = -radius + b as f64 * h;
            let u = Complex64::new(x, y);
            if u.norm_sqr() > r2 {
                continue;
            }
            row += fock_weighted(n, z, u) * fock_weighted(n, w, u).conj();
        }
        rows.push(row);
    }
    let numeric = crate::quadrature::pairwise_sum(&rows) * (h * h);
    let exact = fock_weighted(n, z, w);
    Ok((numeric - exact).norm() / exact.norm())
}
