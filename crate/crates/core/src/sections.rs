//! Orthonormal frames of `H⁰(M_j, L^N)` and random sections.
//!
//! The frame is built from kernel columns `K_j(·, w_m)` at a grid of centres
//! `w_m ∈ F_j`. Their Gram matrix is `Ĝ_{nm} = K_j(w_n, w_m)` in weighted
//! form, and the whitened columns `e_k = Σ_m W_{mk} K_j(·, w_m)` with
//! `W = Ĝ^{-1/2}` are orthonormal. A section is stored by its coordinates `a`
//! against `e_k`; evaluation uses `c = W a` against the kernel columns.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::Tower;
use crate::fock::BundleParams;
use crate::quotient::{LevelKernel, TruncationPolicy};
use crate::rng::complex_gaussian;

/// Largest admissible Gram condition number.
pub const MAX_COND: f64 = 1e8;

/// Jitter radius of the retry, relative to `τ_j`.
pub const JITTER: f64 = 0.01;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Kernel columns at grid centres together with their whitener.
#[derive(Clone, Debug)]
pub struct CoherentFrame {
    kernel: LevelKernel,
    points: Vec<Complex64>,
    gram: DMatrix<Complex64>,
    whitener: DMatrix<Complex64>,
    cond: f64,
    jittered: bool,
}

/// Centres on a `p × q` grid of `F_j`, `p` the largest divisor of `d` not
/// exceeding `√d`, optionally displaced by a golden-angle jitter.
pub fn frame_centres(kernel: &LevelKernel, d: usize, jitter: f64) -> Vec<Complex64> {
    let mut p = (d as f64).sqrt().floor() as usize;
    while p > 1 && d % p != 0 {
        p -= 1;
    }
    let p = p.max(1);
    let q = d / p;
    let lat = kernel.lattice();
    let mut pts = Vec::with_capacity(d);
    for n in 0..q {
        for m in 0..p {
            let k = pts.len() as f64;
            let z = lat.from_coords((m as f64 + 0.5) / p as f64, (n as f64 + 0.5) / q as f64);
            pts.push(z + Complex64::from_polar(jitter, k * GOLDEN_ANGLE));
        }
    }
    pts
}

impl CoherentFrame {
    /// Frame at explicit centres; fails when the Gram matrix is ill conditioned.
    pub fn from_points(kernel: LevelKernel, points: Vec<Complex64>) -> Result<Self> {
        let d = points.len();
        if d == 0 {
            return Err(Error::Domain("empty frame".into()));
        }
        let gram = DMatrix::from_fn(d, d, |n, m| kernel.weighted(points[n], points[m]));
        // symmetrize away rounding before the Hermitian eigensolver
        let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = gram.clone().symmetric_eigen();
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(cond <= MAX_COND) {
            return Err(Error::FrameDegenerate { cond });
        }
        let u = &eig.eigenvectors;
        let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.powf(-0.5), 0.0)));
        let whitener = u * inv_sqrt * u.adjoint();
        Ok(Self {
            kernel,
            points,
            gram,
            whitener,
            cond,
            jittered: false,
        })
    }

    /// Grid frame at level `j`, retried once with jitter `0.01·τ_j` when the
    /// regular grid is degenerate.
    pub fn build(tower: &Tower, p: BundleParams, j: usize, trunc: TruncationPolicy) -> Result<Self> {
        let kernel = LevelKernel::new(tower, p, j, trunc)?;
        Self::from_kernel(kernel)
    }

    pub fn from_kernel(kernel: LevelKernel) -> Result<Self> {
        let d = kernel.dimension();
        if d < 1 {
            return Err(Error::Domain("zero-dimensional section space".into()));
        }
        match Self::from_points(kernel.clone(), frame_centres(&kernel, d, 0.0)) {
            Err(Error::FrameDegenerate { .. }) => {
                let jitter = JITTER * kernel.tau();
                let mut f = Self::from_points(kernel.clone(), frame_centres(&kernel, d, jitter))?;
                f.jittered = true;
                Ok(f)
            }
            other => other,
        }
    }

    pub fn kernel(&self) -> &LevelKernel {
        &self.kernel
    }

    pub fn level(&self) -> usize {
        self.kernel.level()
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    pub fn whitener(&self) -> &DMatrix<Complex64> {
        &self.whitener
    }

    pub fn cond(&self) -> f64 {
        self.cond
    }

    /// True when the regular grid was degenerate and the jittered one is used.
    pub fn jittered(&self) -> bool {
        self.jittered
    }

    /// `max |W† Ĝ W − I|`.
    pub fn whitening_residual(&self) -> f64 {
        let r = self.whitener.adjoint() * &self.gram * &self.whitener - DMatrix::identity(self.dim(), self.dim());
        r.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Section with the given orthonormal coordinates.
    pub fn section(&self, coef: DVector<Complex64>) -> Result<Section<'_>> {
        if coef.len() != self.dim() {
            return Err(Error::Domain(format!("coef length {} != dimension {}", coef.len(), self.dim())));
        }
        let c = &self.whitener * &coef;
        Ok(Section { frame: self, coef, c })
    }

    /// Uniform sample from the unit sphere of `H⁰`.
    pub fn sample_sphere<R: Rng + ?Sized>(&self, rng: &mut R) -> Section<'_> {
        let g = DVector::from_fn(self.dim(), |_, _| complex_gaussian(rng));
        let norm = g.norm();
        let c = &self.whitener * &g.unscale(norm);
        Section {
            frame: self,
            coef: g.unscale(norm),
            c,
        }
    }

    /// Haar-random orthonormal basis of `H⁰`.
    pub fn sample_onb<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Section<'_>> {
        let d = self.dim();
        let g = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        for k in 0..d {
            let rkk = r[(k, k)];
            let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..d {
                q[(i, k)] *= phase;
            }
        }
        (0..d)
            .map(|k| {
                let coef = q.column(k).into_owned();
                let c = &self.whitener * &coef;
                Section { frame: self, coef, c }
            })
            .collect()
    }
}

/// A holomorphic section in the orthonormal frame.
#[derive(Clone, Debug)]
pub struct Section<'a> {
    frame: &'a CoherentFrame,
    coef: DVector<Complex64>,
    c: DVector<Complex64>,
}

impl<'a> Section<'a> {
    pub fn frame(&self) -> &'a CoherentFrame {
        self.frame
    }

    pub fn coef(&self) -> &DVector<Complex64> {
        &self.coef
    }

    /// Coefficients against the raw kernel columns, `W·coef`.
    pub fn column_coef(&self) -> &DVector<Complex64> {
        &self.c
    }

    /// `‖s‖`, equal to the Euclidean norm of `coef`.
    pub fn norm(&self) -> f64 {
        self.coef.norm()
    }

    /// `⟨s, t⟩` in the `L²(h^N)` inner product.
    pub fn inner(&self, other: &Section<'_>) -> Complex64 {
        self.coef.dotc(&other.coef).conj()
    }

    /// Weighted value `s(z) e^{-N|z|²/2}`, whose modulus is `|s(z)|_{h^N}`.
    pub fn eval_weighted(&self, z: Complex64) -> Complex64 {
        let k = self.frame.kernel();
        self.frame
            .points
            .iter()
            .zip(self.c.iter())
            .fold(Complex64::new(0.0, 0.0), |acc, (&w, &cm)| acc + cm * k.weighted(z, w))
    }

    /// Weighted value and weighted holomorphic derivative `s'(z) e^{-N|z|²/2}`.
    pub fn eval_with_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let k = self.frame.kernel();
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for (&w, &cm) in self.frame.points.iter().zip(self.c.iter()) {
            let (v, dv) = k.weighted_with_deriv(z, w);
            s += cm * v;
            ds += cm * dv;
        }
        (s, ds)
    }

    /// Holomorphic coefficient `s(z)` against the frame `e^{N|z|²/2}`-gauge.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_weighted(z) * (0.5 * self.frame.kernel().params().nf() * z.norm_sqr()).exp()
    }

    /// Holomorphic derivative `s'(z)`.
    pub fn eval_deriv(&self, z: Complex64) -> Complex64 {
        self.eval_with_deriv(z).1 * (0.5 * self.frame.kernel().params().nf() * z.norm_sqr()).exp()
    }

    /// Pointwise norm `|s(z)|_{h^N}`.
    pub fn wmag(&self, z: Complex64) -> f64 {
        self.eval_weighted(z).norm()
    }
}

/// Writes one JSON line `{"level", "seed", "coef"}` per section.
pub fn write_jsonl<W: Write>(out: &mut W, seed: u64, sections: &[Section<'_>]) -> Result<()> {
    for s in sections {
        let coef: Vec<[f64; 2]> = s.coef.iter().map(|c| [c.re, c.im]).collect();
        let line = serde_json::json!({ "level": s.frame.level(), "seed": seed, "coef": coef });
        writeln!(out, "{line}")?;
    }
    Ok(())
}
