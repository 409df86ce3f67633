//! Bergman kernels of the tower levels as Poincaré series over `Γ_j`.
//!
//! With the magnetic translations `(T_γ f)(z) = f(z−γ) e^{N(z γ̄ − |γ|²/2)}`,
//! which form a genuine representation of `Γ_0` when `N·d0` is even, the
//! level-`j` kernel is the `Γ_j`-average of the Fock kernel:
//!
//! ```text
//! K_j(z,w) = (N/π) Σ_{γ∈Γ_j} exp{N[z γ̄ − |γ|²/2 + (z−γ) w̄]}
//! ```
//!
//! Each term has pointwise norm `(N/π) e^{-N|z−γ−w|²/2}`, so the series is
//! a Gaussian lattice sum centred at `z − w`. It is truncated to a disk whose
//! radius is certified by the disjoint-packing count of lattice points.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{fock_weighted, BundleParams, KernelValue};
use crate::lattice::{Lattice, Tower};
use crate::quadrature::{cell_nodes, pairwise_sum, periodic_trapezoid};

/// Controls truncation of the lattice sums.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TruncationPolicy {
    /// Tail tolerance relative to the peak value `N/π`.
    pub rtol: f64,
    /// Largest admissible truncation radius.
    pub max_radius: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rtol: 1e-14,
            max_radius: 64.0,
        }
    }
}

/// Density of the Bergman metric against `dx∧dy`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricDensity {
    pub value: f64,
}

/// A quotient kernel value together with its certified truncation bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuotientValue {
    pub value: KernelValue,
    /// Upper bound on the magnitude of the omitted terms.
    pub tail_bound: f64,
}

/// The sup-norm gap between level and universal-cover kernels on a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityGap {
    pub value: f64,
    /// Natural log of `value`; finite even when `value` underflows.
    pub ln_value: f64,
    pub argmax: (Complex64, Complex64),
}

/// Kernel of one tower level, bound to its lattice and truncation radius.
#[derive(Clone, Debug)]
pub struct LevelKernel {
    params: BundleParams,
    j: usize,
    lattice: Lattice,
    base: Lattice,
    index: u64,
    tau: f64,
    coset_reps: Vec<Complex64>,
    radius: f64,
    tail_bound: f64,
    trunc: TruncationPolicy,
}

/// Certified bound on `Σ_{|γ−c|>ρ} (N/π) e^{-N|γ−c|²/2}` over a lattice.
///
/// Points are counted shell by shell with the packing bound, each shell
/// weighted by its largest possible term.
pub fn gaussian_tail_bound(lattice: &Lattice, n: f64, rho: f64) -> f64 {
    let delta = 0.25 / n.sqrt();
    let mut total = 0.0;
    let mut k = 0usize;
    loop {
        let inner = rho + k as f64 * delta;
        let outer = inner + delta;
        let term = lattice.packing_count_bound(outer) * (-0.5 * n * inner * inner).exp();
        total += term;
        if term <= 1e-40 * total.max(1e-300) || term == 0.0 || k > 100_000 {
            break;
        }
        k += 1;
    }
    total * n / PI
}

/// Smallest radius (on a 1/64 step) whose tail bound is below `rtol·N/π`.
pub fn truncation_radius(lattice: &Lattice, n: f64, trunc: &TruncationPolicy) -> Result<(f64, f64)> {
    let target = trunc.rtol * n / PI;
    let step = 1.0 / 64.0;
    let mut rho = 0.0;
    while rho <= trunc.max_radius {
        let tail = gaussian_tail_bound(lattice, n, rho);
        if tail < target {
            return Ok((rho, tail));
        }
        rho += step;
    }
    Err(Error::Truncation {
        rtol: trunc.rtol,
        max_radius: trunc.max_radius,
    })
}

/// Map a per-base-cell node count onto the level cell.
pub(crate) fn level_grid(base: &Lattice, lattice: &Lattice, grid: usize) -> (usize, usize) {
    let ns = (grid as f64 * lattice.g1().norm() / base.g1().norm()).round().max(1.0) as usize;
    let nt = (grid as f64 * lattice.g2().norm() / base.g2().norm()).round().max(1.0) as usize;
    (ns, nt)
}

impl LevelKernel {
    pub fn new(tower: &Tower, params: BundleParams, j: usize, trunc: TruncationPolicy) -> Result<Self> {
        if !(trunc.rtol > 0.0 && trunc.rtol < 1.0) {
            return Err(Error::Domain(format!("rtol {} outside (0,1)", trunc.rtol)));
        }
        if params.d0() != tower.d0() {
            return Err(Error::Quantization(format!(
                "bundle degree {} does not match tower degree {}",
                params.d0(),
                tower.d0()
            )));
        }
        let base = *tower.base();
        if trunc.max_radius < base.shortest_vector() {
            return Err(Error::Domain(format!(
                "max_radius {} below τ_0 = {}",
                trunc.max_radius,
                base.shortest_vector()
            )));
        }
        let lvl = tower.level_at(j)?;
        let (radius, tail_bound) = truncation_radius(&lvl.lattice, params.nf(), &trunc)?;
        Ok(Self {
            params,
            j,
            lattice: lvl.lattice,
            base,
            index: lvl.index,
            tau: lvl.tau,
            coset_reps: lvl.coset_reps.clone(),
            radius,
            tail_bound,
            trunc,
        })
    }

    pub fn params(&self) -> &BundleParams {
        &self.params
    }

    pub fn level(&self) -> usize {
        self.j
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn base(&self) -> &Lattice {
        &self.base
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn coset_reps(&self) -> &[Complex64] {
        &self.coset_reps
    }

    /// Truncation radius of the lattice sums.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn truncation(&self) -> &TruncationPolicy {
        &self.trunc
    }

    /// `dim H⁰(M_j, L^N) = N·d0·I_j`.
    pub fn dimension(&self) -> usize {
        (self.params.n() as u64 * self.params.d0() as u64 * self.index) as usize
    }

    /// Weighted kernel `K_j(z,w) e^{-N(|z|²+|w|²)/2}`.
    #[inline]
    pub fn weighted(&self, z: Complex64, w: Complex64) -> Complex64 {
        let n = self.params.nf();
        let mut acc = Complex64::new(0.0, 0.0);
        let zw = (z * w.conj()).im;
        self.lattice.for_each_in_disk(z - w, self.radius, |g| {
            let re = -0.5 * n * (z - g - w).norm_sqr();
            let im = n * ((z * g.conj()).im + zw - (g * w.conj()).im);
            acc += Complex64::from_polar(re.exp(), im);
        });
        acc * (n / PI)
    }

    /// Weighted kernel and its weighted holomorphic `z`-derivative,
    /// `(∂_z K_j)(z,w) e^{-N(|z|²+|w|²)/2}`.
    #[inline]
    pub fn weighted_with_deriv(&self, z: Complex64, w: Complex64) -> (Complex64, Complex64) {
        let n = self.params.nf();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut dacc = Complex64::new(0.0, 0.0);
        let zw = (z * w.conj()).im;
        let wc = w.conj();
        self.lattice.for_each_in_disk(z - w, self.radius, |g| {
            let re = -0.5 * n * (z - g - w).norm_sqr();
            let im = n * ((z * g.conj()).im + zw - (g * wc).im);
            let t = Complex64::from_polar(re.exp(), im);
            acc += t;
            dacc += (g.conj() + wc) * t;
        });
        (acc * (n / PI), dacc * (n * n / PI))
    }

    /// The level kernel with its certified tail bound.
    pub fn kernel(&self, z: Complex64, w: Complex64) -> QuotientValue {
        QuotientValue {
            value: KernelValue::from_weighted(&self.params, z, w, self.weighted(z, w)),
            tail_bound: self.tail_bound,
        }
    }

    /// Diagonal pointwise norm `|K_j(z,z)|_{h^N}`.
    pub fn diag(&self, z: Complex64) -> f64 {
        self.weighted(z, z).re
    }

    /// Normalized kernel `P = wmag(z,w)/√(wmag(z,z)·wmag(w,w))`, in `[0, 1]`.
    pub fn normalized(&self, z: Complex64, w: Complex64) -> Result<f64> {
        let dz = self.checked_diag(z)?;
        let dw = self.checked_diag(w)?;
        Ok(self.normalized_with(z, w, dz, dw))
    }

    /// [`LevelKernel::normalized`] with precomputed diagonals.
    #[inline]
    pub fn normalized_with(&self, z: Complex64, w: Complex64, dz: f64, dw: f64) -> f64 {
        (self.weighted(z, w).norm() / (dz * dw).sqrt()).min(1.0)
    }

    fn checked_diag(&self, z: Complex64) -> Result<f64> {
        let d = self.diag(z);
        if !(d > 1e-12 * self.params.peak()) {
            return Err(Error::BaseLocus(format!("z = {z}, diagonal {d:e}")));
        }
        Ok(d)
    }

    /// Density `λ_j = ∂_z∂_z̄ log φ_j` of the Bergman metric at `z`, from the
    /// termwise-differentiated series.
    pub fn metric_density(&self, z: Complex64) -> Result<MetricDensity> {
        let n = self.params.nf();
        let mut s0 = Complex64::new(0.0, 0.0);
        let mut s_z = Complex64::new(0.0, 0.0);
        let mut s_w = Complex64::new(0.0, 0.0);
        let mut s_zw = Complex64::new(0.0, 0.0);
        self.lattice.for_each_in_disk(Complex64::new(0.0, 0.0), self.radius, |g| {
            let re = -0.5 * n * g.norm_sqr();
            let im = 2.0 * n * (z * g.conj()).im;
            let t = Complex64::from_polar(re.exp(), im);
            // ∂_z of a term brings N(γ̄ + w̄), ∂_w̄ brings N(z − γ); here w = z.
            let a = n * (g.conj() + z.conj());
            let b = n * (z - g);
            s0 += t;
            s_z += a * t;
            s_w += b * t;
            s_zw += (n + a * b) * t;
        });
        if !(s0.re > 1e-12) {
            return Err(Error::BaseLocus(format!("z = {z}")));
        }
        let lam = (s_zw / s0 - s_z * s_w / (s0 * s0)).re;
        Ok(MetricDensity { value: lam })
    }

    /// Level-cell grid dimensions for `grid` nodes per base-cell edge.
    pub fn level_grid(&self, grid: usize) -> (usize, usize) {
        level_grid(&self.base, &self.lattice, grid)
    }

    /// `∫_{F_j} |K_j(z,z)|_{h^N} dm`, equal to `N·d0·I_j`.
    pub fn trace(&self, grid: usize) -> Result<f64> {
        if grid < 16 {
            return Err(Error::Domain(format!("grid {grid} < 16")));
        }
        let (ns, nt) = self.level_grid(grid);
        Ok(periodic_trapezoid(&self.lattice, ns, nt, |z| self.diag(z)))
    }

    /// Relative defect of `∫_{F_j} K_j(z,u) conj(K_j(w,u)) e^{-N|u|²} dm(u) = K_j(z,w)`.
    pub fn idempotence_residual(&self, z: Complex64, w: Complex64, grid: usize) -> Result<f64> {
        let exact = self.weighted(z, w);
        if exact.norm() < 1e-300 {
            return Err(Error::DivisionDegenerate(exact.norm()));
        }
        let (ns, nt) = self.level_grid(grid);
        let numeric: Complex64 = periodic_trapezoid(&self.lattice, ns, nt, |u| {
            self.weighted(z, u) * self.weighted(w, u).conj()
        });
        Ok((numeric - exact).norm() / exact.norm())
    }

    /// `sup |wmag_j(z,w) − wmag_fock(z,w)|` over a `grid × grid` mesh of
    /// `F_0 × F_0`.
    ///
    /// The difference of magnitudes is formed as
    /// `(2 Re(t₀ R̄) + |R|²)/(|t₀+R| + |t₀|)` with `t₀` the identity term and
    /// `R` the remaining series, so gaps far below the rounding level of the
    /// kernel itself keep full relative accuracy. The remaining series is
    /// truncated relative to its own leading term.
    pub fn stability_gap(&self, grid: usize) -> Result<StabilityGap> {
        if grid < 8 {
            return Err(Error::Domain(format!("grid {grid} < 8")));
        }
        let nodes = cell_nodes(&self.base, grid, grid);
        let rows: Vec<(f64, (Complex64, Complex64))> = nodes
            .par_iter()
            .map(|&z| {
                let mut best = (f64::NEG_INFINITY, (z, z));
                for &w in &nodes {
                    let l = self.ln_gap_at(z, w);
                    if l > best.0 {
                        best = (l, (z, w));
                    }
                }
                best
            })
            .collect();
        let (ln_value, argmax) = rows
            .into_iter()
            .fold((f64::NEG_INFINITY, (nodes[0], nodes[0])), |acc, r| if r.0 > acc.0 { r } else { acc });
        Ok(StabilityGap {
            value: ln_value.exp(),
            ln_value,
            argmax,
        })
    }

    /// `ln |wmag_j(z,w) − wmag_fock(z,w)|`.
    pub fn ln_gap_at(&self, z: Complex64, w: Complex64) -> f64 {
        let n = self.params.nf();
        let c = z - w;
        // nearest nonzero lattice point to c
        let mut d_min2 = f64::INFINITY;
        self.lattice.for_each_in_disk(c, c.norm() + self.tau + 1e-9, |g| {
            if g.norm_sqr() > 0.25 * self.tau * self.tau {
                d_min2 = d_min2.min((c - g).norm_sqr());
            }
        });
        // relative cut: omitted terms are below e^{-45} times the leading one
        let cut = (d_min2 + 90.0 / n).sqrt();
        let m = -0.5 * n * d_min2;
        let zw = (z * w.conj()).im;
        let mut r = Complex64::new(0.0, 0.0);
        self.lattice.for_each_in_disk(c, cut, |g| {
            if g.norm_sqr() <= 0.25 * self.tau * self.tau {
                return;
            }
            let re = -0.5 * n * (c - g).norm_sqr() - m;
            let im = n * ((z * g.conj()).im + zw - (g * w.conj()).im);
            r += Complex64::from_polar(re.exp(), im);
        });
        // R = (N/π) e^m r
        let scale = n / PI;
        let t0 = fock_weighted(n, z, w);
        let em = scale * m.exp();
        let num = 2.0 * (t0 * r.conj()).re + em * r.norm_sqr();
        let den = (t0 + r * em).norm() + t0.norm();
        if num == 0.0 || den == 0.0 {
            return f64::NEG_INFINITY;
        }
        scale.ln() + m + num.abs().ln() - den.ln()
    }

    /// Minimum of the diagonal over a `grid × grid` mesh of `F_0`, with its
    /// location. The diagonal is `Γ_0`-periodic, so the base cell suffices.
    pub fn base_locus_min(&self, grid: usize) -> Result<(f64, Complex64)> {
        if grid < 8 {
            return Err(Error::Domain(format!("grid {grid} < 8")));
        }
        let nodes = cell_nodes(&self.base, grid, grid);
        let vals: Vec<f64> = nodes.par_iter().map(|&z| self.diag(z)).collect();
        let (i, v) = vals
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        Ok((v, nodes[i]))
    }

    /// `∫_{F_0} λ_j dm`; the descended metric has total mass `π·N·d0`.
    pub fn metric_mass(&self, grid: usize) -> Result<f64> {
        let nodes = cell_nodes(&self.base, grid, grid);
        let vals: Vec<Result<f64>> = nodes.par_iter().map(|&z| self.metric_density(z).map(|m| m.value)).collect();
        let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
        Ok(pairwise_sum(&vals) * self.base.area() / nodes.len() as f64)
    }
}

/// One `LevelKernel` per tower level.
pub fn level_kernels(tower: &Tower, params: BundleParams, trunc: TruncationPolicy) -> Result<Vec<LevelKernel>> {
    (0..tower.depth()).map(|j| LevelKernel::new(tower, params, j, trunc)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fock_kernel;
    use crate::lattice::make_product_tower;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(depth: usize) -> (Tower, BundleParams) {
        (
            make_product_tower(PI.sqrt(), 2, depth).unwrap(),
            BundleParams::new(2, 1).unwrap(),
        )
    }

    #[test]
    fn diagonal_at_origin_matches_direct_sum() {
        let (t, p) = setup(1);
        let k = LevelKernel::new(&t, p, 0, TruncationPolicy::default()).unwrap();
        // oracle: plain sum over a 13×13 box of (2/π) e^{-|γ|²}
        let a = PI.sqrt();
        let mut s = 0.0;
        for m in -6..=6 {
            for n in -6..=6 {
                s += (-(a * a) * (m * m + n * n) as f64).exp();
            }
        }
        let want = 2.0 / PI * s;
        let got = k.kernel(c(0.0, 0.0), c(0.0, 0.0)).value.wmag;
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        assert!((want - 2.0 / PI * (1.0 + 4.0 * (-PI).exp() + 4.0 * (-2.0 * PI).exp())).abs() < 1e-5);
    }

    #[test]
    fn huge_tau_reduces_to_fock() {
        let d0 = 400;
        let t = make_product_tower((PI * d0 as f64).sqrt(), 2, 1).unwrap();
        let p = BundleParams::new(2, d0).unwrap();
        let k = LevelKernel::new(&t, p, 0, TruncationPolicy::default()).unwrap();
        let (z, w) = (c(0.3, -0.2), c(-0.5, 0.4));
        let q = k.kernel(z, w).value;
        let f = fock_kernel(&p, z, w);
        assert!((q.weighted - f.weighted).norm() < 1e-14 * p.peak());
        let lam = k.metric_density(z).unwrap().value;
        assert!((lam - 2.0).abs() < 1e-12);
        assert!((k.base_locus_min(8).unwrap().0 - p.peak()).abs() < 1e-12);
    }

    #[test]
    fn hermitian_symmetry() {
        let (t, p) = setup(2);
        for j in 0..2 {
            let k = LevelKernel::new(&t, p, j, TruncationPolicy::default()).unwrap();
            let (z, w) = (c(0.7, 1.1), c(-0.4, 0.3));
            let a = k.kernel(z, w).value.coef;
            let b = k.kernel(w, z).value.coef;
            assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
        }
    }

    #[test]
    fn traces_are_dimensions() {
        let (t, p) = setup(3);
        for (j, want) in [(0, 2.0), (1, 8.0), (2, 32.0)] {
            let k = LevelKernel::new(&t, p, j, TruncationPolicy::default()).unwrap();
            let tr = k.trace(16).unwrap();
            assert!((tr - want).abs() < 1e-8 * want, "j={j}: {tr}");
            assert_eq!(k.dimension(), want as usize);
        }
    }

    #[test]
    fn idempotence_and_grid_refinement() {
        let (t, p) = setup(2);
        let k = LevelKernel::new(&t, p, 0, TruncationPolicy::default()).unwrap();
        let r = k.idempotence_residual(c(0.0, 0.0), c(0.0, 0.0), 64).unwrap();
        assert!(r <= 1e-8, "{r}");
        let k1 = LevelKernel::new(&t, p, 1, TruncationPolicy::default()).unwrap();
        let z = c(1.0, 0.4);
        assert!(k1.idempotence_residual(z, z, 16).unwrap() <= 1e-8);
        let coarse = k.idempotence_residual(c(0.3, 0.2), c(1.0, -0.1), 2).unwrap();
        let fine = k.idempotence_residual(c(0.3, 0.2), c(1.0, -0.1), 4).unwrap();
        assert!(coarse > 1e-6 && fine < coarse, "{coarse} {fine}");
    }

    #[test]
    fn normalized_kernel_properties() {
        let (t, p) = setup(3);
        let k = LevelKernel::new(&t, p, 0, TruncationPolicy::default()).unwrap();
        let z = c(0.4, 0.9);
        assert!((k.normalized(z, z).unwrap() - 1.0).abs() < 1e-14);
        let a = PI.sqrt();
        let p_per = k.normalized(z + c(a, -a), z).unwrap();
        assert!((p_per - 1.0).abs() < 1e-12);
        // deep level: Fock limit e^{-1} at |z−w| = 1
        let deep = LevelKernel::new(&t, p, 2, TruncationPolicy::default()).unwrap();
        let v = deep.normalized(c(1.0, 1.0), c(2.0, 1.0)).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-6, "{v}");
    }

    /// `N + Δ log φ / 4` with the five-point Laplacian at `h = 1e-3`,
    /// Richardson-extrapolated against `h/2`.
    fn fd_metric_density(k: &LevelKernel, z: Complex64) -> f64 {
        let lr = |u: Complex64| k.diag(u).ln();
        let lap = |h: f64| (lr(z + h) + lr(z - h) + lr(z + c(0.0, h)) + lr(z - c(0.0, h)) - 4.0 * lr(z)) / (h * h);
        k.params().nf() + (4.0 * lap(5e-4) - lap(1e-3)) / 12.0
    }

    #[test]
    fn metric_density_finite_differences() {
        let (t, p) = setup(3);
        for j in 0..3 {
            let k = LevelKernel::new(&t, p, j, TruncationPolicy::default()).unwrap();
            for &z in &[c(0.1, 0.2), c(0.9, 1.3), c(1.5, 0.05), c(0.44, 0.44), c(0.0, 0.0)] {
                let fd = fd_metric_density(&k, z);
                let an = k.metric_density(z).unwrap().value;
                assert!((an - fd).abs() < 1e-5, "j={j} z={z}: {an} vs {fd}");
                assert!(an >= 0.0);
            }
        }
    }

    #[test]
    fn metric_mass_is_topological() {
        let (t, p) = setup(2);
        for j in 0..2 {
            let k = LevelKernel::new(&t, p, j, TruncationPolicy::default()).unwrap();
            let m = k.metric_mass(32).unwrap();
            assert!((m - 2.0 * PI).abs() < 1e-8, "j={j}: {m}");
        }
    }

    #[test]
    fn deck_invariance_under_base_lattice() {
        let (t, p) = setup(3);
        let a = PI.sqrt();
        let k = LevelKernel::new(&t, p, 2, TruncationPolicy::default()).unwrap();
        let (z, w) = (c(0.3, 0.8), c(1.2, -0.6));
        let base = k.kernel(z, w).value.wmag;
        for g in [c(a, 0.0), c(0.0, a), c(3.0 * a, -a)] {
            let moved = k.kernel(z + g, w + g).value.wmag;
            assert!((moved - base).abs() <= 1e-9 * base);
        }
    }

    #[test]
    fn base_locus_min_at_deep_hole() {
        let (t, p) = setup(1);
        let k = LevelKernel::new(&t, p, 0, TruncationPolicy::default()).unwrap();
        let (v, at) = k.base_locus_min(32).unwrap();
        assert!(v > 0.1 && v < 2.0 / PI);
        // minimum sits at a deep hole of the half-period lattice (a/2)ℤ²
        let half = Lattice::square(0.5 * PI.sqrt()).unwrap();
        let r = half.reduce(at - c(0.25 * PI.sqrt(), 0.25 * PI.sqrt()));
        let d = r.norm().min((r - half.g1()).norm()).min((r - half.g2()).norm()).min((r - half.g1() - half.g2()).norm());
        assert!(d < 1e-9, "argmin {at}");
    }

    #[test]
    fn gap_decreases_along_tower() {
        let (t, p) = setup(4);
        let gaps: Vec<f64> = (0..4)
            .map(|j| LevelKernel::new(&t, p, j, TruncationPolicy::default()).unwrap().stability_gap(8).unwrap().ln_value)
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn truncation_error_when_radius_capped() {
        let (t, p) = setup(1);
        let tight = TruncationPolicy { rtol: 1e-14, max_radius: 2.0 };
        assert!(matches!(LevelKernel::new(&t, p, 0, tight), Err(Error::Truncation { .. })));
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        let l = Lattice::square(PI.sqrt()).unwrap();
        let n = 2.0;
        for rho in [1.0, 2.5, 4.0] {
            let c0 = c(0.3, 0.7);
            let mut actual = 0.0;
            for g in l.points_in_disk(c0, 20.0) {
                let d = (g - c0).norm();
                if d > rho {
                    actual += n / PI * (-0.5 * n * d * d).exp();
                }
            }
            assert!(gaussian_tail_bound(&l, n, rho) >= actual);
        }
    }
}
