//! Quadrature rules and fixed-order reductions.
//!
//! Periodic integrands over a lattice cell are integrated with the uniform
//! trapezoid rule, which converges faster than any power of the spacing for
//! smooth periodic functions. Reductions are pairwise in index order so the
//! result is independent of how the terms were produced.

use std::ops::Add;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::lattice::Lattice;

/// Pairwise summation in index order.
pub fn pairwise_sum<T: Copy + Add<Output = T> + Default>(xs: &[T]) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().fold(T::default(), |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Uniform grid nodes `s·g1 + t·g2`, `s = k/ns`, `t = l/nt`, row-major in `l`.
pub fn cell_nodes(lattice: &Lattice, ns: usize, nt: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(ns * nt);
    for l in 0..nt {
        for k in 0..ns {
            v.push(lattice.from_coords(k as f64 / ns as f64, l as f64 / nt as f64));
        }
    }
    v
}

/// Periodic trapezoid rule for `∫_F f dm` over the fundamental cell of
/// `lattice`, using an `ns × nt` grid. Evaluation is parallel, the reduction
/// is ordered.
pub fn periodic_trapezoid<T, F>(lattice: &Lattice, ns: usize, nt: usize, f: F) -> T
where
    T: Copy + Add<Output = T> + Default + Send + std::ops::Mul<f64, Output = T>,
    F: Fn(Complex64) -> T + Sync,
{
    let nodes = cell_nodes(lattice, ns, nt);
    let vals: Vec<T> = nodes.par_iter().map(|&z| f(z)).collect();
    pairwise_sum(&vals) * (lattice.area() / (ns * nt) as f64)
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over the segment `[a, b]` (real parameter).
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Copy + Add<Output = T> + Default + std::ops::Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (*w);
        }
        acc * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Tanh–sinh (double exponential) quadrature on `[a, b]`.
///
/// Tolerates integrable endpoint singularities such as `log(1 − s)` at `s = 1`.
/// The step is halved until two successive estimates agree to `tol`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(a: f64, b: f64, tol: f64, f: F) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let r = 0.5 * (b - a);
    if r == 0.0 {
        return 0.0;
    }
    // x(t) = tanh(π/2 sinh t); evaluate through 1 − x to keep endpoint accuracy.
    let eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cosh_u = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        // 1 - tanh|u| = 2/(e^{2|u|} + 1)
        let one_minus = 2.0 / ((2.0 * u.abs()).exp() + 1.0);
        if one_minus == 0.0 || w == 0.0 {
            return 0.0;
        }
        let x = if u >= 0.0 { b - r * one_minus } else { a + r * one_minus };
        let v = f(x);
        if v.is_finite() {
            v * w * r
        } else {
            0.0
        }
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut est = sum * h;
    for _ in 0..12 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            let t = k as f64 * h;
            add += eval(t) + eval(-t);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        if (next - est).abs() <= tol * next.abs().max(1e-300) {
            return next;
        }
        est = next;
    }
    est
}
