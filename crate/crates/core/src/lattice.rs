//! Translation lattices in the complex plane and nested towers of sublattices.
//!
//! A [`Lattice`] is a rank-two subgroup of ℂ given by a positively oriented
//! basis. A [`Tower`] is a finite chain `Γ_0 ⊋ Γ_1 ⊋ … ⊋ Γ_{depth-1}` where each
//! step has index at least two. Every level carries its index `I_j = [Γ_0:Γ_j]`,
//! the length `τ_j` of its shortest nonzero vector and a table of coset
//! representatives of `Γ_0/Γ_j`.
//!
//! Fundamental domains are the half-open parallelograms
//! `{s·g1 + t·g2 : s, t ∈ [0, 1)}` spanned by the stored generators.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Slack used when snapping lattice coordinates to integers.
const COORD_SNAP: f64 = 1e-13;

/// Relative tolerance for the quantization condition `area / π ∈ ℤ`.
const QUANT_TOL: f64 = 1e-9;

/// A rank-two lattice `ℤ·g1 + ℤ·g2 ⊂ ℂ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    g1: Complex64,
    g2: Complex64,
    area: f64,
    // Lagrange-reduced basis, used for enumeration and the shortest vector.
    r1: Complex64,
    r2: Complex64,
    r_area: f64,
}

/// Signed area `Im(conj(a)·b)` of the parallelogram spanned by `a` and `b`.
fn cross(a: Complex64, b: Complex64) -> f64 {
    (a.conj() * b).im
}

impl Lattice {
    /// Builds a lattice from a positively oriented basis.
    pub fn new(g1: Complex64, g2: Complex64) -> Result<Self> {
        let area = cross(g1, g2);
        if !(area.is_finite() && area > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "basis ({g1}, {g2}) has oriented area {area}; need Im(conj(g1)·g2) > 0"
            )));
        }
        let (r1, r2) = lagrange_reduce(g1, g2);
        Ok(Self {
            g1,
            g2,
            area,
            r1,
            r2,
            r_area: cross(r1, r2),
        })
    }

    /// The square lattice `scale·(ℤ + iℤ)`.
    pub fn square(scale: f64) -> Result<Self> {
        Self::new(Complex64::new(scale, 0.0), Complex64::new(0.0, scale))
    }

    pub fn g1(&self) -> Complex64 {
        self.g1
    }

    pub fn g2(&self) -> Complex64 {
        self.g2
    }

    /// Covolume, i.e. the Lebesgue area of a fundamental domain.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// The lattice point `m·g1 + n·g2`.
    pub fn point(&self, m: i64, n: i64) -> Complex64 {
        self.g1 * m as f64 + self.g2 * n as f64
    }

    /// Real coordinates `(s, t)` with `z = s·g1 + t·g2`.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        (cross(z, self.g2) / self.area, cross(self.g1, z) / self.area)
    }

    /// Inverse of [`Lattice::coords`].
    pub fn from_coords(&self, s: f64, t: f64) -> Complex64 {
        self.g1 * s + self.g2 * t
    }

    /// Dual basis `(b1, b2)` with `Re(conj(b_i)·g_k) = δ_ik`.
    ///
    /// The dual lattice `Γ^*` collects the frequencies `λ` for which
    /// `z ↦ cos(2π⟨λ, z⟩)` is `Γ`-periodic.
    pub fn dual_basis(&self) -> (Complex64, Complex64) {
        // ⟨b, z⟩ = Re(conj(b) z); b1 = -i·g2/area and b2 = i·g1/area.
        let i = Complex64::i();
        (-i * self.g2 / self.area, i * self.g1 / self.area)
    }

    /// True when `z` is a lattice vector up to `tol` in lattice coordinates.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        let (s, t) = self.coords(z);
        (s - s.round()).abs() <= tol && (t - t.round()).abs() <= tol
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        self.r1.norm()
    }

    /// Lagrange-reduced basis; the first vector is a shortest vector.
    pub fn reduced_basis(&self) -> (Complex64, Complex64) {
        (self.r1, self.r2)
    }

    /// Calls `f` on every lattice point within `radius` of `center`.
    ///
    /// Enumeration runs over the coefficient box of the reduced basis, so the
    /// number of rejected candidates stays bounded for skewed input bases.
    pub fn for_each_in_disk(&self, center: Complex64, radius: f64, mut f: impl FnMut(Complex64)) {
        if radius < 0.0 || !radius.is_finite() {
            return;
        }
        let area = self.r_area;
        let a_c = cross(center, self.r2) / area;
        let b_c = cross(self.r1, center) / area;
        let a_span = radius * self.r2.norm() / area.abs();
        let b_span = radius * self.r1.norm() / area.abs();
        let r2 = radius * radius;
        let a_lo = (a_c - a_span).ceil() as i64;
        let a_hi = (a_c + a_span).floor() as i64;
        let b_lo = (b_c - b_span).ceil() as i64;
        let b_hi = (b_c + b_span).floor() as i64;
        for a in a_lo..=a_hi {
            let base = self.r1 * a as f64;
            for b in b_lo..=b_hi {
                let p = base + self.r2 * b as f64;
                if (p - center).norm_sqr() <= r2 {
                    f(p);
                }
            }
        }
    }

    /// Lattice points `γ` with `|γ − center| ≤ radius`, sorted by distance.
    pub fn points_in_disk(&self, center: Complex64, radius: f64) -> Vec<Complex64> {
        let mut pts = Vec::new();
        self.for_each_in_disk(center, radius, |p| pts.push(p));
        pts.sort_by(|a, b| {
            (a - center)
                .norm_sqr()
                .total_cmp(&(b - center).norm_sqr())
                .then(a.re.total_cmp(&b.re))
                .then(a.im.total_cmp(&b.im))
        });
        pts
    }

    /// Translates `z` by a lattice vector into the fundamental parallelogram.
    ///
    /// Coordinates within `1e-13` below an integer snap up, which keeps the
    /// map idempotent under floating point rounding.
    pub fn reduce(&self, z: Complex64) -> Complex64 {
        let (s, t) = self.coords(z);
        let m = (s + COORD_SNAP).floor();
        let n = (t + COORD_SNAP).floor();
        if m == 0.0 && n == 0.0 {
            return z;
        }
        z - self.g1 * m - self.g2 * n
    }

    /// Disjoint-packing upper bound on the number of lattice points in a
    /// closed disk of radius `radius`.
    ///
    /// Disks of radius `τ/2` around lattice points are disjoint and those
    /// centred in the disk lie inside the disk of radius `radius + τ/2`.
    pub fn packing_count_bound(&self, radius: f64) -> f64 {
        let half = 0.5 * self.shortest_vector();
        ((radius + half) / half).powi(2)
    }
}

fn lagrange_reduce(mut u: Complex64, mut v: Complex64) -> (Complex64, Complex64) {
    if u.norm_sqr() > v.norm_sqr() {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let m = ((v * u.conj()).re / u.norm_sqr()).round();
        v -= u * m;
        if v.norm_sqr() >= u.norm_sqr() {
            return (u, v);
        }
        std::mem::swap(&mut u, &mut v);
    }
}

/// One level `Γ_j` of a tower.
#[derive(Clone, Debug)]
pub struct TowerLevel {
    pub j: usize,
    pub lattice: Lattice,
    /// `I_j = [Γ_0 : Γ_j]`.
    pub index: u64,
    /// `τ_j`, the shortest nonzero vector length of `Γ_j`.
    pub tau: f64,
    /// Representatives of `Γ_0/Γ_j`, reduced into the level fundamental domain.
    pub coset_reps: Vec<Complex64>,
    /// Columns are the basis of `Γ_j` in `Γ_0` coordinates.
    pub basis_in_base: [[i64; 2]; 2],
}

/// A finite tower of sublattices with a quantized line bundle degree.
#[derive(Clone, Debug)]
pub struct Tower {
    levels: Vec<TowerLevel>,
    d0: u32,
}

/// Degree `area/π` of the curvature class, checked to be a positive integer.
fn quantized_degree(area: f64) -> Result<u32> {
    let d = area / PI;
    let k = d.round();
    if k < 1.0 || (d - k).abs() > QUANT_TOL * k.max(1.0) {
        return Err(Error::Quantization(format!(
            "base area / π = {d} is not a positive integer"
        )));
    }
    Ok(k as u32)
}

/// The tower `Γ_j = ratio^j · scale · (ℤ + iℤ)`, levels `0..depth`.
///
/// `scale²` must be a positive integer multiple of `π`; a scale within the
/// quantization tolerance is snapped to the exact value `√(π·d0)`.
pub fn make_product_tower(scale: f64, ratio: u32, depth: usize) -> Result<Tower> {
    if depth < 1 {
        return Err(Error::Depth { min: 1, got: depth });
    }
    if ratio < 2 {
        return Err(Error::InvalidSublattice {
            step: 0,
            reason: format!("ratio {ratio} < 2"),
        });
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Quantization(format!("scale {scale} is not positive")));
    }
    let d0 = quantized_degree(scale * scale)?;
    let exact = (PI * d0 as f64).sqrt();
    let base = Lattice::square(exact)?;
    let r = ratio as i64;
    let steps = vec![[[r, 0], [0, r]]; depth - 1];
    Tower::from_matrices(base, &steps)
}

impl Tower {
    /// Builds a tower from a base lattice and integer step matrices.
    ///
    /// Step `k` maps the basis of `Γ_k` to the basis of `Γ_{k+1}`: the columns
    /// of the matrix are the new generators in old coordinates, so the step
    /// index is the determinant, which must be at least two.
    pub fn from_matrices(base: Lattice, steps: &[[[i64; 2]; 2]]) -> Result<Self> {
        let d0 = quantized_degree(base.area())?;
        let mut cum = [[1i64, 0], [0, 1]];
        let mut levels = Vec::with_capacity(steps.len() + 1);
        levels.push(Self::level(&base, 0, cum)?);
        for (k, m) in steps.iter().enumerate() {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det < 2 {
                return Err(Error::InvalidSublattice {
                    step: k,
                    reason: format!("determinant {det} < 2 (index must be ≥ 2, orientation positive)"),
                });
            }
            cum = mat_mul(cum, *m);
            levels.push(Self::level(&base, k + 1, cum)?);
        }
        Ok(Self { levels, d0 })
    }

    fn level(base: &Lattice, j: usize, c: [[i64; 2]; 2]) -> Result<TowerLevel> {
        let g1 = base.point(c[0][0], c[1][0]);
        let g2 = base.point(c[0][1], c[1][1]);
        let lattice = Lattice::new(g1, g2)?;
        let index = (c[0][0] * c[1][1] - c[0][1] * c[1][0]) as u64;
        let (p, r) = hermite_diagonal(c);
        let mut coset_reps = Vec::with_capacity(index as usize);
        for n in 0..r {
            for m in 0..p {
                coset_reps.push(lattice.reduce(base.point(m, n)));
            }
        }
        debug_assert_eq!(coset_reps.len() as u64, index);
        Ok(TowerLevel {
            j,
            tau: lattice.shortest_vector(),
            lattice,
            index,
            coset_reps,
            basis_in_base: c,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Degree of the line bundle over the base torus.
    pub fn d0(&self) -> u32 {
        self.d0
    }

    pub fn base(&self) -> &Lattice {
        &self.levels[0].lattice
    }

    pub fn levels(&self) -> &[TowerLevel] {
        &self.levels
    }

    pub fn level_at(&self, j: usize) -> Result<&TowerLevel> {
        self.levels.get(j).ok_or(Error::LevelOutOfRange {
            j,
            depth: self.levels.len(),
        })
    }

    pub fn taus(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.tau).collect()
    }

    pub fn indices(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.index).collect()
    }

    /// Representatives of `Γ_0/Γ_j` reduced into the level-`j` domain.
    pub fn coset_reps(&self, j: usize) -> Result<&[Complex64]> {
        Ok(&self.level_at(j)?.coset_reps)
    }
}

fn mat_mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Diagonal `(p, r)` of a triangular basis `{(p, 0), (q, r)}` of the
/// sublattice spanned by the columns of `c`. The box `[0,p) × [0,r)` is then a
/// complete residue system of `ℤ²` modulo that sublattice.
fn hermite_diagonal(c: [[i64; 2]; 2]) -> (i64, i64) {
    let (y1, y2) = (c[1][0], c[1][1]);
    let (g, _, _) = ext_gcd(y1, y2);
    let r = g.abs();
    let det = (c[0][0] * c[1][1] - c[0][1] * c[1][0]).abs();
    (det / r, r)
}
