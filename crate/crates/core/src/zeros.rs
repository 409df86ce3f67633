//! Zeros of sections by the argument principle.
//!
//! The winding number `(1/2πi)∮ s'/s dz` of a parallelogram counts the zeros
//! inside it. Since `s'/s` is the same in the weighted and holomorphic
//! gauges, the integrand is formed from weighted values and never overflows.
//! `F_j` is split as a quadtree in lattice coordinates until each cell holds
//! a single zero, which Newton's method then refines.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::quadrature::GaussLegendre;
use crate::sections::Section;

/// Largest distance from a winding value to an integer that still snaps.
pub const SNAP_TOL: f64 = 0.25;

/// Contour retries (dilation or shift) before a boundary zero is fatal.
pub const MAX_RETRIES: usize = 5;

/// Points where `|s'/s|` exceeds this are treated as lying on the contour.
const GUARD: f64 = 1e9;

/// Absolute tolerance of an edge integral.
const EDGE_TOL: f64 = 1e-3;

const MAX_EDGE_DEPTH: usize = 48;

/// Offsets of interior split lines, in units of the grid spacing, tried in turn.
const SPLIT_SHIFTS: [f64; 5] = [0.0, -0.0538, 0.0538, -0.1162, 0.1162];

fn gl8() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(8))
}

/// Closed parallelogram `origin + [0,1]·e1 + [0,1]·e2`, positively oriented.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Parallelogram {
    pub origin: Complex64,
    pub e1: Complex64,
    pub e2: Complex64,
}

impl Parallelogram {
    pub fn new(origin: Complex64, e1: Complex64, e2: Complex64) -> Result<Self> {
        if !((e1.conj() * e2).im > 0.0) {
            return Err(Error::Domain("parallelogram edges must be positively oriented".into()));
        }
        Ok(Self { origin, e1, e2 })
    }

    /// Axis-aligned rectangle with corners `lo` and `hi`.
    pub fn rect(lo: Complex64, hi: Complex64) -> Result<Self> {
        let d = hi - lo;
        Self::new(lo, Complex64::new(d.re, 0.0), Complex64::new(0.0, d.im))
    }

    /// Fundamental domain of a lattice.
    pub fn cell(lattice: &Lattice) -> Self {
        Self {
            origin: Complex64::new(0.0, 0.0),
            e1: lattice.g1(),
            e2: lattice.g2(),
        }
    }

    pub fn point(&self, s: f64, t: f64) -> Complex64 {
        self.origin + self.e1 * s + self.e2 * t
    }

    pub fn center(&self) -> Complex64 {
        self.point(0.5, 0.5)
    }

    /// Same shape scaled by `factor` about its centre.
    pub fn dilate(&self, factor: f64) -> Self {
        let c = self.center();
        Self {
            origin: c + (self.origin - c) * factor,
            e1: self.e1 * factor,
            e2: self.e2 * factor,
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            self.origin,
            self.origin + self.e1,
            self.origin + self.e1 + self.e2,
            self.origin + self.e2,
        ]
    }

    /// Coordinates of `z` against `(e1, e2)` relative to the origin.
    fn coords(&self, z: Complex64) -> (f64, f64) {
        let d = z - self.origin;
        let area = (self.e1.conj() * self.e2).im;
        ((d.conj() * self.e2).im / area, (self.e1.conj() * d).im / area)
    }
}

/// A zero with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zero {
    pub point: Complex64,
    pub multiplicity: u32,
}

/// All zeros of a section in `F_j`, counted with multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    pub level: usize,
    pub zeros: Vec<Zero>,
    pub total: usize,
    /// Points reported with multiplicity above one (unresolved clusters).
    pub flagged: usize,
}

/// Winding-number engine for one section, with memoized edge integrals.
struct Contour<'s, 'f> {
    section: &'s Section<'f>,
    memo: HashMap<[u64; 4], Complex64>,
}

fn edge_key(a: Complex64, b: Complex64) -> [u64; 4] {
    [a.re.to_bits(), a.im.to_bits(), b.re.to_bits(), b.im.to_bits()]
}

impl<'s, 'f> Contour<'s, 'f> {
    fn new(section: &'s Section<'f>) -> Self {
        Self {
            section,
            memo: HashMap::new(),
        }
    }

    fn log_deriv(&self, z: Complex64) -> Option<Complex64> {
        let (s, ds) = self.section.eval_with_deriv(z);
        let r = ds / s;
        if s.norm() == 0.0 || !r.is_finite() || r.norm() > GUARD {
            None
        } else {
            Some(r)
        }
    }

    fn gl_segment(&self, a: Complex64, b: Complex64) -> Option<Complex64> {
        let gl = gl8();
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            acc += self.log_deriv(mid + half * *x)? * *w;
        }
        Some(acc * half)
    }

    fn adaptive(&self, a: Complex64, b: Complex64, whole: Complex64, tol: f64, depth: usize) -> Option<Complex64> {
        let m = 0.5 * (a + b);
        let left = self.gl_segment(a, m)?;
        let right = self.gl_segment(m, b)?;
        if (left + right - whole).norm() <= tol {
            return Some(left + right);
        }
        if depth >= MAX_EDGE_DEPTH {
            return None;
        }
        Some(self.adaptive(a, m, left, 0.5 * tol, depth + 1)? + self.adaptive(m, b, right, 0.5 * tol, depth + 1)?)
    }

    /// `∫_a^b s'/s dz`, or `None` when a zero sits on or next to the edge.
    fn edge(&mut self, a: Complex64, b: Complex64) -> Option<Complex64> {
        if let Some(v) = self.memo.get(&edge_key(a, b)) {
            return Some(*v);
        }
        if let Some(v) = self.memo.get(&edge_key(b, a)) {
            return Some(-*v);
        }
        let whole = self.gl_segment(a, b)?;
        let v = self.adaptive(a, b, whole, EDGE_TOL, 0)?;
        self.memo.insert(edge_key(a, b), v);
        Some(v)
    }

    /// Winding number of the closed polygon through `corners`.
    fn winding(&mut self, corners: &[Complex64; 4]) -> Result<Option<u32>> {
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            match self.edge(corners[k], corners[(k + 1) % 4]) {
                Some(v) => total += v,
                None => return Ok(None),
            }
        }
        let w = total.im / (2.0 * PI);
        let r = w.round();
        if (w - r).abs() > SNAP_TOL || total.re.abs() > 2.0 * PI * SNAP_TOL || r < 0.0 {
            return Err(Error::NonIntegerWinding { value: w });
        }
        Ok(Some(r as u32))
    }
}

/// Number of zeros of `section` inside `cell`, counted with multiplicity.
///
/// A zero too close to the contour triggers up to five dilations by the
/// factor `1 + 1e-4` about the centre.
pub fn winding_count(section: &Section<'_>, cell: &Parallelogram) -> Result<u32> {
    let mut contour = Contour::new(section);
    let mut p = *cell;
    for _ in 0..=MAX_RETRIES {
        if let Some(w) = contour.winding(&p.corners())? {
            return Ok(w);
        }
        p = p.dilate(1.0 + 1e-4);
    }
    Err(Error::BoundaryZero { retries: MAX_RETRIES })
}

struct Locator<'s, 'f> {
    contour: Contour<'s, 'f>,
    min_size: f64,
    tol: f64,
    zeros: Vec<Zero>,
}

impl<'s, 'f> Locator<'s, 'f> {
    fn newton(&self, cell: &Parallelogram) -> Option<Complex64> {
        let size = cell.e1.norm().max(cell.e2.norm());
        let mut z = cell.center();
        let centre = z;
        for _ in 0..40 {
            let (s, ds) = self.contour.section.eval_with_deriv(z);
            if ds.norm() == 0.0 {
                return None;
            }
            let step = s / ds;
            z -= step;
            if (z - centre).norm() > 2.0 * size {
                return None;
            }
            if step.norm() <= 1e-13 * (size + z.norm()) {
                break;
            }
        }
        let (s, ds) = self.contour.section.eval_with_deriv(z);
        let (a, b) = cell.coords(z);
        let inside = (-1e-9..=1.0 + 1e-9).contains(&a) && (-1e-9..=1.0 + 1e-9).contains(&b);
        let well_conditioned = s.norm() <= 0.5 * ds.norm() * size;
        (inside && s.norm() <= self.tol && well_conditioned).then_some(z)
    }

    /// Splits `cell` into an `n × n` grid and recurses into cells with zeros.
    ///
    /// When a zero sits on an interior grid line, or the child windings do
    /// not add up to the parent's, the interior lines are shifted and the
    /// split retried.
    fn split(&mut self, cell: &Parallelogram, winding: u32, n: usize) -> Result<()> {
        'shift: for &delta in &SPLIT_SHIFTS {
            let cuts: Vec<f64> = (0..=n)
                .map(|k| if k == 0 || k == n { k as f64 / n as f64 } else { (k as f64 + delta) / n as f64 })
                .collect();
            let grid: Vec<Vec<Complex64>> = cuts.iter().map(|&a| cuts.iter().map(|&b| cell.point(a, b)).collect()).collect();
            let mut kids = Vec::with_capacity(n * n);
            for b in 0..n {
                for a in 0..n {
                    let corners = [grid[a][b], grid[a + 1][b], grid[a + 1][b + 1], grid[a][b + 1]];
                    match self.contour.winding(&corners) {
                        Ok(Some(w)) => kids.push((corners, w)),
                        Ok(None) | Err(Error::NonIntegerWinding { .. }) => continue 'shift,
                        Err(e) => return Err(e),
                    }
                }
            }
            if kids.iter().map(|k| k.1).sum::<u32>() != winding {
                continue;
            }
            for (c, w) in kids {
                if w > 0 {
                    let kid = Parallelogram { origin: c[0], e1: c[1] - c[0], e2: c[3] - c[0] };
                    self.refine(&kid, w)?;
                }
            }
            return Ok(());
        }
        Err(Error::BoundaryZero { retries: SPLIT_SHIFTS.len() })
    }

    fn refine(&mut self, cell: &Parallelogram, winding: u32) -> Result<()> {
        let size = cell.e1.norm().max(cell.e2.norm());
        if winding == 1 {
            if let Some(z) = self.newton(cell) {
                self.zeros.push(Zero { point: z, multiplicity: 1 });
                return Ok(());
            }
        }
        if size <= self.min_size {
            let z = self.newton(cell).unwrap_or_else(|| cell.center());
            self.zeros.push(Zero { point: z, multiplicity: winding });
            return Ok(());
        }
        self.split(cell, winding, 2)
    }
}

/// All zeros of `section` in the fundamental domain `F_j` of its level.
///
/// Cells are refined until they hold one zero or shrink to `1e-6·τ_j`.
/// When a zero lies on the boundary of `F_j` the domain is shifted by a
/// deterministic fraction of a period and results are reduced back into
/// `F_j`. The total must equal `dim H⁰ = N·d0·I_j`.
pub fn locate_zeros(section: &Section<'_>, tol: f64) -> Result<ZeroSet> {
    let kernel = section.frame().kernel();
    let lattice = *kernel.lattice();
    let expected = kernel.dimension();
    let mut loc = Locator {
        contour: Contour::new(section),
        min_size: 1e-6 * kernel.tau(),
        tol,
        zeros: Vec::new(),
    };
    let base = Parallelogram::cell(&lattice);
    let mut attempt = 0;
    let top = loop {
        let shift = 0.0173 * attempt as f64;
        let cell = Parallelogram {
            origin: lattice.from_coords(shift, 0.61 * shift),
            ..base
        };
        if let Some(w) = loc.contour.winding(&cell.corners())? {
            break (cell, w);
        }
        attempt += 1;
        if attempt > MAX_RETRIES {
            return Err(Error::BoundaryZero { retries: MAX_RETRIES });
        }
    };
    let (cell, w) = top;
    if w as usize != expected {
        return Err(Error::ZeroCountMismatch { found: w as usize, expected });
    }
    // start from a grid with about two zeros per cell
    let n0 = ((expected as f64 / 2.0).sqrt().ceil() as usize).max(1);
    if n0 == 1 {
        loc.refine(&cell, w)?;
    } else {
        loc.split(&cell, w, n0)?;
    }
    let total: usize = loc.zeros.iter().map(|z| z.multiplicity as usize).sum();
    if total != expected {
        return Err(Error::ZeroCountMismatch { found: total, expected });
    }
    let mut zeros = loc.zeros;
    for z in &mut zeros {
        z.point = lattice.reduce(z.point);
    }
    zeros.sort_by(|a, b| a.point.re.total_cmp(&b.point.re).then(a.point.im.total_cmp(&b.point.im)));
    let flagged = zeros.iter().filter(|z| z.multiplicity > 1).count();
    Ok(ZeroSet {
        level: kernel.level(),
        zeros,
        total,
        flagged,
    })
}

/// Zeros reduced modulo the base lattice into `F_0`, multiplicities kept.
pub fn pushforward_zeros(zs: &ZeroSet, base: &Lattice) -> Vec<Zero> {
    zs.zeros
        .iter()
        .map(|z| Zero {
            point: base.reduce(z.point),
            multiplicity: z.multiplicity,
        })
        .collect()
}

/// Appends CSV rows `seed,level,re,im,multiplicity`.
pub fn write_zeros_csv<W: Write>(out: &mut W, seed: u64, zs: &ZeroSet, header: bool) -> Result<()> {
    if header {
        writeln!(out, "seed,level,re,im,multiplicity")?;
    }
    for z in &zs.zeros {
        writeln!(out, "{seed},{},{:.17e},{:.17e},{}", zs.level, z.point.re, z.point.im, z.multiplicity)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::BundleParams;
    use crate::lattice::make_product_tower;
    use crate::quotient::TruncationPolicy;
    use crate::rng::stream;
    use crate::sections::CoherentFrame;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn frame(j: usize) -> CoherentFrame {
        let t = make_product_tower(PI.sqrt(), 2, 3).unwrap();
        CoherentFrame::build(&t, BundleParams::new(2, 1).unwrap(), j, TruncationPolicy::default()).unwrap()
    }

    #[test]
    fn full_domain_winding_is_degree() {
        for (j, d) in [(0, 2), (1, 8)] {
            let f = frame(j);
            for seed in 0..5 {
                let s = f.sample_sphere(&mut stream(seed, 1, 0));
                let cell = Parallelogram::cell(f.kernel().lattice());
                assert_eq!(winding_count(&s, &cell).unwrap(), d);
            }
        }
    }

    #[test]
    fn zeros_are_roots_and_complete() {
        let f = frame(1);
        let s = f.sample_sphere(&mut stream(11, 1, 0));
        let zs = locate_zeros(&s, 1e-10).unwrap();
        assert_eq!(zs.total, 8);
        assert_eq!(zs.zeros.len(), 8);
        for z in &zs.zeros {
            assert!(s.wmag(z.point) <= 1e-10);
            assert!(f.kernel().lattice().contains(z.point - f.kernel().lattice().reduce(z.point), 1e-12));
        }
    }

    #[test]
    fn split_windings_add_up() {
        let f = frame(0);
        let s = f.sample_sphere(&mut stream(2, 1, 0));
        let l = f.kernel().lattice();
        let whole = Parallelogram::cell(l);
        let left = Parallelogram { e1: whole.e1 * 0.37, ..whole };
        let right = Parallelogram { origin: whole.point(0.37, 0.0), e1: whole.e1 * 0.63, ..whole };
        let a = winding_count(&s, &left).unwrap();
        let b = winding_count(&s, &right).unwrap();
        assert_eq!(a + b, winding_count(&s, &whole).unwrap());
    }

    #[test]
    fn empty_rectangle_has_no_zeros() {
        let f = frame(0);
        let s = f.sample_sphere(&mut stream(4, 1, 0));
        let zs = locate_zeros(&s, 1e-10).unwrap();
        // a small box far from both zeros (modulo the lattice)
        let l = f.kernel().lattice();
        let mut best = (0.0, c(0.0, 0.0));
        for a in 0..20 {
            for b in 0..20 {
                let p = l.from_coords(a as f64 / 20.0, b as f64 / 20.0);
                let d = zs
                    .zeros
                    .iter()
                    .flat_map(|z| l.points_in_disk(p - z.point, 3.0).into_iter().map(move |g| (p - z.point - g).norm()))
                    .fold(f64::INFINITY, f64::min);
                if d > best.0 {
                    best = (d, p);
                }
            }
        }
        let h = 0.3 * best.0;
        let r = Parallelogram::rect(best.1 - c(h, h), best.1 + c(h, h)).unwrap();
        assert_eq!(winding_count(&s, &r).unwrap(), 0);
    }

    #[test]
    fn pushforward_reduces_into_base_cell() {
        let t = make_product_tower(PI.sqrt(), 2, 2).unwrap();
        let zs = ZeroSet {
            level: 1,
            zeros: vec![Zero { point: c(0.3, 0.2) + t.base().point(1, 1), multiplicity: 1 }, Zero { point: c(2.0, 0.1), multiplicity: 2 }],
            total: 3,
            flagged: 1,
        };
        let p = pushforward_zeros(&zs, t.base());
        assert!((p[0].point - c(0.3, 0.2)).norm() < 1e-14);
        assert_eq!(p.iter().map(|z| z.multiplicity).sum::<u32>(), 3);
        for z in &p {
            let (s, t2) = t.base().coords(z.point);
            assert!((0.0..1.0).contains(&s) && (0.0..1.0).contains(&t2));
        }
    }

    #[test]
    fn csv_dump_rows() {
        let zs = ZeroSet { level: 0, zeros: vec![Zero { point: c(0.5, 0.25), multiplicity: 1 }], total: 1, flagged: 0 };
        let mut buf = Vec::new();
        write_zeros_csv(&mut buf, 9, &zs, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "seed,level,re,im,multiplicity");
        assert!(lines.next().unwrap().starts_with("9,0,5.0"));
    }
}
