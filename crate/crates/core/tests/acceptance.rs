//! Desk-scale acceptance run: one PASS/FAIL line per criterion.
//!
//! Zero sets sampled for the equidistribution criterion are reused by the
//! variance criterion, so the criteria run in order.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use covertower::currents::{
    empirical_stats_from, expected_pairing_theory, gtilde, gtilde_integral, pair_current, sample_zero_sets, variance_bound, PairingStats,
    TestForm,
};
use covertower::experiments::runners::{asconv_errors, random_points, stability_scan, tau_gate, variance_fit, variance_levels};
use covertower::experiments::ExperimentConfig;
use covertower::fock::fock_kernel;
use covertower::zeros::ZeroSet;
use covertower::{BundleParams, CoherentFrame, LevelKernel, Tower};
use num_complex::Complex64;
use rand::Rng;

const SAMPLES: usize = 2000;
const DEGREE_SAMPLES: usize = 100;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

struct Ctx {
    cfg: ExperimentConfig,
    tower: Tower,
    p: BundleParams,
    forms: Vec<TestForm>,
    /// `(frame, zero sets)` at levels 0, 1, 2 once sampled.
    sampled: Vec<(CoherentFrame, Vec<Option<ZeroSet>>)>,
}

impl Ctx {
    fn new() -> Self {
        let cfg = ExperimentConfig::default();
        let tower = cfg.tower().unwrap();
        let p = cfg.params(&tower).unwrap();
        let forms = cfg.forms(&tower).unwrap();
        Self {
            cfg,
            tower,
            p,
            forms,
            sampled: Vec::new(),
        }
    }

    fn kernel(&self, j: usize) -> LevelKernel {
        LevelKernel::new(&self.tower, self.p, j, self.cfg.truncation).unwrap()
    }

    fn seed(&self) -> u64 {
        self.cfg.sampling.master_seed
    }
}

fn trace(ctx: &mut Ctx) -> Outcome {
    let mut worst = 0.0f64;
    for j in 0..3 {
        let k = ctx.kernel(j);
        let dim = k.dimension() as f64;
        let t = k.trace(32).unwrap();
        worst = worst.max((t - dim).abs() / dim);
    }
    outcome(worst <= 1e-8, format!("max relative error {worst:.2e}"))
}

fn idempotence(ctx: &mut Ctx) -> Outcome {
    let mut worst = 0.0f64;
    for j in 0..3 {
        let k = ctx.kernel(j);
        let pts = random_points(&ctx.tower, ctx.seed(), 100 + j as u64, 40);
        for pair in pts.chunks(2) {
            worst = worst.max(k.idempotence_residual(pair[0], pair[1], 64).unwrap());
        }
    }
    outcome(worst <= 1e-8, format!("max residual {worst:.2e} over 60 pairs"))
}

fn stability(ctx: &mut Ctx) -> Outcome {
    let scans: Vec<_> = [2, 4, 8].iter().map(|&n| stability_scan(&ctx.cfg, &ctx.tower, n).unwrap()).collect();
    let decreasing = scans.iter().all(|s| s.ln_gaps.windows(2).all(|w| w[1] < w[0]));
    let s2 = &scans[0];
    let sig: Vec<f64> = scans.iter().map(|s| s.sigma()).collect();
    let monotone = sig.windows(2).all(|w| w[1] > w[0]);
    let ok = decreasing && s2.sigma() >= 1.0 && s2.fit.r2 >= 0.95 && monotone;
    outcome(
        ok,
        format!(
            "decreasing {decreasing}, sigma(2,4,8) = {:.2}/{:.2}/{:.2}, r2(N=2) = {:.4}",
            sig[0], sig[1], sig[2], s2.fit.r2
        ),
    )
}

fn degree(ctx: &mut Ctx) -> Outcome {
    let mut bad = 0;
    let mut counts = Vec::new();
    for j in 0..3 {
        let frame = CoherentFrame::build(&ctx.tower, ctx.p, j, ctx.cfg.truncation).unwrap();
        let expected = frame.kernel().dimension();
        let zs = sample_zero_sets(&frame, DEGREE_SAMPLES, ctx.seed());
        bad += zs.iter().filter(|z| z.as_ref().map_or(true, |z| z.total != expected)).count();
        counts.push(expected);
    }
    outcome(bad == 0, format!("{bad} of {} sections off degree {counts:?}", 3 * DEGREE_SAMPLES))
}

fn stats(ctx: &Ctx, j: usize) -> Vec<PairingStats> {
    let (frame, zs) = &ctx.sampled[j];
    empirical_stats_from(zs, frame.kernel(), &ctx.forms, ctx.seed()).unwrap()
}

fn equidistribution(ctx: &mut Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut exact = true;
    let nd0 = ctx.p.nf() * ctx.p.d0() as f64;
    for j in 0..3 {
        let frame = CoherentFrame::build(&ctx.tower, ctx.p, j, ctx.cfg.truncation).unwrap();
        let zs = sample_zero_sets(&frame, SAMPLES, ctx.seed());
        ctx.sampled.push((frame, zs));
        let st = stats(ctx, j);
        let (frame, zs) = &ctx.sampled[j];
        let k = frame.kernel();
        for (psi, s) in ctx.forms.iter().zip(&st) {
            if psi.id == "one" {
                exact &= zs.iter().flatten().all(|z| pair_current(z, k.base(), k.index(), psi) == nd0) && s.var == 0.0;
                continue;
            }
            let theory = expected_pairing_theory(k, psi, 32).unwrap();
            worst = worst.max((s.mean - theory).abs() / s.stderr);
        }
    }
    outcome(
        worst <= 3.0 && exact,
        format!("max |mean − theory|/stderr = {worst:.2}, constant form exact: {exact}"),
    )
}

fn variance(ctx: &mut Ctx) -> Outcome {
    let levels = variance_levels(&ctx.cfg, &ctx.tower, ctx.p, &ctx.forms).unwrap();
    let taus = ctx.tower.taus();
    let mut notes = Vec::new();
    let mut ok = true;
    let mut worst_agree: f64 = 0.0;
    for j in 0..2 {
        let st = stats(ctx, j);
        for (f, s) in st.iter().enumerate() {
            let err = (s.var_stderr.powi(2) + levels[j].quad_err[f].powi(2)).sqrt();
            let dev = (s.var - levels[j].theory[f]).abs();
            if err > 0.0 {
                worst_agree = worst_agree.max(dev / err);
            }
            ok &= dev <= 3.0 * err;
        }
    }
    notes.push(format!("max |emp − theory|/err = {worst_agree:.2}"));
    for (f, psi) in ctx.forms.iter().enumerate() {
        if psi.is_harmonic() {
            continue;
        }
        let v: Vec<f64> = levels.iter().map(|l| l.theory[f]).collect();
        ok &= v.windows(2).all(|w| w[1] < w[0]);
        let c_hat = -variance_fit(&levels, &taus, f).unwrap().unwrap().slope;
        if !(c_hat > 0.0) {
            ok = false;
            notes.push(format!("{}: c_hat {c_hat}", psi.id));
            continue;
        }
        let raw: Vec<f64> = (0..v.len()).map(|j| variance_bound(&taus, j, psi, ctx.tower.base(), c_hat).unwrap()).collect();
        let c = v[0] / raw[0];
        ok &= (0..v.len()).all(|j| v[j] <= c * raw[j] * (1.0 + 4.0 * f64::EPSILON));
        notes.push(format!("{}: c_hat {c_hat:.2}", psi.id));
    }
    outcome(ok, notes.join(", "))
}

fn gtilde_certificate(_: &mut Ctx) -> Outcome {
    let (mut diff, mut bound) = (0.0f64, true);
    for k in 0..=1000 {
        let t = k as f64 / 1000.0;
        let s = gtilde(t).unwrap();
        diff = diff.max((s - gtilde_integral(t).unwrap()).abs());
        let b = t * t / 24.0;
        bound &= s <= b + 4.0 * f64::EPSILON * b;
    }
    let at_one = (gtilde(1.0).unwrap() - 1.0 / 24.0).abs();
    outcome(
        diff <= 1e-10 && bound && at_one <= 1e-10,
        format!("series/integral {diff:.1e}, bound {bound}, |G(1) − 1/24| {at_one:.1e}"),
    )
}

fn agmon(ctx: &mut Ctx) -> Outcome {
    let mut rng = covertower::rng::stream(ctx.seed(), covertower::rng::ids::POINTS, 800);
    let mut worst = 0.0f64;
    for n in [1u32, 2, 4, 16] {
        let p = BundleParams::new(n, 2).unwrap();
        let nf = n as f64;
        for _ in 0..100 {
            let d: f64 = rng.gen_range(1.0..=5.0);
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let w = z + Complex64::from_polar(d, rng.gen_range(0.0..2.0 * PI));
            let wmag = fock_kernel(&p, z, w).wmag;
            worst = worst.max(wmag / ((-0.5 * nf.sqrt() * d).exp() * nf / PI));
        }
    }
    outcome(worst <= 1.0, format!("max wmag / bound = {worst:.3e}"))
}

fn fd_density(k: &LevelKernel, z: Complex64) -> f64 {
    let lap = |h: f64| {
        let l = |u: Complex64| k.diag(u).ln();
        let e = [Complex64::new(h, 0.0), Complex64::new(0.0, h)];
        (l(z + e[0]) + l(z - e[0]) + l(z + e[1]) + l(z - e[1]) - 4.0 * l(z)) / (h * h)
    };
    k.params().nf() + (4.0 * lap(5e-4) - lap(1e-3)) / 12.0
}

fn invariance(ctx: &mut Ctx) -> Outcome {
    let base = *ctx.tower.base();
    let (mut deck, mut p_ok, mut locus, mut fd) = (0.0f64, true, f64::INFINITY, 0.0f64);
    for j in 0..ctx.tower.depth() {
        let k = ctx.kernel(j);
        let pts = random_points(&ctx.tower, ctx.seed(), 900 + j as u64, 40);
        for pair in pts.chunks(2) {
            let (z, w) = (pair[0], pair[1]);
            let v = k.kernel(z, w).value.wmag;
            for g in [base.g1(), base.g2(), base.point(2, -1), base.point(-3, 5)] {
                deck = deck.max((k.kernel(z + g, w + g).value.wmag - v).abs() / v);
            }
            let pzw = k.normalized(z, w).unwrap();
            let pzz = k.normalized(z, z).unwrap();
            p_ok &= (0.0..=1.0).contains(&pzw) && (pzz - 1.0).abs() <= 1e-12;
            fd = fd.max((k.metric_density(z).unwrap().value - fd_density(&k, z)).abs());
        }
        locus = locus.min(k.base_locus_min(32).unwrap().0);
    }
    outcome(
        deck <= 1e-9 && p_ok && locus > 0.0 && fd <= 1e-5,
        format!("deck {deck:.1e}, P in [0,1] {p_ok}, base locus min {locus:.3}, density vs FD {fd:.1e}"),
    )
}

fn asconv(ctx: &mut Ctx) -> Outcome {
    let errs = asconv_errors(&ctx.cfg, &ctx.tower, ctx.p, &ctx.forms).unwrap();
    let last = errs.len() - 1;
    let trend = (0..ctx.forms.len()).all(|f| errs[last][f].1 <= errs[0][f].1);
    let taus = ctx.tower.taus();
    let (partial, ratios) = tau_gate(&taus);
    let q = (-taus[0]).exp();
    let gate = q < 1.0 && ratios.iter().all(|r| *r <= q);
    outcome(
        trend && gate,
        format!("trend {trend}, partial sums {:.6?}, ratio bound {q:.4}", partial),
    )
}

type Criterion = (&'static str, fn(&mut Ctx) -> Outcome, Option<Duration>);

fn main() -> ExitCode {
    let mins = |m: u64| Some(Duration::from_secs(60 * m));
    let criteria: [Criterion; 10] = [
        ("dimension/trace oracle", trace, Some(Duration::from_secs(10))),
        ("reproducing/idempotence", idempotence, mins(1)),
        ("Bergman stability", stability, mins(2)),
        ("exact degree", degree, mins(5)),
        ("equidistribution", equidistribution, mins(15)),
        ("variance", variance, mins(30)),
        ("G-tilde certificate", gtilde_certificate, None),
        ("Agmon decay", agmon, None),
        ("invariance suite", invariance, None),
        ("a.s.-convergence trend", asconv, None),
    ];
    let mut ctx = Ctx::new();
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f(&mut ctx);
        let dt = t.elapsed();
        let in_time = budget.map_or(true, |b| dt <= b);
        let pass = o.passed && in_time;
        failed += usize::from(!pass);
        let late = if in_time { String::new() } else { format!(" over budget {:?}", budget.unwrap()) };
        println!(
            "criterion {:>2} {}: {} ({:.1}s{late}) {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
