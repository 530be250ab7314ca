//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use deltaspec::linalg::{self, CMatrix, RMatrix};
use deltaspec::model::{assemble_gamma, gamma_derivative, sinc, PointConfig, Vec3};
use deltaspec::quadrature::sphere_rule;
use deltaspec::resolvent::{self, Resolvent, TestFunction};
use deltaspec::resonance::{self, CertifyOptions, SearchBox};
use deltaspec::spectral::{self, ZeroLabel};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FOUR_PI: f64 = 4.0 * PI;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn config(alpha: Vec<f64>, points: Vec<Vec3>) -> Result<PointConfig, String> {
    ok(PointConfig::new(alpha, points))
}

fn random_in_ball(rng: &mut impl Rng, radius: f64) -> Vec3 {
    loop {
        let p: Vec3 = [
            rng.gen_range(-radius..radius),
            rng.gen_range(-radius..radius),
            rng.gen_range(-radius..radius),
        ];
        if p.iter().map(|x| x * x).sum::<f64>() <= radius * radius {
            return p;
        }
    }
}

fn random_config(rng: &mut impl Rng, n: usize, radius: f64, d_min: f64, alpha_max: f64) -> PointConfig {
    loop {
        let alpha = (0..n).map(|_| rng.gen_range(-alpha_max..=alpha_max)).collect();
        let points = (0..n).map(|_| random_in_ball(rng, radius)).collect();
        if let Ok(cfg) = PointConfig::new(alpha, points) {
            if cfg.d_min().is_none_or(|d| d >= d_min) {
                return cfg;
            }
        }
    }
}

/// Root of an increasing function on `[lo, hi]` by plain bisection.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn n1_spectrum() -> Check {
    let cfg = config(vec![-1.0], vec![[0.0; 3]])?;
    let report = ok(spectral::negative_eigenvalues(&cfg, spectral::DEFAULT_TOL))?;
    ensure!(report.eigenvalues.len() == 1, "expected one eigenvalue, got {:?}", report);
    let e = &report.eigenvalues[0];
    ensure!(e.multiplicity == 1, "multiplicity {}", e.multiplicity);
    ensure!((e.lambda - FOUR_PI).abs() < 1e-9, "lambda {} vs 4π", e.lambda);
    ensure!(
        (e.energy + 16.0 * PI * PI).abs() < 1e-9,
        "energy {} vs -16π²",
        e.energy
    );
    for alpha in [0.0, 0.5, 3.0] {
        let cfg = config(vec![alpha], vec![[0.0; 3]])?;
        let r = ok(spectral::negative_eigenvalues(&cfg, spectral::DEFAULT_TOL))?;
        ensure!(r.eigenvalues.is_empty(), "alpha = {alpha}: expected empty spectrum");
    }
    Ok(format!("λ error {:.1e}; α ∈ {{0, 0.5, 3}} empty", (e.lambda - FOUR_PI).abs()))
}

fn n2_oracle() -> Check {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for d in [0.5, 1.0, 2.0] {
        for a in [-2.0, -1.0, -1.0 / (FOUR_PI * d) - 0.1] {
            let cfg = config(vec![a, a], vec![[0.0; 3], [d, 0.0, 0.0]])?;
            let hi = FOUR_PI * (a.abs() + 1.0 / (FOUR_PI * d)) + 1.0;
            let mut oracle = Vec::new();
            for sign in [1.0, -1.0] {
                let f = |l: f64| a + l / FOUR_PI - sign * (-l * d).exp() / (FOUR_PI * d);
                if f(0.0) < 0.0 {
                    oracle.push(bisect(f, 0.0, hi));
                }
            }
            oracle.sort_by(|x, y| y.total_cmp(x));
            let got = ok(spectral::negative_eigenvalues(&cfg, spectral::DEFAULT_TOL))?;
            let lambdas: Vec<f64> = got
                .eigenvalues
                .iter()
                .flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity))
                .collect();
            ensure!(
                lambdas.len() == oracle.len(),
                "d = {d}, a = {a}: {lambdas:?} vs oracle {oracle:?}"
            );
            for (x, y) in lambdas.iter().zip(&oracle) {
                worst = worst.max((x - y).abs());
                ensure!((x - y).abs() < 1e-9, "d = {d}, a = {a}: {x} vs oracle {y}");
            }
            count += oracle.len();
        }
    }
    Ok(format!("{count} eigenvalues over 9 configs, max error {worst:.1e}"))
}

fn certificate_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_231_101);
    let mut points = 0usize;
    let mut min_sigma = f64::INFINITY;
    for trial in 0..100 {
        let n = rng.gen_range(1..=8);
        let cfg = random_config(&mut rng, n, 5.0, 0.1, 5.0);
        let cert = ok(resonance::certify_real_axis(&cfg, &CertifyOptions::default()))?;
        points += cert.z_grid.len();
        min_sigma = min_sigma.min(cert.min_sigma);
        ensure!(
            cert.verdict,
            "config {trial} (N = {n}): {} failing grid points, first at z = {:?}, min σ {:.3e}",
            cert.failures.len(),
            cert.failures.first(),
            cert.min_sigma
        );
        ensure!(cert.threshold == 1e-10, "threshold {}", cert.threshold);
    }
    Ok(format!("100 configs, {points} grid points, smallest σ_min {min_sigma:.3e}"))
}

fn nonsingular_a_minus_ib() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_ratio = f64::INFINITY;
    for trial in 0..1000 {
        let n = rng.gen_range(1..=10);
        let a = {
            let r = RMatrix::from_fn(n, n, |_, _| rng.gen_range(-3.0..3.0));
            RMatrix::from_fn(n, n, |i, j| 0.5 * (r[(i, j)] + r[(j, i)]))
        };
        let c = RMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let shift = 10f64.powf(rng.gen_range(-6.0..0.0));
        let b = RMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| c[(k, i)] * c[(k, j)]).sum::<f64>() + if i == j { shift } else { 0.0 }
        });
        let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(a[(i, j)], -b[(i, j)]));
        let sigma = ok(linalg::min_singular_value(&m))?;
        ensure!(sigma > 0.0, "trial {trial}: σ_min = {sigma}");
        // |v*(A - iB)v| ≥ v*Bv, so σ_min ≥ λ_min(B)
        let lmin = ok(linalg::sym_eigenvalues(&b))?[0];
        ensure!(
            sigma >= lmin * (1.0 - 1e-8),
            "trial {trial}: σ_min {sigma} below λ_min(B) {lmin}"
        );
        worst_ratio = worst_ratio.min(sigma / lmin);
    }
    Ok(format!("1000 pairs, min σ_min/λ_min(B) = {worst_ratio:.3}"))
}

fn zero_classification() -> Check {
    let tol = spectral::DEFAULT_TOL;
    let c = ok(spectral::classify_zero(&config(vec![0.0], vec![[0.0; 3]])?, tol))?;
    ensure!(c.label == ZeroLabel::ZeroResonance, "N=1 α=0: {:?}", c.label);
    let c = ok(spectral::classify_zero(&config(vec![1.0], vec![[0.0; 3]])?, tol))?;
    ensure!(c.label == ZeroLabel::Regular, "N=1 α=1: {:?}", c.label);
    let d = 1.0;
    let a = -1.0 / (FOUR_PI * d);
    let c = ok(spectral::classify_zero(
        &config(vec![a, a], vec![[0.0; 3], [d, 0.0, 0.0]])?,
        tol,
    ))?;
    ensure!(c.label == ZeroLabel::ZeroEigenvalue, "N=2: {:?}", c.label);
    ensure!(c.eigenvalue_multiplicity == 1, "multiplicity {}", c.eigenvalue_multiplicity);
    let v = &c.eigen_coefficients[0];
    let s = if v[0] > 0.0 { 1.0 } else { -1.0 };
    let err = (s * v[0] - 0.5f64.sqrt()).abs().max((s * v[1] + 0.5f64.sqrt()).abs());
    ensure!(err < 1e-8, "kernel vector {v:?}");
    Ok(format!("three labels correct, kernel error {err:.1e}"))
}

fn laurent() -> Check {
    let r = spectral::LAURENT_DEFAULT_RADIUS;
    let n = spectral::LAURENT_DEFAULT_NODES;
    let l = ok(spectral::laurent_at_zero(&config(vec![0.0], vec![[0.0; 3]])?, r, n))?;
    let e1 = (l.a_minus1[(0, 0)] - Complex64::new(0.0, FOUR_PI)).norm();
    ensure!(e1 < 1e-8, "A₋₁ = {} (error {e1:.2e})", l.a_minus1[(0, 0)]);
    ensure!(l.a_minus2.norm_fro() < 1e-8, "‖A₋₂‖ = {:.2e}", l.a_minus2.norm_fro());
    for cfg in [
        config(vec![1.0], vec![[0.0; 3]])?,
        config(vec![0.5, -0.2], vec![[0.0; 3], [1.0, 0.5, 0.0]])?,
        config(vec![2.0, 1.0, 3.0], vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])?,
    ] {
        let l = ok(spectral::laurent_at_zero(&cfg, r, n))?;
        ensure!(
            l.a_minus1.norm_fro() < 1e-8 && l.a_minus2.norm_fro() < 1e-8,
            "regular config {:?}: ‖A₋₁‖ {:.2e}, ‖A₋₂‖ {:.2e}",
            cfg.alpha(),
            l.a_minus1.norm_fro(),
            l.a_minus2.norm_fro()
        );
    }
    let a = -1.0 / FOUR_PI;
    let l = ok(spectral::laurent_at_zero(
        &config(vec![a, a], vec![[0.0; 3], [1.0, 0.0, 0.0]])?,
        r,
        n,
    ))?;
    ensure!(l.a_minus2.norm_fro() > 1e-3, "zero-eigenvalue ‖A₋₂‖ = {:.2e}", l.a_minus2.norm_fro());
    Ok(format!("A₋₁ error {e1:.1e}; zero-eigenvalue ‖A₋₂‖ = {:.3}", l.a_minus2.norm_fro()))
}

fn resonance_finder() -> Check {
    let cfg = config(vec![1.0], vec![[0.0; 3]])?;
    let b = ok(SearchBox::new(-1.0, 1.0, -20.0, -1.0))?;
    let set = ok(resonance::find_resonances(&cfg, &b, resonance::DEFAULT_TOL))?;
    ensure!(set.total_count == 1, "N=1 box count {}", set.total_count);
    ensure!(set.roots.len() == 1, "roots {:?}", set.roots);
    let err = (set.roots[0].z - Complex64::new(0.0, -FOUR_PI)).norm();
    ensure!(err < 1e-8, "root {} (error {err:.2e})", set.roots[0].z);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let search = ok(SearchBox::new(-8.0, 8.0, -3.0, -0.05))?;
    let thin = ok(SearchBox::new(0.01, 20.0, -1e-3, 1e-3))?;
    let mut total_roots = 0;
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let cfg = random_config(&mut rng, n, 1.5, 0.3, 2.0);
        let set = ok(resonance::find_resonances(&cfg, &search, resonance::DEFAULT_TOL))?;
        let all: Vec<_> = set.roots.iter().chain(&set.excluded).collect();
        let mult: usize = all.iter().map(|r| r.multiplicity).sum();
        ensure!(mult == set.total_count, "config {trial}: multiplicities {mult} vs count {}", set.total_count);
        for r in &all {
            let mirror = -r.z.conj();
            let best = all
                .iter()
                .map(|s| (s.z - mirror).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
            ensure!(best < 1e-8, "config {trial}: root {} has no mirror (gap {best:.2e})", r.z);
        }
        total_roots += all.len();
        let c = ok(resonance::count_zeros_in_box(&cfg, &thin))?;
        ensure!(c == 0, "config {trial}: thin real-axis box count {c}");
    }
    Ok(format!(
        "−4πi error {err:.1e}; {total_roots} roots in 20 configs, max mirror gap {worst:.1e}; thin boxes empty"
    ))
}

fn resolvent_validation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ratios = Vec::new();
    let mut worst_sym: f64 = 0.0;
    let mut worst_decay = f64::INFINITY;
    for trial in 0..5 {
        let n = 1 + trial % 4;
        let cfg = random_config(&mut rng, n, 1.5, 0.3, 1.0);
        let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.1..1.5));
        let res = ok(Resolvent::new(&cfg, z))?;
        let mut points = 0;
        while points < 10 {
            let x = random_in_ball(&mut rng, 2.5);
            let xp = random_in_ball(&mut rng, 2.5);
            let clear = cfg.nearest_center(&x).1.min(cfg.nearest_center(&xp).1);
            if clear < 0.1 || deltaspec::model::distance(&x, &xp) < 0.1 {
                continue;
            }
            points += 1;
            let h = resolvent::default_step(&cfg, &x, &xp);
            let r1 = ok(resolvent::helmholtz_residual_at_energy(&res, z * z, &x, &xp, h))?;
            let r2 = ok(resolvent::helmholtz_residual_at_energy(&res, z * z, &x, &xp, h / 2.0))?;
            let ratio = r1 / r2;
            ensure!((3.5..=4.5).contains(&ratio), "config {trial}: Helmholtz ratio {ratio}");
            ratios.push(ratio);
            let a = ok(res.kernel(&x, &xp))?;
            let b = ok(res.kernel(&xp, &x))?;
            let sym = (a - b).norm() / a.norm().max(1.0);
            worst_sym = worst_sym.max(sym);
            ensure!(sym <= 1e-12, "config {trial}: symmetry defect {sym:.2e}");
        }
        let f = ok(TestFunction::gaussian([0.2, -0.1, 0.1], 1.2, 1.0))?;
        let scale = cfg.d_min().unwrap_or(1.0);
        for j in 0..n {
            let mut prev = None;
            for r in [1e-2, 1e-3, 1e-4, 1e-5] {
                let v = ok(resolvent::boundary_condition_residual(&cfg, z, &f, j, r * scale))?;
                if let Some(p) = prev {
                    let decay = p / v;
                    worst_decay = worst_decay.min(decay);
                    ensure!(decay >= 5.0, "config {trial}, center {j}: decay {decay:.2} per decade");
                }
                prev = Some(v);
            }
        }
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
    Ok(format!(
        "{} points, ratios in [{lo:.3}, {hi:.3}]; symmetry {worst_sym:.1e}; BC decay ≥ {worst_decay:.1}× per decade",
        ratios.len()
    ))
}

fn identity_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut scale_err: f64 = 0.0;
    let mut conj_err: f64 = 0.0;
    let mut fd_ratios = Vec::new();
    for trial in 0..50 {
        let n = 1 + trial % 6;
        let cfg = random_config(&mut rng, n, 2.0, 0.2, 2.0);
        let lambda = rng.gen_range(0.2..5.0);
        let z = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-1.0..1.0));

        let scaled = config(
            cfg.alpha().iter().map(|a| a / lambda).collect(),
            cfg.points().iter().map(|p| p.map(|c| c * lambda)).collect(),
        )?;
        let lhs = assemble_gamma(&cfg, z * lambda).entries;
        let rhs = assemble_gamma(&scaled, z).entries;
        for (x, y) in lhs.as_slice().iter().zip(rhs.as_slice()) {
            let e = (x - lambda * y).norm() / x.norm();
            scale_err = scale_err.max(e);
        }

        let t = z.re;
        let a = assemble_gamma(&cfg, Complex64::new(-t, 0.0)).entries;
        let b = assemble_gamma(&cfg, Complex64::new(t, 0.0)).entries.conj();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            conj_err = conj_err.max((x - y).norm() / x.norm().max(f64::MIN_POSITIVE));
        }

        let exact = gamma_derivative(&cfg, z);
        let fd_err = |h: f64| {
            let d = (assemble_gamma(&cfg, z + h).entries.as_slice().iter())
                .zip(assemble_gamma(&cfg, z - h).entries.as_slice())
                .zip(exact.as_slice())
                .map(|((p, m), e)| ((p - m) / (2.0 * h) - e).norm())
                .fold(0.0, f64::max);
            d
        };
        if n > 1 {
            fd_ratios.push(fd_err(1e-2) / fd_err(5e-3));
        }
    }
    ensure!(scale_err <= 1e-12, "scaling error {scale_err:.2e}");
    ensure!(conj_err <= 2.0 * f64::EPSILON, "conjugation error {conj_err:.2e}");
    for r in &fd_ratios {
        ensure!((3.5..=4.5).contains(r), "derivative finite-difference ratio {r}");
    }

    // sphere average of exp(i x·p) is sinc|x|
    let rule = sphere_rule(100, 100, Some(0x5eed));
    ensure!(rule.len() == 10_000, "rule size {}", rule.len());
    let mut sinc_err: f64 = 0.0;
    for _ in 0..200 {
        let x = random_in_ball(&mut rng, 10.0);
        let avg: Complex64 = rule
            .iter()
            .map(|(p, w)| w * Complex64::new(0.0, x[0] * p[0] + x[1] * p[1] + x[2] * p[2]).exp())
            .sum();
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        sinc_err = sinc_err.max((avg - sinc(r)).norm());
    }
    ensure!(sinc_err < 1e-6, "sphere quadrature error {sinc_err:.2e}");
    Ok(format!(
        "scaling {scale_err:.1e}, conjugation {conj_err:.1e}, FD ratios ∈ [{:.2}, {:.2}], sinc {sinc_err:.1e}",
        fd_ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        fd_ratios.iter().cloned().fold(0.0, f64::max)
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("N=1 spectrum", n1_spectrum, Duration::from_secs(1)),
        ("N=2 closed-form oracle", n2_oracle, Duration::from_secs(1)),
        ("real-axis certificate, 100 configs", certificate_suite, Duration::from_secs(120)),
        ("A - iB non-singular, 1000 pairs", nonsingular_a_minus_ib, Duration::from_secs(30)),
        ("zero classification", zero_classification, Duration::from_secs(1)),
        ("Laurent coefficients at zero", laurent, Duration::from_secs(5)),
        ("resonance finder", resonance_finder, Duration::from_secs(60)),
        ("resolvent validation", resolvent_validation, Duration::from_secs(30)),
        ("identity suite", identity_suite, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= *budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over time budget {budget:?}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "acceptance {:>2} {status} {name} ({:.2} s): {detail}",
            k + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance summary: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
