//! Zeros of `det Γ(z)`: counting by the argument principle, location by
//! recursive quadrisection with Newton polishing, and the real-axis
//! non-singularity certificate.
//!
//! Counting integrates the logarithmic derivative `tr(Γ(z)⁻¹ Γ'(z))` rather than
//! `det Γ` itself, since the determinant of this exponential-polynomial matrix
//! overflows quickly away from the real axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{assemble_gamma, gamma_derivative, sinc_gram, PointConfig, Vec3};
use crate::quadrature::gauss_legendre;

const GL_ORDER: usize = 16;
const MAX_EDGE_DEPTH: usize = 12;
/// Target absolute accuracy of a winding number.
const WINDING_TOL: f64 = 1e-6;
const WINDING_STABILITY: f64 = 1e-3;
const MAX_JITTER_RETRIES: usize = 5;
const JITTER_REL: f64 = 1e-6;
/// Normalized determinant `|det Γ| / ∏‖row‖` below which a boundary sample counts as singular.
const BOUNDARY_HADAMARD_MIN: f64 = 1e-12;
const BOUNDARY_SAMPLES_PER_EDGE: usize = 16;
const NEWTON_MAX_STEPS: usize = 50;
const POLISH_DIAMETER: f64 = 1e-3;
/// Off-center split fractions tried in turn when quadrisecting; off 1/2 so that
/// symmetric boxes are not cut along the imaginary axis.
const SPLITS: [(f64, f64); 5] = [
    (0.5137, 0.4871),
    (0.4779, 0.5231),
    (0.5411, 0.4589),
    (0.4523, 0.5377),
    (0.5699, 0.4401),
];

pub const DEFAULT_TOL: f64 = 1e-10;

/// Rectangle `[re_min, re_max] × [im_min, im_max]` in the complex `z`-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let finite = [re_min, re_max, im_min, im_max].iter().all(|x| x.is_finite());
        if !finite || !(re_min < re_max) || !(im_min < im_max) {
            return Err(Error::Domain(format!(
                "invalid box [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    /// Corners in counter-clockwise order starting at the lower left.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Four sub-boxes from cutting at the given fractions of width and height.
    fn split(&self, fx: f64, fy: f64) -> [SearchBox; 4] {
        let xm = self.re_min + fx * self.width();
        let ym = self.im_min + fy * self.height();
        [
            SearchBox { re_max: xm, im_max: ym, ..*self },
            SearchBox { re_min: xm, im_max: ym, ..*self },
            SearchBox { re_min: xm, im_min: ym, ..*self },
            SearchBox { re_max: xm, im_min: ym, ..*self },
        ]
    }

    /// Moves every edge outward by a slightly different multiple of `attempt·1e-6·diameter`.
    fn jittered(&self, attempt: usize) -> SearchBox {
        let step = attempt as f64 * JITTER_REL * self.diameter();
        SearchBox {
            re_min: self.re_min - 1.0 * step,
            re_max: self.re_max + 1.3 * step,
            im_min: self.im_min - 0.7 * step,
            im_max: self.im_max + 1.1 * step,
        }
    }
}

/// `tr(Γ(z)⁻¹ Γ'(z)) = d/dz log det Γ(z)`.
pub fn log_derivative(cfg: &PointConfig, z: Complex64) -> Result<Complex64> {
    let gamma = assemble_gamma(cfg, z).entries;
    let x = linalg::lu(&gamma)?.solve_matrix(&gamma_derivative(cfg, z))?;
    Ok(x.trace())
}

fn hadamard_ratio(m: &CMatrix) -> f64 {
    let det = linalg::det(m).map(|d| d.norm()).unwrap_or(0.0);
    let rows: f64 = (0..m.rows())
        .map(|i| linalg::cvec_norm(m.row(i)))
        .product();
    if rows == 0.0 {
        0.0
    } else {
        det / rows
    }
}

struct Contour<'a> {
    cfg: &'a PointConfig,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Largest pairwise distance; sets the oscillation scale of the integrand.
    spread: f64,
}

impl<'a> Contour<'a> {
    fn new(cfg: &'a PointConfig) -> Self {
        let (nodes, weights) = gauss_legendre(GL_ORDER);
        let n = cfg.len();
        let spread = (0..n)
            .flat_map(|j| (0..j).map(move |k| (j, k)))
            .map(|(j, k)| cfg.dist(j, k))
            .fold(0.0, f64::max);
        Self {
            cfg,
            nodes,
            weights,
            spread,
        }
    }

    fn integrand(&self, z: Complex64) -> Result<Complex64> {
        log_derivative(self.cfg, z).map_err(|e| match e {
            Error::SingularMatrix { .. } => {
                Error::BoundarySingularity(format!("Γ singular on the contour at z = {z}"))
            }
            other => other,
        })
    }

    fn gauss(&self, a: Complex64, b: Complex64) -> Result<Complex64> {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * self.integrand(mid + half * *t)?;
        }
        Ok(acc * half)
    }

    /// Adaptive Gauss-Legendre along the segment `a → b`; returns the value and an error estimate.
    fn segment(&self, a: Complex64, b: Complex64, tol: f64) -> Result<(Complex64, f64)> {
        let whole = self.gauss(a, b)?;
        self.refine(a, b, whole, tol, 0)
    }

    fn refine(
        &self,
        a: Complex64,
        b: Complex64,
        whole: Complex64,
        tol: f64,
        depth: usize,
    ) -> Result<(Complex64, f64)> {
        let m = 0.5 * (a + b);
        let left = self.gauss(a, m)?;
        let right = self.gauss(m, b)?;
        let err = (left + right - whole).norm();
        if err <= tol {
            return Ok((left + right, err));
        }
        if depth >= MAX_EDGE_DEPTH {
            return Err(Error::BoundarySingularity(format!(
                "edge quadrature unresolved near {m} (error {err:.2e})"
            )));
        }
        let (l, el) = self.refine(a, m, left, 0.5 * tol, depth + 1)?;
        let (r, er) = self.refine(m, b, right, 0.5 * tol, depth + 1)?;
        Ok((l + r, el + er))
    }

    fn check_boundary(&self, b: &SearchBox) -> Result<()> {
        let c = b.corners();
        for e in 0..4 {
            let (p, q) = (c[e], c[(e + 1) % 4]);
            for s in 0..BOUNDARY_SAMPLES_PER_EDGE {
                let z = p + (q - p) * (s as f64 / BOUNDARY_SAMPLES_PER_EDGE as f64);
                if hadamard_ratio(&assemble_gamma(self.cfg, z).entries) <= BOUNDARY_HADAMARD_MIN {
                    return Err(Error::BoundarySingularity(format!(
                        "det Γ vanishes on the box boundary near z = {z}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Winding number of `det Γ` around the box boundary.
    fn winding(&self, b: &SearchBox) -> Result<usize> {
        self.check_boundary(b)?;
        let c = b.corners();
        let perimeter = 2.0 * (b.width() + b.height());
        let total_tol = 2.0 * PI * WINDING_TOL;
        let mut total = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        for e in 0..4 {
            let (p, q) = (c[e], c[(e + 1) % 4]);
            let len = (q - p).norm();
            let panels = ((len * self.spread.max(1.0) / 2.0).ceil() as usize).clamp(1, 256);
            for k in 0..panels {
                let a = p + (q - p) * (k as f64 / panels as f64);
                let bb = p + (q - p) * ((k + 1) as f64 / panels as f64);
                let (v, ev) = self.segment(a, bb, total_tol * (len / panels as f64) / perimeter)?;
                total += v;
                err += ev;
            }
        }
        let raw = total / Complex64::new(0.0, 2.0 * PI);
        let nearest = raw.re.round();
        let off = (raw - nearest).norm();
        if off > 0.25 || err / (2.0 * PI) > WINDING_STABILITY || nearest < 0.0 {
            return Err(Error::BoundarySingularity(format!(
                "winding number {raw} is not a stable non-negative integer"
            )));
        }
        Ok(nearest as usize)
    }
}

/// Number of zeros of `det Γ` inside `b`, counted with multiplicity.
pub fn count_zeros_in_box(cfg: &PointConfig, b: &SearchBox) -> Result<usize> {
    Ok(count_with_jitter(&Contour::new(cfg), b)?.1)
}

fn count_with_jitter(contour: &Contour, b: &SearchBox) -> Result<(SearchBox, usize)> {
    let mut last = None;
    for attempt in 0..=MAX_JITTER_RETRIES {
        let trial = if attempt == 0 { *b } else { b.jittered(attempt) };
        match contour.winding(&trial) {
            Ok(n) => return Ok((trial, n)),
            Err(e @ Error::BoundarySingularity(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RootKind {
    /// Zero of `det Γ` off both axes (lower half-plane).
    Resonance,
    /// Zero on the negative imaginary axis (virtual state); also a resonance.
    AntiBound,
    /// Zero `z = iλ` on the positive imaginary axis, i.e. the eigenvalue `-λ²`.
    EigenvaluePole,
    /// `z = 0`, owned by the threshold classification.
    Threshold,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Root {
    pub z: Complex64,
    pub multiplicity: usize,
    pub kind: RootKind,
    /// `|det Γ(z)|` at the polished root.
    pub det_abs: f64,
    pub sigma_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceSet {
    /// Resonances (including anti-bound states), sorted.
    pub roots: Vec<Root>,
    /// Zeros inside the box that are not resonances: eigenvalue poles and `z = 0`.
    pub excluded: Vec<Root>,
    /// Box actually integrated over (after any boundary jitter).
    pub searched: SearchBox,
    /// Winding count over the whole box; equals the multiplicity sum of `roots` and `excluded`.
    pub total_count: usize,
}

/// Locates every zero of `det Γ` in the box and sorts them into resonances and the rest.
pub fn find_resonances(cfg: &PointConfig, b: &SearchBox, tol: f64) -> Result<ResonanceSet> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let contour = Contour::new(cfg);
    let (searched, total_count) = count_with_jitter(&contour, b)?;
    let mut found = Vec::new();
    locate(&contour, &searched, total_count, tol, &mut found)?;

    let mut roots = Vec::new();
    let mut excluded = Vec::new();
    for (z, multiplicity) in found {
        let gamma = assemble_gamma(cfg, z).entries;
        let root = Root {
            z,
            multiplicity,
            kind: classify_root(z),
            det_abs: linalg::det(&gamma)?.norm(),
            sigma_min: linalg::min_singular_value(&gamma)?,
        };
        match root.kind {
            RootKind::Resonance | RootKind::AntiBound => roots.push(root),
            RootKind::EigenvaluePole | RootKind::Threshold => excluded.push(root),
        }
    }
    let order = |a: &Root, b: &Root| {
        b.z.im
            .total_cmp(&a.z.im)
            .then(a.z.re.total_cmp(&b.z.re))
    };
    roots.sort_by(order);
    excluded.sort_by(order);
    Ok(ResonanceSet {
        roots,
        excluded,
        searched,
        total_count,
    })
}

fn classify_root(z: Complex64) -> RootKind {
    let scale = 1.0 + z.norm();
    if z.norm() <= 1e-7 {
        RootKind::Threshold
    } else if z.re.abs() <= 1e-8 * scale {
        if z.im > 0.0 {
            RootKind::EigenvaluePole
        } else {
            RootKind::AntiBound
        }
    } else {
        RootKind::Resonance
    }
}

fn locate(
    contour: &Contour,
    b: &SearchBox,
    count: usize,
    tol: f64,
    out: &mut Vec<(Complex64, usize)>,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let center = b.center();
    let diam = b.diameter();
    let floor = 1e-12 * (1.0 + center.norm());

    // a converged Newton iterate inside a box holding one zero is that zero
    if count == 1 || diam < POLISH_DIAMETER.min(1e-6 * (1.0 + center.norm())) {
        if let Some(z) = newton(contour.cfg, center, count, tol) {
            let margin = 1e-9 * diam;
            let inside = z.re >= b.re_min - margin
                && z.re <= b.re_max + margin
                && z.im >= b.im_min - margin
                && z.im <= b.im_max + margin;
            if inside {
                out.push((z, count));
                return Ok(());
            }
        }
    }
    if diam <= floor {
        out.push((center, count));
        return Ok(());
    }

    let mut last_err = None;
    for (fx, fy) in SPLITS {
        let children = b.split(fx, fy);
        let counts: Result<Vec<usize>> = children.iter().map(|c| contour.winding(c)).collect();
        match counts {
            Ok(counts) if counts.iter().sum::<usize>() == count => {
                for (child, n) in children.iter().zip(counts) {
                    locate(contour, child, n, tol, out)?;
                }
                return Ok(());
            }
            Ok(counts) => {
                last_err = Some(Error::NumericalFailure(format!(
                    "sub-box counts {counts:?} do not add up to {count}"
                )))
            }
            Err(e @ Error::BoundarySingularity(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one split tried"))
}

/// Newton on `log det Γ` with known multiplicity: `z ← z - m / tr(Γ⁻¹Γ')`.
fn newton(cfg: &PointConfig, start: Complex64, multiplicity: usize, tol: f64) -> Option<Complex64> {
    let mut z = start;
    let m = multiplicity as f64;
    for _ in 0..NEWTON_MAX_STEPS {
        let f = match log_derivative(cfg, z) {
            Ok(f) => f,
            // landed exactly on the zero
            Err(Error::SingularMatrix { .. }) => return Some(z),
            Err(_) => return None,
        };
        if !f.is_finite() || f.norm() == 0.0 {
            return None;
        }
        let step = m / f;
        z -= step;
        if !z.is_finite() {
            return None;
        }
        if step.norm() < tol {
            return Some(z);
        }
    }
    None
}

/// Real-axis non-singularity evidence for `Γ(z)`, `z > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub z_grid: Vec<f64>,
    pub sigma_min: Vec<f64>,
    pub cholesky_ok: Vec<bool>,
    /// Beyond this point `σ_min(Γ(z)) ≥ z/4π - ‖Λ‖ > 0` analytically.
    pub z_star: f64,
    /// Analytic lower bound on `σ_min(Γ(z))` for every `z ≥ z_star`.
    pub large_z_sigma_bound: f64,
    pub grid_step: f64,
    pub threshold: f64,
    pub min_sigma: f64,
    pub min_sigma_at: f64,
    /// Whether the scanned grid reaches `z_star`.
    pub covers_z_star: bool,
    pub verdict: bool,
    /// Grid points where the check failed (empty on success).
    pub failures: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    /// Defaults to `1e-2·min(1, d_min)`.
    pub grid_step: Option<f64>,
    pub margin: f64,
    /// End of the scan; defaults to `z_star`.
    pub z_max: Option<f64>,
    pub threshold: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid_step: None,
            margin: 1.0,
            z_max: None,
            threshold: 1e-10,
        }
    }
}

pub fn default_grid_step(cfg: &PointConfig) -> f64 {
    1e-2 * cfg.d_min().unwrap_or(1.0).min(1.0)
}

/// `z_star = 4π(max|α_j| + (N-1)/(4π d_min)) + margin`.
pub fn z_star(cfg: &PointConfig, margin: f64) -> f64 {
    4.0 * PI * cfg.lambda_bound() + margin
}

/// Scans `σ_min(Γ(z))` and the sinc-Gram Cholesky on a grid over `(0, z_max]`.
///
/// A positive verdict is numerical evidence on the grid plus the analytic bound
/// beyond `z_star`; it says nothing rigorous about points between grid nodes.
pub fn certify_real_axis(cfg: &PointConfig, opts: &CertifyOptions) -> Result<Certificate> {
    let step = opts.grid_step.unwrap_or_else(|| default_grid_step(cfg));
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Domain(format!("grid step must be positive, got {step}")));
    }
    if !(opts.margin > 0.0) {
        return Err(Error::Domain(format!("margin must be positive, got {}", opts.margin)));
    }
    let z_star = z_star(cfg, opts.margin);
    let z_max = opts.z_max.unwrap_or(z_star);
    if !(z_max > 0.0) || !z_max.is_finite() {
        return Err(Error::Domain(format!("scan end must be positive, got {z_max}")));
    }
    let steps = (z_max / step - 1e-9).ceil().max(1.0) as usize;
    let mut z_grid: Vec<f64> = (1..steps).map(|k| k as f64 * step).collect();
    z_grid.push(z_max);

    let mut sigma_min = Vec::with_capacity(z_grid.len());
    let mut cholesky_ok = Vec::with_capacity(z_grid.len());
    for &z in &z_grid {
        let gamma = assemble_gamma(cfg, Complex64::new(z, 0.0)).entries;
        sigma_min.push(linalg::min_singular_value(&gamma)?);
        cholesky_ok.push(linalg::cholesky(&sinc_gram(cfg, z)?)?.is_positive_definite());
    }
    let (min_idx, min_sigma) = sigma_min
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let failures: Vec<f64> = z_grid
        .iter()
        .zip(sigma_min.iter().zip(&cholesky_ok))
        .filter(|(_, (s, ok))| !(**s > opts.threshold) || !**ok)
        .map(|(z, _)| *z)
        .collect();
    let covers_z_star = z_max >= z_star;
    let verdict = failures.is_empty() && covers_z_star;
    Ok(Certificate {
        min_sigma_at: z_grid[min_idx],
        z_grid,
        sigma_min,
        cholesky_ok,
        z_star,
        large_z_sigma_bound: opts.margin / (4.0 * PI),
        grid_step: step,
        threshold: opts.threshold,
        min_sigma,
        covers_z_star,
        verdict,
        failures,
    })
}

/// A unit vector whose projections separate the given distinct points.
///
/// Tries the coordinate axes first, then seeded uniform samples on the sphere.
pub fn distinct_direction<const D: usize>(points: &[[f64; D]]) -> Result<[f64; D]> {
    if D == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let mut d_min = f64::INFINITY;
    for j in 0..points.len() {
        for k in 0..j {
            let d = (0..D)
                .map(|i| (points[j][i] - points[k][i]).powi(2))
                .sum::<f64>()
                .sqrt();
            d_min = d_min.min(d);
        }
    }
    if d_min == 0.0 {
        return Err(Error::Domain("points must be pairwise distinct".into()));
    }
    let sep = if d_min.is_finite() { 1e-8 * d_min } else { 0.0 };
    let separates = |a: &[f64; D]| {
        let mut proj: Vec<f64> = points
            .iter()
            .map(|p| (0..D).map(|i| a[i] * p[i]).sum())
            .collect();
        proj.sort_by(f64::total_cmp);
        proj.windows(2).all(|w| w[1] - w[0] >= sep)
    };
    for axis in 0..D {
        let mut a = [0.0; D];
        a[axis] = 1.0;
        if separates(&a) {
            return Ok(a);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1ec);
    for _ in 0..10_000 {
        let mut a = [0.0; D];
        for x in a.iter_mut() {
            *x = StandardNormal.sample(&mut rng);
        }
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        a.iter_mut().for_each(|x| *x /= norm);
        if separates(&a) {
            return Ok(a);
        }
    }
    Err(Error::NumericalFailure(
        "no separating direction after 10^4 samples (near-duplicate points?)".into(),
    ))
}

/// `Σ_j v_j exp(i y_j·p)` for a unit vector `p`.
pub fn exp_sum_on_sphere(points: &[Vec3], v: &[f64], p: &Vec3) -> Complex64 {
    points
        .iter()
        .zip(v)
        .map(|(y, &vj)| vj * Complex64::new(0.0, crate::model::dot(y, p)).exp())
        .sum()
}
