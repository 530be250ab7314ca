//! Discrete spectrum, zero-energy threshold classification and the Laurent
//! coefficients of `Γ(z)⁻¹` at `z = 0`.
//!
//! Negative eigenvalues `-λ²` correspond to the zeros `z = iλ` of `det Γ` on the
//! positive imaginary axis. There `Γ(iλ)` is real symmetric and
//! `dΓ(iλ)/dλ = K/4π` with `K_jk = exp(-λ|y_j - y_k|)`, a Gram matrix of the positive
//! definite function `exp(-λ|x|)`. Every ordered eigenvalue curve of `Γ(iλ)` is
//! therefore strictly increasing and crosses zero at most once, which is what
//! makes plain bisection per branch sound.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};
use crate::model::{assemble_gamma, distance, gamma_imaginary_axis, PointConfig, Vec3};

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;

/// One negative eigenvalue `-λ²` of the operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundState {
    pub lambda: f64,
    pub energy: f64,
    pub multiplicity: usize,
    /// Orthonormal basis of `ker Γ(iλ)`; each vector `c` gives the eigenfunction `Σ c_j G_{iλ}^{y_j}`.
    pub coefficients: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SpectralReport {
    /// Sorted by increasing energy (largest `λ` first).
    pub eigenvalues: Vec<BoundState>,
}

impl SpectralReport {
    pub fn total_multiplicity(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }
}

/// Upper end of the bisection bracket: beyond it `Γ(iλ)` is diagonally dominant
/// with positive diagonal.
pub fn lambda_upper_bound(cfg: &PointConfig) -> f64 {
    4.0 * PI * cfg.lambda_bound() + 1.0
}

/// All negative eigenvalues with multiplicities and kernel coefficient vectors.
pub fn negative_eigenvalues(cfg: &PointConfig, tol: f64) -> Result<SpectralReport> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let at_zero = linalg::sym_eigenvalues(&gamma_imaginary_axis(cfg, 0.0))?;
    let scale = at_zero.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let hi = lambda_upper_bound(cfg);

    let mut crossings = Vec::new();
    for (k, &mu) in at_zero.iter().enumerate() {
        // a branch starting at exactly zero is a threshold state, not a bound state
        if mu < -tol * scale {
            crossings.push(bisect_branch(cfg, k, hi)?);
        }
    }
    crossings.sort_by(f64::total_cmp);

    let mut groups: Vec<Vec<f64>> = Vec::new();
    for lambda in crossings {
        match groups.last_mut() {
            Some(g) if lambda - g[g.len() - 1] <= tol * (1.0 + lambda) => g.push(lambda),
            _ => groups.push(vec![lambda]),
        }
    }

    let mut eigenvalues = groups
        .into_iter()
        .map(|g| {
            let multiplicity = g.len();
            let lambda = g.iter().sum::<f64>() / multiplicity as f64;
            let coefficients = kernel_vectors(&gamma_imaginary_axis(cfg, lambda), multiplicity, tol)?;
            Ok(BoundState {
                lambda,
                energy: -lambda * lambda,
                multiplicity,
                coefficients,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    eigenvalues.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
    Ok(SpectralReport { eigenvalues })
}

/// Zero of the `k`-th ordered eigenvalue curve of `Γ(iλ)` on `(0, hi]`.
fn bisect_branch(cfg: &PointConfig, k: usize, hi: f64) -> Result<f64> {
    let mu = |lambda: f64| -> Result<f64> {
        Ok(linalg::sym_eigenvalues(&gamma_imaginary_axis(cfg, lambda))?[k])
    };
    if mu(hi)? <= 0.0 {
        return Err(Error::NumericalFailure(format!(
            "eigenvalue branch {k} is not positive at the bracket end λ = {hi}"
        )));
    }
    let (mut lo, mut hi) = (0.0_f64, hi);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= f64::EPSILON * (1.0 + hi) {
            return Ok(mid);
        }
        if mu(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NumericalFailure(format!(
        "bisection for branch {k} did not converge in {MAX_BISECTIONS} steps"
    )))
}

/// Kernel basis of a real symmetric matrix with known dimension `dim`.
fn kernel_vectors(m: &RMatrix, dim: usize, tol: f64) -> Result<Vec<Vec<f64>>> {
    let basis = linalg::null_space_symmetric(m, tol)?;
    if basis.len() == dim {
        return Ok(basis);
    }
    // threshold disagrees with the crossing count: take the `dim` eigenvectors closest to zero
    let eig = linalg::sym_eigen(m)?;
    let mut order: Vec<usize> = (0..eig.values.len()).collect();
    order.sort_by(|&a, &b| eig.values[a].abs().total_cmp(&eig.values[b].abs()));
    let mut picked: Vec<usize> = order.into_iter().take(dim).collect();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .map(|k| linalg::normalize_sign(eig.vector(k)))
        .collect())
}

/// `u(x) = Σ_j c_j exp(-λ|x - y_j|) / (4π|x - y_j|)`.
pub fn eigenfunction_eval(cfg: &PointConfig, lambda: f64, c: &[f64], x: &Vec3) -> Result<f64> {
    if c.len() != cfg.len() {
        return Err(Error::Domain(format!(
            "expected {} coefficients, got {}",
            cfg.len(),
            c.len()
        )));
    }
    let mut total = 0.0;
    for (j, y) in cfg.points().iter().enumerate() {
        let r = distance(x, y);
        if r == 0.0 {
            return Err(Error::Singularity(format!(
                "eigenfunction evaluated at center {j}"
            )));
        }
        total += c[j] * (-lambda * r).exp() / (4.0 * PI * r);
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ZeroLabel {
    /// `Γ(0)` is non-singular.
    Regular,
    /// `Γ(0)` is singular, zero is not an eigenvalue.
    ZeroResonance,
    /// Every kernel vector of `Γ(0)` has vanishing coefficient sum.
    ZeroEigenvalue,
    /// Zero is an eigenvalue and there is an extra kernel direction with non-zero sum.
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroClassification {
    pub label: ZeroLabel,
    pub kernel_dim: usize,
    pub eigenvalue_multiplicity: usize,
    pub resonance_present: bool,
    /// Orthonormal basis of `ker Γ(0)`.
    pub kernel: Vec<Vec<f64>>,
    /// Orthonormal basis of `ker Γ(0) ∩ {Σ c_j = 0}`.
    pub eigen_coefficients: Vec<Vec<f64>>,
    /// Norm of the projection of `(1,…,1)/√N` onto the kernel.
    pub ones_projection: f64,
}

/// Classifies the threshold `z = 0`.
///
/// `tol` is relative to `‖Γ(0)‖`. A kernel vector `c` of `Γ(0)` gives the candidate
/// state `Σ c_j G_0^{y_j}`, whose `1/|x|` tail cancels exactly when `Σ c_j = 0`;
/// those are square integrable, the others are resonant. The projection of the
/// normalized ones-vector onto the kernel counts as non-zero above `√tol`.
pub fn classify_zero(cfg: &PointConfig, tol: f64) -> Result<ZeroClassification> {
    let n = cfg.len();
    let g0 = gamma_imaginary_axis(cfg, 0.0);
    let kernel = linalg::null_space_symmetric(&g0, tol)?;
    let k = kernel.len();

    let ones = 1.0 / (n as f64).sqrt();
    let w: Vec<f64> = kernel.iter().map(|c| c.iter().sum::<f64>() * ones).collect();
    let ones_projection = linalg::vec_norm(&w);
    let resonance_present = ones_projection > tol.sqrt();

    // eigenvectors of w wᵀ with zero eigenvalue span the sum-free part of the kernel
    let eigen_coefficients = if k == 0 {
        Vec::new()
    } else if !resonance_present {
        kernel.clone()
    } else {
        let p = RMatrix::from_fn(k, k, |a, b| w[a] * w[b]);
        let eig = linalg::sym_eigen(&p)?;
        let cutoff = tol.sqrt() * ones_projection * ones_projection;
        (0..k)
            .filter(|&i| eig.values[i].abs() <= cutoff)
            .map(|i| {
                let coords = eig.vector(i);
                let c: Vec<f64> = (0..n)
                    .map(|j| (0..k).map(|a| coords[a] * kernel[a][j]).sum())
                    .collect();
                linalg::normalize_sign(c)
            })
            .collect()
    };
    let eigenvalue_multiplicity = eigen_coefficients.len();
    let label = match (k, eigenvalue_multiplicity, resonance_present) {
        (0, _, _) => ZeroLabel::Regular,
        (_, 0, true) => ZeroLabel::ZeroResonance,
        (_, _, false) => ZeroLabel::ZeroEigenvalue,
        (_, _, true) => ZeroLabel::Mixed,
    };
    Ok(ZeroClassification {
        label,
        kernel_dim: k,
        eigenvalue_multiplicity,
        resonance_present,
        kernel,
        eigen_coefficients,
        ones_projection,
    })
}

/// Singular part `z⁻² A₋₂ + z⁻¹ A₋₁` of `Γ(z)⁻¹` at the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaurentCoefficients {
    pub a_minus2: CMatrix,
    pub a_minus1: CMatrix,
    /// Radius of the circle actually used (after any shrinking).
    pub radius: f64,
    /// Number of trapezoid nodes of the accepted result.
    pub nodes: usize,
    /// Max entry change between the last two node doublings.
    pub change: f64,
    pub stable: bool,
}

pub const LAURENT_DEFAULT_RADIUS: f64 = 1e-2;
pub const LAURENT_DEFAULT_NODES: usize = 64;
const LAURENT_MAX_NODES: usize = 1024;
const LAURENT_MAX_SHRINKS: usize = 6;
const LAURENT_STABLE_ABS: f64 = 1e-8;

/// `A_m = (1/2πi) ∮ Γ(z)⁻¹ z^{-m-1} dz`, `m ∈ {-2, -1}`, by the trapezoid rule on `|z| = radius`.
pub fn laurent_at_zero(cfg: &PointConfig, radius: f64, nodes: usize) -> Result<LaurentCoefficients> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    if nodes < 4 {
        return Err(Error::Domain(format!("need at least 4 nodes, got {nodes}")));
    }
    let mut r = radius;
    for _ in 0..=LAURENT_MAX_SHRINKS {
        match laurent_on_circle(cfg, r, nodes) {
            Err(Error::Pole(_)) => r *= 0.5,
            other => return other,
        }
    }
    Err(Error::NumericalFailure(format!(
        "Γ(z) is singular on every circle down to radius {}",
        2.0 * r
    )))
}

fn laurent_on_circle(cfg: &PointConfig, r: f64, nodes: usize) -> Result<LaurentCoefficients> {
    let mut n = nodes;
    let mut prev = trapezoid(cfg, r, n)?;
    loop {
        if n >= LAURENT_MAX_NODES {
            return Err(Error::NumericalFailure(format!(
                "Laurent quadrature did not stabilize with {n} nodes"
            )));
        }
        n *= 2;
        let cur = trapezoid(cfg, r, n)?;
        let change = max_diff(&prev.0, &cur.0).max(max_diff(&prev.1, &cur.1));
        if change < LAURENT_STABLE_ABS {
            return Ok(LaurentCoefficients {
                a_minus2: cur.0,
                a_minus1: cur.1,
                radius: r,
                nodes: n,
                change,
                stable: true,
            });
        }
        prev = cur;
    }
}

/// Trapezoid sums for `(A₋₂, A₋₁)`; nodes are summed in ascending order.
fn trapezoid(cfg: &PointConfig, r: f64, nodes: usize) -> Result<(CMatrix, CMatrix)> {
    let dim = cfg.len();
    let mut a2 = CMatrix::zeros(dim, dim);
    let mut a1 = CMatrix::zeros(dim, dim);
    for k in 0..nodes {
        let theta = 2.0 * PI * k as f64 / nodes as f64;
        let z = Complex64::from_polar(r, theta);
        let gamma = assemble_gamma(cfg, z).entries;
        let sigma = linalg::min_singular_value(&gamma)?;
        if sigma <= 1e-12 * gamma.norm_fro().max(1.0) {
            return Err(Error::Pole(z));
        }
        let inv = linalg::inverse(&gamma).map_err(|_| Error::Pole(z))?;
        let z2 = z * z;
        for j in 0..dim {
            for l in 0..dim {
                a1[(j, l)] += inv[(j, l)] * z;
                a2[(j, l)] += inv[(j, l)] * z2;
            }
        }
    }
    let scale = 1.0 / nodes as f64;
    Ok((a2.map(|x| x * scale), a1.map(|x| x * scale)))
}

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
