//! Point configurations and the characteristic matrix `Γ_{α,Y}(z)`.
//!
//! Units are `ħ = 2m = 1`: the operator is `-Δ_{α,Y}` and the energy at
//! spectral parameter `z` is `z²`. Entries of `Γ` are
//!
//! ```text
//! Γ_jj = α_j - i z / 4π
//! Γ_jk = -exp(i z |y_j - y_k|) / (4π |y_j - y_k|)      (j ≠ k)
//! ```
//!
//! so `Γ` is complex symmetric (not Hermitian) and entire in `z`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix};

pub type Vec3 = [f64; 3];

const FOUR_PI: f64 = 4.0 * PI;

/// Relative tolerance under which two centers are treated as coincident.
pub const COINCIDENT_RTOL: f64 = 1e-12;

pub fn distance(a: &Vec3, b: &Vec3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Strengths `α` and distinct centers `Y` of the point interactions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointConfig {
    alpha: Vec<f64>,
    points: Vec<Vec3>,
    #[serde(skip)]
    dist: Vec<f64>,
    #[serde(skip)]
    d_min: Option<f64>,
}

/// On-disk layout of a configuration: `{"alpha": [...], "points": [[x,y,z], ...]}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub alpha: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl PointConfig {
    pub fn new(alpha: Vec<f64>, points: Vec<Vec3>) -> Result<Self> {
        let n = alpha.len();
        if n == 0 {
            return Err(invalid("/alpha", "at least one interaction center is required"));
        }
        if points.len() != n {
            return Err(invalid(
                "/points",
                format!("length mismatch: {n} strengths but {} points", points.len()),
            ));
        }
        if let Some(j) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(invalid(&format!("/alpha/{j}"), "strength must be a finite number"));
        }
        for (j, p) in points.iter().enumerate() {
            if let Some(c) = p.iter().position(|x| !x.is_finite()) {
                return Err(invalid(
                    &format!("/points/{j}/{c}"),
                    "coordinate must be a finite number",
                ));
            }
        }
        let scale = points
            .iter()
            .map(|p| dot(p, p).sqrt())
            .fold(1.0_f64, f64::max);
        let mut dist = vec![0.0; n * n];
        let mut d_min: Option<f64> = None;
        for j in 0..n {
            for k in 0..j {
                let d = distance(&points[j], &points[k]);
                if d <= COINCIDENT_RTOL * scale {
                    return Err(invalid(
                        &format!("/points/{j}"),
                        format!("points {k} and {j} coincide"),
                    ));
                }
                dist[j * n + k] = d;
                dist[k * n + j] = d;
                d_min = Some(d_min.map_or(d, |m| m.min(d)));
            }
        }
        Ok(Self {
            alpha,
            points,
            dist,
            d_min,
        })
    }

    /// Validates the raw file layout, reporting errors with JSON pointers.
    pub fn from_file_layout(raw: ConfigFile) -> Result<Self> {
        let mut points = Vec::with_capacity(raw.points.len());
        for (j, p) in raw.points.iter().enumerate() {
            let arr: Vec3 = p.as_slice().try_into().map_err(|_| {
                invalid(
                    &format!("/points/{j}"),
                    format!("expected 3 coordinates, found {}", p.len()),
                )
            })?;
            points.push(arr);
        }
        Self::new(raw.alpha, points)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: ConfigFile = serde_json::from_str(s).map_err(|e| {
            let pointer = match e.classify() {
                serde_json::error::Category::Data => guess_pointer(&e.to_string()),
                _ => String::new(),
            };
            invalid(&pointer, e.to_string())
        })?;
        Self::from_file_layout(raw)
    }

    pub fn to_file_layout(&self) -> ConfigFile {
        ConfigFile {
            alpha: self.alpha.clone(),
            points: self.points.iter().map(|p| p.to_vec()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// `|y_j - y_k|`.
    pub fn dist(&self, j: usize, k: usize) -> f64 {
        self.dist[j * self.len() + k]
    }

    /// Minimum pairwise distance; `None` for a single center.
    pub fn d_min(&self) -> Option<f64> {
        self.d_min
    }

    pub fn max_abs_alpha(&self) -> f64 {
        self.alpha.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
    }

    /// Row-sum bound `max|α_j| + (N-1)/(4π d_min)` on `‖Γ(z) + iz/4π‖` for real `z`.
    pub fn lambda_bound(&self) -> f64 {
        let coupling = match self.d_min {
            Some(d) => (self.len() - 1) as f64 / (FOUR_PI * d),
            None => 0.0,
        };
        self.max_abs_alpha() + coupling
    }

    /// Same centers, strengths replaced.
    pub fn with_alpha(&self, alpha: Vec<f64>) -> Result<Self> {
        Self::new(alpha, self.points.clone())
    }

    /// Index of the center closest to `x`, with its distance.
    pub fn nearest_center(&self, x: &Vec3) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .map(|(j, y)| (j, distance(x, y)))
            .fold((0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc })
    }
}

fn invalid(pointer: &str, message: impl Into<String>) -> Error {
    Error::InvalidConfig {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn guess_pointer(msg: &str) -> String {
    for field in ["alpha", "points"] {
        if msg.contains(&format!("`{field}`")) {
            return format!("/{field}");
        }
    }
    String::new()
}

/// `Γ_{α,Y}(z)` at a fixed spectral parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaMatrix {
    pub z: Complex64,
    pub entries: CMatrix,
}

impl GammaMatrix {
    pub fn len(&self) -> usize {
        self.entries.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.rows() == 0
    }

    pub fn det(&self) -> Complex64 {
        crate::linalg::det(&self.entries).expect("Γ is square")
    }
}

/// `Γ(z) = A - iB` for real `z > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSplit {
    pub z: f64,
    pub a: RMatrix,
    pub b: RMatrix,
}

/// Free Green kernel `exp(iz|x-y|)/(4π|x-y|)`.
pub fn green_kernel(z: Complex64, x: &Vec3, y: &Vec3) -> Result<Complex64> {
    let r = distance(x, y);
    if r == 0.0 {
        return Err(Error::Singularity(format!(
            "Green kernel evaluated at its center {y:?}"
        )));
    }
    Ok(green_at_distance(z, r))
}

#[inline]
pub(crate) fn green_at_distance(z: Complex64, r: f64) -> Complex64 {
    (Complex64::i() * z * r).exp() / (FOUR_PI * r)
}

pub fn assemble_gamma(cfg: &PointConfig, z: Complex64) -> GammaMatrix {
    let n = cfg.len();
    let diag_shift = -Complex64::i() * z / FOUR_PI;
    let entries = CMatrix::from_fn(n, n, |j, k| {
        if j == k {
            cfg.alpha[j] + diag_shift
        } else {
            -green_at_distance(z, cfg.dist(j, k))
        }
    });
    GammaMatrix { z, entries }
}

/// Entrywise `dΓ/dz`.
pub fn gamma_derivative(cfg: &PointConfig, z: Complex64) -> CMatrix {
    let n = cfg.len();
    let minus_i_over = -Complex64::i() / FOUR_PI;
    CMatrix::from_fn(n, n, |j, k| {
        if j == k {
            minus_i_over
        } else {
            minus_i_over * (Complex64::i() * z * cfg.dist(j, k)).exp()
        }
    })
}

/// `Γ(iλ)` for real `λ`, which is real symmetric:
/// diagonal `α_j + λ/4π`, off-diagonal `-exp(-λ d_jk)/(4π d_jk)`.
pub fn gamma_imaginary_axis(cfg: &PointConfig, lambda: f64) -> RMatrix {
    let n = cfg.len();
    RMatrix::from_fn(n, n, |j, k| {
        if j == k {
            cfg.alpha[j] + lambda / FOUR_PI
        } else {
            let d = cfg.dist(j, k);
            -(-lambda * d).exp() / (FOUR_PI * d)
        }
    })
}

pub fn real_split(cfg: &PointConfig, z: f64) -> Result<RealSplit> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("real split requires z > 0, got {z}")));
    }
    let n = cfg.len();
    let a = RMatrix::from_fn(n, n, |j, k| {
        if j == k {
            cfg.alpha[j]
        } else {
            let d = cfg.dist(j, k);
            -(z * d).cos() / (FOUR_PI * d)
        }
    });
    let s = sinc_gram(cfg, z)?;
    let b = s.map(|x| z / FOUR_PI * x);
    Ok(RealSplit { z, a, b })
}

/// `S_jk = sinc(z |y_j - y_k|)`, so that `B = (z/4π) S`.
pub fn sinc_gram(cfg: &PointConfig, z: f64) -> Result<RMatrix> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("sinc Gram requires z > 0, got {z}")));
    }
    let n = cfg.len();
    Ok(RMatrix::from_fn(n, n, |j, k| {
        if j == k {
            1.0
        } else {
            sinc(z * cfg.dist(j, k))
        }
    }))
}

/// `sin(x)/x`, with `sinc(0) = 1` and a Taylor branch near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}
