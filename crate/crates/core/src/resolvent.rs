//! Resolvent kernel by Krein's formula, domain functions, and the local
//! boundary condition at each center.
//!
//! Only pointwise kernel values are computed; nothing here measures operator
//! norms in weighted spaces.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{assemble_gamma, distance, green_at_distance, PointConfig, Vec3};

const FOUR_PI: f64 = 4.0 * PI;
/// `Γ(z)` counts as singular when `σ_min` falls to this level.
pub const POLE_SIGMA_MIN: f64 = 1e-12;
/// Default finite-difference step, relative to the distance from the nearest singular point.
pub const DEFAULT_REL_STEP: f64 = 1e-2;

const AXES: [Vec3; 6] = [
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
];

fn shifted(x: &Vec3, dir: &Vec3, t: f64) -> Vec3 {
    [x[0] + t * dir[0], x[1] + t * dir[1], x[2] + t * dir[2]]
}

/// Free resolvent kernel `exp(iz|x-x'|)/(4π|x-x'|)`.
pub fn free_kernel(z: Complex64, x: &Vec3, xp: &Vec3) -> Result<Complex64> {
    let r = distance(x, xp);
    if r == 0.0 {
        return Err(Error::Singularity("kernel evaluated on the diagonal x = x'".into()));
    }
    Ok(green_at_distance(z, r))
}

/// Krein resolvent at a fixed spectral parameter, with `Γ(z)⁻¹` precomputed.
#[derive(Clone, Debug)]
pub struct Resolvent {
    cfg: PointConfig,
    z: Complex64,
    gamma_inv: CMatrix,
}

impl Resolvent {
    pub fn new(cfg: &PointConfig, z: Complex64) -> Result<Self> {
        if !z.is_finite() || z.im < 0.0 {
            return Err(Error::Domain(format!("need Im z >= 0, got z = {z}")));
        }
        let gamma = assemble_gamma(cfg, z).entries;
        let sigma = linalg::min_singular_value(&gamma)?;
        if sigma <= POLE_SIGMA_MIN {
            return Err(Error::Pole(z));
        }
        let gamma_inv = linalg::inverse(&gamma).map_err(|e| match e {
            Error::SingularMatrix { .. } => Error::Pole(z),
            other => other,
        })?;
        Ok(Self {
            cfg: cfg.clone(),
            z,
            gamma_inv,
        })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn config(&self) -> &PointConfig {
        &self.cfg
    }

    pub fn gamma_inverse(&self) -> &CMatrix {
        &self.gamma_inv
    }

    /// `G_z(x - y_j)` for every center; fails when `x` is a center.
    fn center_greens(&self, x: &Vec3) -> Result<Vec<Complex64>> {
        self.cfg
            .points()
            .iter()
            .enumerate()
            .map(|(j, y)| {
                let r = distance(x, y);
                if r == 0.0 {
                    Err(Error::Singularity(format!("point coincides with center {j}")))
                } else {
                    Ok(green_at_distance(self.z, r))
                }
            })
            .collect()
    }

    pub fn free_part(&self, x: &Vec3, xp: &Vec3) -> Result<Complex64> {
        free_kernel(self.z, x, xp)
    }

    /// `Σ_jk (Γ⁻¹)_jk G_z(x - y_j) G_z(x' - y_k)`.
    pub fn correction(&self, x: &Vec3, xp: &Vec3) -> Result<Complex64> {
        let gx = self.center_greens(x)?;
        let gxp = self.center_greens(xp)?;
        let w = self.gamma_inv.mul_vec(&gxp);
        Ok(gx.iter().zip(&w).map(|(a, b)| a * b).sum())
    }

    pub fn kernel(&self, x: &Vec3, xp: &Vec3) -> Result<Complex64> {
        Ok(self.free_part(x, xp)? + self.correction(x, xp)?)
    }

    /// Charges `q = Γ⁻¹ f` for values `f` of a regular part at the centers.
    pub fn charges(&self, f_at_centers: &[Complex64]) -> Vec<Complex64> {
        self.gamma_inv.mul_vec(f_at_centers)
    }
}

pub fn resolvent_kernel(cfg: &PointConfig, z: Complex64, x: &Vec3, xp: &Vec3) -> Result<Complex64> {
    Resolvent::new(cfg, z)?.kernel(x, xp)
}

/// Seven-point Laplacian of `f` at `x`.
fn laplacian_fd(f: impl Fn(&Vec3) -> Result<Complex64>, x: &Vec3, h: f64) -> Result<Complex64> {
    let center = f(x)?;
    let mut acc = -6.0 * center;
    for dir in &AXES {
        acc += f(&shifted(x, dir, h))?;
    }
    Ok(acc / (h * h))
}

/// `|(-Δ_h - E) R(·, x')(x)|` for an arbitrary energy `E`; `E = z²` gives the Helmholtz residual.
pub fn helmholtz_residual_at_energy(
    res: &Resolvent,
    energy: Complex64,
    x: &Vec3,
    xp: &Vec3,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    let (_, to_centers) = res.cfg.nearest_center(x);
    let clearance = to_centers.min(distance(x, xp));
    if clearance <= 10.0 * h {
        return Err(Error::Domain(format!(
            "x is {clearance:.3e} from a singular point; need more than 10h = {:.3e}",
            10.0 * h
        )));
    }
    let lap = laplacian_fd(|p| res.kernel(p, xp), x, h)?;
    Ok((-lap - energy * res.kernel(x, xp)?).norm())
}

pub fn helmholtz_residual(cfg: &PointConfig, z: Complex64, x: &Vec3, xp: &Vec3, h: f64) -> Result<f64> {
    let res = Resolvent::new(cfg, z)?;
    helmholtz_residual_at_energy(&res, z * z, x, xp, h)
}

/// Default step `10⁻²·dist(x, Y ∪ {x'})`.
pub fn default_step(cfg: &PointConfig, x: &Vec3, xp: &Vec3) -> f64 {
    DEFAULT_REL_STEP * cfg.nearest_center(x).1.min(distance(x, xp))
}

/// A regular (H²) part of a domain function, evaluated pointwise.
pub trait RegularPart {
    fn value(&self, x: &Vec3) -> Complex64;
}

impl<F: Fn(&Vec3) -> Complex64> RegularPart for F {
    fn value(&self, x: &Vec3) -> Complex64 {
        self(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TestFunction {
    /// `A·exp(-|x - x₀|²/s²)`.
    Gaussian {
        center: Vec3,
        width: f64,
        amplitude: f64,
    },
}

impl TestFunction {
    pub fn gaussian(center: Vec3, width: f64, amplitude: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() || !amplitude.is_finite() {
            return Err(Error::Domain(format!(
                "gaussian needs finite width > 0 and finite amplitude, got s = {width}, A = {amplitude}"
            )));
        }
        Ok(TestFunction::Gaussian {
            center,
            width,
            amplitude,
        })
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        match self {
            TestFunction::Gaussian { center, width, amplitude } => {
                let rho2 = distance(x, center).powi(2);
                amplitude * (-rho2 / (width * width)).exp()
            }
        }
    }

    pub fn laplacian(&self, x: &Vec3) -> f64 {
        match self {
            TestFunction::Gaussian { center, width, .. } => {
                let rho2 = distance(x, center).powi(2);
                let s2 = width * width;
                self.eval(x) * (4.0 * rho2 / (s2 * s2) - 6.0 / s2)
            }
        }
    }

    pub fn width(&self) -> f64 {
        match self {
            TestFunction::Gaussian { width, .. } => *width,
        }
    }
}

impl RegularPart for TestFunction {
    fn value(&self, x: &Vec3) -> Complex64 {
        Complex64::new(self.eval(x), 0.0)
    }
}

/// `u = F + Σ_j q_j G_z(· - y_j)` with `q = Γ(z)⁻¹ F(Y)`.
pub struct DomainFunction<'a, F: RegularPart + ?Sized> {
    res: Resolvent,
    regular: &'a F,
    charges: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainValue {
    pub value: Complex64,
    pub charges: Vec<Complex64>,
}

impl<'a, F: RegularPart + ?Sized> DomainFunction<'a, F> {
    pub fn new(cfg: &PointConfig, z: Complex64, regular: &'a F) -> Result<Self> {
        if !(z.im > 0.0) {
            return Err(Error::Domain(format!("need Im z > 0, got z = {z}")));
        }
        let res = Resolvent::new(cfg, z)?;
        let f_at: Vec<Complex64> = cfg.points().iter().map(|y| regular.value(y)).collect();
        let charges = res.charges(&f_at);
        Ok(Self {
            res,
            regular,
            charges,
        })
    }

    pub fn charges(&self) -> &[Complex64] {
        &self.charges
    }

    pub fn eval(&self, x: &Vec3) -> Result<Complex64> {
        let g = self.res.center_greens(x)?;
        Ok(self.regular.value(x) + g.iter().zip(&self.charges).map(|(a, b)| a * b).sum::<Complex64>())
    }
}

impl<'a> DomainFunction<'a, TestFunction> {
    /// `H u = -ΔF - z²F + z²u`, from `(H - z²)u = (-Δ - z²)F`.
    pub fn apply_operator(&self, x: &Vec3) -> Result<Complex64> {
        let z2 = self.res.z * self.res.z;
        let f = self.regular.eval(x);
        Ok(-self.regular.laplacian(x) - z2 * f + z2 * self.eval(x)?)
    }
}

pub fn domain_function_eval<F: RegularPart + ?Sized>(
    cfg: &PointConfig,
    z: Complex64,
    regular: &F,
    x: &Vec3,
) -> Result<DomainValue> {
    let u = DomainFunction::new(cfg, z, regular)?;
    Ok(DomainValue {
        value: u.eval(x)?,
        charges: u.charges.clone(),
    })
}

/// `|∂(r u)/∂r - 4πα_j r u|` at radius `r` from center `j`, averaged over the
/// six axis directions, with a central difference of step `r/10`.
pub fn boundary_bracket(
    cfg: &PointConfig,
    j: usize,
    r: f64,
    u: impl Fn(&Vec3) -> Result<Complex64>,
) -> Result<f64> {
    if j >= cfg.len() {
        return Err(Error::Domain(format!("center index {j} out of range")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let y = cfg.points()[j];
    let alpha = cfg.alpha()[j];
    let dr = r / 10.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for dir in &AXES {
        let g = |rho: f64| -> Result<Complex64> { Ok(rho * u(&shifted(&y, dir, rho))?) };
        let deriv = (g(r + dr)? - g(r - dr)?) / (2.0 * dr);
        acc += deriv - FOUR_PI * alpha * g(r)?;
    }
    Ok((acc / 6.0).norm())
}

/// Boundary-condition bracket of the domain function built from `f`, at radius `r` around center `j`.
pub fn boundary_condition_residual(
    cfg: &PointConfig,
    z: Complex64,
    f: &TestFunction,
    j: usize,
    r: f64,
) -> Result<f64> {
    let limit = match cfg.d_min() {
        Some(d) => d / 4.0,
        None => f.width() / 4.0,
    };
    if !(r < limit) {
        return Err(Error::Domain(format!("radius {r} must be below {limit}")));
    }
    let u = DomainFunction::new(cfg, z, f)?;
    boundary_bracket(cfg, j, r, |x| u.eval(x))
}
