//! Dense linear algebra for the small matrices that show up here (N up to a
//! few dozen): partial-pivoting LU, cyclic Jacobi for real symmetric
//! eigenproblems, Cholesky, and a one-sided Jacobi SVD for complex matrices.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use num_traits::Zero;
use serde::ser::SerializeSeq;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative pivot threshold below which [`LuFactorization::solve`] reports a singular matrix.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-14;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_RTOL: f64 = 1e-14;
const SVD_MAX_SWEEPS: usize = 80;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RMatrix = Matrix<f64>;
pub type CMatrix = Matrix<Complex64>;

impl<T: Copy + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a list of rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Copy + Zero>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

/// Serialized as a list of rows.
impl<T: Copy + Zero + Serialize> Serialize for Matrix<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(self.row(i))?;
        }
        seq.end()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl RMatrix {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn matmul(&self, other: &RMatrix) -> RMatrix {
        assert_eq!(self.cols, other.rows);
        RMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_complex(&self) -> CMatrix {
        self.map(|x| Complex64::new(x, 0.0))
    }

    /// Largest entrywise deviation from symmetry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows.min(self.cols) {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl CMatrix {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::zero()
            }
        })
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        CMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn conj(&self) -> CMatrix {
        self.map(|z| z.conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn re(&self) -> RMatrix {
        self.map(|z| z.re)
    }

    pub fn im(&self) -> RMatrix {
        self.map(|z| z.im)
    }

    /// Real embedding `[[Re, -Im], [Im, Re]]`, which acts on `[u; w]` as `self` acts on `u + i w`.
    pub fn real_embedding(&self) -> RMatrix {
        let (r, c) = (self.rows, self.cols);
        RMatrix::from_fn(2 * r, 2 * c, |i, j| {
            let z = self[(i % r, j % c)];
            match (i < r, j < c) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        })
    }
}

/// Partial-pivoting LU factorization `P·M = L·U`, with `L` unit lower triangular.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    factors: CMatrix,
    pivots: Vec<usize>,
    sign: f64,
    norm: f64,
}

impl LuFactorization {
    /// Packed `L\U` factors.
    pub fn factors(&self) -> &CMatrix {
        &self.factors
    }

    /// Row permutation: row `k` of `P·M` is row `pivots[k]` of `M`.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Parity of the row permutation, ±1.
    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn det(&self) -> Complex64 {
        let n = self.factors.rows();
        (0..n).fold(Complex64::new(self.sign, 0.0), |acc, k| {
            acc * self.factors[(k, k)]
        })
    }

    pub fn lower(&self) -> CMatrix {
        let n = self.factors.rows();
        CMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.factors[(i, j)],
            std::cmp::Ordering::Equal => Complex64::new(1.0, 0.0),
            std::cmp::Ordering::Less => Complex64::zero(),
        })
    }

    pub fn upper(&self) -> CMatrix {
        let n = self.factors.rows();
        CMatrix::from_fn(n, n, |i, j| {
            if i <= j {
                self.factors[(i, j)]
            } else {
                Complex64::zero()
            }
        })
    }

    fn check_pivots(&self) -> Result<()> {
        let threshold = SINGULAR_PIVOT_RTOL * self.norm;
        for k in 0..self.factors.rows() {
            let magnitude = self.factors[(k, k)].norm();
            if magnitude < threshold || magnitude == 0.0 {
                return Err(Error::SingularMatrix { pivot: k, magnitude });
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.factors.rows();
        if b.len() != n {
            return Err(Error::Domain(format!(
                "right-hand side has length {}, expected {n}",
                b.len()
            )));
        }
        self.check_pivots()?;
        Ok(self.substitute(b))
    }

    fn substitute(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.factors.rows();
        let lu = &self.factors;
        let mut x: Vec<Complex64> = self.pivots.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= lu[(i, j)] * x[j];
            }
            x[i] = acc / lu[(i, i)];
        }
        x
    }

    /// Solves `M·X = B` column by column.
    pub fn solve_matrix(&self, b: &CMatrix) -> Result<CMatrix> {
        let n = self.factors.rows();
        if b.rows() != n {
            return Err(Error::Domain(format!(
                "right-hand side has {} rows, expected {n}",
                b.rows()
            )));
        }
        self.check_pivots()?;
        let mut out = CMatrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let x = self.substitute(&b.column(j));
            for (i, xi) in x.into_iter().enumerate() {
                out[(i, j)] = xi;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.solve_matrix(&CMatrix::identity(self.factors.rows()))
    }
}

/// LU factorization with partial pivoting. Singular input is not an error here.
pub fn lu(m: &CMatrix) -> Result<LuFactorization> {
    let n = m.ensure_square()?;
    let norm = m.norm_fro();
    let mut a = m.clone();
    let mut pivots: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if p != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            pivots.swap(k, p);
            sign = -sign;
        }
        if best == 0.0 {
            continue;
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            a[(i, k)] = factor;
            if factor.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let akj = a[(k, j)];
                a[(i, j)] -= factor * akj;
            }
        }
    }
    Ok(LuFactorization {
        factors: a,
        pivots,
        sign,
        norm,
    })
}

/// LU factorization together with the determinant `sign·∏ U_kk`.
pub fn lu_det(m: &CMatrix) -> Result<(LuFactorization, Complex64)> {
    let f = lu(m)?;
    let det = f.det();
    Ok((f, det))
}

pub fn det(m: &CMatrix) -> Result<Complex64> {
    Ok(lu(m)?.det())
}

/// Solves `M·x = b`, failing when a pivot drops below `1e-14·‖M‖`.
pub fn solve(m: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    lu(m)?.solve(b)
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    lu(m)?.inverse()
}

/// Eigendecomposition of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub vectors: RMatrix,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// Spectral norm, i.e. the largest eigenvalue modulus.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

fn check_symmetric(m: &RMatrix) -> Result<usize> {
    let n = m.ensure_square()?;
    let asymmetry = m.asymmetry();
    if asymmetry > 1e-12 * m.norm_fro() {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(n)
}

/// Cyclic Jacobi rotations; returns unsorted diagonal and (optionally) the rotation product.
fn jacobi(m: &RMatrix, with_vectors: bool) -> (Vec<f64>, Option<RMatrix>) {
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize exactly; the input passed the asymmetry check
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let mut v = with_vectors.then(|| RMatrix::identity(n));
    let target = JACOBI_RTOL * a.norm_fro();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations, values ascending.
pub fn sym_eigen(m: &RMatrix) -> Result<SymEigen> {
    let n = check_symmetric(m)?;
    let (diag, v) = jacobi(m, true);
    let v = v.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    Ok(SymEigen {
        values: order.iter().map(|&i| diag[i]).collect(),
        vectors: RMatrix::from_fn(n, n, |i, j| v[(i, order[j])]),
    })
}

/// Eigenvalues only (ascending); skips the eigenvector accumulation.
pub fn sym_eigenvalues(m: &RMatrix) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let (mut diag, _) = jacobi(m, false);
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

/// Outcome of a Cholesky attempt. Failure to factor is an outcome, not an error.
#[derive(Clone, Debug, PartialEq)]
pub enum CholeskyOutcome {
    /// Lower-triangular `L` with `L·Lᵀ = M`.
    Factor(RMatrix),
    /// The pivot at this (zero-based) index was not positive.
    NotPositiveDefinite { index: usize },
}

impl CholeskyOutcome {
    pub fn is_positive_definite(&self) -> bool {
        matches!(self, CholeskyOutcome::Factor(_))
    }
}

pub fn cholesky(m: &RMatrix) -> Result<CholeskyOutcome> {
    let n = check_symmetric(m)?;
    let mut l = RMatrix::zeros(n, n);
    for j in 0..n {
        let d = m[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if !(d > 0.0) || !d.is_finite() {
            return Ok(CholeskyOutcome::NotPositiveDefinite { index: j });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let s = m[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = s / ljj;
        }
    }
    Ok(CholeskyOutcome::Factor(l))
}

/// One-sided (Hestenes) Jacobi SVD of a real square matrix.
/// Returns the singular values (column norms, unsorted) and the right singular vectors.
fn one_sided_jacobi(m: &RMatrix) -> (Vec<f64>, RMatrix) {
    let n = m.cols();
    let rows = m.rows();
    // work column-major for cache-friendly column rotations
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let eps = f64::EPSILON;
    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for i in 0..rows {
                        alpha += cp[i] * cp[i];
                        beta += cq[i] * cq[i];
                        gamma += cp[i] * cq[i];
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    (sigma, RMatrix::from_fn(n, n, |i, j| v[j][i]))
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Singular values of a complex square matrix, ascending.
///
/// Computed from the real `2N×2N` embedding, whose singular values are those of
/// `m`, each appearing twice; the pairs are collapsed.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.ensure_square()?;
    let (mut sigma, _) = one_sided_jacobi(&m.real_embedding());
    sigma.sort_by(f64::total_cmp);
    let scale = sigma.last().copied().unwrap_or(0.0);
    let out: Vec<f64> = sigma.chunks(2).map(|pair| pair[0]).collect();
    debug_assert!(sigma
        .chunks(2)
        .all(|pair| (pair[1] - pair[0]).abs() <= 1e-8 * scale.max(f64::MIN_POSITIVE)));
    debug_assert_eq!(out.len(), n);
    Ok(out)
}

pub fn min_singular_value(m: &CMatrix) -> Result<f64> {
    if m.rows() == 1 && m.cols() == 1 {
        return Ok(m[(0, 0)].norm());
    }
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Orthonormal basis of the numerical kernel of a real symmetric matrix:
/// eigenvectors whose eigenvalue satisfies `|μ| ≤ tol·‖M‖₂`.
pub fn null_space_symmetric(m: &RMatrix, tol: f64) -> Result<Vec<Vec<f64>>> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let eig = sym_eigen(m)?;
    let threshold = tol * eig.norm();
    Ok((0..eig.values.len())
        .filter(|&k| eig.values[k].abs() <= threshold)
        .map(|k| normalize_sign(eig.vector(k)))
        .collect())
}

/// Orthonormal basis of the numerical kernel of a complex square matrix:
/// right singular vectors with `σ ≤ tol·σ_max`.
pub fn null_space(m: &CMatrix, tol: f64) -> Result<Vec<Vec<Complex64>>> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let n = m.ensure_square()?;
    let (sigma, v) = one_sided_jacobi(&m.real_embedding());
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let threshold = tol * sigma_max;
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| sigma[i].total_cmp(&sigma[j]));

    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for &k in order.iter().filter(|&&k| sigma[k] <= threshold) {
        let mut c: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(v[(i, k)], v[(i + n, k)]))
            .collect();
        // each kernel direction shows up twice in the embedding (c and i·c)
        for b in &basis {
            let proj: Complex64 = b.iter().zip(&c).map(|(bi, ci)| bi.conj() * ci).sum();
            for (ci, bi) in c.iter_mut().zip(b) {
                *ci -= proj * bi;
            }
        }
        let norm = c.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm > 0.5 {
            c.iter_mut().for_each(|ci| *ci /= norm);
            basis.push(normalize_phase(c));
        }
    }
    Ok(basis)
}

/// Flips the sign so the largest-magnitude component is positive.
pub fn normalize_sign(mut v: Vec<f64>) -> Vec<f64> {
    let lead = v
        .iter()
        .copied()
        .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() * (1.0 + 1e-12) { x } else { acc });
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Rotates the phase so the largest-magnitude component is real and positive.
pub fn normalize_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let lead = v.iter().copied().fold(Complex64::zero(), |acc, x| {
        if x.norm() > acc.norm() * (1.0 + 1e-12) {
            x
        } else {
            acc
        }
    });
    if lead.norm() > 0.0 {
        let phase = lead.conj() / lead.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
    v
}

pub fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn cvec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}
