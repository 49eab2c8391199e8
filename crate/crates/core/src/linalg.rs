//! Small dense symmetric-matrix kernels: half-vectorization and its inverse,
//! the spectral norm, matrix exponentials of symmetric matrices and
//! Cholesky-backed quadratic forms.
//!
//! The vech ordering is column-major over the lower triangle including the
//! diagonal: `(m00, m10, …, m(d-1)0, m11, m21, …, m(d-1)(d-1))`. Every
//! serialized vech vector in this crate uses that order.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of free entries of a symmetric `d × d` matrix.
pub fn vech_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Position of entry `(i, j)` (any order) inside a vech vector of dimension `d`.
pub fn vech_index(d: usize, i: usize, j: usize) -> usize {
    let (row, col) = if i >= j { (i, j) } else { (j, i) };
    // columns 0..col contribute d, d-1, …, d-col+1 entries
    col * d - col * col.saturating_sub(1) / 2 + (row - col)
}

/// Recovers the dimension `d` from a vech length, if the length is triangular.
pub fn dim_from_vech_len(len: usize) -> Option<usize> {
    let d = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (d..=d + 1).find(|&c| vech_len(c) == len)
}

/// A symmetric matrix. Symmetry is exact: constructors copy the lower triangle
/// into the upper one or reject asymmetric input.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Accepts `m` only if it is square and exactly symmetric.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m != m.transpose() {
            return Err(Error::NotSymmetric);
        }
        Ok(Self(m))
    }

    /// Builds a symmetric matrix from the lower triangle of `m`.
    pub fn from_lower(m: &DMatrix<f64>) -> Self {
        let d = m.nrows();
        Self(DMatrix::from_fn(d, d, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)] }))
    }

    /// Averages `m` with its transpose.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        let d = m.nrows();
        let mut out = DMatrix::zeros(d, d);
        for j in 0..d {
            out[(j, j)] = m[(j, j)];
            for i in j + 1..d {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Self(out)
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::zeros(d, d))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Outer product `y yᵀ`.
    pub fn outer(y: &[f64]) -> Self {
        let d = y.len();
        Self(DMatrix::from_fn(d, d, |i, j| y[i] * y[j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(&self.0 * c)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

/// Half-vectorization of a symmetric `d × d` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VechVector {
    dim: usize,
    data: Vec<f64>,
}

impl VechVector {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        let expected = vech_len(dim);
        if data.len() != expected {
            return Err(Error::VechLength {
                dim,
                len: data.len(),
                expected,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; vech_len(dim)],
        }
    }

    /// `vech[y yᵀ]` without forming the matrix.
    pub fn outer(y: &[f64]) -> Self {
        let d = y.len();
        let mut data = Vec::with_capacity(vech_len(d));
        for j in 0..d {
            for i in j..d {
                data.push(y[i] * y[j]);
            }
        }
        Self { dim: d, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Stacks the lower triangle (diagonal included) column by column.
pub fn vech(m: &SymMatrix) -> VechVector {
    let d = m.dim();
    let mut data = Vec::with_capacity(vech_len(d));
    for j in 0..d {
        for i in j..d {
            data.push(m.0[(i, j)]);
        }
    }
    VechVector { dim: d, data }
}

/// Inverse of [`vech`].
pub fn math(v: &VechVector) -> SymMatrix {
    let d = v.dim;
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for j in 0..d {
        for i in j..d {
            m[(i, j)] = v.data[k];
            m[(j, i)] = v.data[k];
            k += 1;
        }
    }
    SymMatrix(m)
}

/// Induced Euclidean norm (largest singular value) of a square or rectangular matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("spectral_norm input".into()));
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    if m.nrows().max(m.ncols()) <= 64 {
        return Ok(svd_norm(m));
    }
    Ok(power_iteration_norm(m, 1e-12, 10_000).unwrap_or_else(|| svd_norm(m)))
}

fn svd_norm(m: &DMatrix<f64>) -> f64 {
    SVD::new(m.clone(), false, false).singular_values.max()
}

/// Power iteration on `MᵀM`; `None` when the relative change never drops below `tol`.
pub(crate) fn power_iteration_norm(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> Option<f64> {
    let gram = m.transpose() * m;
    let n = gram.nrows();
    // deterministic start with nonzero overlap on generic inputs
    let mut x = DVector::from_fn(n, |i, _| 1.0 + (i as f64 + 1.0).sqrt() * 1e-3);
    x /= x.norm();
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let y = &gram * &x;
        let next = x.dot(&y);
        let ny = y.norm();
        if ny == 0.0 {
            return Some(0.0);
        }
        x = y / ny;
        if (next - lambda).abs() <= tol * next.abs() {
            return Some(next.max(0.0).sqrt());
        }
        lambda = next;
    }
    None
}

/// A symmetric positive definite matrix together with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl SpdMatrix {
    /// Succeeds iff the Cholesky factorization of the symmetric matrix succeeds.
    pub fn new(m: SymMatrix) -> Result<Self> {
        if m.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("SPD candidate".into()));
        }
        let chol = Cholesky::new(m.0.clone()).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            matrix: m.0,
            chol,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn to_sym(&self) -> SymMatrix {
        SymMatrix(self.matrix.clone())
    }

    /// Lower Cholesky factor `L` with `L Lᵀ = M`.
    pub fn cholesky_l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        self.chol
            .solve(&DVector::from_column_slice(v))
            .as_slice()
            .to_vec()
    }
}

/// `vᵀ M⁻¹ v` via a triangular solve against the Cholesky factor.
pub fn spd_quadratic_form(m: &SpdMatrix, v: &[f64]) -> Result<f64> {
    if v.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: v.len(),
        });
    }
    let l = m.chol.l_dirty();
    let n = v.len();
    // forward substitution L z = v; only the lower triangle of `l` is meaningful
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = v[i];
        for k in 0..i {
            s -= l[(i, k)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    Ok(z.iter().map(|x| x * x).sum())
}

/// Matrix exponential of a symmetric matrix via its eigendecomposition.
pub fn sym_exp(m: &SymMatrix) -> Result<SpdMatrix> {
    SpdMatrix::new(spectral_map(m, f64::exp))
}

/// `exp(M/2)`, the symmetric square root of `exp(M)`.
pub fn sym_exp_sqrt(m: &SymMatrix) -> Result<SpdMatrix> {
    sym_exp(&m.scale(0.5))
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn spectral_map(m: &SymMatrix, f: impl Fn(f64) -> f64) -> SymMatrix {
    let eig = SymmetricEigen::new(m.0.clone());
    let d = m.dim();
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| f(l)).collect();
    let v = &eig.eigenvectors;
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        for i in j..d {
            let s: f64 = (0..d).map(|k| v[(i, k)] * vals[k] * v[(j, k)]).sum();
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    SymMatrix(out)
}

/// Truncated power series `Σ Mᵏ/k!`, stopping once the next term has norm below
/// `1e-15`. Slow and only accurate for moderate norms; kept as an independent
/// check on [`sym_exp`].
pub fn sym_exp_series(m: &SymMatrix) -> SymMatrix {
    let d = m.dim();
    let mut sum = DMatrix::identity(d, d);
    let mut term = DMatrix::identity(d, d);
    for k in 1..1000 {
        term = &term * &m.0 / k as f64;
        sum += &term;
        if term.norm() < 1e-15 {
            break;
        }
    }
    SymMatrix::symmetrize(&sum)
}
