//! Symmetric-matrix kernel: packed storage, isometric vectorization (svec),
//! Frobenius inner products, and the PD matrix functions used everywhere else.
//!
//! `Sym(N)` is treated as a Euclidean space under `<X, Y> = tr(XY)`. The svec
//! map (off-diagonals scaled by sqrt(2)) makes that inner product the plain
//! dot product, so Gram matrices of constraint rows can be formed with
//! ordinary dense linear algebra.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Tolerance policy: `lambda_min >= -PSD_TOL * (1 + ||X||_F)` counts as PSD.
pub const PSD_TOL: f64 = 1e-10;

/// Volume measure on Sym(N).
///
/// `Frobenius` is Lebesgue measure in svec coordinates; `Entrywise` is the
/// entrywise product measure over the upper triangle. They differ by the
/// constant factor `2^{N(N-1)/4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureConvention {
    Frobenius,
    Entrywise,
}

impl MeasureConvention {
    /// Additive log-volume offset of this convention relative to `Entrywise`.
    pub fn log_offset(self, n: usize) -> f64 {
        match self {
            MeasureConvention::Entrywise => 0.0,
            MeasureConvention::Frobenius => {
                (n * (n - 1)) as f64 / 4.0 * std::f64::consts::LN_2
            }
        }
    }
}

/// A real symmetric N x N matrix stored as its upper triangle
/// (row-major, diagonal included): exactly n(n+1)/2 coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * (2 * n - i + 1) / 2 + (j - i)
}

pub fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        SymMatrix { n, data: vec![0.0; packed_len(n)] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// vv^T for a column vector v.
    pub fn rank_one(v: &DVector<f64>) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, v[i] * v[j]);
            }
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Reads a dense matrix, rejecting asymmetry beyond `tol` (absolute,
    /// scaled by the largest entry magnitude).
    pub fn from_dense(d: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if d.nrows() != d.ncols() {
            return Err(Error::DimensionMismatch { expected: d.nrows(), got: d.ncols() });
        }
        let n = d.nrows();
        let scale = 1.0 + d.amax();
        for i in 0..n {
            for j in (i + 1)..n {
                if (d[(i, j)] - d[(j, i)]).abs() > tol * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix not symmetric at ({i},{j}): {} vs {}",
                        d[(i, j)],
                        d[(j, i)]
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| d[(i, j)]))
    }

    /// Symmetrizes a dense matrix that is symmetric only up to roundoff
    /// (products like M P M).
    pub fn from_dense_symmetrize(d: &DMatrix<f64>) -> Self {
        let n = d.nrows();
        Self::from_fn(n, |i, j| 0.5 * (d[(i, j)] + d[(j, i)]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.data[packed_index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.data[packed_index(self.n, i, j)] = v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        frobenius_inner(self, self).unwrap().max(0.0).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn scale(&self, c: f64) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().map(|x| c * x).collect() }
    }

    /// self + c * other
    pub fn axpy(&self, c: f64, other: &SymMatrix) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(SymMatrix { n: self.n, data })
    }

    pub fn add(&self, other: &SymMatrix) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Raw packed coefficients (upper triangle, row-major).
    pub fn packed(&self) -> &[f64] {
        &self.data
    }
}

/// Isometric vector form of a symmetric matrix.
///
/// Stores the raw packed coefficients so that `smat(svec(X)) == X` holds
/// bit-exactly; the sqrt(2) off-diagonal scaling is applied when coordinates
/// are materialized or dotted.
#[derive(Debug, Clone, PartialEq)]
pub struct SVec {
    n: usize,
    raw: Vec<f64>,
}

impl SVec {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Coordinates in the isometric basis: diagonal entries unscaled,
    /// off-diagonal entries scaled by sqrt(2).
    pub fn coords(&self) -> DVector<f64> {
        let n = self.n;
        let mut out = DVector::zeros(self.raw.len());
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                out[idx] = if i == j { self.raw[idx] } else { SQRT_2 * self.raw[idx] };
                idx += 1;
            }
        }
        out
    }

    /// Builds an SVec from isometric coordinates (off-diagonals divided back).
    pub fn from_coords(n: usize, coords: &DVector<f64>) -> Result<Self> {
        if coords.len() != packed_len(n) {
            return Err(Error::DimensionMismatch { expected: packed_len(n), got: coords.len() });
        }
        let mut raw = vec![0.0; coords.len()];
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                raw[idx] = if i == j { coords[idx] } else { coords[idx] / SQRT_2 };
                idx += 1;
            }
        }
        Ok(SVec { n, raw })
    }

    /// Euclidean dot product of coordinates; equals tr(XY) by the isometry.
    pub fn dot(&self, other: &SVec) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let n = self.n;
        let mut acc = 0.0;
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * self.raw[idx] * other.raw[idx];
                idx += 1;
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self).unwrap()
    }
}

pub fn svec(x: &SymMatrix) -> SVec {
    SVec { n: x.n, raw: x.data.clone() }
}

pub fn smat(v: &SVec) -> SymMatrix {
    SymMatrix { n: v.n, data: v.raw.clone() }
}

/// tr(XY).
pub fn frobenius_inner(x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    svec(x).dot(&svec(y))
}

/// log det X for positive definite X, via Cholesky.
pub fn log_det_pd(x: &SymMatrix) -> Result<f64> {
    let chol = nalgebra::Cholesky::new(x.to_dense()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let mut acc = 0.0;
    for i in 0..x.n {
        let d = l[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        acc += 2.0 * d.ln();
    }
    Ok(acc)
}

/// Symmetric eigendecomposition helper: (eigenvalues, eigenvectors).
pub fn sym_eigen(x: &SymMatrix) -> (DVector<f64>, DMatrix<f64>) {
    let e = nalgebra::SymmetricEigen::new(x.to_dense());
    (e.eigenvalues, e.eigenvectors)
}

pub fn min_eigenvalue(x: &SymMatrix) -> f64 {
    let (vals, _) = sym_eigen(x);
    vals.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

pub fn max_eigenvalue(x: &SymMatrix) -> f64 {
    let (vals, _) = sym_eigen(x);
    vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
}

/// Whether X counts as PSD under the kernel's boundary tolerance.
pub fn is_psd(x: &SymMatrix) -> bool {
    min_eigenvalue(x) >= -PSD_TOL * (1.0 + x.fro_norm())
}

/// Principal square root of a PSD matrix.
pub fn pd_sqrt(x: &SymMatrix) -> Result<SymMatrix> {
    let tol = PSD_TOL * (1.0 + x.fro_norm());
    let (vals, vecs) = sym_eigen(x);
    let mut min_eig = f64::INFINITY;
    for &v in vals.iter() {
        min_eig = min_eig.min(v);
    }
    if min_eig < -tol {
        return Err(Error::NotPsd { min_eig });
    }
    let sq = DVector::from_iterator(vals.len(), vals.iter().map(|&v| v.max(0.0).sqrt()));
    let d = &vecs * DMatrix::from_diagonal(&sq) * vecs.transpose();
    Ok(SymMatrix::from_dense_symmetrize(&d))
}

/// Inverse of a positive definite matrix.
pub fn pd_inverse(x: &SymMatrix) -> Result<SymMatrix> {
    let chol = nalgebra::Cholesky::new(x.to_dense()).ok_or(Error::NotPositiveDefinite)?;
    Ok(SymMatrix::from_dense_symmetrize(&chol.inverse()))
}
