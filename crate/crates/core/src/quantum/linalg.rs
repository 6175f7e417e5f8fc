//! Dense complex vectors and matrices for few-qutrit systems.
//!
//! Composite indices follow the Kronecker convention: for `a ⊗ b` the entry
//! `(i, j)` lives at flat index `i * dim(b) + j`. A two-qutrit ket `|ab⟩`
//! therefore sits at `3a + b`.

use std::ops::{Add, Index, IndexMut, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QkdError, Result};

/// Default eigenvalue cutoff for [`inv_sqrt`].
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Asymmetry tolerated before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues of a Gram matrix may dip this far below zero from rounding.
pub const GRAM_PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        assert!(!entries.is_empty(), "vector dimension must be positive");
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); dim])
    }

    /// Computational basis vector `e_index` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        assert_eq!(
            self.dim(),
            other.dim(),
            "dimension mismatch in inner product"
        );
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(self.entries.iter().map(|z| z * factor).collect())
    }

    /// Returns `self / ‖self‖`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn tensor(&self, other: &ComplexVector) -> Self {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            out.extend(other.entries.iter().map(|b| a * b));
        }
        Self::new(out)
    }

    /// Outer product `|self⟩⟨other|`.
    pub fn outer(&self, other: &ComplexVector) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), other.dim(), |i, j| {
            self.entries[i] * other.entries[j].conj()
        })
    }

    pub fn max_abs_diff(&self, other: &ComplexVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Contiguous block `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        Self::new(self.entries[start..start + len].to_vec())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.entries[i]
    }
}

impl Add for &ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), rhs.dim());
        ComplexVector::new(
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(
            entries.len(),
            rows * cols,
            "entry count does not match shape"
        );
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal_real(&vec![1.0; n])
    }

    pub fn from_diagonal_real(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
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

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(
            self.rows,
            self.cols,
            self.entries.iter().map(|z| z * factor).collect(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(
            self.cols,
            v.dim(),
            "dimension mismatch in matrix-vector product"
        );
        ComplexVector::new(
            (0..self.rows)
                .map(|i| {
                    self.entries[i * self.cols..(i + 1) * self.cols]
                        .iter()
                        .zip(v.entries())
                        .map(|(m, x)| m * x)
                        .sum()
                })
                .collect(),
        )
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.entries[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn tensor(&self, other: &ComplexMatrix) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from `M = M†`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_asymmetry() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square()
            && self
                .adjoint()
                .matmul(self)
                .max_abs_diff(&Self::identity(self.rows))
                <= tol
    }

    /// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues
    /// and the matching orthonormal eigenvectors as columns.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        let asymmetry = self.hermitian_asymmetry();
        if asymmetry > HERMITIAN_TOL {
            return Err(QkdError::NotHermitian { asymmetry });
        }
        let n = self.rows;
        // Symmetrize first so rounding noise cannot leak into the solver.
        let m = DMatrix::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5);
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok((values, vectors))
    }

    /// Applies a real function to the spectrum of a Hermitian matrix.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
        let (values, vectors) = self.hermitian_eigen()?;
        let mapped: Vec<f64> = values.into_iter().map(f).collect();
        Ok(vectors
            .matmul(&ComplexMatrix::from_diagonal_real(&mapped))
            .matmul(&vectors.adjoint()))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix::new(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product of two vectors or two matrices.
pub trait Tensor<Rhs = Self> {
    type Output;
    fn tensor_with(&self, rhs: &Rhs) -> Self::Output;
}

impl Tensor for ComplexVector {
    type Output = ComplexVector;
    fn tensor_with(&self, rhs: &ComplexVector) -> ComplexVector {
        self.tensor(rhs)
    }
}

impl Tensor for ComplexMatrix {
    type Output = ComplexMatrix;
    fn tensor_with(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::tensor(self, rhs)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T::Output {
    a.tensor_with(b)
}

/// Pseudo-inverse square root of a Hermitian PSD matrix.
///
/// Eigenvalues above `tol` map to `1/√λ`; the rest (the kernel) map to zero.
pub fn inv_sqrt(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    m.hermitian_map(|l| if l > tol { 1.0 / l.sqrt() } else { 0.0 })
}

/// Principal square root of a Hermitian PSD matrix; tiny negative
/// eigenvalues are clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.hermitian_map(|l| l.max(0.0).sqrt())
}

/// Matrix of pairwise inner products `G[i][j] = ⟨v_i|v_j⟩`.
pub fn gram_of(vectors: &[ComplexVector]) -> ComplexMatrix {
    let n = vectors.len();
    ComplexMatrix::from_fn(n, n, |i, j| vectors[i].inner(&vectors[j]))
}

/// Realizes vectors whose Gram matrix is `g`: vector `i` is column `i` of
/// the PSD square root of `g`.
pub fn vectors_from_gram(g: &ComplexMatrix) -> Result<Vec<ComplexVector>> {
    let (values, _) = g.hermitian_eigen()?;
    let min_eigenvalue = values[0];
    if min_eigenvalue < -GRAM_PSD_TOL {
        return Err(QkdError::InfeasibleGram { min_eigenvalue });
    }
    let root = psd_sqrt(g)?;
    Ok((0..g.cols()).map(|j| root.column(j)).collect())
}
