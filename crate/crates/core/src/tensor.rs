//! Dense vectors and matrices, and the handful of kernels composition needs.
//!
//! Everything is `f64`. Matrices are row-major. Order-3 tensors never appear
//! here: the tensor-based models are all expressed through these order-1 and
//! order-2 forms.

use std::borrow::Cow;
use std::ops::Index;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    values: Vec<f64>,
}

impl Vector {
    /// Builds a vector, rejecting non-finite components.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector component {i} is {}", values[i])));
        }
        Ok(Vector { values })
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Vector { values }
    }

    pub fn zeros(dim: usize) -> Self {
        Vector { values: vec![0.0; dim] }
    }

    pub fn ones(dim: usize) -> Self {
        Vector { values: vec![1.0; dim] }
    }

    /// Standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut values = vec![0.0; dim];
        values[index] = 1.0;
        Vector { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    pub fn scale(&self, alpha: f64) -> Vector {
        Vector::from_raw(self.values.iter().map(|v| v * alpha).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.values[index]
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Vector::new(values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {i} is {}", values[i])));
        }
        Ok(Matrix { rows, cols, values })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Matrix { rows, cols, values }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = vec![0.0; self.values.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.values[i * self.cols + j];
            }
        }
        Matrix::from_raw(self.cols, self.rows, out)
    }

    /// Dense product `self × other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            let dst = &mut out[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(Matrix::from_raw(self.rows, other.cols, out))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.values)
    }

    /// Elementwise sum.
    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        Ok(Matrix::from_raw(
            self.rows,
            self.cols,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        Ok(Matrix::from_raw(
            self.rows,
            self.cols,
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        ))
    }

    pub fn scale(&self, alpha: f64) -> Matrix {
        Matrix::from_raw(
            self.rows,
            self.cols,
            self.values.iter().map(|v| v * alpha).collect(),
        )
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

/// A composed meaning: a vector or an order-2 tensor. Rank-1 matrices are
/// kept factored as `left ⊗ right`.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Vector(Vector),
    Matrix(Matrix),
    Outer(Vector, Vector),
}

impl Representation {
    /// `(len, 0)` for vectors, `(rows, cols)` for matrices.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Representation::Vector(v) => (v.dim(), 0),
            Representation::Matrix(m) => (m.rows(), m.cols()),
            Representation::Outer(a, b) => (a.dim(), b.dim()),
        }
    }

    pub fn is_matrix(&self) -> bool {
        !matches!(self, Representation::Vector(_))
    }

    /// Row-major flattening; factored matrices are expanded.
    pub fn flatten(&self) -> Cow<'_, [f64]> {
        match self {
            Representation::Vector(v) => Cow::Borrowed(v.as_slice()),
            Representation::Matrix(m) => Cow::Borrowed(m.as_slice()),
            Representation::Outer(a, b) => Cow::Owned(outer(a, b).values),
        }
    }

    pub fn as_vector(&self) -> Option<&Vector> {
        match self {
            Representation::Vector(v) => Some(v),
            _ => None,
        }
    }
}

impl From<Vector> for Representation {
    fn from(v: Vector) -> Self {
        Representation::Vector(v)
    }
}

impl From<Matrix> for Representation {
    fn from(m: Matrix) -> Self {
        Representation::Matrix(m)
    }
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

pub fn add(a: &Vector, b: &Vector) -> Result<Vector> {
    check_dims(a.as_slice(), b.as_slice())?;
    Ok(Vector::from_raw(
        a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect(),
    ))
}

pub fn pointwise_mult(a: &Vector, b: &Vector) -> Result<Vector> {
    check_dims(a.as_slice(), b.as_slice())?;
    Ok(Vector::from_raw(
        a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect(),
    ))
}

/// `M[i][j] = a[i] * b[j]`.
pub fn outer(a: &Vector, b: &Vector) -> Matrix {
    let mut values = Vec::with_capacity(a.dim() * b.dim());
    for &x in &a.values {
        values.extend(b.values.iter().map(|y| x * y));
    }
    Matrix::from_raw(a.dim(), b.dim(), values)
}

/// `m × v`, or `mᵀ × v` when `transposed`.
pub fn matvec(m: &Matrix, v: &Vector, transposed: bool) -> Result<Vector> {
    if transposed {
        if m.rows != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.rows,
                actual: v.dim(),
            });
        }
        let mut out = vec![0.0; m.cols];
        for (i, &x) in v.values.iter().enumerate() {
            for (o, &w) in out.iter_mut().zip(m.row(i)) {
                *o += w * x;
            }
        }
        Ok(Vector::from_raw(out))
    } else {
        if m.cols != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.cols,
                actual: v.dim(),
            });
        }
        Ok(Vector::from_raw(
            (0..m.rows).map(|i| dot(m.row(i), &v.values)).collect(),
        ))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine over flat slices; zero when either operand has zero norm.
pub fn cosine_slices(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Ok(0.0);
    }
    Ok((ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine similarity of two representations of the same shape. Matrices use
/// the Frobenius inner product over the product of Frobenius norms.
pub fn cosine(a: &Representation, b: &Representation) -> Result<f64> {
    if a.shape() != b.shape() || a.is_matrix() != b.is_matrix() {
        let (ar, ac) = a.shape();
        let (br, bc) = b.shape();
        return Err(Error::ShapeMismatch(format!(
            "cannot compare {ar}x{ac} with {br}x{bc}"
        )));
    }
    match (a, b) {
        // <a⊗b, c⊗d>_F = (a·c)(b·d) and ‖a⊗b‖_F = ‖a‖‖b‖
        (Representation::Outer(x1, y1), Representation::Outer(x2, y2)) => {
            Ok((cosine_slices(x1.as_slice(), x2.as_slice())? * cosine_slices(y1.as_slice(), y2.as_slice())?)
                .clamp(-1.0, 1.0))
        }
        _ => cosine_slices(&a.flatten(), &b.flatten()),
    }
}

pub fn l2_normalize(v: &Vector) -> Vector {
    let n = v.norm();
    if n == 0.0 {
        return v.clone();
    }
    v.scale(1.0 / n)
}

pub(crate) fn l2_normalize_in_place(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

pub fn euclidean_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
