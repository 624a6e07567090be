//! Flat Euclidean-space vectors with a symmetric-matrix view.
//!
//! Every solver in this crate works on [`Point`]s: plain real vectors or
//! densely stored symmetric matrices. Both share one representation (a flat
//! coordinate list), so inner products, norms and affine updates are the same
//! code path regardless of shape, and the Frobenius inner product of two
//! symmetric matrices is just the dot product of their entries.

use crate::error::{Error, Result};

/// Shape tag of a [`Point`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Vector in ℝⁿ.
    Vector(usize),
    /// Symmetric n×n matrix, stored dense row-major (n² entries).
    SymMatrix(usize),
}

impl Shape {
    /// Number of stored coordinates.
    pub fn len(&self) -> usize {
        match *self {
            Shape::Vector(n) => n,
            Shape::SymMatrix(n) => n * n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An element of the ambient Euclidean space.
///
/// Points are immutable values; all arithmetic returns new points. Validated
/// constructors reject non-finite entries, and matrix construction
/// symmetrizes its input as `(M + Mᵀ)/2` so asymmetry can never accumulate
/// downstream.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    shape: Shape,
    data: Vec<f64>,
}

impl Point {
    /// Vector point from raw coordinates. Rejects NaN and ±∞.
    pub fn vector(data: Vec<f64>) -> Result<Self> {
        check_finite(&data)?;
        Ok(Point {
            shape: Shape::Vector(data.len()),
            data,
        })
    }

    /// Symmetric-matrix point from a dense row-major n×n buffer.
    ///
    /// The input is symmetrized as `(M + Mᵀ)/2`; non-finite entries are
    /// rejected.
    pub fn sym_matrix(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::BadMatrixLength {
                expected: n * n,
                got: data.len(),
            });
        }
        check_finite(&data)?;
        let mut sym = data;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (sym[i * n + j] + sym[j * n + i]);
                sym[i * n + j] = avg;
                sym[j * n + i] = avg;
            }
        }
        Ok(Point {
            shape: Shape::SymMatrix(n),
            data: sym,
        })
    }

    pub fn zeros(shape: Shape) -> Self {
        Point {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    /// Internal constructor for computed data; skips validation.
    pub(crate) fn from_parts(shape: Shape, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.len(), data.len());
        Point { shape, data }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Number of stored coordinates (n² for a symmetric matrix).
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Matrix view `(n, entries)` if this point is a symmetric matrix.
    pub fn as_sym(&self) -> Option<(usize, &[f64])> {
        match self.shape {
            Shape::SymMatrix(n) => Some((n, &self.data)),
            Shape::Vector(_) => None,
        }
    }

    /// Inner product; Frobenius inner product for symmetric matrices.
    ///
    /// Panics on shape mismatch.
    pub fn inner(&self, other: &Point) -> f64 {
        assert_eq!(
            self.shape, other.shape,
            "inner product requires matching shapes"
        );
        dot(&self.data, &other.data)
    }

    /// Euclidean / Frobenius norm.
    pub fn norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    /// Maximum norm over stored coordinates.
    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `self + t * other`.
    pub fn add_scaled(&self, t: f64, other: &Point) -> Point {
        assert_eq!(self.shape, other.shape, "add_scaled requires matching shapes");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + t * b)
            .collect();
        Point::from_parts(self.shape, data)
    }

    pub fn scale(&self, t: f64) -> Point {
        Point::from_parts(self.shape, self.data.iter().map(|a| a * t).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl std::ops::Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        self.add_scaled(-1.0, rhs)
    }
}

impl std::ops::Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        self.add_scaled(1.0, rhs)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_finite(data: &[f64]) -> Result<()> {
    for (index, &value) in data.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteEntry { index, value });
        }
    }
    Ok(())
}
