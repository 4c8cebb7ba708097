use std::ops::{Add, Index, IndexMut, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::scalar::Quaternion;
use crate::error::{Error, Result};

/// Dense row-major matrix of quaternions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    Fro,
    Nuclear,
}

impl QuaternionMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    /// Identity with real unit diagonal.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Assemble from four row-major component planes.
    pub fn from_planes(rows: usize, cols: usize, planes: [&[f64]; 4]) -> Result<Self> {
        if planes.iter().any(|p| p.len() != rows * cols) {
            return Err(Error::DimensionMismatch(format!(
                "component plane length does not match {rows}x{cols}"
            )));
        }
        let data = (0..rows * cols)
            .map(|i| Quaternion::new(planes[0][i], planes[1][i], planes[2][i], planes[3][i]))
            .collect();
        Ok(Self { rows, cols, data })
    }

    /// Row-major plane of component `k` (0 = real, 1..=3 = i, j, k).
    pub fn plane(&self, k: usize) -> Vec<f64> {
        self.data.iter().map(|q| q.components()[k]).collect()
    }

    pub fn planes(&self) -> [Vec<f64>; 4] {
        [self.plane(0), self.plane(1), self.plane(2), self.plane(3)]
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Quaternion] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Quaternion] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Quaternion> {
        self.data
    }

    pub fn column(&self, c: usize) -> Vec<Quaternion> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn is_pure(&self) -> bool {
        self.data.iter().all(|q| q.a == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    pub fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )))
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn map(&self, f: impl Fn(Quaternion) -> Quaternion) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&q| f(q)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> Self {
        debug_assert!(self.same_shape(other));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&p, &q)| f(p, q))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|q| q.scale(s))
    }

    /// Entrywise product with a real weight map of the same shape.
    pub fn scale_entries(&self, weights: &[f64]) -> Self {
        debug_assert_eq!(weights.len(), self.data.len());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(weights)
                .map(|(&q, &w)| q.scale(w))
                .collect(),
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Self {
        self.zip_map(other, |p, q| p + q.scale(s))
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.data.iter().map(|q| q.modulus()).collect()
    }

    /// Largest entry modulus (0 for an empty matrix).
    pub fn max_modulus(&self) -> f64 {
        self.data.iter().map(|q| q.modulus()).fold(0.0, f64::max)
    }

    pub fn fro_norm_sqr(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum()
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.data.iter().map(|q| q.modulus()).sum(),
            NormKind::Fro => self.fro_norm_sqr().sqrt(),
            NormKind::Nuclear => {
                if self.is_empty() || self.max_modulus() == 0.0 {
                    return 0.0;
                }
                match super::qsvd::singular_values(self) {
                    Ok(s) => s.iter().sum(),
                    Err(_) => f64::NAN,
                }
            }
        }
    }

    /// `Re tr(selfᴴ·other)`, the real inner product used by augmented Lagrangians.
    pub fn inner(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(p, q)| p.a * q.a + p.b * q.b + p.c * q.c + p.d * q.d)
            .sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, &p) in row.iter().enumerate() {
                if p == Quaternion::ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &q) in out_row.iter_mut().zip(rhs_row) {
                    *o += p * q;
                }
            }
        }
        Ok(out)
    }

    /// Vertical stack `[self; other]`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack {}x{} over {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Split rows into `[0, at)` and `[at, rows)`.
    pub fn split_rows(&self, at: usize) -> (Self, Self) {
        let at = at.min(self.rows);
        let top = Self {
            rows: at,
            cols: self.cols,
            data: self.data[..at * self.cols].to_vec(),
        };
        let bottom = Self {
            rows: self.rows - at,
            cols: self.cols,
            data: self.data[at * self.cols..].to_vec(),
        };
        (top, bottom)
    }

    /// Complex "column" representation `[A₁; −conj(A₂)]` (2H×W) of `A = A₁ + A₂·j`.
    ///
    /// This is the first block column of the complex adjoint, and it is
    /// compatible with products: `adjoint(A)·column_rep(X) = column_rep(A·X)`.
    pub fn to_column_rep(&self) -> DMatrix<Complex64> {
        let (h, w) = self.shape();
        let mut m = DMatrix::zeros(2 * h, w);
        for r in 0..h {
            for c in 0..w {
                let (z1, z2) = self[(r, c)].to_complex_pair();
                m[(r, c)] = z1;
                m[(h + r, c)] = -z2.conj();
            }
        }
        m
    }

    pub fn from_column_rep(m: &DMatrix<Complex64>) -> Self {
        let h = m.nrows() / 2;
        Self::from_fn(h, m.ncols(), |r, c| {
            Quaternion::from_complex_pair(m[(r, c)], -m[(h + r, c)].conj())
        })
    }

    /// Complex adjoint `[[A₁, A₂], [−conj(A₂), conj(A₁)]]` (2H×2W).
    pub fn complex_adjoint(&self) -> DMatrix<Complex64> {
        let (h, w) = self.shape();
        let mut m = DMatrix::zeros(2 * h, 2 * w);
        for r in 0..h {
            for c in 0..w {
                let (z1, z2) = self[(r, c)].to_complex_pair();
                m[(r, c)] = z1;
                m[(r, w + c)] = z2;
                m[(h + r, c)] = -z2.conj();
                m[(h + r, w + c)] = z1.conj();
            }
        }
        m
    }

    /// Solve `self·X = rhs` for square `self` through its complex adjoint.
    pub fn solve_left(&self, rhs: &Self) -> Result<Self> {
        if self.rows != self.cols || self.rows != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve {}x{} against {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let lu = self.complex_adjoint().lu();
        let x = lu
            .solve(&rhs.to_column_rep())
            .ok_or_else(|| Error::Solve("singular system matrix".into()))?;
        let out = Self::from_column_rep(&x);
        if !out.is_finite() {
            return Err(Error::Solve("non-finite solution".into()));
        }
        Ok(out)
    }

    /// Solve `X·self = rhs` for square `self`.
    pub fn solve_right(&self, rhs: &Self) -> Result<Self> {
        if self.rows != self.cols || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "right solve {}x{} against {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        // X·M = R  <=>  Mᴴ·Xᴴ = Rᴴ
        Ok(self
            .conj_transpose()
            .solve_left(&rhs.conj_transpose())?
            .conj_transpose())
    }
}

impl Index<(usize, usize)> for QuaternionMatrix {
    type Output = Quaternion;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QuaternionMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &QuaternionMatrix {
    type Output = QuaternionMatrix;
    fn add(self, rhs: &QuaternionMatrix) -> QuaternionMatrix {
        assert!(self.same_shape(rhs), "shape mismatch in matrix add");
        self.zip_map(rhs, |p, q| p + q)
    }
}

impl Sub for &QuaternionMatrix {
    type Output = QuaternionMatrix;
    fn sub(self, rhs: &QuaternionMatrix) -> QuaternionMatrix {
        assert!(self.same_shape(rhs), "shape mismatch in matrix sub");
        self.zip_map(rhs, |p, q| p - q)
    }
}
