//! Component-wise 2-D DFT of quaternion matrices.
//!
//! Every filter in the pipeline has real coefficients, so the quaternion
//! transform decouples into four independent transforms of the real
//! component planes. Forward is unnormalized; inverse scales by `1/(H·W)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::matrix::QuaternionMatrix;
use crate::error::{Error, Result};

/// Reusable row/column plans for one `rows × cols` grid.
#[derive(Clone)]
pub struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.rows * self.cols, "fft buffer size");
        let (row_plan, col_plan) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        for row in data.chunks_exact_mut(self.cols) {
            row_plan.process(row);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); self.rows];
        for c in 0..self.cols {
            for r in 0..self.rows {
                column[r] = data[r * self.cols + c];
            }
            col_plan.process(&mut column);
            for r in 0..self.rows {
                data[r * self.cols + c] = column[r];
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// Inverse transform including the `1/(H·W)` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let scale = 1.0 / (self.rows * self.cols) as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    pub fn forward_real(&self, plane: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = plane.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Inverse transform keeping the real part.
    pub fn inverse_real(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }
}

/// Spectra of the four component planes of a quaternion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionSpectrum {
    pub rows: usize,
    pub cols: usize,
    pub planes: [Vec<Complex64>; 4],
}

impl QuaternionSpectrum {
    /// Pointwise multiplication of every plane by a real-filter transfer function.
    pub fn multiply(&self, transfer: &[Complex64]) -> Self {
        let planes = self
            .planes
            .clone()
            .map(|p| p.iter().zip(transfer).map(|(a, b)| a * b).collect());
        Self {
            rows: self.rows,
            cols: self.cols,
            planes,
        }
    }
}

pub fn qfft_with(plan: &Fft2, a: &QuaternionMatrix) -> QuaternionSpectrum {
    let [p0, p1, p2, p3] = a.planes();
    QuaternionSpectrum {
        rows: a.rows(),
        cols: a.cols(),
        planes: [
            plan.forward_real(&p0),
            plan.forward_real(&p1),
            plan.forward_real(&p2),
            plan.forward_real(&p3),
        ],
    }
}

pub fn iqfft_with(plan: &Fft2, s: &QuaternionSpectrum) -> QuaternionMatrix {
    let planes = [
        plan.inverse_real(&s.planes[0]),
        plan.inverse_real(&s.planes[1]),
        plan.inverse_real(&s.planes[2]),
        plan.inverse_real(&s.planes[3]),
    ];
    QuaternionMatrix::from_planes(
        s.rows,
        s.cols,
        [&planes[0], &planes[1], &planes[2], &planes[3]],
    )
    .expect("spectrum planes match their grid")
}

/// Forward quaternion DFT.
pub fn qfft(a: &QuaternionMatrix) -> QuaternionSpectrum {
    qfft_with(&Fft2::new(a.rows(), a.cols()), a)
}

/// Inverse quaternion DFT (real part of each plane).
pub fn iqfft(s: &QuaternionSpectrum) -> Result<QuaternionMatrix> {
    if s.planes.iter().any(|p| p.len() != s.rows * s.cols) {
        return Err(Error::DimensionMismatch("spectrum plane size".into()));
    }
    Ok(iqfft_with(&Fft2::new(s.rows, s.cols), s))
}
