//! Quaternion scalars and matrices: arithmetic, QSVD, FFT and filters.

pub mod fft;
pub mod filter;
mod matrix;
pub mod qsvd;
mod scalar;

pub use fft::{iqfft, qfft, Fft2, QuaternionSpectrum};
pub use filter::{apply_filter, gradient, gradient_adjoint, FilterKind, GradientField, Stencil};
pub use matrix::{NormKind, QuaternionMatrix};
pub use qsvd::{qsvd, QsvdResult};
pub use scalar::{qmul, Quaternion};

use crate::error::Result;

pub fn matmul(a: &QuaternionMatrix, b: &QuaternionMatrix) -> Result<QuaternionMatrix> {
    a.matmul(b)
}

pub fn norm(a: &QuaternionMatrix, kind: NormKind) -> f64 {
    a.norm(kind)
}
