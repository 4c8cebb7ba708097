//! Shrinkage operators: column soft-thresholding, generalized soft-thresholding
//! for weighted Schatten-p penalties, and partial-sum singular value shrinkage.

use crate::error::{Error, Result};
use crate::quat::qsvd::{qsvd, reassemble};
use crate::quat::QuaternionMatrix;

/// Iteration cap for the fixed-point inner loop of [`gst_scalar`].
pub const GST_MAX_ITER: usize = 100;
/// Step size at which the fixed-point loop stops.
pub const GST_STEP_TOL: f64 = 1e-12;

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Schatten exponent p must lie in (0, 1], got {p}"
        )));
    }
    Ok(())
}

/// Threshold below which [`gst_scalar`] returns zero.
pub fn gst_threshold(lambda_w: f64, p: f64) -> f64 {
    if p == 1.0 {
        return lambda_w;
    }
    let base = 2.0 * lambda_w * (1.0 - p);
    base.powf(1.0 / (2.0 - p)) + lambda_w * p * base.powf((p - 1.0) / (2.0 - p))
}

/// Minimizer of `½(σ_y − x)² + λw·x^p` over `x ≥ 0`.
pub fn gst_scalar(sigma_y: f64, lambda: f64, w: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    let lw = lambda * w;
    if !(sigma_y >= 0.0) || !(lw >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gst needs sigma_y >= 0 and lambda*w >= 0, got {sigma_y}, {lw}"
        )));
    }
    if lw == 0.0 {
        return Ok(sigma_y);
    }
    if p == 1.0 {
        return Ok((sigma_y - lw).max(0.0));
    }
    if sigma_y <= gst_threshold(lw, p) {
        return Ok(0.0);
    }
    let mut x = sigma_y;
    for _ in 0..GST_MAX_ITER {
        let next = sigma_y - lw * p * x.powf(p - 1.0);
        let step = (next - x).abs();
        x = next;
        if step < GST_STEP_TOL {
            break;
        }
    }
    Ok(x)
}

/// Per-singular-value weights for the Schatten-p penalty.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Uniform(f64),
    /// Explicit weight per singular value, in descending-σ order.
    PerValue(Vec<f64>),
    /// `w_k = 1/(σ_k + eps)`, from the singular values of the input.
    InverseMagnitude { eps: f64 },
}

impl Default for Weights {
    fn default() -> Self {
        Weights::InverseMagnitude { eps: 1e-4 }
    }
}

impl Weights {
    fn resolve(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        let w = match self {
            Weights::Uniform(v) => vec![*v; sigma.len()],
            Weights::PerValue(v) => {
                if v.len() < sigma.len() {
                    return Err(Error::InvalidParameter(format!(
                        "{} weights for {} singular values",
                        v.len(),
                        sigma.len()
                    )));
                }
                v[..sigma.len()].to_vec()
            }
            Weights::InverseMagnitude { eps } => sigma.iter().map(|s| 1.0 / (s + eps)).collect(),
        };
        if w.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be non-negative".into()));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkParams {
    pub lambda: f64,
    pub p: f64,
    /// Leading singular values left untouched.
    pub n: usize,
    pub weights: Weights,
}

impl ShrinkParams {
    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Shrink the singular spectrum of `y`: the leading `n` values are kept, the
/// rest go through [`gst_scalar`] with their weights.
pub fn pssv_wsp_shrink(y: &QuaternionMatrix, params: &ShrinkParams) -> Result<QuaternionMatrix> {
    params.validate()?;
    let svd = qsvd(y)?;
    let weights = params.weights.resolve(&svd.s)?;
    let shrunk = svd
        .s
        .iter()
        .zip(&weights)
        .enumerate()
        .map(|(k, (&s, &w))| {
            if k < params.n {
                Ok(s)
            } else {
                gst_scalar(s, params.lambda, w, params.p)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(reassemble(&svd.u, &shrunk, &svd.v))
}

/// Scale each column by `max(‖col‖₁ − τ, 0)/‖col‖₁`, where `‖·‖₁` sums entry moduli.
pub fn soft_threshold_columns(y: &QuaternionMatrix, tau: f64) -> QuaternionMatrix {
    let (rows, cols) = y.shape();
    let mut col_l1 = vec![0.0; cols];
    for r in 0..rows {
        for (c, acc) in col_l1.iter_mut().enumerate() {
            *acc += y[(r, c)].modulus();
        }
    }
    let factor: Vec<f64> = col_l1
        .iter()
        .map(|&n| if n > tau && n > 0.0 { (n - tau) / n } else { 0.0 })
        .collect();
    QuaternionMatrix::from_fn(rows, cols, |r, c| y[(r, c)].scale(factor[c]))
}

/// Entrywise quaternion soft-threshold: `q ↦ max(|q| − τ, 0)·q/|q|`.
pub fn soft_threshold_entries(y: &QuaternionMatrix, tau: f64) -> QuaternionMatrix {
    y.map(|q| {
        let m = q.modulus();
        if m > tau && m > 0.0 {
            q.scale((m - tau) / m)
        } else {
            crate::quat::Quaternion::ZERO
        }
    })
}
