//! Detail injection: add infrared and visible detail layers back into the
//! lighting-suppressed visible image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcodec::raw_intensity;
use crate::quat::QuaternionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum QaumMode {
    Summation,
    Adaptive {
        #[serde(default = "default_g_min")]
        g_min: f64,
        #[serde(default = "default_g_max")]
        g_max: f64,
    },
}

fn default_g_min() -> f64 {
    0.5
}

fn default_g_max() -> f64 {
    1.5
}

impl Default for QaumMode {
    fn default() -> Self {
        QaumMode::Summation
    }
}

impl QaumMode {
    pub fn adaptive() -> Self {
        QaumMode::Adaptive {
            g_min: default_g_min(),
            g_max: default_g_max(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let QaumMode::Adaptive { g_min, g_max } = *self {
            if !(g_min >= 0.0 && g_max >= g_min && g_max.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "gain bounds must satisfy 0 <= g_min <= g_max, got [{g_min}, {g_max}]"
                )));
            }
        }
        Ok(())
    }
}

/// `g_min + (g_max − g_min)·minmax(driver)`; a constant driver maps to `g_min`.
pub fn gain_map(driver: &[f64], g_min: f64, g_max: f64) -> Vec<f64> {
    let lo = driver.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = driver.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    driver
        .iter()
        .map(|&v| {
            let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
            (g_min + (g_max - g_min) * t).clamp(g_min, g_max)
        })
        .collect()
}

/// `I_v + Λ₁⊙D_f + Λ₂⊙D_v` with explicit real gain maps.
pub fn enhance_with_gains(
    i_v: &QuaternionMatrix,
    d_f: &QuaternionMatrix,
    d_v: &QuaternionMatrix,
    gain_f: &[f64],
    gain_v: &[f64],
) -> Result<QuaternionMatrix> {
    i_v.check_same_shape(d_f, "infrared detail")?;
    i_v.check_same_shape(d_v, "visible detail")?;
    if gain_f.len() != i_v.len() || gain_v.len() != i_v.len() {
        return Err(Error::DimensionMismatch("gain map size".into()));
    }
    Ok(&(i_v + &d_f.scale_entries(gain_f)) + &d_v.scale_entries(gain_v))
}

pub fn enhance(
    i_v: &QuaternionMatrix,
    d_f: &QuaternionMatrix,
    d_v: &QuaternionMatrix,
    mode: QaumMode,
) -> Result<QuaternionMatrix> {
    mode.validate()?;
    i_v.check_same_shape(d_f, "infrared detail")?;
    i_v.check_same_shape(d_v, "visible detail")?;
    match mode {
        QaumMode::Summation => Ok(&(i_v + d_f) + d_v),
        QaumMode::Adaptive { g_min, g_max } => {
            let gain_f = gain_map(&d_f.moduli(), g_min, g_max);
            let gain_v = gain_map(&raw_intensity(i_v), g_min, g_max);
            enhance_with_gains(i_v, d_f, d_v, &gain_f, &gain_v)
        }
    }
}
