//! Lighting suppression: split a quaternion image into a lighting-suppressed
//! layer and a sparse gradient field by alternating a spectral quadratic solve
//! with hard-shrink and column soft-threshold steps.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcodec::pixel_intensity;
use crate::proxops::soft_threshold_columns;
use crate::quat::fft::{iqfft_with, qfft_with, Fft2, QuaternionSpectrum};
use crate::quat::{gradient, GradientField, NormKind, Quaternion, QuaternionMatrix, Stencil};

/// Guard added to the spectral denominator.
pub const SPECTRAL_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QlsParams {
    /// Weight of the second-order fidelity term.
    pub lambda: f64,
    /// Absolute hard-shrink threshold; `None` uses `tau_rel`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Threshold relative to the largest gradient modulus of the input.
    pub tau_rel: f64,
    pub mu2_init: f64,
    pub mu2_growth: f64,
    pub mu2_cap: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for QlsParams {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            tau: None,
            tau_rel: 0.05,
            mu2_init: 0.1,
            mu2_growth: 5.0,
            mu2_cap: 1e6,
            tol: 1e-5,
            max_iter: 30,
        }
    }
}

impl QlsParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidParameter(format!("qls {what} = {v}")))
        };
        if !(self.lambda > 0.0) {
            return bad("lambda", self.lambda);
        }
        if let Some(t) = self.tau {
            if !(t >= 0.0) {
                return bad("tau", t);
            }
        }
        if !(self.tau_rel >= 0.0) {
            return bad("tau_rel", self.tau_rel);
        }
        if !(self.mu2_init > 0.0) {
            return bad("mu2_init", self.mu2_init);
        }
        if !(self.mu2_growth >= 1.0) {
            return bad("mu2_growth", self.mu2_growth);
        }
        if !(self.mu2_cap >= self.mu2_init) {
            return bad("mu2_cap", self.mu2_cap);
        }
        if !(self.tol > 0.0) {
            return bad("tol", self.tol);
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("qls max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Zero every entry whose modulus is `≤ tau`.
pub fn hard_shrink(x: &QuaternionMatrix, tau: f64) -> QuaternionMatrix {
    x.map(|q| if q.modulus() <= tau { Quaternion::ZERO } else { q })
}

fn hard_shrink_field(g: &GradientField, tau: f64) -> GradientField {
    g.map(|m| hard_shrink(m, tau))
}

/// Precomputed spectra for the lighting quadratic on one grid.
#[derive(Debug, Clone)]
pub struct LightingSolver {
    plan: Fft2,
    gx: Vec<Complex64>,
    gy: Vec<Complex64>,
    lap_sq: Vec<f64>,
    grad_sq: Vec<f64>,
}

impl LightingSolver {
    pub fn new(rows: usize, cols: usize) -> Self {
        let gx = Stencil::grad_x().transfer(rows, cols);
        let gy = Stencil::grad_y().transfer(rows, cols);
        let lap_sq = Stencil::laplacian()
            .transfer(rows, cols)
            .iter()
            .map(|z| z.norm_sqr())
            .collect();
        let grad_sq = gx.iter().zip(&gy).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
        Self {
            plan: Fft2::new(rows, cols),
            gx,
            gy,
            lap_sq,
            grad_sq,
        }
    }

    /// Minimizer of `λ‖ΔI − ΔL‖² + (μ/2)‖∇I − G‖²` with the mean of `L` kept.
    pub fn solve(&self, l: &QuaternionMatrix, g: &GradientField, lambda: f64, mu: f64) -> QuaternionMatrix {
        let ls = qfft_with(&self.plan, l);
        let gxs = qfft_with(&self.plan, &g.x);
        let gys = qfft_with(&self.plan, &g.y);
        let planes = std::array::from_fn(|k| {
            let mut out = Vec::with_capacity(ls.planes[k].len());
            for f in 0..ls.planes[k].len() {
                if f == 0 {
                    out.push(ls.planes[k][0]);
                    continue;
                }
                let num = ls.planes[k][f] * (2.0 * lambda * self.lap_sq[f])
                    + (self.gx[f].conj() * gxs.planes[k][f] + self.gy[f].conj() * gys.planes[k][f]) * mu;
                let den = 2.0 * lambda * self.lap_sq[f] + mu * self.grad_sq[f] + SPECTRAL_EPS;
                out.push(num / den);
            }
            out
        });
        iqfft_with(
            &self.plan,
            &QuaternionSpectrum {
                rows: l.rows(),
                cols: l.cols(),
                planes,
            },
        )
    }
}

/// Objective of the lighting quadratic, used by tests and the trace.
pub fn lighting_quadratic_objective(
    i: &QuaternionMatrix,
    l: &QuaternionMatrix,
    g: &GradientField,
    lambda: f64,
    mu: f64,
) -> f64 {
    let lap = Stencil::laplacian();
    let fid = (&lap.apply(i) - &lap.apply(l)).fro_norm_sqr();
    let gi = gradient(i);
    let fit = gi.zip_map(g, |a, b| a - b).fro_norm_sqr();
    lambda * fid + 0.5 * mu * fit
}

/// Unprojected quadratic solve.
pub fn solve_lighting_quadratic(
    l: &QuaternionMatrix,
    g: &GradientField,
    lambda: f64,
    mu: f64,
) -> Result<QuaternionMatrix> {
    check_field(l, g)?;
    Ok(LightingSolver::new(l.rows(), l.cols()).solve(l, g, lambda, mu))
}

fn check_field(l: &QuaternionMatrix, g: &GradientField) -> Result<()> {
    if g.x.shape() != l.shape() || g.y.shape() != l.shape() {
        return Err(Error::DimensionMismatch(format!(
            "image {:?} vs gradient field {:?}/{:?}",
            l.shape(),
            g.x.shape(),
            g.y.shape()
        )));
    }
    Ok(())
}

/// Per-pixel projection enforcing `0 ≤ intensity(I) ≤ intensity(L)` by
/// rescaling the imaginary triple.
pub fn project_intensity(i: &QuaternionMatrix, l: &QuaternionMatrix) -> QuaternionMatrix {
    i.zip_map(l, |q, lq| {
        let m = pixel_intensity(q);
        let bound = pixel_intensity(lq).max(0.0);
        let triple = Quaternion::pure(q.b, q.c, q.d);
        if m < 0.0 || (m > bound && bound == 0.0) {
            Quaternion::ZERO
        } else if m > bound {
            triple.scale(bound / m)
        } else {
            triple
        }
    })
}

/// Quadratic solve followed by the intensity projection.
pub fn update_lighting_layer(
    l: &QuaternionMatrix,
    g: &GradientField,
    lambda: f64,
    mu2: f64,
) -> Result<QuaternionMatrix> {
    Ok(project_intensity(&solve_lighting_quadratic(l, g, lambda, mu2)?, l))
}

/// Affine intensity stretch to `[0, 1]`, applied as a per-pixel scalar.
pub fn normalize_intensity(i: &QuaternionMatrix) -> QuaternionMatrix {
    let vals: Vec<f64> = i.as_slice().iter().map(|&q| pixel_intensity(q)).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 1e-12) {
        return i.clone();
    }
    let data = i
        .as_slice()
        .iter()
        .zip(&vals)
        .map(|(&q, &m)| {
            let t = (m - lo) / (hi - lo);
            if m.abs() > 1e-15 {
                Quaternion::pure(q.b, q.c, q.d).scale(t / m)
            } else {
                Quaternion::pure(t, t, t)
            }
        })
        .collect();
    QuaternionMatrix::from_vec(i.rows(), i.cols(), data).expect("shape unchanged")
}

#[derive(Debug, Clone, PartialEq)]
pub struct QlsTraceEntry {
    pub iteration: usize,
    pub mu2: f64,
    pub rel_change: f64,
    /// `‖G − H(∇I)‖_F`.
    pub feasibility: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct QlsOutput {
    /// Intensity-normalized lighting-suppressed layer.
    pub i: QuaternionMatrix,
    /// Same layer before normalization.
    pub i_raw: QuaternionMatrix,
    pub g: GradientField,
    /// `L − I_raw`, the removed bright layer.
    pub bright: QuaternionMatrix,
    pub tau: f64,
    pub trace: Vec<QlsTraceEntry>,
    pub converged: bool,
}

fn rel_change(new: &QuaternionMatrix, old: &QuaternionMatrix) -> f64 {
    let diff = (new - old).max_modulus();
    let scale = new.max_modulus();
    if diff == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        diff / scale
    }
}

pub fn run_qls(l: &QuaternionMatrix, params: &QlsParams) -> Result<QlsOutput> {
    params.validate()?;
    if !l.is_finite() {
        return Err(Error::NonFinite("qls input"));
    }
    let (rows, cols) = l.shape();
    let solver = LightingSolver::new(rows, cols);
    let grad_l = gradient(l);
    let tau = params.tau.unwrap_or(params.tau_rel * grad_l.max_modulus());

    let mut g = hard_shrink_field(&grad_l, tau);
    let mut y5 = GradientField::zeros(rows, cols);
    let mut mu = params.mu2_init;
    let mut i_prev = l.clone();
    let mut i = l.clone();
    let mut trace = Vec::new();
    let mut converged = false;

    for iteration in 1..=params.max_iter {
        let g_eff = g.zip_map(&y5, |a, b| a.add_scaled(b, 1.0 / mu));
        i = project_intensity(&solver.solve(l, &g_eff, params.lambda, mu), l);

        let h = hard_shrink_field(&gradient(&i), tau);
        let arg = h.zip_map(&y5, |a, b| a.add_scaled(b, -1.0 / mu));
        g = GradientField::from_stacked(&soft_threshold_columns(&arg.stacked(), 1.0 / mu));
        let resid = g.zip_map(&h, |a, b| a - b);
        y5 = y5.zip_map(&resid, |a, b| a.add_scaled(b, mu));

        let lap = Stencil::laplacian();
        let fid = (&lap.apply(&i) - &lap.apply(l)).fro_norm_sqr();
        let feas_sq = resid.fro_norm_sqr();
        let objective = h.x.norm(NormKind::L1)
            + h.y.norm(NormKind::L1)
            + params.lambda * fid
            + y5.inner(&resid)
            + 0.5 * mu * feas_sq;

        let rel = rel_change(&i, &i_prev);
        trace.push(QlsTraceEntry {
            iteration,
            mu2: mu,
            rel_change: rel,
            feasibility: feas_sq.sqrt(),
            objective,
        });
        mu = (mu * params.mu2_growth).min(params.mu2_cap);
        i_prev = i.clone();
        if rel < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!(
            "lighting suppression stopped after {} iterations (last relative change {:.3e})",
            params.max_iter,
            trace.last().map_or(f64::NAN, |t| t.rel_change)
        );
    }

    let bright = l - &i;
    Ok(QlsOutput {
        i: normalize_intensity(&i),
        i_raw: i,
        g,
        bright,
        tau,
        trace,
        converged,
    })
}
