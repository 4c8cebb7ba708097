//! Bayesian fusion under Laplacian priors, solved by EM.
//!
//! With `S = F − I_v`, `T = I_f − I_v` and `Q = T − S`, each M-step minimizes
//!
//! ```text
//! J(S) = ‖M⊙S‖² + ‖N⊙Q‖² + ½w₁‖∇S‖² + ½w₂‖∇Q‖²
//! ```
//!
//! whose normal equations are `(2(M² + N²) + (w₁ + w₂)L)S = 2N²T + w₂LT`
//! with `L = ∇ᵀ∇`. The E-step refreshes the real per-pixel weights `M`, `N`
//! from the current moduli `|s|`, `|q|`.
//!
//! The quadratic is solved by splitting `S = W`: the `S` step is diagonal in
//! space and the `W` step is diagonal in frequency.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::fft::{iqfft_with, qfft_with, Fft2, QuaternionSpectrum};
use crate::quat::{gradient, gradient_adjoint, QuaternionMatrix, Stencil};

pub const WEIGHT_FLOOR: f64 = 1e-8;
pub const WEIGHT_CAP: f64 = 1e8;
pub const EPS_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EStepVariant {
    /// `sqrt(2|s|²/ε)`.
    Direct,
    /// `sqrt(2/(ε|s|²))`, the posterior mean of the inverse mixing variable.
    Reciprocal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QhbfParams {
    pub w1: f64,
    pub w2: f64,
    pub eps_s: f64,
    pub eps_q: f64,
    pub em_iters: usize,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub estep_variant: EStepVariant,
    /// Keep `ε_s`, `ε_q` at their initial values.
    pub freeze_eps: bool,
}

impl Default for QhbfParams {
    fn default() -> Self {
        Self {
            w1: 0.5,
            w2: 0.5,
            eps_s: 0.1,
            eps_q: 0.1,
            em_iters: 4,
            inner_tol: 1e-6,
            inner_max_iter: 100,
            estep_variant: EStepVariant::Direct,
            freeze_eps: false,
        }
    }
}

impl QhbfParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("qhbf {what} = {v}")));
        if !(self.w1 >= 0.0) {
            return bad("w1", self.w1);
        }
        if !(self.w2 >= 0.0) {
            return bad("w2", self.w2);
        }
        if !(self.eps_s > 0.0) {
            return bad("eps_s", self.eps_s);
        }
        if !(self.eps_q > 0.0) {
            return bad("eps_q", self.eps_q);
        }
        if !(self.inner_tol > 0.0) {
            return bad("inner_tol", self.inner_tol);
        }
        if self.inner_max_iter == 0 {
            return Err(Error::InvalidParameter("qhbf inner_max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// One E-step expectation, floored and capped.
pub fn expectation(modulus: f64, eps: f64, variant: EStepVariant) -> f64 {
    let m2 = modulus * modulus;
    let v = match variant {
        EStepVariant::Direct => (2.0 * m2 / eps).sqrt(),
        EStepVariant::Reciprocal => (2.0 / (eps * m2)).sqrt(),
    };
    if v.is_nan() {
        WEIGHT_CAP
    } else {
        v.clamp(WEIGHT_FLOOR, WEIGHT_CAP)
    }
}

pub fn e_step(
    s: &QuaternionMatrix,
    q: &QuaternionMatrix,
    eps_s: f64,
    eps_q: f64,
    variant: EStepVariant,
) -> (Vec<f64>, Vec<f64>) {
    let m = s.as_slice().iter().map(|x| expectation(x.modulus(), eps_s, variant)).collect();
    let n = q.as_slice().iter().map(|x| expectation(x.modulus(), eps_q, variant)).collect();
    (m, n)
}

/// The M-step quadratic `J(S)`.
pub fn m_step_objective(s: &QuaternionMatrix, t: &QuaternionMatrix, m: &[f64], n: &[f64], w1: f64, w2: f64) -> f64 {
    let q = t - s;
    let data: f64 = s
        .as_slice()
        .iter()
        .zip(q.as_slice())
        .zip(m.iter().zip(n))
        .map(|((sv, qv), (mv, nv))| mv * mv * sv.norm_sqr() + nv * nv * qv.norm_sqr())
        .sum();
    data + 0.5 * w1 * gradient(s).fro_norm_sqr() + 0.5 * w2 * gradient(&q).fro_norm_sqr()
}

fn laplacian_op(x: &QuaternionMatrix) -> QuaternionMatrix {
    gradient_adjoint(&gradient(x))
}

/// Relative residual `‖lhs·S − rhs‖_F / ‖rhs‖_F` of the normal equations.
pub fn normal_equation_residual(s: &QuaternionMatrix, t: &QuaternionMatrix, m: &[f64], n: &[f64], w1: f64, w2: f64) -> f64 {
    let diag: Vec<f64> = m.iter().zip(n).map(|(a, b)| 2.0 * (a * a + b * b)).collect();
    let n2: Vec<f64> = n.iter().map(|b| 2.0 * b * b).collect();
    let lhs = &s.scale_entries(&diag) + &laplacian_op(s).scale(w1 + w2);
    let rhs = &t.scale_entries(&n2) + &laplacian_op(t).scale(w2);
    let rn = rhs.fro_norm_sqr().sqrt();
    let en = (&lhs - &rhs).fro_norm_sqr().sqrt();
    if rn == 0.0 {
        en
    } else {
        en / rn
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MStepReport {
    pub s: QuaternionMatrix,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Minimize `J(S)` for fixed weights.
pub fn m_step(
    t: &QuaternionMatrix,
    m: &[f64],
    n: &[f64],
    w1: f64,
    w2: f64,
    tol: f64,
    max_iter: usize,
) -> Result<MStepReport> {
    let (rows, cols) = t.shape();
    if m.len() != t.len() || n.len() != t.len() {
        return Err(Error::DimensionMismatch("e-step weight maps".into()));
    }
    if m.iter().chain(n).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter("e-step weights must be positive and finite".into()));
    }
    let mm: Vec<f64> = m.iter().map(|a| a * a).collect();
    let nn: Vec<f64> = n.iter().map(|b| b * b).collect();
    let closed: Vec<f64> = mm.iter().zip(&nn).map(|(a, b)| b / (a + b)).collect();
    let s0 = t.scale_entries(&closed);
    if t.max_modulus() == 0.0 || w1 + w2 == 0.0 {
        let residual = normal_equation_residual(&s0, t, m, n, w1, w2);
        return Ok(MStepReport {
            s: s0,
            iterations: 0,
            residual,
            converged: true,
        });
    }

    let plan = Fft2::new(rows, cols);
    let lap_hat: Vec<f64> = {
        let gx = Stencil::grad_x().transfer(rows, cols);
        let gy = Stencil::grad_y().transfer(rows, cols);
        gx.iter().zip(&gy).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
    };
    let t_hat = qfft_with(&plan, t);
    let two_nn_t = t.scale_entries(&nn.iter().map(|v| 2.0 * v).collect::<Vec<_>>());

    let mean_diag = mm.iter().zip(&nn).map(|(a, b)| 2.0 * (a + b)).sum::<f64>() / mm.len() as f64;
    let mut rho = (mean_diag * (w1 + w2)).sqrt().max(1e-6);
    let mut s = s0.clone();
    let mut w = s0;
    let mut u = QuaternionMatrix::zeros(rows, cols);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for it in 1..=max_iter {
        iterations = it;
        // S step: per-pixel diagonal solve
        let denom: Vec<f64> = mm.iter().zip(&nn).map(|(a, b)| 1.0 / (2.0 * (a + b) + rho)).collect();
        s = (&two_nn_t + &(&w - &u).scale(rho)).scale_entries(&denom);

        // W step: per-frequency diagonal solve
        let w_old = w.clone();
        let su_hat = qfft_with(&plan, &(&s + &u));
        let planes: [Vec<Complex64>; 4] = std::array::from_fn(|k| {
            (0..rows * cols)
                .map(|f| {
                    (t_hat.planes[k][f] * (w2 * lap_hat[f]) + su_hat.planes[k][f] * rho)
                        / ((w1 + w2) * lap_hat[f] + rho)
                })
                .collect()
        });
        w = iqfft_with(&plan, &QuaternionSpectrum { rows, cols, planes });
        let primal = &s - &w;
        u = &u + &primal;

        residual = normal_equation_residual(&w, t, m, n, w1, w2);
        if residual <= tol {
            s = w;
            break;
        }
        let r_norm = primal.fro_norm_sqr().sqrt();
        let d_norm = rho * (&w - &w_old).fro_norm_sqr().sqrt();
        if r_norm > 10.0 * d_norm {
            rho *= 2.0;
            u = u.scale(0.5);
        } else if d_norm > 10.0 * r_norm {
            rho *= 0.5;
            u = u.scale(2.0);
        }
        if it == max_iter {
            s = w.clone();
        }
    }
    let converged = residual <= tol;
    if !converged {
        warn!("fusion M-step stopped after {iterations} iterations (residual {residual:.3e})");
    }
    Ok(MStepReport {
        s,
        iterations,
        residual,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmTraceEntry {
    pub iteration: usize,
    pub eps_s: f64,
    pub eps_q: f64,
    /// `J(S)` after the M-step, with that iteration's weights.
    pub objective: f64,
    pub inner_iterations: usize,
    pub inner_residual: f64,
}

#[derive(Debug, Clone)]
pub struct QhbfOutput {
    pub f: QuaternionMatrix,
    pub s: QuaternionMatrix,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    pub trace: Vec<EmTraceEntry>,
}

fn mean_modulus(x: &QuaternionMatrix) -> f64 {
    x.as_slice().iter().map(|q| q.modulus()).sum::<f64>() / x.len() as f64
}

pub fn run_qhbf(i_v: &QuaternionMatrix, i_f: &QuaternionMatrix, params: &QhbfParams) -> Result<QhbfOutput> {
    params.validate()?;
    i_v.check_same_shape(i_f, "infrared layer")?;
    if !i_v.is_finite() || !i_f.is_finite() {
        return Err(Error::NonFinite("fusion inputs"));
    }
    let t = i_f - i_v;
    let mut s = t.scale(0.5);
    let (mut eps_s, mut eps_q) = (params.eps_s, params.eps_q);
    let mut m = vec![1.0; t.len()];
    let mut n = vec![1.0; t.len()];
    let mut trace = Vec::with_capacity(params.em_iters);

    if t.max_modulus() == 0.0 {
        return Ok(QhbfOutput {
            f: i_v.clone(),
            s: QuaternionMatrix::zeros(t.rows(), t.cols()),
            m,
            n,
            trace,
        });
    }

    for iteration in 1..=params.em_iters {
        (m, n) = e_step(&s, &(&t - &s), eps_s, eps_q, params.estep_variant);
        let rep = m_step(&t, &m, &n, params.w1, params.w2, params.inner_tol, params.inner_max_iter)?;
        s = rep.s;
        trace.push(EmTraceEntry {
            iteration,
            eps_s,
            eps_q,
            objective: m_step_objective(&s, &t, &m, &n, params.w1, params.w2),
            inner_iterations: rep.iterations,
            inner_residual: rep.residual,
        });
        if !params.freeze_eps {
            eps_s = mean_modulus(&s).max(EPS_FLOOR);
            eps_q = mean_modulus(&(&t - &s)).max(EPS_FLOOR);
        }
    }
    Ok(QhbfOutput {
        f: &s + i_v,
        s,
        m,
        n,
        trace,
    })
}
