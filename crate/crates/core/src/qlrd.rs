//! Low-rank decomposition `I = AB + D + E` solved by linearized ADMM with
//! adaptive penalty, plus the two-stage feature-learning driver.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proxops::{pssv_wsp_shrink, soft_threshold_columns, soft_threshold_entries, ShrinkParams, Weights};
use crate::qls::{run_qls, QlsOutput, QlsParams};
use crate::quat::qsvd::qsvd;
use crate::quat::{NormKind, QuaternionMatrix};

/// Proximal rule for the detail layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetailShrink {
    /// Column soft-threshold on `‖col‖₁`.
    Columns,
    /// Per-entry quaternion soft-threshold.
    Entries,
}

impl DetailShrink {
    pub fn apply(self, y: &QuaternionMatrix, tau: f64) -> QuaternionMatrix {
        match self {
            DetailShrink::Columns => soft_threshold_columns(y, tau),
            DetailShrink::Entries => soft_threshold_entries(y, tau),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QlrdParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p: f64,
    /// Leading singular values of the factors left unshrunk.
    pub n: usize,
    /// Factor rank; `None` picks `max(4, min(H, W)/8)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub mu1_init: f64,
    pub mu1_growth: f64,
    pub mu1_cap: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// `w_k = 1/(σ_k + weight_eps)` in the factor shrinkage.
    pub weight_eps: f64,
    pub detail_shrink: DetailShrink,
}

impl Default for QlrdParams {
    fn default() -> Self {
        Self::infrared()
    }
}

impl QlrdParams {
    pub fn infrared() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.1,
            gamma: 100.0,
            p: 1.0,
            n: 10,
            rank: None,
            mu1_init: 0.5,
            mu1_growth: 1.1,
            mu1_cap: 1e6,
            tol: 1e-5,
            max_iter: 100,
            weight_eps: 1e-4,
            detail_shrink: DetailShrink::Columns,
        }
    }

    pub fn visible() -> Self {
        Self {
            p: 0.99,
            beta: 0.01,
            n: 5,
            mu1_init: 0.1,
            ..Self::infrared()
        }
    }

    pub fn resolved_rank(&self, rows: usize, cols: usize) -> usize {
        self.rank
            .unwrap_or_else(|| (rows.min(cols) / 8).max(4))
            .min(rows.min(cols))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("qlrd {what} = {v}")));
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("mu1_init", self.mu1_init)] {
            if !(v > 0.0) {
                return bad(name, v);
            }
        }
        if !(self.gamma >= 0.0) {
            return bad("gamma", self.gamma);
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad("p", self.p);
        }
        if !(self.mu1_growth >= 1.0) {
            return bad("mu1_growth", self.mu1_growth);
        }
        if !(self.mu1_cap >= self.mu1_init) {
            return bad("mu1_cap", self.mu1_cap);
        }
        if !(self.tol > 0.0) {
            return bad("tol", self.tol);
        }
        if !(self.weight_eps > 0.0) {
            return bad("weight_eps", self.weight_eps);
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("qlrd max_iter must be >= 1".into()));
        }
        if self.rank == Some(0) {
            return Err(Error::InvalidParameter("qlrd rank must be >= 1".into()));
        }
        Ok(())
    }

    fn shrink(&self, mu: f64) -> ShrinkParams {
        ShrinkParams {
            lambda: self.alpha / mu,
            p: self.p,
            n: self.n,
            weights: Weights::InverseMagnitude { eps: self.weight_eps },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QlrdTraceEntry {
    pub iteration: usize,
    pub mu1: f64,
    pub rel_change: f64,
    /// `‖I − Z − D − E‖_F`.
    pub feasibility: f64,
    /// `α(‖A‖²_F + ‖B‖²_F)/2 + β‖D‖₁ + γ‖E‖²_F`.
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub z: QuaternionMatrix,
    pub d: QuaternionMatrix,
    pub e: QuaternionMatrix,
    pub a: QuaternionMatrix,
    pub b: QuaternionMatrix,
    pub trace: Vec<QlrdTraceEntry>,
    pub converged: bool,
}

/// `A = R₁(BBᴴ + I)⁻¹`, `R₁ = (Z + Y₂/μ)Bᴴ + J − Y₃/μ`.
pub fn update_a(
    z: &QuaternionMatrix,
    b: &QuaternionMatrix,
    j: &QuaternionMatrix,
    y2: &QuaternionMatrix,
    y3: &QuaternionMatrix,
    mu: f64,
) -> Result<QuaternionMatrix> {
    let bh = b.conj_transpose();
    let r1 = &z.add_scaled(y2, 1.0 / mu).matmul(&bh)? + &j.add_scaled(y3, -1.0 / mu);
    let gram = &b.matmul(&bh)? + &QuaternionMatrix::identity(b.rows());
    gram.solve_right(&r1)
}

/// `B = (AᴴA + I)⁻¹R₂`, `R₂ = Aᴴ(Z + Y₂/μ) + P − Y₄/μ`.
pub fn update_b(
    a: &QuaternionMatrix,
    z: &QuaternionMatrix,
    p: &QuaternionMatrix,
    y2: &QuaternionMatrix,
    y4: &QuaternionMatrix,
    mu: f64,
) -> Result<QuaternionMatrix> {
    let ah = a.conj_transpose();
    let r2 = &ah.matmul(&z.add_scaled(y2, 1.0 / mu))? + &p.add_scaled(y4, -1.0 / mu);
    let gram = &ah.matmul(a)? + &QuaternionMatrix::identity(a.cols());
    gram.solve_left(&r2)
}

/// `Z = (I − D − E + Y₁/μ + AB − Y₂/μ)/2`.
#[allow(clippy::too_many_arguments)]
pub fn update_z(
    i: &QuaternionMatrix,
    d: &QuaternionMatrix,
    e: &QuaternionMatrix,
    a: &QuaternionMatrix,
    b: &QuaternionMatrix,
    y1: &QuaternionMatrix,
    y2: &QuaternionMatrix,
    mu: f64,
) -> Result<QuaternionMatrix> {
    let ab = a.matmul(b)?;
    let first = (&(i - d) - e).add_scaled(y1, 1.0 / mu);
    let second = ab.add_scaled(y2, -1.0 / mu);
    Ok((&first + &second).scale(0.5))
}

/// `E = μ(I − Z − D)/(2γ + μ)`.
pub fn update_e(
    i: &QuaternionMatrix,
    z: &QuaternionMatrix,
    d: &QuaternionMatrix,
    gamma: f64,
    mu: f64,
) -> QuaternionMatrix {
    (&(i - z) - d).scale(mu / (2.0 * gamma + mu))
}

/// Multipliers of the four equality constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub y1: QuaternionMatrix,
    pub y2: QuaternionMatrix,
    pub y3: QuaternionMatrix,
    pub y4: QuaternionMatrix,
}

/// `Y₁ += μ(I − Z − D − E)`, `Y₂ += μ(Z − AB)`, `Y₃ += μ(A − J)`, `Y₄ += μ(B − P)`.
#[allow(clippy::too_many_arguments)]
pub fn update_multipliers(
    y: &Multipliers,
    i: &QuaternionMatrix,
    z: &QuaternionMatrix,
    d: &QuaternionMatrix,
    e: &QuaternionMatrix,
    ab: &QuaternionMatrix,
    a: &QuaternionMatrix,
    j: &QuaternionMatrix,
    b: &QuaternionMatrix,
    p: &QuaternionMatrix,
    mu: f64,
) -> Multipliers {
    Multipliers {
        y1: y.y1.add_scaled(&(&(&(i - z) - d) - e), mu),
        y2: y.y2.add_scaled(&(z - ab), mu),
        y3: y.y3.add_scaled(&(a - j), mu),
        y4: y.y4.add_scaled(&(b - p), mu),
    }
}

fn rel_change(z: &QuaternionMatrix, z_old: &QuaternionMatrix, d: &QuaternionMatrix, d_old: &QuaternionMatrix) -> f64 {
    let diff = (z - z_old).max_modulus().max((d - d_old).max_modulus());
    let scale = z.max_modulus().max(d.max_modulus());
    if diff == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        diff / scale
    }
}

pub fn run_qlrd(i: &QuaternionMatrix, params: &QlrdParams) -> Result<Decomposition> {
    params.validate()?;
    if !i.is_finite() {
        return Err(Error::NonFinite("qlrd input"));
    }
    let (rows, cols) = i.shape();
    let r = params.resolved_rank(rows, cols);

    let svd = qsvd(i)?.truncate(r);
    let root: Vec<f64> = svd.s.iter().map(|s| s.sqrt()).collect();
    let mut a = QuaternionMatrix::from_fn(rows, r, |row, k| svd.u[(row, k)].scale(root[k]));
    let mut b = QuaternionMatrix::from_fn(r, cols, |k, col| svd.v[(col, k)].conj().scale(root[k]));
    let mut z = a.matmul(&b)?;
    let mut d = QuaternionMatrix::zeros(rows, cols);
    let mut e = QuaternionMatrix::zeros(rows, cols);
    let mut j = a.clone();
    let mut p = b.clone();
    let mut y = Multipliers {
        y1: QuaternionMatrix::zeros(rows, cols),
        y2: QuaternionMatrix::zeros(rows, cols),
        y3: QuaternionMatrix::zeros(rows, r),
        y4: QuaternionMatrix::zeros(r, cols),
    };
    let mut mu = params.mu1_init;
    let mut trace = Vec::new();
    let mut converged = false;

    for iteration in 1..=params.max_iter {
        let (z_old, d_old) = (z.clone(), d.clone());
        a = update_a(&z, &b, &j, &y.y2, &y.y3, mu)?;
        b = update_b(&a, &z, &p, &y.y2, &y.y4, mu)?;
        z = update_z(i, &d, &e, &a, &b, &y.y1, &y.y2, mu)?;

        let shrink = params.shrink(mu);
        j = pssv_wsp_shrink(&a.add_scaled(&y.y3, 1.0 / mu), &shrink)?;
        p = pssv_wsp_shrink(&b.add_scaled(&y.y4, 1.0 / mu).conj_transpose(), &shrink)?.conj_transpose();

        let d_arg = (&(i - &z) - &e).add_scaled(&y.y1, 1.0 / mu);
        d = params.detail_shrink.apply(&d_arg, params.beta / mu);
        e = update_e(i, &z, &d, params.gamma, mu);

        let ab = a.matmul(&b)?;
        y = update_multipliers(&y, i, &z, &d, &e, &ab, &a, &j, &b, &p, mu);

        let rel = rel_change(&z, &z_old, &d, &d_old);
        let feasibility = (&(&(i - &z) - &d) - &e).fro_norm_sqr().sqrt();
        let objective = 0.5 * params.alpha * (a.fro_norm_sqr() + b.fro_norm_sqr())
            + params.beta * d.norm(NormKind::L1)
            + params.gamma * e.fro_norm_sqr();
        trace.push(QlrdTraceEntry {
            iteration,
            mu1: mu,
            rel_change: rel,
            feasibility,
            objective,
        });
        mu = (mu * params.mu1_growth).min(params.mu1_cap);
        if rel < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!(
            "low-rank decomposition stopped after {} iterations (last relative change {:.3e})",
            params.max_iter,
            trace.last().map_or(f64::NAN, |t| t.rel_change)
        );
    }
    Ok(Decomposition {
        z,
        d,
        e,
        a,
        b,
        trace,
        converged,
    })
}

#[derive(Debug, Clone)]
pub struct QlvflOutput {
    pub qls: QlsOutput,
    pub decomposition: Decomposition,
}

/// Lighting suppression followed by low-rank decomposition of its output.
pub fn run_qlvfl(l: &QuaternionMatrix, qls_params: &QlsParams, qlrd_params: &QlrdParams) -> Result<QlvflOutput> {
    let qls = run_qls(l, qls_params)?;
    let decomposition = run_qlrd(&qls.i, qlrd_params)?;
    Ok(QlvflOutput { qls, decomposition })
}
