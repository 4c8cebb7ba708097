//! Quaternion SVD through the complex adjoint representation.
//!
//! For `A = A₁ + A₂·j` the adjoint `χ(A) = [[A₁, A₂], [−conj(A₂), conj(A₁)]]`
//! has every quaternion singular value twice. A complex singular vector
//! `[x; y]` of `χ(A)` maps back to the quaternion vector `x − conj(y)·j`, and
//! the two members of a pair span the same right quaternion line. We keep one
//! vector per pair, orthogonalizing inside clusters of (numerically) equal
//! quaternion singular values so that `U` and `V` stay orthonormal when the
//! complex solver returns an arbitrary basis of a degenerate subspace.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use super::matrix::QuaternionMatrix;
use super::scalar::Quaternion;
use crate::error::{Error, Result};

/// Relative tolerance for matching the duplicated adjoint singular values.
pub const PAIR_TOLERANCE: f64 = 1e-8;
/// Quaternion singular values closer than this (relative to the largest)
/// are treated as one degenerate cluster.
const CLUSTER_TOLERANCE: f64 = 1e-9;
/// Clusters below this (relative) level are treated as numerical null space.
const NULL_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct QsvdResult {
    /// H×K, orthonormal columns.
    pub u: QuaternionMatrix,
    /// K real singular values, non-increasing.
    pub s: Vec<f64>,
    /// W×K, orthonormal columns.
    pub v: QuaternionMatrix,
}

impl QsvdResult {
    /// `U·diag(S)·Vᴴ`.
    pub fn reconstruct(&self) -> QuaternionMatrix {
        reassemble(&self.u, &self.s, &self.v)
    }

    /// Keep the leading `r` triplets.
    pub fn truncate(&self, r: usize) -> QsvdResult {
        let r = r.min(self.s.len());
        QsvdResult {
            u: leading_columns(&self.u, r),
            s: self.s[..r].to_vec(),
            v: leading_columns(&self.v, r),
        }
    }
}

/// `U·diag(sigma)·Vᴴ` for explicit factors.
pub fn reassemble(u: &QuaternionMatrix, sigma: &[f64], v: &QuaternionMatrix) -> QuaternionMatrix {
    let (h, w) = (u.rows(), v.rows());
    let mut out = QuaternionMatrix::zeros(h, w);
    for (k, &s) in sigma.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        for r in 0..h {
            let us = u[(r, k)].scale(s);
            if us == Quaternion::ZERO {
                continue;
            }
            for c in 0..w {
                out[(r, c)] += us * v[(c, k)].conj();
            }
        }
    }
    out
}

fn leading_columns(m: &QuaternionMatrix, r: usize) -> QuaternionMatrix {
    QuaternionMatrix::from_fn(m.rows(), r, |row, col| m[(row, col)])
}

fn check_input(a: &QuaternionMatrix) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidParameter("qsvd of an empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("qsvd input"));
    }
    Ok(())
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order
}

/// Collapse the duplicated adjoint spectrum into quaternion singular values.
fn pair_values(sorted: &[f64]) -> Result<Vec<f64>> {
    let top = sorted.first().copied().unwrap_or(0.0);
    let tol = PAIR_TOLERANCE * top.max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(sorted.len() / 2);
    for (k, pair) in sorted.chunks_exact(2).enumerate() {
        if (pair[0] - pair[1]).abs() > tol {
            return Err(Error::PairMismatch {
                index: k,
                first: pair[0],
                second: pair[1],
            });
        }
        out.push(pair[0].max(0.0));
    }
    Ok(out)
}

/// Thin complex SVD `m = U·diag(σ)·Vᴴ`, returned as `(σ, U, V)` with
/// `min(rows, cols)` columns each.
///
/// The matrix is first reduced to its square triangular QR factor (working
/// on `mᴴ` when it is wide): running the bidiagonal SVD on the tall matrix
/// directly loses absolute accuracy on small singular values, which breaks
/// the pairing of the adjoint spectrum.
fn complex_svd(m: DMatrix<Complex64>, vectors: bool) -> Result<(Vec<f64>, DMatrix<Complex64>, DMatrix<Complex64>)> {
    let wide = m.nrows() < m.ncols();
    let tall = if wide { m.adjoint() } else { m };
    let qr = tall.qr();
    let r = qr.r();
    let svd = SVD::new(r, vectors, vectors);
    let sigma = svd.singular_values.as_slice().to_vec();
    if !vectors {
        return Ok((sigma, DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)));
    }
    let (ur, vtr) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Solve("complex SVD did not return vectors".into())),
    };
    let u_tall = qr.q() * ur;
    let v_tall = vtr.adjoint();
    Ok(if wide { (sigma, v_tall, u_tall) } else { (sigma, u_tall, v_tall) })
}

/// Quaternion singular values only, non-increasing.
pub fn singular_values(a: &QuaternionMatrix) -> Result<Vec<f64>> {
    check_input(a)?;
    let (sv, _, _) = complex_svd(a.complex_adjoint(), false)?;
    let order = sorted_order(&sv);
    let sorted: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    pair_values(&sorted)
}

type QVec = Vec<Quaternion>;

/// `uᴴ·v`
fn qdot(u: &[Quaternion], v: &[Quaternion]) -> Quaternion {
    u.iter()
        .zip(v)
        .fold(Quaternion::ZERO, |acc, (&x, &y)| acc + x.conj() * y)
}

fn qnorm(u: &[Quaternion]) -> f64 {
    u.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// `v − Σ basis_c·coeff_c`
fn subtract_combination(v: &mut [Quaternion], basis: &[QVec], coeffs: &[Quaternion]) {
    for (b, &c) in basis.iter().zip(coeffs) {
        for (vi, &bi) in v.iter_mut().zip(b) {
            *vi -= bi * c;
        }
    }
}

fn project_out(v: &[Quaternion], basis: &[QVec]) -> (QVec, Vec<Quaternion>) {
    // Two Gram–Schmidt passes keep the result orthogonal to working precision.
    let mut r = v.to_vec();
    let mut total = vec![Quaternion::ZERO; basis.len()];
    for _ in 0..2 {
        let coeffs: Vec<Quaternion> = basis.iter().map(|b| qdot(b, &r)).collect();
        subtract_combination(&mut r, basis, &coeffs);
        for (t, c) in total.iter_mut().zip(coeffs) {
            *t += c;
        }
    }
    (r, total)
}

fn complex_column_to_quaternion(col: &[Complex64]) -> QVec {
    let h = col.len() / 2;
    (0..h)
        .map(|r| Quaternion::from_complex_pair(col[r], -col[h + r].conj()))
        .collect()
}

fn standard_basis(n: usize, i: usize) -> QVec {
    let mut e = vec![Quaternion::ZERO; n];
    e[i] = Quaternion::ONE;
    e
}

/// Pick `count` orthonormal vectors from `candidates` (then standard basis
/// vectors as fallback), orthogonal to everything already in `chosen`.
fn complete_basis(candidates: &[QVec], chosen: &mut Vec<QVec>, dim: usize, count: usize) {
    let fallback: Vec<QVec> = (0..dim).map(|i| standard_basis(dim, i)).collect();
    let mut used = vec![false; candidates.len() + fallback.len()];
    for _ in 0..count {
        let mut best: Option<(usize, QVec, f64)> = None;
        for (idx, cand) in candidates.iter().chain(fallback.iter()).enumerate() {
            if used[idx] {
                continue;
            }
            let (r, _) = project_out(cand, chosen);
            let n = qnorm(&r);
            let better = best.as_ref().map_or(true, |(_, _, bn)| n > *bn);
            if better {
                best = Some((idx, r, n));
            }
            if n >= 0.5 {
                break;
            }
        }
        let Some((idx, mut r, n)) = best else { return };
        used[idx] = true;
        if n > 0.0 {
            r.iter_mut().for_each(|q| *q = q.scale(1.0 / n));
        }
        chosen.push(r);
    }
}

pub fn qsvd(a: &QuaternionMatrix) -> Result<QsvdResult> {
    check_input(a)?;
    let (h, w) = a.shape();
    let k = h.min(w);

    let (sv, cu, cv) = complex_svd(a.complex_adjoint(), true)?;
    let order = sorted_order(&sv);
    let sorted: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let s = pair_values(&sorted)?;
    let top = s.first().copied().unwrap_or(0.0);

    let u_cand: Vec<QVec> = order
        .iter()
        .map(|&i| {
            let col: Vec<Complex64> = cu.column(i).iter().copied().collect();
            complex_column_to_quaternion(&col)
        })
        .collect();
    let v_cand: Vec<QVec> = order
        .iter()
        .map(|&i| {
            let col: Vec<Complex64> = cv.column(i).iter().copied().collect();
            complex_column_to_quaternion(&col)
        })
        .collect();

    let mut us: Vec<QVec> = Vec::with_capacity(k);
    let mut vs: Vec<QVec> = Vec::with_capacity(k);

    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && s[start] - s[end] <= CLUSTER_TOLERANCE * top {
            end += 1;
        }
        let count = end - start;
        let cand_range = 2 * start..2 * end;

        if top == 0.0 || s[start] <= NULL_TOLERANCE * top {
            // Null space: U and V are unrelated through A, complete each.
            complete_basis(&u_cand[cand_range.clone()], &mut us, h, count);
            complete_basis(&v_cand[cand_range], &mut vs, w, count);
        } else {
            let mut cu_chosen: Vec<QVec> = Vec::with_capacity(count);
            let mut cv_chosen: Vec<QVec> = Vec::with_capacity(count);
            let mut used = vec![false; 2 * count];
            for _ in 0..count {
                let mut best: Option<(usize, QVec, Vec<Quaternion>, f64)> = None;
                for (off, cand) in u_cand[cand_range.clone()].iter().enumerate() {
                    if used[off] {
                        continue;
                    }
                    let (r, coeffs) = project_out(cand, &cu_chosen);
                    let n = qnorm(&r);
                    if best.as_ref().map_or(true, |b| n > b.3) {
                        best = Some((off, r, coeffs, n));
                    }
                }
                let (off, mut ru, coeffs, n) = best.expect("cluster has candidates");
                used[off] = true;
                // The same right-combination keeps A·v = σ·u inside the cluster.
                let mut rv = v_cand[2 * start + off].clone();
                subtract_combination(&mut rv, &cv_chosen, &coeffs);
                let inv = 1.0 / n;
                ru.iter_mut().for_each(|q| *q = q.scale(inv));
                rv.iter_mut().for_each(|q| *q = q.scale(inv));
                cu_chosen.push(ru);
                cv_chosen.push(rv);
            }
            us.extend(cu_chosen);
            vs.extend(cv_chosen);
        }
        start = end;
    }

    let u = QuaternionMatrix::from_fn(h, k, |r, c| us[c][r]);
    let v = QuaternionMatrix::from_fn(w, k, |r, c| vs[c][r]);
    Ok(QsvdResult { u, s, v })
}

/// Complex SVD singular values of the adjoint, sorted non-increasing.
/// Exposed for oracle comparisons.
pub fn adjoint_singular_values(a: &QuaternionMatrix) -> Vec<f64> {
    let mut v = complex_svd(a.complex_adjoint(), false).map(|r| r.0).unwrap_or_default();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Orthonormality defect `‖QᴴQ − I‖_F`.
pub fn orthonormality_error(q: &QuaternionMatrix) -> f64 {
    let g = q.conj_transpose().matmul(q).expect("square gram");
    let eye = QuaternionMatrix::identity(q.cols());
    (&g - &eye).norm(super::matrix::NormKind::Fro)
}
