//! Shared fixtures and independent reference solvers for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use qivif::imgcodec::{encode_infrared, encode_visible, read_gray, read_rgb, RasterImage};
use qivif::quat::{gradient, GradientField, Quaternion, QuaternionMatrix, Stencil};
use rand::Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn sample_paths() -> (PathBuf, PathBuf) {
    (data_dir().join("vis_glow.png"), data_dir().join("ir.png"))
}

pub fn sample_images() -> (RasterImage, RasterImage) {
    let (v, i) = sample_paths();
    (read_rgb(v).expect("bundled visible sample"), read_gray(i).expect("bundled infrared sample"))
}

pub fn sample_quaternions() -> (QuaternionMatrix, QuaternionMatrix) {
    let (v, i) = sample_images();
    (encode_visible(&v).unwrap(), encode_infrared(&i).unwrap())
}

/// Half-open `(row_start, row_end, col_start, col_end)` bounding the warm target in `ir.png`.
pub const TARGET_BOX: (usize, usize, usize, usize) = (32, 51, 11, 22);

pub fn random_quaternion<R: Rng>(rng: &mut R) -> Quaternion {
    Quaternion::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    )
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> QuaternionMatrix {
    QuaternionMatrix::from_fn(rows, cols, |_, _| random_quaternion(rng))
}

pub fn random_pure_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> QuaternionMatrix {
    QuaternionMatrix::from_fn(rows, cols, |_, _| {
        Quaternion::pure(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))
    })
}

pub fn rel_err(a: &QuaternionMatrix, b: &QuaternionMatrix) -> f64 {
    ((a - b).fro_norm_sqr() / b.fro_norm_sqr()).sqrt()
}

/// Brute-force minimizer of `½(σ − x)² + λw·x^p` on `[0, σ]`: dense grid, then
/// golden-section refinement around the best cell.
pub fn brute_force_gst(sigma: f64, lw: f64, p: f64) -> f64 {
    let f = |x: f64| 0.5 * (sigma - x).powi(2) + lw * x.powf(p);
    let steps = 20_000;
    let h = sigma / steps as f64;
    let (mut best, mut best_x) = (f(0.0), 0.0);
    for k in 1..=steps {
        let x = k as f64 * h;
        let v = f(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    let (mut a, mut b) = ((best_x - h).max(0.0), (best_x + h).min(sigma));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    if f(x) <= best { x } else { best_x }
}

/// Conjugate-direction solve of `min λ‖Δ(I − L)‖² + μ/2‖∇I − G‖²`.
pub fn cg_lighting(l: &QuaternionMatrix, g: &GradientField, lambda: f64, mu: f64) -> QuaternionMatrix {
    let lap = Stencil::laplacian();
    let lap_t = lap.adjoint();
    let op = |x: &QuaternionMatrix| {
        let a = lap_t.apply(&lap.apply(x)).scale(2.0 * lambda);
        let b = qivif::quat::gradient_adjoint(&gradient(x)).scale(mu);
        &a + &b
    };
    let rhs = &lap_t.apply(&lap.apply(l)).scale(2.0 * lambda) + &qivif::quat::gradient_adjoint(g).scale(mu);
    let mut x = QuaternionMatrix::zeros(l.rows(), l.cols());
    let mut r = &rhs - &op(&x);
    let mut p = r.clone();
    let mut rr = r.fro_norm_sqr();
    let stop = 1e-26 * rhs.fro_norm_sqr();
    for _ in 0..5000 {
        if rr <= stop {
            break;
        }
        let ap = op(&p);
        let curvature = p.inner(&ap);
        if curvature <= 0.0 {
            break;
        }
        let alpha = rr / curvature;
        x = x.add_scaled(&p, alpha);
        r = r.add_scaled(&ap, -alpha);
        let rr_new = r.fro_norm_sqr();
        p = r.add_scaled(&p, rr_new / rr);
        rr = rr_new;
    }
    x
}

/// Dense matrix of a real-plane linear map, built column by column.
fn dense_operator(rows: usize, cols: usize, f: impl Fn(&QuaternionMatrix) -> QuaternionMatrix) -> DMatrix<f64> {
    let len = rows * cols;
    let zero = vec![0.0; len];
    let mut out = DMatrix::zeros(len, len);
    for k in 0..len {
        let mut e = vec![0.0; len];
        e[k] = 1.0;
        let basis = QuaternionMatrix::from_planes(rows, cols, [&e, &zero, &zero, &zero]).unwrap();
        for (r, v) in f(&basis).plane(0).iter().enumerate() {
            out[(r, k)] = *v;
        }
    }
    out
}

/// Minimizer of `‖M⊙S‖² + ‖N⊙(T−S)‖² + ½w₁‖∇S‖² + ½w₂‖∇(T−S)‖²` as a dense
/// stacked least-squares problem, one quaternion component at a time.
pub fn dense_fusion_solve(t: &QuaternionMatrix, m: &[f64], n: &[f64], w1: f64, w2: f64) -> QuaternionMatrix {
    let (rows, cols) = t.shape();
    let len = rows * cols;
    let dx = dense_operator(rows, cols, |x| gradient(x).x);
    let dy = dense_operator(rows, cols, |x| gradient(x).y);
    let (a1, a2) = ((0.5 * w1).sqrt(), (0.5 * w2).sqrt());
    let mut sys = DMatrix::zeros(6 * len, len);
    for k in 0..len {
        sys[(k, k)] = m[k];
        sys[(len + k, k)] = n[k];
    }
    sys.view_mut((2 * len, 0), (len, len)).copy_from(&(&dx * a1));
    sys.view_mut((3 * len, 0), (len, len)).copy_from(&(&dy * a1));
    sys.view_mut((4 * len, 0), (len, len)).copy_from(&(&dx * a2));
    sys.view_mut((5 * len, 0), (len, len)).copy_from(&(&dy * a2));
    let svd = sys.clone().svd(true, true);
    let planes: Vec<Vec<f64>> = t
        .planes()
        .iter()
        .map(|p| {
            let tv = DVector::from_column_slice(p);
            let mut rhs = DVector::zeros(6 * len);
            for k in 0..len {
                rhs[len + k] = n[k] * tv[k];
            }
            rhs.rows_mut(4 * len, len).copy_from(&(&dx * &tv * a2));
            rhs.rows_mut(5 * len, len).copy_from(&(&dy * &tv * a2));
            svd.solve(&rhs, 1e-12).unwrap().iter().copied().collect()
        })
        .collect();
    QuaternionMatrix::from_planes(rows, cols, [&planes[0], &planes[1], &planes[2], &planes[3]]).unwrap()
}

/// Rank-2 quaternion matrix plus 5% sparse spikes of modulus ~2.
pub struct LowRankSparse {
    pub observed: QuaternionMatrix,
    pub low_rank: QuaternionMatrix,
    pub support: Vec<bool>,
}

pub fn low_rank_sparse<R: Rng>(rng: &mut R, size: usize) -> LowRankSparse {
    let a = random_matrix(rng, size, 2);
    let b = random_matrix(rng, 2, size);
    let low_rank = a.matmul(&b).unwrap().scale(0.5);
    let mut sparse = QuaternionMatrix::zeros(size, size);
    let mut support = vec![false; size * size];
    for (k, s) in support.iter_mut().enumerate() {
        if rng.random_range(0.0..1.0) < 0.05 {
            *s = true;
            sparse.as_mut_slice()[k] = random_quaternion(rng).scale(2.0);
        }
    }
    LowRankSparse {
        observed: &low_rank + &sparse,
        low_rank,
        support,
    }
}

/// Fraction of true spikes where `|D|` exceeds `threshold`.
pub fn support_recall(d: &QuaternionMatrix, support: &[bool], threshold: f64) -> f64 {
    let moduli = d.moduli();
    let total = support.iter().filter(|s| **s).count();
    let hits = support.iter().zip(&moduli).filter(|(s, m)| **s && **m > threshold).count();
    hits as f64 / total as f64
}

/// Fraction of the detail `ℓ₁` mass inside `TARGET_BOX`, divided by the box's area fraction.
pub fn box_concentration(d: &QuaternionMatrix) -> f64 {
    let (r0, r1, c0, c1) = TARGET_BOX;
    let moduli = d.moduli();
    let total: f64 = moduli.iter().sum();
    let mut inside = 0.0;
    for r in r0..r1 {
        for c in c0..c1 {
            inside += moduli[r * d.cols() + c];
        }
    }
    let area = ((r1 - r0) * (c1 - c0)) as f64 / d.len() as f64;
    (inside / total) / area
}

/// Minimizer of `½(σ − x)² + λw·x^p` from the stationarity condition solved by
/// bisection on the convex branch, compared against `x = 0`.
pub fn gst_bisection(sigma: f64, lw: f64, p: f64) -> f64 {
    let f = |x: f64| 0.5 * (sigma - x).powi(2) + lw * x.powf(p);
    if lw == 0.0 {
        return sigma;
    }
    if p == 1.0 {
        return (sigma - lw).max(0.0);
    }
    // f' = x − σ + λwp·x^{p−1} is increasing for x above its inflection point.
    let x_inf = (lw * p * (1.0 - p)).powf(1.0 / (2.0 - p));
    let df = |x: f64| x - sigma + lw * p * x.powf(p - 1.0);
    if x_inf >= sigma || df(x_inf) >= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (x_inf, sigma);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if df(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    if f(x) < f(0.0) { x } else { 0.0 }
}
