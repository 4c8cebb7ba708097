//! Periodic finite-difference filters with real stencils.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;

use super::matrix::QuaternionMatrix;
use super::scalar::Quaternion;
use crate::error::{Error, Result};

/// Real stencil in correlation form: `y(r, c) = Σ w · x(r + dr, c + dc)`,
/// indices wrapped periodically.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub taps: Vec<(isize, isize, f64)>,
}

impl Stencil {
    /// Forward difference along columns: `x(r, c+1) − x(r, c)`.
    pub fn grad_x() -> Self {
        Self {
            taps: vec![(0, 0, -1.0), (0, 1, 1.0)],
        }
    }

    /// Forward difference along rows: `x(r+1, c) − x(r, c)`.
    pub fn grad_y() -> Self {
        Self {
            taps: vec![(0, 0, -1.0), (1, 0, 1.0)],
        }
    }

    /// 5-point Laplacian.
    pub fn laplacian() -> Self {
        Self {
            taps: vec![
                (0, 0, -4.0),
                (0, 1, 1.0),
                (0, -1, 1.0),
                (1, 0, 1.0),
                (-1, 0, 1.0),
            ],
        }
    }

    /// Mixed second difference `∂²/∂x∂y` (forward in both directions).
    pub fn cross() -> Self {
        Self {
            taps: vec![(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)],
        }
    }

    /// Adjoint under the periodic inner product (mirrored offsets).
    pub fn adjoint(&self) -> Self {
        Self {
            taps: self.taps.iter().map(|&(dr, dc, w)| (-dr, -dc, w)).collect(),
        }
    }

    pub fn apply_plane(&self, plane: &[f64], rows: usize, cols: usize) -> Vec<f64> {
        let (h, w) = (rows as isize, cols as isize);
        let mut out = vec![0.0; rows * cols];
        for r in 0..h {
            for c in 0..w {
                let mut acc = 0.0;
                for &(dr, dc, wt) in &self.taps {
                    let rr = (r + dr).rem_euclid(h);
                    let cc = (c + dc).rem_euclid(w);
                    acc += wt * plane[(rr * w + cc) as usize];
                }
                out[(r * w + c) as usize] = acc;
            }
        }
        out
    }

    pub fn apply(&self, a: &QuaternionMatrix) -> QuaternionMatrix {
        let (h, w) = (a.rows() as isize, a.cols() as isize);
        QuaternionMatrix::from_fn(a.rows(), a.cols(), |r, c| {
            let mut acc = Quaternion::ZERO;
            for &(dr, dc, wt) in &self.taps {
                let rr = (r as isize + dr).rem_euclid(h) as usize;
                let cc = (c as isize + dc).rem_euclid(w) as usize;
                acc += a[(rr, cc)].scale(wt);
            }
            acc
        })
    }

    /// DFT transfer function on an `rows × cols` periodic grid, so that
    /// `DFT(apply(x)) = transfer · DFT(x)` pointwise.
    pub fn transfer(&self, rows: usize, cols: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(rows * cols);
        for kr in 0..rows {
            let wr = 2.0 * PI * kr as f64 / rows as f64;
            for kc in 0..cols {
                let wc = 2.0 * PI * kc as f64 / cols as f64;
                let z = self.taps.iter().fold(Complex64::new(0.0, 0.0), |acc, &(dr, dc, wt)| {
                    acc + Complex64::from_polar(wt, wr * dr as f64 + wc * dc as f64)
                });
                out.push(z);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Grad1X,
    Grad1Y,
    Laplacian,
    Cross,
}

impl FilterKind {
    pub fn stencil(self) -> Stencil {
        match self {
            FilterKind::Grad1X => Stencil::grad_x(),
            FilterKind::Grad1Y => Stencil::grad_y(),
            FilterKind::Laplacian => Stencil::laplacian(),
            FilterKind::Cross => Stencil::cross(),
        }
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grad1_x" => Ok(FilterKind::Grad1X),
            "grad1_y" => Ok(FilterKind::Grad1Y),
            "laplacian" => Ok(FilterKind::Laplacian),
            "cross" => Ok(FilterKind::Cross),
            other => Err(Error::UnknownFilter(other.to_string())),
        }
    }
}

pub fn apply_filter(a: &QuaternionMatrix, kind: FilterKind) -> QuaternionMatrix {
    kind.stencil().apply(a)
}

/// The concatenated first-order gradient `∇ = (∇x, ∇y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub x: QuaternionMatrix,
    pub y: QuaternionMatrix,
}

impl GradientField {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            x: QuaternionMatrix::zeros(rows, cols),
            y: QuaternionMatrix::zeros(rows, cols),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.x.shape()
    }

    pub fn map(&self, f: impl Fn(&QuaternionMatrix) -> QuaternionMatrix) -> Self {
        Self {
            x: f(&self.x),
            y: f(&self.y),
        }
    }

    pub fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(&QuaternionMatrix, &QuaternionMatrix) -> QuaternionMatrix,
    ) -> Self {
        Self {
            x: f(&self.x, &other.x),
            y: f(&self.y, &other.y),
        }
    }

    /// `[x; y]`, a 2H×W matrix.
    pub fn stacked(&self) -> QuaternionMatrix {
        self.x.vstack(&self.y).expect("gradient components share a width")
    }

    pub fn from_stacked(m: &QuaternionMatrix) -> Self {
        let (x, y) = m.split_rows(m.rows() / 2);
        Self { x, y }
    }

    pub fn l1_norm(&self) -> f64 {
        self.x.norm(super::NormKind::L1) + self.y.norm(super::NormKind::L1)
    }

    pub fn fro_norm_sqr(&self) -> f64 {
        self.x.fro_norm_sqr() + self.y.fro_norm_sqr()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.x.inner(&other.x) + self.y.inner(&other.y)
    }

    pub fn max_modulus(&self) -> f64 {
        self.x.max_modulus().max(self.y.max_modulus())
    }
}

pub fn gradient(a: &QuaternionMatrix) -> GradientField {
    GradientField {
        x: Stencil::grad_x().apply(a),
        y: Stencil::grad_y().apply(a),
    }
}

/// `∇ᴴ g = ∇xᴴ gx + ∇yᴴ gy`.
pub fn gradient_adjoint(g: &GradientField) -> QuaternionMatrix {
    let x = Stencil::grad_x().adjoint().apply(&g.x);
    let y = Stencil::grad_y().adjoint().apply(&g.y);
    &x + &y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::fft::Fft2;
    use crate::quat::testutil::random_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const ALL: [FilterKind; 4] = [
        FilterKind::Grad1X,
        FilterKind::Grad1Y,
        FilterKind::Laplacian,
        FilterKind::Cross,
    ];

    #[test]
    fn constants_are_annihilated() {
        let a = QuaternionMatrix::from_fn(5, 7, |_, _| Quaternion::new(0.3, 1.0, -2.0, 0.5));
        for k in ALL {
            assert!(apply_filter(&a, k).max_modulus() < 1e-14, "{k:?}");
        }
    }

    #[test]
    fn ramp_has_constant_x_gradient_away_from_seam() {
        let w = 8;
        let a = QuaternionMatrix::from_fn(4, w, |_, c| Quaternion::pure(c as f64, 0.0, 0.0));
        let g = apply_filter(&a, FilterKind::Grad1X);
        for r in 0..4 {
            for c in 0..w - 1 {
                assert_eq!(g[(r, c)], Quaternion::pure(1.0, 0.0, 0.0));
            }
            assert_eq!(g[(r, w - 1)], Quaternion::pure(-(w as f64 - 1.0), 0.0, 0.0));
        }
    }

    #[test]
    fn componentwise_equals_assembled() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 6, 5);
        for k in ALL {
            let whole = apply_filter(&a, k);
            let st = k.stencil();
            let planes = a.planes().map(|p| st.apply_plane(&p, 6, 5));
            let assembled =
                QuaternionMatrix::from_planes(6, 5, [&planes[0], &planes[1], &planes[2], &planes[3]])
                    .unwrap();
            assert!((&whole - &assembled).max_modulus() < 1e-14);
        }
    }

    /// Direct circular convolution: y(n) = Σ_m k(m) x(n − m).
    fn circular_convolve(kernel: &[f64], x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
        let mut y = vec![0.0; rows * cols];
        for nr in 0..rows {
            for nc in 0..cols {
                let mut acc = 0.0;
                for mr in 0..rows {
                    for mc in 0..cols {
                        let kv = kernel[mr * cols + mc];
                        if kv != 0.0 {
                            let xr = (nr + rows - mr) % rows;
                            let xc = (nc + cols - mc) % cols;
                            acc += kv * x[xr * cols + xc];
                        }
                    }
                }
                y[nr * cols + nc] = acc;
            }
        }
        y
    }

    #[test]
    fn convolution_theorem_for_grad_x() {
        let (h, w) = (6, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(&mut rng, h, w);
        // ∇x as a convolution kernel: y(n) = x(n+1) − x(n)
        let mut kernel = vec![0.0; h * w];
        kernel[0] = -1.0;
        kernel[w - 1] = 1.0;
        let plan = Fft2::new(h, w);
        let transfer = Stencil::grad_x().transfer(h, w);
        for plane in a.planes() {
            let direct = circular_convolve(&kernel, &plane, h, w);
            let spec: Vec<Complex64> = plan
                .forward_real(&plane)
                .iter()
                .zip(&transfer)
                .map(|(x, t)| x * t)
                .collect();
            let via_fft = plan.inverse_real(&spec);
            for (d, f) in direct.iter().zip(&via_fft) {
                assert!((d - f).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn adjoint_satisfies_inner_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_matrix(&mut rng, 5, 6);
        let g = GradientField {
            x: random_matrix(&mut rng, 5, 6),
            y: random_matrix(&mut rng, 5, 6),
        };
        let lhs = gradient(&x).inner(&g);
        let rhs = x.inner(&gradient_adjoint(&g));
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn unknown_tag() {
        assert!(matches!(
            "sobel".parse::<FilterKind>(),
            Err(Error::UnknownFilter(_))
        ));
        assert_eq!("cross".parse::<FilterKind>().unwrap(), FilterKind::Cross);
    }
}
