//! Fusion quality metrics on 8-bit luma: SD, SF, AG, MI, EN, Qabf.
//!
//! SD is reported on the 0–255 scale; AG and SF on intensities scaled to
//! `[0, 1]`. MI is the sum of the mutual information of the fused image with
//! each source. Qabf uses Sobel gradients with mirrored borders and is
//! divided by its perfect-match value, so a fused image identical to both
//! sources scores 1.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::imgcodec::RasterImage;

/// Column order of every CSV report.
pub const CSV_HEADER: &str = "image_id,sd,sf,ag,mi,en,qabf";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub sd: f64,
    pub sf: f64,
    pub ag: f64,
    pub mi: f64,
    pub en: f64,
    pub qabf: f64,
}

impl MetricReport {
    pub fn values(&self) -> [f64; 6] {
        [self.sd, self.sf, self.ag, self.mi, self.en, self.qabf]
    }

    pub fn from_values(v: [f64; 6]) -> Self {
        Self {
            sd: v[0],
            sf: v[1],
            ag: v[2],
            mi: v[3],
            en: v[4],
            qabf: v[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    pub fn csv_row(&self, id: &str) -> String {
        let mut row = id.replace([',', '\n', '\r'], "_");
        for v in self.values() {
            row.push_str(&format!(",{v:.6}"));
        }
        row
    }

    /// Arithmetic mean of each column; `None` for an empty slice.
    pub fn mean(reports: &[MetricReport]) -> Option<MetricReport> {
        if reports.is_empty() {
            return None;
        }
        let mut acc = [0.0; 6];
        for r in reports {
            for (a, v) in acc.iter_mut().zip(r.values()) {
                *a += v;
            }
        }
        Some(Self::from_values(acc.map(|a| a / reports.len() as f64)))
    }
}

/// 8-bit luma plane with its dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Luma {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u8>,
}

impl Luma {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        f64::from(self.data[r * self.cols + c])
    }
}

/// BT.601 luma, rounded to 8 bits; single-channel images pass through.
pub fn luma(img: &RasterImage) -> Luma {
    let data = match img.channels() {
        1 => img.samples().to_vec(),
        _ => img
            .samples()
            .chunks_exact(3)
            .map(|p| {
                let y = 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]);
                (y + 0.5).floor().clamp(0.0, 255.0) as u8
            })
            .collect(),
    };
    Luma {
        rows: img.height(),
        cols: img.width(),
        data,
    }
}

fn histogram(data: &[u8]) -> [f64; 256] {
    let mut h = [0.0; 256];
    for &v in data {
        h[v as usize] += 1.0;
    }
    h
}

fn entropy_of(counts: &[f64], total: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

pub fn entropy(y: &Luma) -> f64 {
    entropy_of(&histogram(&y.data), y.data.len() as f64)
}

pub fn standard_deviation(y: &Luma) -> f64 {
    let n = y.data.len() as f64;
    let mean = y.data.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let var = y.data.iter().map(|&v| (f64::from(v) - mean).powi(2)).sum::<f64>() / n;
    var.sqrt()
}

pub fn average_gradient(y: &Luma) -> f64 {
    if y.rows < 2 || y.cols < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for r in 0..y.rows - 1 {
        for c in 0..y.cols - 1 {
            let gx = (y.at(r, c + 1) - y.at(r, c)) / 255.0;
            let gy = (y.at(r + 1, c) - y.at(r, c)) / 255.0;
            acc += ((gx * gx + gy * gy) / 2.0).sqrt();
        }
    }
    acc / ((y.rows - 1) * (y.cols - 1)) as f64
}

pub fn spatial_frequency(y: &Luma) -> f64 {
    let mean_sq = |pairs: &mut dyn Iterator<Item = (f64, f64)>| {
        let (mut s, mut n) = (0.0, 0usize);
        for (a, b) in pairs {
            s += ((a - b) / 255.0).powi(2);
            n += 1;
        }
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    };
    let rf = mean_sq(&mut (0..y.rows).flat_map(|r| (1..y.cols).map(move |c| (r, c))).map(|(r, c)| (y.at(r, c), y.at(r, c - 1))));
    let cf = mean_sq(&mut (1..y.rows).flat_map(|r| (0..y.cols).map(move |c| (r, c))).map(|(r, c)| (y.at(r, c), y.at(r - 1, c))));
    (rf + cf).sqrt()
}

/// Mutual information from the 256×256 joint histogram, in bits.
pub fn mutual_information(a: &Luma, b: &Luma) -> f64 {
    let n = a.data.len() as f64;
    let mut joint = vec![0.0; 256 * 256];
    for (&x, &y) in a.data.iter().zip(&b.data) {
        joint[x as usize * 256 + y as usize] += 1.0;
    }
    let ha = entropy_of(&histogram(&a.data), n);
    let hb = entropy_of(&histogram(&b.data), n);
    (ha + hb - entropy_of(&joint, n)).max(0.0)
}

pub const QABF_GAMMA_G: f64 = 0.9994;
pub const QABF_KAPPA_G: f64 = -15.0;
pub const QABF_SIGMA_G: f64 = 0.5;
pub const QABF_GAMMA_A: f64 = 0.9879;
pub const QABF_KAPPA_A: f64 = -22.0;
pub const QABF_SIGMA_A: f64 = 0.8;

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let mut i = i;
    while i < 0 || i >= n {
        i = if i < 0 { -i } else { 2 * (n - 1) - i };
    }
    i as usize
}

/// Sobel magnitude and orientation per pixel.
fn sobel(y: &Luma) -> (Vec<f64>, Vec<f64>) {
    let px = |r: isize, c: isize| y.at(reflect(r, y.rows), reflect(c, y.cols));
    let mut g = Vec::with_capacity(y.data.len());
    let mut alpha = Vec::with_capacity(y.data.len());
    for r in 0..y.rows as isize {
        for c in 0..y.cols as isize {
            let sx = (px(r - 1, c + 1) + 2.0 * px(r, c + 1) + px(r + 1, c + 1))
                - (px(r - 1, c - 1) + 2.0 * px(r, c - 1) + px(r + 1, c - 1));
            let sy = (px(r + 1, c - 1) + 2.0 * px(r + 1, c) + px(r + 1, c + 1))
                - (px(r - 1, c - 1) + 2.0 * px(r - 1, c) + px(r - 1, c + 1));
            g.push((sx * sx + sy * sy).sqrt());
            alpha.push(if sx == 0.0 { FRAC_PI_2 } else { (sy / sx).atan() });
        }
    }
    (g, alpha)
}

fn sigmoid(gamma: f64, kappa: f64, sigma: f64, x: f64) -> f64 {
    gamma / (1.0 + (kappa * (x - sigma)).exp())
}

fn edge_preservation(src: &(Vec<f64>, Vec<f64>), fused: &(Vec<f64>, Vec<f64>)) -> Vec<f64> {
    let norm = sigmoid(QABF_GAMMA_G, QABF_KAPPA_G, QABF_SIGMA_G, 1.0)
        * sigmoid(QABF_GAMMA_A, QABF_KAPPA_A, QABF_SIGMA_A, 1.0);
    (0..src.0.len())
        .map(|k| {
            let (ga, gf) = (src.0[k], fused.0[k]);
            let strength = if ga == gf {
                1.0
            } else if ga > gf {
                gf / ga
            } else {
                ga / gf
            };
            let orient = 1.0 - (src.1[k] - fused.1[k]).abs() / FRAC_PI_2;
            sigmoid(QABF_GAMMA_G, QABF_KAPPA_G, QABF_SIGMA_G, strength)
                * sigmoid(QABF_GAMMA_A, QABF_KAPPA_A, QABF_SIGMA_A, orient)
                / norm
        })
        .collect()
}

/// Gradient-weighted edge preservation of `a` and `b` in `f`.
pub fn qabf(a: &Luma, b: &Luma, f: &Luma) -> f64 {
    let (sa, sb, sf) = (sobel(a), sobel(b), sobel(f));
    let (qa, qb) = (edge_preservation(&sa, &sf), edge_preservation(&sb, &sf));
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..qa.len() {
        num += qa[k] * sa.0[k] + qb[k] * sb.0[k];
        den += sa.0[k] + sb.0[k];
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

pub fn compute_metrics(fused: &RasterImage, vis: &RasterImage, ir: &RasterImage) -> Result<MetricReport> {
    let dims = |x: &RasterImage| (x.height(), x.width());
    if dims(fused) != dims(vis) || dims(fused) != dims(ir) {
        return Err(Error::DimensionMismatch(format!(
            "fused {:?}, visible {:?}, infrared {:?}",
            dims(fused),
            dims(vis),
            dims(ir)
        )));
    }
    let (f, v, i) = (luma(fused), luma(vis), luma(ir));
    Ok(MetricReport {
        sd: standard_deviation(&f),
        sf: spatial_frequency(&f),
        ag: average_gradient(&f),
        mi: mutual_information(&f, &v) + mutual_information(&f, &i),
        en: entropy(&f),
        qabf: qabf(&v, &i, &f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(rows: usize, cols: usize, f: impl Fn(usize, usize) -> u8) -> RasterImage {
        RasterImage::from_fn(rows, cols, 1, |r, c, _| f(r, c)).unwrap()
    }

    #[test]
    fn luma_weights() {
        let img = RasterImage::new(1, 3, 3, vec![255, 0, 0, 0, 255, 0, 10, 20, 30]).unwrap();
        // 76.245, 149.685, 18.11
        assert_eq!(luma(&img).data, vec![76, 150, 18]);
    }

    #[test]
    fn constant_image_has_zero_variation() {
        let y = luma(&gray(9, 7, |_, _| 77));
        assert_eq!(entropy(&y), 0.0);
        assert_eq!(standard_deviation(&y), 0.0);
        assert_eq!(average_gradient(&y), 0.0);
        assert_eq!(spatial_frequency(&y), 0.0);
    }

    #[test]
    fn uniform_histogram_entropy() {
        let y = luma(&gray(16, 16, |r, c| (r * 16 + c) as u8));
        assert!((entropy(&y) - 8.0).abs() <= 1e-9);
    }

    #[test]
    fn hand_computed_sd_ag_sf() {
        // 2×2 image [[0, 255], [255, 0]]
        let y = luma(&gray(2, 2, |r, c| if (r + c) % 2 == 1 { 255 } else { 0 }));
        assert!((standard_deviation(&y) - 127.5).abs() < 1e-12);
        // single interior pixel: gx = 1, gy = 1
        assert!((average_gradient(&y) - 1.0).abs() < 1e-12);
        // RF² = 1, CF² = 1
        assert!((spatial_frequency(&y) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn self_information() {
        let y = luma(&gray(12, 10, |r, c| ((r * 37 + c * 11) % 64) as u8));
        assert!((mutual_information(&y, &y) - entropy(&y)).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_of_independent_halves() {
        // a depends only on the column parity, b only on the row parity
        let a = luma(&gray(8, 8, |_, c| (c % 2) as u8 * 100));
        let b = luma(&gray(8, 8, |r, _| (r % 2) as u8 * 100));
        assert!(mutual_information(&a, &b).abs() < 1e-12);
    }

    #[test]
    fn self_fusion_qabf_is_one() {
        let y = luma(&gray(20, 20, |r, c| ((r * 13 + c * 7) % 200) as u8));
        assert!((qabf(&y, &y, &y) - 1.0).abs() < 1e-12);
        let flat = luma(&gray(5, 5, |_, _| 3));
        assert_eq!(qabf(&flat, &flat, &flat), 0.0);
    }

    #[test]
    fn qabf_penalizes_lost_edges() {
        let edge = luma(&gray(16, 16, |_, c| if c < 8 { 20 } else { 200 }));
        let flat = luma(&gray(16, 16, |_, _| 110));
        let q = qabf(&edge, &edge, &flat);
        assert!(q < 0.1, "{q}");
    }

    #[test]
    fn csv_layout() {
        let r = MetricReport::from_values([1.0, 2.0, 3.0, 4.0, 5.0, 0.5]);
        assert_eq!(r.csv_row("a"), "a,1.000000,2.000000,3.000000,4.000000,5.000000,0.500000");
        let m = MetricReport::mean(&[r, MetricReport::from_values([3.0; 6])]).unwrap();
        assert_eq!(m.values(), [2.0, 2.5, 3.0, 3.5, 4.0, 1.75]);
        assert!(MetricReport::mean(&[]).is_none());
    }

    #[test]
    fn dimension_mismatch() {
        let a = gray(4, 4, |_, _| 0).to_rgb();
        let b = gray(4, 5, |_, _| 0);
        assert!(matches!(compute_metrics(&a, &a, &b), Err(Error::DimensionMismatch(_))));
    }
}
