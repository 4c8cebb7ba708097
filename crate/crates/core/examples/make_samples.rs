//! Regenerates the bundled 64×64 sample pair in `data/`.
//!
//! Visible: dim low-light texture with a bright glow blob centred at
//! (row 18, col 44). Infrared: dim background with a warm pedestrian-like
//! silhouette (elliptical body plus head) whose bounding box is `TARGET_BOX`.

use std::path::Path;

use qivif::imgcodec::{write_png, RasterImage};

const N: usize = 64;
/// (row_start, row_end, col_start, col_end), half-open.
const TARGET_BOX: (usize, usize, usize, usize) = (32, 51, 11, 22);

fn in_target(i: usize, j: usize) -> bool {
    let (y, x) = (i as f64, j as f64);
    let body = ((y - 44.0) / 6.5).powi(2) + ((x - 16.0) / 4.5).powi(2) <= 1.0;
    let head = (y - 35.5).powi(2) + (x - 16.0).powi(2) <= 2.8f64.powi(2);
    body || head
}

fn hash(i: usize, j: usize, c: usize) -> f64 {
    let mut x = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (j as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ (c as u64 + 1).wrapping_mul(0x1656_67B1);
    x ^= x >> 33;
    x = x.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    x ^= x >> 33;
    (x >> 11) as f64 / (1u64 << 53) as f64
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir).expect("create data dir");

    let (r0, r1, c0, c1) = TARGET_BOX;
    for i in 0..N {
        for j in 0..N {
            assert!(!in_target(i, j) || ((r0..r1).contains(&i) && (c0..c1).contains(&j)));
        }
    }
    let vis = RasterImage::from_fn(N, N, 3, |i, j, c| {
        let (y, x) = (i as f64, j as f64);
        let stripes = 0.5 + 0.5 * (x * 0.9 + 0.3 * y).sin();
        let bricks = if (i / 8 + j / 8) % 2 == 0 { 0.06 } else { 0.0 };
        let tint = [1.0, 0.9, 0.8][c];
        let texture = 0.08 + 0.12 * stripes + bricks + 0.03 * hash(i, j, c);
        let d2 = (y - 18.0).powi(2) + (x - 44.0).powi(2);
        let glow = 0.75 * (-d2 / (2.0 * 9.0f64.powi(2))).exp();
        let target = if in_target(i, j) { 0.03 } else { 0.0 };
        to_u8(tint * texture + glow + target)
    })
    .expect("valid raster");
    let ir = RasterImage::from_fn(N, N, 1, |i, j, _| {
        let (y, x) = (i as f64, j as f64);
        let background = 0.18 + 0.06 * (y / N as f64) + 0.02 * (0.2 * x).cos() + 0.02 * hash(i, j, 7);
        let target = if in_target(i, j) { 0.52 + 0.12 * hash(i, j, 9) } else { 0.0 };
        to_u8(background + target)
    })
    .expect("valid raster");
    write_png(&vis, dir.join("vis_glow.png")).expect("write visible sample");
    write_png(&ir, dir.join("ir.png")).expect("write infrared sample");
    println!("wrote {}", dir.display());
}
