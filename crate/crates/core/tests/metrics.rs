mod common;

use common::sample_images;
use proptest::prelude::*;
use qivif::imgcodec::RasterImage;
use qivif::metrics::{
    average_gradient, compute_metrics, entropy, luma, mutual_information, spatial_frequency,
    standard_deviation, Luma,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn transpose(y: &Luma) -> Luma {
    let data = (0..y.cols)
        .flat_map(|c| (0..y.rows).map(move |r| (r, c)))
        .map(|(r, c)| y.data[r * y.cols + c])
        .collect();
    Luma {
        rows: y.cols,
        cols: y.rows,
        data,
    }
}

#[test]
fn sample_metrics_are_finite_and_in_range() {
    let (vis, ir) = sample_images();
    let r = compute_metrics(&vis, &vis, &ir).unwrap();
    assert!(r.is_finite());
    assert!(r.en > 0.0 && r.en <= 8.0);
    assert!(r.qabf >= 0.0 && r.qabf <= 1.0 + 1e-12);
    assert!(r.sd > 0.0 && r.sd <= 127.5);
}

#[test]
fn transpose_invariance() {
    let (vis, ir) = sample_images();
    let (v, i) = (luma(&vis), luma(&ir));
    let (vt, it) = (transpose(&v), transpose(&i));
    assert_eq!(entropy(&v), entropy(&vt));
    assert!((standard_deviation(&v) - standard_deviation(&vt)).abs() < 1e-12);
    assert!((average_gradient(&v) - average_gradient(&vt)).abs() < 1e-12);
    assert!((spatial_frequency(&v) - spatial_frequency(&vt)).abs() < 1e-12);
    assert!((mutual_information(&v, &i) - mutual_information(&vt, &it)).abs() < 1e-12);
}

#[test]
fn shuffle_changes_gradients_but_not_histogram_metrics() {
    let (vis, _) = sample_images();
    let y = luma(&vis);
    let mut shuffled = y.data.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    let s = Luma {
        rows: y.rows,
        cols: y.cols,
        data: shuffled,
    };
    assert_eq!(entropy(&y), entropy(&s));
    assert!((standard_deviation(&y) - standard_deviation(&s)).abs() < 1e-9);
    assert!(average_gradient(&s) > 1.5 * average_gradient(&y));
    assert!(spatial_frequency(&s) > 1.5 * spatial_frequency(&y));
}

#[test]
fn mutual_information_is_symmetric_and_bounded() {
    let (vis, ir) = sample_images();
    let (v, i) = (luma(&vis), luma(&ir));
    let a = mutual_information(&v, &i);
    assert!((a - mutual_information(&i, &v)).abs() < 1e-12);
    assert!(a >= -1e-12 && a <= entropy(&v).min(entropy(&i)) + 1e-12);
    assert!((mutual_information(&v, &v) - entropy(&v)).abs() < 1e-12);
}

#[test]
fn fusing_with_a_blank_image_scores_lower_qabf() {
    let (vis, ir) = sample_images();
    let blank = RasterImage::new(vis.height(), vis.width(), 3, vec![0; vis.samples().len()]).unwrap();
    let good = compute_metrics(&vis, &vis, &ir).unwrap();
    let bad = compute_metrics(&blank, &vis, &ir).unwrap();
    assert!(bad.qabf < good.qabf);
    assert_eq!(bad.sd, 0.0);
    assert_eq!(bad.en, 0.0);
}

proptest! {
    #[test]
    fn histogram_metrics_ignore_pixel_order(data in proptest::collection::vec(any::<u8>(), 64), seed in 0u64..1000) {
        let y = Luma { rows: 8, cols: 8, data: data.clone() };
        let mut d = data;
        d.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let s = Luma { rows: 8, cols: 8, data: d };
        prop_assert!((entropy(&y) - entropy(&s)).abs() < 1e-12);
        prop_assert!((standard_deviation(&y) - standard_deviation(&s)).abs() < 1e-9);
    }

    #[test]
    fn entropy_bounds(data in proptest::collection::vec(any::<u8>(), 1..300)) {
        let y = Luma { rows: 1, cols: data.len(), data };
        let en = entropy(&y);
        prop_assert!(en >= 0.0 && en <= 8.0 + 1e-12);
    }
}
