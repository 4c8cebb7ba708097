//! 8-bit rasters <-> pure quaternion matrices, intensity extraction, PNG I/O.

use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};
use log::warn;

use crate::error::{Error, Result};
use crate::quat::{Quaternion, QuaternionMatrix};

/// An 8-bit raster with 1 (infrared) or 3 (visible) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    height: usize,
    width: usize,
    channels: u8,
    samples: Vec<u8>,
}

impl RasterImage {
    pub fn new(height: usize, width: usize, channels: u8, samples: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParameter(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter("empty raster".into()));
        }
        if samples.len() != height * width * channels as usize {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for {height}x{width}x{channels}",
                samples.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            samples,
        })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: u8,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(height * width * channels as usize);
        for r in 0..height {
            for c in 0..width {
                for ch in 0..channels as usize {
                    samples.push(f(r, c, ch));
                }
            }
        }
        Self::new(height, width, channels, samples)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> u8 {
        self.channels
    }

    #[inline]
    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    #[inline]
    pub fn raw(&self, r: usize, c: usize, ch: usize) -> u8 {
        self.samples[(r * self.width + c) * self.channels as usize + ch]
    }

    /// Sample scaled to `[0, 1]`.
    #[inline]
    pub fn sample(&self, r: usize, c: usize, ch: usize) -> f64 {
        f64::from(self.raw(r, c, ch)) / 255.0
    }

    /// Replicate a single channel into three.
    pub fn to_rgb(&self) -> RasterImage {
        if self.channels == 3 {
            return self.clone();
        }
        let samples = self.samples.iter().flat_map(|&v| [v, v, v]).collect();
        RasterImage {
            height: self.height,
            width: self.width,
            channels: 3,
            samples,
        }
    }

    pub fn transpose(&self) -> RasterImage {
        let ch = self.channels as usize;
        let mut samples = Vec::with_capacity(self.samples.len());
        for c in 0..self.width {
            for r in 0..self.height {
                for k in 0..ch {
                    samples.push(self.raw(r, c, k));
                }
            }
        }
        RasterImage {
            height: self.width,
            width: self.height,
            channels: self.channels,
            samples,
        }
    }
}

fn expect_channels(img: &RasterImage, expected: u8) -> Result<()> {
    if img.channels != expected {
        return Err(Error::ChannelCount {
            expected,
            actual: img.channels,
        });
    }
    Ok(())
}

/// `(r, g, b) ↦ r·i + g·j + b·k`.
pub fn encode_visible(img: &RasterImage) -> Result<QuaternionMatrix> {
    expect_channels(img, 3)?;
    Ok(QuaternionMatrix::from_fn(img.height, img.width, |r, c| {
        Quaternion::pure(img.sample(r, c, 0), img.sample(r, c, 1), img.sample(r, c, 2))
    }))
}

/// Gray `g ↦ g·(i + j + k)`.
pub fn encode_infrared(img: &RasterImage) -> Result<QuaternionMatrix> {
    expect_channels(img, 1)?;
    Ok(QuaternionMatrix::from_fn(img.height, img.width, |r, c| {
        let g = img.sample(r, c, 0);
        Quaternion::pure(g, g, g)
    }))
}

/// Mean of the three imaginary components, unclamped.
#[inline]
pub fn pixel_intensity(q: Quaternion) -> f64 {
    (q.b + q.c + q.d) / 3.0
}

/// Per-pixel intensity without clamping (row-major).
pub fn raw_intensity(a: &QuaternionMatrix) -> Vec<f64> {
    a.as_slice().iter().map(|&q| pixel_intensity(q)).collect()
}

/// Real H×W map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl IntensityMap {
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }
}

/// Intensity `(b + c + d)/3`, clamped to `[0, 1]`.
pub fn intensity(a: &QuaternionMatrix) -> IntensityMap {
    IntensityMap {
        rows: a.rows(),
        cols: a.cols(),
        values: raw_intensity(a)
            .into_iter()
            .map(|v| v.clamp(0.0, 1.0))
            .collect(),
    }
}

/// Clamp to `[0, 1]` and quantize with round-half-up.
#[inline]
pub fn quantize(x: f64) -> u8 {
    if x.is_nan() {
        return 0;
    }
    (x.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Imaginary triple to an 8-bit RGB raster; the real part is discarded.
pub fn decode(a: &QuaternionMatrix) -> RasterImage {
    let samples = a
        .as_slice()
        .iter()
        .flat_map(|q| [quantize(q.b), quantize(q.c), quantize(q.d)])
        .collect();
    RasterImage {
        height: a.rows(),
        width: a.cols(),
        channels: 3,
        samples,
    }
}

/// Signed layers (details, residuals) shown around mid-gray.
pub fn decode_signed(a: &QuaternionMatrix) -> RasterImage {
    decode(&a.map(|q| Quaternion::pure(q.b + 0.5, q.c + 0.5, q.d + 0.5)))
}

/// A real map min-max stretched into a gray raster.
pub fn decode_map(rows: usize, cols: usize, values: &[f64]) -> RasterImage {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let samples = values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                quantize((v - lo) / span)
            } else {
                0
            }
        })
        .collect();
    RasterImage {
        height: rows,
        width: cols,
        channels: 1,
        samples,
    }
}

fn from_dynamic(img: DynamicImage, channels: u8, path: &Path) -> RasterImage {
    if img.color().has_alpha() {
        warn!("{}: dropping alpha channel", path.display());
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let samples = match channels {
        1 => {
            if img.color().has_color() {
                warn!("{}: converting color image to grayscale", path.display());
            }
            img.into_luma8().into_raw()
        }
        _ => img.into_rgb8().into_raw(),
    };
    RasterImage {
        height: h,
        width: w,
        channels,
        samples,
    }
}

fn open(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Read a PNG as 3-channel RGB (gray inputs are replicated).
pub fn read_rgb(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    Ok(from_dynamic(open(path)?, 3, path))
}

/// Read a PNG as a single gray channel.
pub fn read_gray(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    Ok(from_dynamic(open(path)?, 1, path))
}

pub fn write_png(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.width as u32, img.height as u32);
    let res = match img.channels {
        1 => GrayImage::from_raw(w, h, img.samples.clone())
            .expect("raster size checked at construction")
            .save_with_format(path, image::ImageFormat::Png),
        _ => RgbImage::from_raw(w, h, img.samples.clone())
            .expect("raster size checked at construction")
            .save_with_format(path, image::ImageFormat::Png),
    };
    res.map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}
