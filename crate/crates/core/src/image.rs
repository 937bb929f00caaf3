//! Depth images, missing-pixel masks and forward-difference gradients.
//!
//! Images are stored row-major as `f64` on the 8-bit scale. Solver iterates
//! are continuous; [`DepthImage::finalized`] rounds and clamps to `[0, 255]`
//! for output and for the integral gradient statistics.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A single-channel depth (disparity) image.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "image data has {} samples, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from `f(row, col)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                data.push(f(i, j));
            }
        }
        Self::new(width, height, data)
    }

    pub fn from_u8(width: usize, height: usize, samples: &[u8]) -> Result<Self> {
        Self::new(width, height, samples.iter().map(|&v| f64::from(v)).collect())
    }

    /// Row-major image from a `height x width` matrix.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::from_fn(m.ncols(), m.nrows(), |i, j| m[(i, j)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn same_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.width != width || self.height != height {
            return Err(Error::DimensionMismatch {
                expected_w: width,
                expected_h: height,
                got_w: self.width,
                got_h: self.height,
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pixelwise combination of two images of equal size.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        other.same_dims(self.width, self.height)?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.height, self.width, &self.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Rounds to the nearest integer and clamps to `[0, 255]`.
    pub fn finalized(&self) -> Self {
        self.map(|v| {
            if v.is_nan() {
                0.0
            } else {
                v.round().clamp(0.0, 255.0)
            }
        })
    }

    /// True when every sample is an integer in `[0, 255]`.
    pub fn is_finalized(&self) -> bool {
        self.data
            .iter()
            .all(|&v| v.fract() == 0.0 && (0.0..=255.0).contains(&v))
    }

    /// 8-bit samples of a finalized image.
    pub fn to_u8(&self) -> Result<Vec<u8>> {
        if !self.is_finalized() {
            return Err(Error::InvalidInput(
                "image is not finalized to integers in [0, 255]".into(),
            ));
        }
        Ok(self.data.iter().map(|&v| v as u8).collect())
    }
}

/// Missing-pixel mask; `true` marks a pixel to be inpainted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    missing: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, missing: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        if missing.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "mask has {} entries, expected {}",
                missing.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            missing,
        })
    }

    /// Mask with nothing missing.
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    /// Mask with every pixel missing.
    pub fn full(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut missing = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                missing.push(f(i, j));
            }
        }
        Self::new(width, height, missing)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.missing
    }

    #[inline]
    pub fn is_missing(&self, idx: usize) -> bool {
        self.missing[idx]
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn observed_count(&self) -> usize {
        self.len() - self.missing_count()
    }

    /// 1.0 on observed pixels, 0.0 on missing ones.
    pub fn observed_weights(&self) -> Vec<f64> {
        self.missing
            .iter()
            .map(|&m| if m { 0.0 } else { 1.0 })
            .collect()
    }

    pub fn matches(&self, img: &DepthImage) -> Result<()> {
        img.same_dims(self.width, self.height)
    }

    /// `observed` on observed pixels, `filled` on missing ones.
    pub fn compose(&self, observed: &DepthImage, filled: &DepthImage) -> Result<DepthImage> {
        self.matches(observed)?;
        self.matches(filled)?;
        let data = self
            .missing
            .iter()
            .zip(observed.data().iter().zip(filled.data()))
            .map(|(&m, (&o, &f))| if m { f } else { o })
            .collect();
        DepthImage::new(self.width, self.height, data)
    }

    /// A solvable instance needs at least one observed pixel.
    pub fn ensure_observed(&self) -> Result<()> {
        if self.observed_count() == 0 {
            return Err(Error::InvalidInput(
                "mask leaves no observed pixels".into(),
            ));
        }
        Ok(())
    }
}

/// Forward differences with zero at the last column (`dx`) and row (`dy`).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
}

/// Per-pixel truncated gradient magnitudes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MagnitudeGrid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<u64>,
}

/// Map from integral gradient magnitude to pixel count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GradientHistogram {
    pub counts: BTreeMap<u64, usize>,
}

impl GradientHistogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, magnitude: u64) -> usize {
        self.counts.get(&magnitude).copied().unwrap_or(0)
    }
}

pub fn gradient(img: &DepthImage) -> GradientField {
    let (w, h) = (img.width(), img.height());
    let mut dx = vec![0.0; w * h];
    let mut dy = vec![0.0; w * h];
    for i in 0..h {
        for j in 0..w {
            let p = i * w + j;
            if j + 1 < w {
                dx[p] = img.data[p + 1] - img.data[p];
            }
            if i + 1 < h {
                dy[p] = img.data[p + w] - img.data[p];
            }
        }
    }
    GradientField {
        width: w,
        height: h,
        dx,
        dy,
    }
}

/// `floor(sqrt(dx^2 + dy^2))`, exact for integer differences.
pub fn truncated_magnitude(dx: f64, dy: f64) -> u64 {
    let sq = dx * dx + dy * dy;
    let mut k = sq.sqrt().floor();
    // sqrt rounding can land one off an integer boundary
    while (k + 1.0) * (k + 1.0) <= sq {
        k += 1.0;
    }
    while k > 0.0 && k * k > sq {
        k -= 1.0;
    }
    k as u64
}

pub fn integral_magnitude(g: &GradientField) -> MagnitudeGrid {
    MagnitudeGrid {
        width: g.width,
        height: g.height,
        values: g
            .dx
            .iter()
            .zip(&g.dy)
            .map(|(&x, &y)| truncated_magnitude(x, y))
            .collect(),
    }
}

pub fn gradient_histogram(img: &DepthImage) -> GradientHistogram {
    let mut counts = BTreeMap::new();
    for m in integral_magnitude(&gradient(img)).values {
        *counts.entry(m).or_insert(0) += 1;
    }
    GradientHistogram { counts }
}
