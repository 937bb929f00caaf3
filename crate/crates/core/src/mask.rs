//! Corruption masks: i.i.d. random missing pixels and thresholded stencils.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::Mask;
use crate::io::{decode_gray, GrayImage};

/// Stencil samples above this value are missing.
pub const STENCIL_THRESHOLD: u8 = 127;

#[derive(Debug, Clone, PartialEq)]
pub enum MaskKind {
    Random { rate: f64 },
    Textual { stencil: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    pub kind: MaskKind,
    pub seed: u64,
}

impl MaskSpec {
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            MaskKind::Random { rate } => check_rate(*rate),
            MaskKind::Textual { stencil } => {
                if stencil.is_file() {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!(
                        "stencil '{}' is not a readable file",
                        stencil.display()
                    )))
                }
            }
        }
    }

    /// Builds the mask. Random masks take the given size; stencils carry
    /// their own.
    pub fn generate(&self, width: usize, height: usize) -> Result<Mask> {
        self.validate()?;
        match &self.kind {
            MaskKind::Random { rate } => gen_random_mask(width, height, *rate, self.seed),
            MaskKind::Textual { stencil } => load_textual_mask(stencil),
        }
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("rate must lie in (0, 1), got {rate}")))
    }
}

/// Each pixel is missing independently with probability `rate`.
///
/// Pixels are drawn in row-major order from a ChaCha8 stream seeded with
/// `seed`. If every pixel comes out missing, pixel 0 is kept observed.
pub fn gen_random_mask(width: usize, height: usize, rate: f64, seed: u64) -> Result<Mask> {
    check_rate(rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut missing: Vec<bool> = (0..width * height)
        .map(|_| rng.random::<f64>() < rate)
        .collect();
    if missing.iter().all(|&m| m) {
        if let Some(first) = missing.first_mut() {
            *first = false;
        }
    }
    Mask::new(width, height, missing)
}

pub fn stencil_to_mask(stencil: &GrayImage) -> Result<Mask> {
    Mask::new(
        stencil.width,
        stencil.height,
        stencil.samples.iter().map(|&v| v > STENCIL_THRESHOLD).collect(),
    )
}

/// Thresholds a grayscale stencil: bright strokes mark missing pixels.
pub fn load_textual_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let bytes = std::fs::read(path)?;
    stencil_to_mask(&decode_gray(&bytes)?)
}
