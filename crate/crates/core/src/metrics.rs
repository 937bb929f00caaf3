//! Evaluation: PSNR on the missing region and gradient sparsity measures.

use crate::error::{Error, Result};
use crate::image::{gradient, integral_magnitude, DepthImage, Mask};
use crate::tv::tv_norm;

/// Peak sample value of 8-bit depth images.
pub const PEAK: f64 = 255.0;

/// Mean squared error over missing pixels.
pub fn mse_on_mask(gt: &DepthImage, result: &DepthImage, mask: &Mask) -> Result<f64> {
    mask.matches(gt)?;
    mask.matches(result)?;
    let missing = mask.missing_count();
    if missing == 0 {
        return Err(Error::InvalidEval("mask has no missing pixels".into()));
    }
    let sse: f64 = gt
        .data()
        .iter()
        .zip(result.data())
        .zip(mask.as_slice())
        .filter(|(_, &m)| m)
        .map(|((a, b), _)| (a - b) * (a - b))
        .sum();
    Ok(sse / missing as f64)
}

/// PSNR in dB over missing pixels; `f64::INFINITY` when they match exactly.
pub fn psnr_on_mask(gt: &DepthImage, result: &DepthImage, mask: &Mask) -> Result<f64> {
    Ok(psnr_from_mse(mse_on_mask(gt, result, mask)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

/// Pixels whose truncated gradient magnitude is nonzero.
pub fn l0_gradient_count(img: &DepthImage) -> usize {
    integral_magnitude(&gradient(img))
        .values
        .iter()
        .filter(|&&m| m > 0)
        .count()
}

/// `alpha * #(magnitude = 1) + #(magnitude > 1)`.
pub fn l0psi_measure(img: &DepthImage, alpha: f64) -> f64 {
    let mags = integral_magnitude(&gradient(img)).values;
    let ones = mags.iter().filter(|&&m| m == 1).count();
    let big = mags.iter().filter(|&&m| m > 1).count();
    alpha * ones as f64 + big as f64
}

/// Formats a PSNR value, writing `inf` for an exact match.
pub fn format_psnr(psnr: f64) -> String {
    if psnr.is_infinite() {
        "inf".to_string()
    } else {
        format!("{psnr:.4}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub psnr_missing: f64,
    pub mse_missing: f64,
    pub tv_norm: f64,
    pub l0_gradient: usize,
    pub l0psi_gradient: f64,
}

impl EvalReport {
    /// PSNR/MSE on the missing region; gradient measures of `result`.
    pub fn evaluate(gt: &DepthImage, result: &DepthImage, mask: &Mask, alpha: f64) -> Result<Self> {
        let mse = mse_on_mask(gt, result, mask)?;
        Ok(Self {
            psnr_missing: psnr_from_mse(mse),
            mse_missing: mse,
            tv_norm: tv_norm(result),
            l0_gradient: l0_gradient_count(result),
            l0psi_gradient: l0psi_measure(result, alpha),
        })
    }

    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("psnr_missing", format_psnr(self.psnr_missing)),
            ("mse_missing", format!("{:.6}", self.mse_missing)),
            ("tv_norm", format!("{:.4}", self.tv_norm)),
            ("l0_gradient", self.l0_gradient.to_string()),
            ("l0psi_gradient", format!("{:.4}", self.l0psi_gradient)),
        ]
    }

    /// `key=value` block, one pair per line.
    pub fn to_text(&self) -> String {
        self.to_key_values()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub const CSV_HEADER: &'static str = "file,psnr,tv,l0,l0psi";

    pub fn csv_row(&self, file: &str) -> String {
        format!(
            "{},{},{:.4},{},{:.4}",
            file,
            format_psnr(self.psnr_missing),
            self.tv_norm,
            self.l0_gradient,
            self.l0psi_gradient
        )
    }
}
