//! Nuclear-norm machinery: singular value thresholding and the plain low
//! rank completion baseline.

use nalgebra::DMatrix;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::image::{DepthImage, Mask};

/// Output of [`svt`].
#[derive(Debug, Clone)]
pub struct ShrinkageResult {
    pub matrix: DMatrix<f64>,
    /// Sum of the shrunk singular values.
    pub nuclear_norm: f64,
    /// Number of singular values left nonzero.
    pub rank_after: usize,
}

/// Singular value soft-thresholding, the proximal map of `tau * ||.||_*`.
///
/// Returns the unique minimizer of `tau * ||M||_* + 0.5 * ||M - x||_F^2`.
pub fn svt(x: &DMatrix<f64>, tau: f64) -> Result<ShrinkageResult> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!("threshold must be >= 0, got {tau}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("svt input contains non-finite values".into()));
    }
    if tau == 0.0 {
        let singular = x.clone().svd(false, false).singular_values;
        return Ok(ShrinkageResult {
            matrix: x.clone(),
            nuclear_norm: singular.iter().sum(),
            rank_after: singular.iter().filter(|&&s| s > 0.0).count(),
        });
    }

    let svd = x.clone().svd(true, true);
    let u = svd
        .u
        .ok_or_else(|| Error::InvalidInput("SVD did not produce U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::InvalidInput("SVD did not produce V^T".into()))?;

    let shrunk: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| (s - tau).max(0.0))
        .collect();
    let rank_after = shrunk.iter().filter(|&&s| s > 0.0).count();

    let mut matrix = DMatrix::zeros(x.nrows(), x.ncols());
    for (k, &s) in shrunk.iter().enumerate().filter(|(_, &s)| s > 0.0) {
        let col = u.column(k) * s;
        matrix.ger(1.0, &col, &v_t.row(k).transpose(), 1.0);
    }
    Ok(ShrinkageResult {
        matrix,
        nuclear_norm: shrunk.iter().sum(),
        rank_after,
    })
}

/// Sum of singular values.
pub fn nuclear_norm(x: &DMatrix<f64>) -> Result<f64> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix contains non-finite values".into()));
    }
    Ok(x.clone().svd(false, false).singular_values.iter().sum())
}

/// `||u - d||^2` restricted to observed pixels.
pub fn masked_fidelity(u: &DepthImage, d: &DepthImage, mask: &Mask) -> f64 {
    u.data()
        .iter()
        .zip(d.data())
        .zip(mask.as_slice())
        .filter(|(_, &miss)| !miss)
        .map(|((a, b), _)| (a - b) * (a - b))
        .sum()
}

/// Result of the low rank completion solver.
#[derive(Debug, Clone)]
pub struct LowRankSolution {
    /// Observed pixels from the input, missing ones from the final
    /// iterate, clamped to `[0, 255]` but not rounded.
    pub image: DepthImage,
    /// Final iterate before clamping.
    pub raw: DepthImage,
    pub iterations: usize,
    /// False when the iteration cap was hit before the tolerance.
    pub converged: bool,
    /// `||U - D||^2_obs + lambda_r ||U||_*` after each iteration.
    pub objective_trace: Vec<f64>,
}

/// Nuclear-norm regularized completion by iterative soft-thresholding.
///
/// Each step replaces observed entries with the data and shrinks singular
/// values by `lambda_r / 2`: a proximal gradient step of unit Lipschitz-scaled
/// size on `||U - D||^2_obs + lambda_r ||U||_*`, so the objective is
/// non-increasing. Missing entries start at the mean of the observed ones.
pub fn solve_lr(d: &DepthImage, mask: &Mask, cfg: &SolverConfig) -> Result<LowRankSolution> {
    cfg.validate()?;
    mask.matches(d)?;
    mask.ensure_observed()?;
    if !d.is_finite() {
        return Err(Error::InvalidInput("observation contains non-finite values".into()));
    }

    let observed_mean = d
        .data()
        .iter()
        .zip(mask.as_slice())
        .filter(|(_, &m)| !m)
        .map(|(v, _)| v)
        .sum::<f64>()
        / mask.observed_count() as f64;

    let mut u = d.zip_with(&mask_as_image(mask), |v, miss| {
        if miss > 0.5 {
            observed_mean
        } else {
            v
        }
    })?;
    let tau = cfg.lambda_r / 2.0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.lr_max_iters {
        // gradient step of size 1/2 on the fidelity term: observed entries snap to the data
        let mut z = u.clone();
        for (k, v) in z.data_mut().iter_mut().enumerate() {
            if !mask.is_missing(k) {
                *v = d.data()[k];
            }
        }
        let shrunk = svt(&z.to_matrix(), tau)?;
        let next = DepthImage::from_matrix(&shrunk.matrix)?;
        iterations += 1;

        let objective = masked_fidelity(&next, d, mask) + cfg.lambda_r * shrunk.nuclear_norm;
        trace.push(objective);

        let denom = u.frobenius_norm().max(f64::MIN_POSITIVE);
        let change = next
            .zip_with(&u, |a, b| a - b)?
            .frobenius_norm()
            / denom;
        u = next;
        if change < cfg.lr_rel_tol {
            converged = true;
            break;
        }
    }

    Ok(LowRankSolution {
        image: mask.compose(d, &u)?.map(|v| v.clamp(0.0, 255.0)),
        raw: u,
        iterations,
        converged,
        objective_trace: trace,
    })
}

fn mask_as_image(mask: &Mask) -> DepthImage {
    DepthImage::new(
        mask.width(),
        mask.height(),
        mask.as_slice().iter().map(|&m| if m { 1.0 } else { 0.0 }).collect(),
    )
    .expect("mask dimensions are valid")
}
