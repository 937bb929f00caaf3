//! Total variation subproblem of the LRTV splitting.
//!
//! Minimizes `||U - D||^2_obs + lambda_tv * TV(U) + rho/2 * ||U - (M - Y)||^2`
//! with anisotropic TV under the forward-difference convention of
//! [`crate::image::gradient`]. The solver is split Bregman: auxiliary
//! gradients `d = grad U`, per-pixel shrinkage, and one Gauss-Seidel sweep of
//! the masked quadratic system per Bregman pass.

use crate::error::{Error, Result};
use crate::image::{gradient, DepthImage, Mask};
use crate::lowrank::masked_fidelity;

/// Anisotropic total variation `sum |dx| + |dy|`.
pub fn tv_norm(img: &DepthImage) -> f64 {
    let g = gradient(img);
    g.dx.iter().chain(&g.dy).map(|v| v.abs()).sum()
}

/// Inputs of one TV subproblem.
#[derive(Debug, Clone, Copy)]
pub struct TvSubproblem<'a> {
    pub observed: &'a DepthImage,
    pub mask: &'a Mask,
    pub m: &'a DepthImage,
    pub y: &'a DepthImage,
    pub rho: f64,
    pub lambda_tv: f64,
}

impl TvSubproblem<'_> {
    fn validate(&self) -> Result<()> {
        let (w, h) = (self.observed.width(), self.observed.height());
        self.mask.matches(self.observed)?;
        self.m.same_dims(w, h)?;
        self.y.same_dims(w, h)?;
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidConfig(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.lambda_tv >= 0.0 && self.lambda_tv.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda_tv must be >= 0, got {}",
                self.lambda_tv
            )));
        }
        Ok(())
    }

    /// The quadratic coupling target `M - Y`.
    fn target(&self) -> Vec<f64> {
        self.m
            .data()
            .iter()
            .zip(self.y.data())
            .map(|(m, y)| m - y)
            .collect()
    }

    /// Observed data on observed pixels, `M - Y` elsewhere.
    pub fn warm_start(&self) -> DepthImage {
        let target = self.target();
        let data = self
            .observed
            .data()
            .iter()
            .enumerate()
            .map(|(k, &d)| if self.mask.is_missing(k) { target[k] } else { d })
            .collect();
        DepthImage::new(self.observed.width(), self.observed.height(), data)
            .expect("validated dimensions")
    }

    /// Value of the subproblem objective at `u`.
    pub fn objective(&self, u: &DepthImage) -> f64 {
        let coupling: f64 = u
            .data()
            .iter()
            .zip(self.target())
            .map(|(a, t)| (a - t) * (a - t))
            .sum();
        masked_fidelity(u, self.observed, self.mask)
            + self.lambda_tv * tv_norm(u)
            + 0.5 * self.rho * coupling
    }
}

fn shrink(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Split-Bregman solve of the TV subproblem.
///
/// `penalty` is the Bregman penalty `mu`; `inner_iters` counts Bregman
/// passes. The best iterate by objective value is returned, so the result
/// never scores worse than the warm start.
pub fn solve_tv_subproblem(
    input: &TvSubproblem<'_>,
    inner_iters: usize,
    penalty: f64,
) -> Result<DepthImage> {
    input.validate()?;
    let (w, h) = (input.observed.width(), input.observed.height());
    let n = w * h;
    let target = input.target();
    let obs = input.mask.observed_weights();
    let d = input.observed.data();
    let rho = input.rho;

    if input.lambda_tv == 0.0 {
        // pixelwise stationary point of the two quadratics
        let data = (0..n)
            .map(|k| {
                let wd = 2.0 * obs[k];
                target[k] + wd / (wd + rho) * (d[k] - target[k])
            })
            .collect();
        return DepthImage::new(w, h, data);
    }
    if !(penalty > 0.0 && penalty.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "Bregman penalty must be > 0, got {penalty}"
        )));
    }

    let mu = penalty;
    let thresh = input.lambda_tv / mu;
    let mut u = input.warm_start();
    let mut best_obj = input.objective(&u);
    let mut best = u.clone();

    let g0 = gradient(&u);
    let (mut dx, mut dy) = (g0.dx, g0.dy);
    let mut bx = vec![0.0; n];
    let mut by = vec![0.0; n];

    for _ in 0..inner_iters {
        gauss_seidel_sweep(
            u.data_mut(),
            w,
            h,
            &GsTerms {
                obs: &obs,
                d,
                target: &target,
                rho,
                mu,
                dx: &dx,
                dy: &dy,
                bx: &bx,
                by: &by,
            },
        );
        if !u.is_finite() {
            return Err(Error::Divergence(
                "TV subproblem produced non-finite values".into(),
            ));
        }

        let g = gradient(&u);
        for k in 0..n {
            let j = k % w;
            let i = k / w;
            if j + 1 < w {
                dx[k] = shrink(g.dx[k] + bx[k], thresh);
                bx[k] += g.dx[k] - dx[k];
            }
            if i + 1 < h {
                dy[k] = shrink(g.dy[k] + by[k], thresh);
                by[k] += g.dy[k] - dy[k];
            }
        }

        let obj = input.objective(&u);
        if obj < best_obj {
            best_obj = obj;
            best.data_mut().copy_from_slice(u.data());
        }
    }
    Ok(best)
}

struct GsTerms<'a> {
    obs: &'a [f64],
    d: &'a [f64],
    target: &'a [f64],
    rho: f64,
    mu: f64,
    dx: &'a [f64],
    dy: &'a [f64],
    bx: &'a [f64],
    by: &'a [f64],
}

/// One in-place Gauss-Seidel sweep on
/// `(2 m + rho + mu grad^T grad) u = 2 m d + rho t + mu grad^T (d - b)`.
fn gauss_seidel_sweep(u: &mut [f64], w: usize, h: usize, t: &GsTerms<'_>) {
    for i in 0..h {
        for j in 0..w {
            let k = i * w + j;
            let mut diag = 2.0 * t.obs[k] + t.rho;
            let mut rhs = 2.0 * t.obs[k] * t.d[k] + t.rho * t.target[k];
            // horizontal edge (k, k+1) carries e = dx - bx at k
            if j + 1 < w {
                let e = t.dx[k] - t.bx[k];
                diag += t.mu;
                rhs += t.mu * (u[k + 1] - e);
            }
            if j > 0 {
                let e = t.dx[k - 1] - t.bx[k - 1];
                diag += t.mu;
                rhs += t.mu * (u[k - 1] + e);
            }
            if i + 1 < h {
                let e = t.dy[k] - t.by[k];
                diag += t.mu;
                rhs += t.mu * (u[k + w] - e);
            }
            if i > 0 {
                let e = t.dy[k - w] - t.by[k - w];
                diag += t.mu;
                rhs += t.mu * (u[k - w] + e);
            }
            u[k] = rhs / diag;
        }
    }
}
