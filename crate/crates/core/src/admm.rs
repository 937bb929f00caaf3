//! Outer ADMM loop coupling the gradient prior on `U` with the nuclear norm
//! on its copy `M` through a scaled dual `Y`.

use crate::config::{AdmmStart, Method, SolverConfig};
use crate::error::{Error, Result};
use crate::fusion::{solve_gradient_subproblem, GradientMeasure, GradientSubproblem};
use crate::image::{DepthImage, Mask};
use crate::lowrank::{masked_fidelity, nuclear_norm, solve_lr, svt, LowRankSolution};
use crate::metrics::{l0_gradient_count, l0psi_measure};
use crate::tv::{solve_tv_subproblem, tv_norm, TvSubproblem};

/// Iterates of the outer loop.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub u: DepthImage,
    pub m: DepthImage,
    pub y: DepthImage,
    /// Completed outer iterations.
    pub iter: usize,
    /// `||U_k - U_{k-1}||_F / ||U_{k-1}||_F` of the last iteration.
    pub rel_change: f64,
    /// Composite objective at `U` after each outer iteration.
    pub objective_trace: Vec<f64>,
    /// True when the relative change dropped below the tolerance.
    pub converged: bool,
}

impl SolverState {
    /// `||U - M||_F / ||U||_F`.
    pub fn primal_residual(&self) -> f64 {
        let diff = self
            .u
            .zip_with(&self.m, |a, b| a - b)
            .expect("state dimensions agree")
            .frobenius_norm();
        diff / self.u.frobenius_norm().max(f64::MIN_POSITIVE)
    }
}

/// Composite objective of the configured method at `state.u`:
/// `||U - D||^2_obs + lambda_r ||U||_* + lambda * G(U)` with `G` the
/// anisotropic TV, the L0 gradient count or the low gradient measure.
pub fn objective(state: &SolverState, d: &DepthImage, mask: &Mask, cfg: &SolverConfig) -> Result<f64> {
    objective_at(&state.u, d, mask, cfg)
}

/// [`objective`] for a bare image.
pub fn objective_at(u: &DepthImage, d: &DepthImage, mask: &Mask, cfg: &SolverConfig) -> Result<f64> {
    mask.matches(u)?;
    mask.matches(d)?;
    let gradient_term = match cfg.method {
        Method::Lr => 0.0,
        Method::LrTv => tv_norm(u),
        Method::LrL0 => l0_gradient_count(u) as f64,
        Method::LrL0Psi => l0psi_measure(u, cfg.alpha),
    };
    Ok(masked_fidelity(u, d, mask)
        + cfg.lambda_r * nuclear_norm(&u.to_matrix())?
        + cfg.gradient_weight() * gradient_term)
}

/// Inpaints the missing pixels of `d`.
///
/// The returned image keeps the observed pixels of `d`, takes the missing
/// ones from `U`, and is clamped to `[0, 255]` and rounded. For
/// [`Method::Lr`] the low rank completion is returned directly and the
/// state holds that single solution.
pub fn solve(d: &DepthImage, mask: &Mask, cfg: &SolverConfig) -> Result<(DepthImage, SolverState)> {
    let lr = solve_lr(d, mask, cfg)?;
    solve_from(d, mask, cfg, lr)
}

/// [`solve`] starting from an already computed low rank completion of the
/// same input, which lets several methods share one.
pub fn solve_from(
    d: &DepthImage,
    mask: &Mask,
    cfg: &SolverConfig,
    lr: LowRankSolution,
) -> Result<(DepthImage, SolverState)> {
    cfg.validate()?;
    mask.matches(d)?;
    mask.ensure_observed()?;
    mask.matches(&lr.raw)?;

    let u0 = lr.raw;
    let (w, h) = (d.width(), d.height());

    if cfg.method == Method::Lr {
        let state = SolverState {
            m: u0.clone(),
            y: DepthImage::filled(w, h, 0.0)?,
            iter: 0,
            rel_change: 0.0,
            objective_trace: lr.objective_trace,
            converged: lr.converged,
            u: u0,
        };
        return Ok((lr.image.finalized(), state));
    }

    let (m0, y0) = match cfg.admm_start {
        AdmmStart::LowRankWarm => {
            let y = DepthImage::new(
                w,
                h,
                (0..w * h)
                    .map(|k| {
                        if mask.is_missing(k) {
                            0.0
                        } else {
                            -2.0 / cfg.rho * (u0.data()[k] - d.data()[k])
                        }
                    })
                    .collect(),
            )?;
            (u0.clone(), y)
        }
        AdmmStart::Zero => (DepthImage::filled(w, h, 0.0)?, DepthImage::filled(w, h, 0.0)?),
    };

    let mut state = SolverState {
        u: u0,
        m: m0,
        y: y0,
        iter: 0,
        rel_change: f64::INFINITY,
        objective_trace: Vec::new(),
        converged: false,
    };

    while state.iter < cfg.max_outer_iters {
        let u_next = u_step(d, mask, cfg, &state)?;
        let v = u_next.zip_with(&state.y, |a, b| a + b)?;
        let m_next = DepthImage::from_matrix(&svt(&v.to_matrix(), cfg.lambda_r / cfg.rho)?.matrix)?;
        let y_next = state
            .y
            .zip_with(&u_next, |y, u| y + u)?
            .zip_with(&m_next, |t, m| t - m)?;
        if !(u_next.is_finite() && m_next.is_finite() && y_next.is_finite()) {
            return Err(Error::Divergence(format!(
                "non-finite iterate at outer iteration {}",
                state.iter + 1
            )));
        }

        let change = u_next.zip_with(&state.u, |a, b| a - b)?.frobenius_norm()
            / state.u.frobenius_norm().max(f64::MIN_POSITIVE);
        state.u = u_next;
        state.m = m_next;
        state.y = y_next;
        state.iter += 1;
        state.rel_change = change;
        state.objective_trace.push(objective(&state, d, mask, cfg)?);
        if change < cfg.rel_tol {
            state.converged = true;
            break;
        }
    }

    Ok((mask.compose(d, &state.u)?.finalized(), state))
}

fn u_step(d: &DepthImage, mask: &Mask, cfg: &SolverConfig, s: &SolverState) -> Result<DepthImage> {
    match cfg.method {
        Method::Lr => unreachable!("low rank method has no outer loop"),
        Method::LrTv => {
            let p = TvSubproblem {
                observed: d,
                mask,
                m: &s.m,
                y: &s.y,
                rho: cfg.rho,
                lambda_tv: cfg.lambda_tv,
            };
            solve_tv_subproblem(&p, cfg.tv_inner_iters, cfg.tv_penalty_scale * cfg.lambda_tv)
        }
        Method::LrL0 | Method::LrL0Psi => {
            let (lambda, measure) = if cfg.method == Method::LrL0 {
                (cfg.lambda_l0, GradientMeasure::L0)
            } else {
                (cfg.lambda_l0psi, GradientMeasure::L0Psi { alpha: cfg.alpha })
            };
            let p = GradientSubproblem {
                observed: d,
                mask,
                m: &s.m,
                y: &s.y,
                rho: cfg.rho,
                lambda,
                measure,
                ramp_steps: cfg.ramp_steps,
            };
            solve_gradient_subproblem(&p)
        }
    }
}
