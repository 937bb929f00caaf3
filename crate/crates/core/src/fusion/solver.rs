use crate::error::{Error, Result};
use crate::image::{DepthImage, Mask};
use crate::lowrank::masked_fidelity;

use super::criterion::{decide, FusionCase, GradientMeasure, PairParams};
use super::graph::RegionGraph;

/// Tolerance for the equality tests of the pairwise penalty when scoring a
/// finished image.
pub const PENALTY_TOL: f64 = 1e-9;

/// Linear ramp `beta_k = (k / steps) * lambda`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSchedule {
    pub lambda: f64,
    pub steps: usize,
}

impl BetaSchedule {
    pub fn new(lambda: f64, steps: usize) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {lambda}")));
        }
        if steps == 0 {
            return Err(Error::InvalidConfig("ramp needs at least one step".into()));
        }
        Ok(Self { lambda, steps })
    }

    /// Number of sweeps the ramp runs.
    pub fn passes(&self) -> usize {
        self.steps + 1
    }

    pub fn betas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |k| (k as f64 / self.steps as f64) * self.lambda)
    }
}

/// One gradient subproblem:
/// `||U - D||^2_obs + lambda * G(U) + rho/2 ||U - (M - Y)||^2`
/// where `G` sums the measure's penalty over four-connected pixel pairs.
#[derive(Debug, Clone, Copy)]
pub struct GradientSubproblem<'a> {
    pub observed: &'a DepthImage,
    pub mask: &'a Mask,
    pub m: &'a DepthImage,
    pub y: &'a DepthImage,
    pub rho: f64,
    pub lambda: f64,
    pub measure: GradientMeasure,
    pub ramp_steps: usize,
}

impl GradientSubproblem<'_> {
    fn target(&self) -> Result<DepthImage> {
        self.m.zip_with(self.y, |m, y| m - y)
    }

    /// Objective value at `u`.
    pub fn objective(&self, u: &DepthImage) -> Result<f64> {
        let target = self.target()?;
        let coupling: f64 = u
            .data()
            .iter()
            .zip(target.data())
            .map(|(a, t)| (a - t) * (a - t))
            .sum();
        Ok(masked_fidelity(u, self.observed, self.mask)
            + 0.5 * self.rho * coupling
            + self.lambda * pairwise_penalty(u, self.measure))
    }
}

/// Sum of the measure's penalty over horizontal and vertical neighbor pairs.
pub fn pairwise_penalty(u: &DepthImage, measure: GradientMeasure) -> f64 {
    let (w, h) = (u.width(), u.height());
    let d = u.data();
    let mut total = 0.0;
    for i in 0..h {
        for j in 0..w {
            let p = i * w + j;
            if j + 1 < w {
                total += measure.penalty(d[p + 1] - d[p], PENALTY_TOL);
            }
            if i + 1 < h {
                total += measure.penalty(d[p + w] - d[p], PENALTY_TOL);
            }
        }
    }
    total
}

/// Per-sweep diagnostics of a region fusion run.
#[derive(Debug, Clone, Default)]
pub struct FusionTrace {
    pub betas: Vec<f64>,
    /// Live regions after each sweep.
    pub region_counts: Vec<usize>,
    /// Count of each decision over the whole run: fuse, snap, keep.
    pub decisions: [usize; 3],
}

/// Region fusion minimization of the gradient subproblem.
pub fn solve_gradient_subproblem(p: &GradientSubproblem<'_>) -> Result<DepthImage> {
    solve_gradient_subproblem_traced(p).map(|(img, _)| img)
}

/// Same as [`solve_gradient_subproblem`], also returning sweep diagnostics.
///
/// Regions start as single pixels at their own minimizers. Each sweep visits
/// live regions in ascending id and, for each, its neighbors in ascending
/// id, applying the criterion at the current `beta`: a fused pair takes the
/// joint minimizer, any other outcome writes the case minimizers back into
/// both regions immediately.
pub fn solve_gradient_subproblem_traced(
    p: &GradientSubproblem<'_>,
) -> Result<(DepthImage, FusionTrace)> {
    if !(p.rho >= 0.0 && p.rho.is_finite()) {
        return Err(Error::InvalidConfig(format!("rho must be >= 0, got {}", p.rho)));
    }
    if let GradientMeasure::L0Psi { alpha } = p.measure {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1], got {alpha}")));
        }
    }
    let schedule = BetaSchedule::new(p.lambda, p.ramp_steps)?;
    let target = p.target()?;
    let mut graph = RegionGraph::from_pixels(p.observed, p.mask, &target, p.rho)?;
    let mut trace = FusionTrace::default();
    let n = graph.pixel_count();
    let mut nbrs = Vec::new();

    for beta in schedule.betas() {
        for i in 0..n {
            if !graph.is_alive(i) {
                continue;
            }
            nbrs.clear();
            nbrs.extend(graph.neighbors(i).keys().copied());
            for &j in &nbrs {
                let c = graph.connection(i, j);
                // j may have been absorbed by an earlier fusion of this sweep
                if c == 0 || !graph.is_alive(j) {
                    continue;
                }
                let params = PairParams {
                    beta,
                    rho: p.rho,
                    connection: f64::from(c),
                };
                let decision = decide(p.measure, &graph.summary(i), &graph.summary(j), &params);
                match decision.case {
                    FusionCase::FuseEqual => {
                        graph.fuse(i, j)?;
                        graph.set_value(i, decision.vi);
                        trace.decisions[0] += 1;
                    }
                    FusionCase::SnapAdjacent => {
                        graph.set_value(i, decision.vi);
                        graph.set_value(j, decision.vj);
                        trace.decisions[1] += 1;
                    }
                    FusionCase::KeepSeparate => {
                        graph.set_value(i, decision.vi);
                        graph.set_value(j, decision.vj);
                        trace.decisions[2] += 1;
                    }
                }
            }
        }
        trace.betas.push(beta);
        trace.region_counts.push(graph.region_count());
    }

    let out = graph.to_image();
    if !out.is_finite() {
        return Err(Error::Divergence(
            "region fusion produced non-finite values".into(),
        ));
    }
    Ok((out, trace))
}
