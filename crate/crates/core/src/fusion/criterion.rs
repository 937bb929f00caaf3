//! Pairwise region cost and the fusion criteria.
//!
//! For two neighboring regions `i` and `j` with constant values `u_i`, `u_j`
//! the pairwise cost is
//!
//! ```text
//! f(u_i, u_j) = wo_i (u_i - D_i)^2 + wo_j (u_j - D_j)^2
//!             + rho w_i / 2 (u_i - T_i)^2 + rho w_j / 2 (u_j - T_j)^2
//!             + beta c_ij psi(u_i - u_j)
//! ```
//!
//! where `w` counts all pixels of a region, `wo` only observed ones, `D` is
//! the mean observation over observed pixels and `T` the mean of `M - Y`.
//! Constant within-region variance terms are dropped, so `f` compares
//! candidates for one pair but is not an absolute objective value.

/// Aggregate state of one region as seen by the criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSummary {
    /// Total pixel count `w`.
    pub weight: f64,
    /// Observed pixel count `wo`.
    pub observed_weight: f64,
    /// Mean observation over observed pixels; 0 when none are observed.
    pub data_mean: f64,
    /// Mean of `M - Y` over all pixels.
    pub target_mean: f64,
    /// Current region value.
    pub value: f64,
}

impl RegionSummary {
    /// Weight of the quadratic around `data_mean` and `target_mean`.
    fn curvature(&self, rho: f64) -> f64 {
        2.0 * self.observed_weight + rho * self.weight
    }

    fn moment(&self, rho: f64) -> f64 {
        2.0 * self.observed_weight * self.data_mean + rho * self.weight * self.target_mean
    }

    /// Quadratic part of the pairwise cost for this region at value `u`.
    pub fn quadratic_cost(&self, u: f64, rho: f64) -> f64 {
        let e = u - self.data_mean;
        let t = u - self.target_mean;
        self.observed_weight * e * e + 0.5 * rho * self.weight * t * t
    }

    /// Minimizer of the region's own quadratic; keeps `value` when the
    /// quadratic is flat (nothing observed and `rho = 0`).
    pub fn isolated_minimizer(&self, rho: f64) -> f64 {
        let den = self.curvature(rho);
        if den > 0.0 {
            self.moment(rho) / den
        } else {
            self.value
        }
    }
}

/// Pairwise penalty applied to the difference `u_i - u_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientMeasure {
    /// 1 for any nonzero difference.
    L0,
    /// `alpha` for a difference of exactly one, 1 for any other nonzero one.
    L0Psi { alpha: f64 },
}

impl GradientMeasure {
    /// Penalty of a difference; `tol` absorbs floating-point error in the
    /// equality tests.
    pub fn penalty(&self, diff: f64, tol: f64) -> f64 {
        let a = diff.abs();
        if a <= tol {
            return 0.0;
        }
        match *self {
            GradientMeasure::L0 => 1.0,
            GradientMeasure::L0Psi { alpha } => {
                if (a - 1.0).abs() <= tol {
                    alpha
                } else {
                    1.0
                }
            }
        }
    }
}

/// Coupling parameters of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams {
    pub beta: f64,
    pub rho: f64,
    /// Number of four-connected pixel pairs crossing the boundary.
    pub connection: f64,
}

/// The pairwise cost at `(ui, uj)` with an explicit penalty factor
/// (0, `alpha` or 1).
pub fn pair_cost(
    gi: &RegionSummary,
    gj: &RegionSummary,
    ui: f64,
    uj: f64,
    params: &PairParams,
    penalty: f64,
) -> f64 {
    gi.quadratic_cost(ui, params.rho)
        + gj.quadratic_cost(uj, params.rho)
        + params.beta * params.connection * penalty
}

/// Joint minimizer under `u_j = u_i + offset`.
fn coupled_minimizer(gi: &RegionSummary, gj: &RegionSummary, rho: f64, offset: f64) -> f64 {
    let den = gi.curvature(rho) + gj.curvature(rho);
    if den > 0.0 {
        (gi.moment(rho) + gj.moment(rho) - gj.curvature(rho) * offset) / den
    } else if gi.weight + gj.weight > 0.0 {
        (gi.weight * gi.value + gj.weight * (gj.value - offset)) / (gi.weight + gj.weight)
    } else {
        gi.value
    }
}

/// Candidates of the L0 criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L0Candidates {
    /// Common value when the regions are merged.
    pub a: f64,
    pub f_a: f64,
    /// Separate values when they are kept apart.
    pub b_i: f64,
    pub b_j: f64,
    pub f_b: f64,
}

impl L0Candidates {
    /// Fuse when merging is no more expensive than separation.
    pub fn fuse(&self) -> bool {
        self.f_a <= self.f_b
    }
}

pub fn pairwise_candidates_l0(
    gi: &RegionSummary,
    gj: &RegionSummary,
    params: &PairParams,
) -> L0Candidates {
    let a = coupled_minimizer(gi, gj, params.rho, 0.0);
    let b_i = gi.isolated_minimizer(params.rho);
    let b_j = gj.isolated_minimizer(params.rho);
    L0Candidates {
        a,
        f_a: pair_cost(gi, gj, a, a, params, 0.0),
        b_i,
        b_j,
        f_b: pair_cost(gi, gj, b_i, b_j, params, 1.0),
    }
}

/// Outcome class of the three-case criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusionCase {
    /// Merge the regions at a common value.
    FuseEqual,
    /// Keep them apart at values exactly one unit apart.
    SnapAdjacent,
    /// Keep them apart at their own minimizers.
    KeepSeparate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionDecision {
    pub case: FusionCase,
    pub vi: f64,
    pub vj: f64,
    /// Pairwise cost of the chosen case, the minimum of the three.
    pub f: f64,
}

/// Three-case criterion of the low gradient measure.
///
/// Both orientations of the unit step are evaluated; on an exact tie the
/// current ordering of the region values is kept.
pub fn pairwise_candidates_psi(
    gi: &RegionSummary,
    gj: &RegionSummary,
    params: &PairParams,
    alpha: f64,
) -> FusionDecision {
    let a = coupled_minimizer(gi, gj, params.rho, 0.0);
    let f_a = pair_cost(gi, gj, a, a, params, 0.0);

    let snap = |offset: f64| {
        let b = coupled_minimizer(gi, gj, params.rho, offset);
        (b, b + offset, pair_cost(gi, gj, b, b + offset, params, alpha))
    };
    let up = snap(1.0);
    let down = snap(-1.0);
    let prefer_down = down.2 < up.2 || (down.2 == up.2 && gi.value > gj.value);
    let (b_i, b_j, f_b) = if prefer_down { down } else { up };

    let c_i = gi.isolated_minimizer(params.rho);
    let c_j = gj.isolated_minimizer(params.rho);
    let f_c = pair_cost(gi, gj, c_i, c_j, params, 1.0);

    if f_a <= f_b && f_a <= f_c {
        FusionDecision {
            case: FusionCase::FuseEqual,
            vi: a,
            vj: a,
            f: f_a,
        }
    } else if f_b < f_a && f_b <= f_c {
        FusionDecision {
            case: FusionCase::SnapAdjacent,
            vi: b_i,
            vj: b_j,
            f: f_b,
        }
    } else {
        FusionDecision {
            case: FusionCase::KeepSeparate,
            vi: c_i,
            vj: c_j,
            f: f_c,
        }
    }
}

/// The L0 criterion expressed as a [`FusionDecision`].
pub fn decide_l0(gi: &RegionSummary, gj: &RegionSummary, params: &PairParams) -> FusionDecision {
    let c = pairwise_candidates_l0(gi, gj, params);
    if c.fuse() {
        FusionDecision {
            case: FusionCase::FuseEqual,
            vi: c.a,
            vj: c.a,
            f: c.f_a,
        }
    } else {
        FusionDecision {
            case: FusionCase::KeepSeparate,
            vi: c.b_i,
            vj: c.b_j,
            f: c.f_b,
        }
    }
}

pub fn decide(
    measure: GradientMeasure,
    gi: &RegionSummary,
    gj: &RegionSummary,
    params: &PairParams,
) -> FusionDecision {
    match measure {
        GradientMeasure::L0 => decide_l0(gi, gj, params),
        GradientMeasure::L0Psi { alpha } => pairwise_candidates_psi(gi, gj, params, alpha),
    }
}
