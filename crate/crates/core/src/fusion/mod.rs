//! Region fusion minimization of the gradient subproblems.
//!
//! Two penalties share one solver: the L0 gradient (two-case criterion) and
//! the low gradient measure, which discounts unit steps by `alpha`
//! (three-case criterion).

mod criterion;
mod graph;
mod solver;

pub use criterion::{
    decide, decide_l0, pair_cost, pairwise_candidates_l0, pairwise_candidates_psi,
    FusionCase, FusionDecision, GradientMeasure, L0Candidates, PairParams, RegionSummary,
};
pub use graph::RegionGraph;
pub use solver::{
    pairwise_penalty, solve_gradient_subproblem, solve_gradient_subproblem_traced, BetaSchedule,
    FusionTrace, GradientSubproblem, PENALTY_TOL,
};
