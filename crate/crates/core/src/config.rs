use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Inpainting method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Nuclear-norm matrix completion only.
    Lr,
    /// Low rank + anisotropic total variation.
    LrTv,
    /// Low rank + L0 gradient (region fusion).
    LrL0,
    /// Low rank + low gradient measure (region fusion, three-case criterion).
    LrL0Psi,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Lr, Method::LrTv, Method::LrL0, Method::LrL0Psi];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lr => "lr",
            Method::LrTv => "lrtv",
            Method::LrL0 => "lrl0",
            Method::LrL0Psi => "lrl0psi",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(Method::Lr),
            "lrtv" => Ok(Method::LrTv),
            "lrl0" => Ok(Method::LrL0),
            "lrl0psi" => Ok(Method::LrL0Psi),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

/// How the ADMM auxiliary variables are seeded from the low rank result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmmStart {
    /// `M = U0` and `Y` set to the dual that makes `U0` stationary for the
    /// low rank problem.
    LowRankWarm,
    /// `M = Y = 0`.
    Zero,
}

/// Weights, schedules and stop rules for every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub lambda_r: f64,
    pub lambda_tv: f64,
    pub lambda_l0: f64,
    pub lambda_l0psi: f64,
    pub alpha: f64,
    pub rho: f64,
    pub max_outer_iters: usize,
    pub rel_tol: f64,
    /// Number of steps in the beta ramp of region fusion.
    pub ramp_steps: usize,
    pub tv_inner_iters: usize,
    /// Split-Bregman penalty as a multiple of `lambda_tv`.
    pub tv_penalty_scale: f64,
    /// Iteration cap for the standalone low rank solver.
    pub lr_max_iters: usize,
    pub lr_rel_tol: f64,
    pub admm_start: AdmmStart,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::LrL0Psi,
            lambda_r: 10.0,
            lambda_tv: 40.0,
            lambda_l0: 30.0,
            lambda_l0psi: 100.0,
            alpha: 0.75,
            rho: 1.0,
            max_outer_iters: 30,
            rel_tol: 1e-3,
            ramp_steps: 30,
            tv_inner_iters: 10,
            tv_penalty_scale: 2.0,
            lr_max_iters: 500,
            lr_rel_tol: 1e-5,
            admm_start: AdmmStart::LowRankWarm,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lambdas = [
            ("lambda_r", self.lambda_r),
            ("lambda_tv", self.lambda_tv),
            ("lambda_l0", self.lambda_l0),
            ("lambda_l0psi", self.lambda_l0psi),
        ];
        for (name, v) in lambdas {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::InvalidConfig(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.max_outer_iters == 0 || self.lr_max_iters == 0 {
            return Err(Error::InvalidConfig("iteration caps must be >= 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.lr_rel_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be > 0".into()));
        }
        if self.ramp_steps == 0 {
            return Err(Error::InvalidConfig("ramp_steps must be >= 1".into()));
        }
        if self.tv_penalty_scale.is_nan() || self.tv_penalty_scale <= 0.0 {
            return Err(Error::InvalidConfig("tv_penalty_scale must be > 0".into()));
        }
        Ok(())
    }

    /// Weight of the gradient term used by the configured method.
    pub fn gradient_weight(&self) -> f64 {
        match self.method {
            Method::Lr => 0.0,
            Method::LrTv => self.lambda_tv,
            Method::LrL0 => self.lambda_l0,
            Method::LrL0Psi => self.lambda_l0psi,
        }
    }

    /// `key=value` lines describing every field, in a fixed order.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("method", self.method.to_string()),
            ("lambda_r", self.lambda_r.to_string()),
            ("lambda_tv", self.lambda_tv.to_string()),
            ("lambda_l0", self.lambda_l0.to_string()),
            ("lambda_l0psi", self.lambda_l0psi.to_string()),
            ("alpha", self.alpha.to_string()),
            ("rho", self.rho.to_string()),
            ("max_outer_iters", self.max_outer_iters.to_string()),
            ("rel_tol", self.rel_tol.to_string()),
            ("ramp_steps", self.ramp_steps.to_string()),
            ("tv_inner_iters", self.tv_inner_iters.to_string()),
            ("tv_penalty_scale", self.tv_penalty_scale.to_string()),
            ("lr_max_iters", self.lr_max_iters.to_string()),
            ("lr_rel_tol", self.lr_rel_tol.to_string()),
            (
                "admm_start",
                match self.admm_start {
                    AdmmStart::LowRankWarm => "lowrank-warm".into(),
                    AdmmStart::Zero => "zero".into(),
                },
            ),
            ("seed", self.seed.to_string()),
        ]
    }
}
