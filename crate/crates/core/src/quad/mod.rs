//! Adaptive integration and the welfare integrals built on it.

mod gk;
mod region;
mod welfare;

pub use gk::integrate;
pub use region::{gft_allocation, DiagonalOffset, NoTrade, PostedRegion, ThresholdRegion, TradeRegion};
pub use welfare::{first_best, gft_posted, social_welfare, Welfare};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-10, rel_tol: 1e-9, max_depth: 60 }
    }
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self, QuadError> {
        let cfg = QuadConfig { abs_tol, rel_tol, max_depth };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(QuadError::InvalidConfig(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(QuadError::InvalidConfig(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.max_depth < 10 {
            return Err(QuadError::InvalidConfig(format!("max_depth must be at least 10, got {}", self.max_depth)));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature on [{a}, {b}] did not converge: estimate {estimate}, error {error:e}")]
    NoConverge { a: f64, b: f64, estimate: f64, error: f64 },
    #[error("integrand is not finite at {0}")]
    NonFinite(f64),
    #[error("trade region is malformed: {0}")]
    BadPredicate(String),
    #[error("invalid quadrature config: {0}")]
    InvalidConfig(String),
}
