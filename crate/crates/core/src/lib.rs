//! Bilateral trade with a profit-maximizing broker: distributions, numerical
//! welfare integrals, posted-price and optimal mechanisms, and the extremal
//! instance families used to test approximation bounds.

pub mod dist;
pub mod instances;
pub mod optimal;
pub mod posted;
pub mod quad;

use serde::{Deserialize, Serialize};

/// Numerical knobs shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Settings {
    pub quad: quad::QuadConfig,
    pub opt: posted::OptimizerConfig,
    pub mc: posted::MonteCarloConfig,
}

/// FB values at or below this are treated as "no possible trade".
pub const FB_EPS: f64 = 1e-15;

/// `gft / fb`, defined as 1 when there is nothing to approximate.
pub fn ratio(gft: f64, fb: f64) -> f64 {
    if fb <= FB_EPS {
        1.0
    } else {
        gft / fb
    }
}
