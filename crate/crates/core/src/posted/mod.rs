//! Posted-price mechanisms: fixed prices `p` to the buyer and `q ≤ p` to the seller.

mod optimize;
mod sample;

pub use optimize::{optimize_prices, OptimizerConfig};
pub use sample::{single_sample, MonteCarloConfig, SingleSampleReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{Dist, DistError};
use crate::quad::{first_best, gft_posted, integrate, QuadConfig, QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PostedError {
    #[error("buyer price {p} is below seller price {q}")]
    InvalidPrices { p: f64, q: f64 },
    #[error("first-best gains from trade {fb:e} is degenerate")]
    DegenerateInstance { fb: f64 },
    #[error("median of F is below median of G; guaranteed factor is {factor} instead of 1/2")]
    MedianOrderViolated { factor: f64, result: Box<PostedResult> },
    #[error("seller quantile price {q} exceeds buyer quantile price {p}")]
    QuantileOrderViolated { p: f64, q: f64 },
    #[error("quantile levels alpha = {alpha}, beta = {beta} need 0 <= alpha < 1 and 0 < beta <= 1")]
    InvalidQuantiles { alpha: f64, beta: f64 },
    #[error("hazard bound M = {0} must be at least 2")]
    InvalidM(f64),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// A buyer price `p` and seller price `q` with `p ≥ q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair", into = "RawPair")]
pub struct PricePair {
    p: f64,
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPair {
    p: f64,
    q: f64,
}

impl TryFrom<RawPair> for PricePair {
    type Error = PostedError;

    fn try_from(r: RawPair) -> Result<Self, PostedError> {
        PricePair::new(r.p, r.q)
    }
}

impl From<PricePair> for RawPair {
    fn from(pp: PricePair) -> Self {
        RawPair { p: pp.p, q: pp.q }
    }
}

impl PricePair {
    pub fn new(p: f64, q: f64) -> Result<Self, PostedError> {
        if p.is_finite() && q.is_finite() && p >= q {
            Ok(PricePair { p, q })
        } else {
            Err(PostedError::InvalidPrices { p, q })
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostedResult {
    pub prices: PricePair,
    pub profit: f64,
    pub gft: f64,
    pub fb: f64,
    pub decomposition_rhs: f64,
}

impl PostedResult {
    pub(crate) fn evaluate(f: &Dist, g: &Dist, prices: PricePair, fb: f64, cfg: &QuadConfig) -> Result<Self, QuadError> {
        Ok(PostedResult {
            prices,
            profit: profit(f, g, prices),
            gft: gft_posted(f, g, prices),
            fb,
            decomposition_rhs: rhs_with_fb(f, g, prices, fb, cfg)?,
        })
    }

    /// `gft / fb`, or 1 when the first best is degenerate.
    pub fn ratio(&self) -> f64 {
        crate::ratio(self.gft, self.fb)
    }
}

/// Broker profit `(p - q) P(v ≥ p) G(q)`.
pub fn profit(f: &Dist, g: &Dist, pp: PricePair) -> f64 {
    (pp.p - pp.q) * f.sf_left(pp.p) * g.cdf(pp.q)
}

/// `Π + min(G(q), P(v ≥ p)) (FB - ∫_q^p G (1 - F))`, a lower bound on the posted GFT.
pub fn decomposition_rhs(f: &Dist, g: &Dist, pp: PricePair, cfg: &QuadConfig) -> Result<f64, QuadError> {
    let fb = first_best(f, g, cfg)?;
    rhs_with_fb(f, g, pp, fb, cfg)
}

fn rhs_with_fb(f: &Dist, g: &Dist, pp: PricePair, fb: f64, cfg: &QuadConfig) -> Result<f64, QuadError> {
    let (p, q) = (pp.p, pp.q);
    let s = f.sf_left(p);
    let gq = g.cdf(q);
    let mut breaks = f.breakpoints();
    breaks.extend(g.breakpoints());
    let lo = q.max(g.support_lo());
    let hi = p.min(f.support_hi());
    let band = if hi > lo { integrate(|x| g.cdf(x) * (1.0 - f.cdf(x)), lo, hi, &breaks, cfg)? } else { 0.0 };
    Ok(profit(f, g, pp) + gq.min(s) * (fb - band))
}

/// Posts `p = q` halfway between the medians of `F` and `G`.
pub fn median_pricing(f: &Dist, g: &Dist, cfg: &QuadConfig) -> Result<PostedResult, PostedError> {
    let (mf, mg) = (f.quantile(0.5)?, g.quantile(0.5)?);
    let mid = 0.5 * (mf + mg);
    let pp = PricePair::new(mid, mid)?;
    let res = PostedResult::evaluate(f, g, pp, first_best(f, g, cfg)?, cfg)?;
    if mf < mg {
        let factor = g.cdf(mid).min(f.sf_left(mid));
        return Err(PostedError::MedianOrderViolated { factor, result: Box::new(res) });
    }
    Ok(res)
}

/// Posts `p = μ_F(alpha)` and `q = μ_G(beta)`; the GFT is at least `beta (1 - alpha) FB`.
pub fn quantile_pricing(f: &Dist, g: &Dist, alpha: f64, beta: f64, cfg: &QuadConfig) -> Result<PostedResult, PostedError> {
    if !((0.0..1.0).contains(&alpha) && beta > 0.0 && beta <= 1.0) {
        return Err(PostedError::InvalidQuantiles { alpha, beta });
    }
    let p = f.quantile_or_lo(alpha)?;
    let q = g.quantile(beta)?;
    if q > p {
        return Err(PostedError::QuantileOrderViolated { p, q });
    }
    Ok(PostedResult::evaluate(f, g, PricePair::new(p, q)?, first_best(f, g, cfg)?, cfg)?)
}

/// Guaranteed fraction `2 / M²` of FB for symmetric MHR agents with hazard rates bounded by `M`.
pub fn hazard_bound_factor(m: f64) -> Result<f64, PostedError> {
    if m == f64::INFINITY {
        Ok(0.0)
    } else if m >= 2.0 {
        Ok(2.0 / (m * m))
    } else {
        Err(PostedError::InvalidM(m))
    }
}
