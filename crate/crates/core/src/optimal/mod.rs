//! Broker-optimal mechanisms: trade iff the buyer's virtual value covers the
//! seller's virtual cost, with threshold payments; plus the one-sided variants
//! where one agent's value is public.

mod threshold;

pub use threshold::{buyer_threshold, seller_threshold};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{classify, Dist, DistError};
use crate::posted::{optimize_prices, OptimizerConfig, PostedError};
use crate::quad::{first_best, gft_allocation, integrate, QuadConfig, QuadError, ThresholdRegion};

/// Tolerance on `|ratio_before - ratio_after|` under a joint affine map.
pub const NORMALIZATION_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechanismError {
    #[error("{0} distribution is not regular")]
    NotRegular(&'static str),
    #[error("point-mass input: use the public-seller or public-buyer mechanism")]
    AtomicInput,
    #[error("invalid public value {0}")]
    BadPublicValue(f64),
    #[error("ratio changed under affine map: {before} vs {after}")]
    NormalizationMismatch { before: f64, after: f64 },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Posted(#[from] PostedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeMetrics {
    pub gft: f64,
    pub fb: f64,
    pub profit: f64,
    pub sw: f64,
    pub fbw: f64,
    pub ratio: f64,
}

impl TradeMetrics {
    fn new(gft: f64, fb: f64, profit: f64, seller_mean: f64) -> Self {
        TradeMetrics {
            gft,
            fb,
            profit,
            sw: seller_mean + gft,
            fbw: seller_mean + fb,
            ratio: crate::ratio(gft, fb),
        }
    }

    /// `sw / fbw`.
    pub fn sw_ratio(&self) -> f64 {
        self.sw / self.fbw
    }
}

/// Two-sided rule for regular, atomless `F` and `G`.
#[derive(Debug, Clone)]
pub struct TwoSided {
    f: Dist,
    g: Dist,
    /// Seller values where `v̂(c)` crosses a piece boundary of `F`.
    c_kinks: Vec<f64>,
    /// Buyer values where `ĉ(v)` crosses a piece boundary of `G`.
    v_kinks: Vec<f64>,
}

impl TwoSided {
    pub fn new(f: &Dist, g: &Dist) -> Result<Self, MechanismError> {
        if f.is_atomic() || g.is_atomic() {
            return Err(MechanismError::AtomicInput);
        }
        let reg = classify(f, g);
        if !reg.buyer_regular {
            return Err(MechanismError::NotRegular("buyer"));
        }
        if !reg.seller_regular {
            return Err(MechanismError::NotRegular("seller"));
        }
        let mut c_kinks = Vec::new();
        for x in f.breakpoints() {
            for phi in [f.virtual_buyer_left(x)?, f.virtual_buyer(x)?] {
                let c = seller_threshold(g, phi)?;
                if c.is_finite() {
                    c_kinks.push(c);
                }
            }
        }
        let mut v_kinks = Vec::new();
        for y in g.breakpoints() {
            for phi in [g.virtual_seller_left(y)?, g.virtual_seller(y)?] {
                let v = buyer_threshold(f, phi)?;
                if v.is_finite() {
                    v_kinks.push(v);
                }
            }
        }
        Ok(TwoSided { f: f.clone(), g: g.clone(), c_kinks, v_kinks })
    }

    /// `v̂(c) = min{v : φ_F(v) ≥ φ_G(c)}`, `+∞` if the seller never trades.
    pub fn threshold(&self, c: f64) -> f64 {
        match self.g.virtual_seller(c) {
            Ok(phi) => buyer_threshold(&self.f, phi).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    }

    /// `ĉ(v) = max{c : φ_G(c) ≤ φ_F(v)}`, `-∞` if the buyer never trades.
    pub fn seller_threshold(&self, v: f64) -> f64 {
        match self.f.virtual_buyer(v) {
            Ok(phi) => seller_threshold(&self.g, phi).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    }

    pub fn trades(&self, v: f64, c: f64) -> bool {
        v >= self.threshold(c)
    }

    /// Minimum winning buyer report given `c`.
    pub fn buyer_payment(&self, v: f64, c: f64) -> f64 {
        let t = self.threshold(c);
        if v >= t {
            t
        } else {
            0.0
        }
    }

    /// Maximum winning seller report given `v`.
    pub fn seller_payment(&self, v: f64, c: f64) -> f64 {
        let t = self.seller_threshold(v);
        if c <= t {
            t
        } else {
            0.0
        }
    }

    pub fn gft(&self, cfg: &QuadConfig) -> Result<f64, QuadError> {
        let region = ThresholdRegion::new(|c| self.threshold(c), self.c_kinks.clone());
        gft_allocation(&self.f, &self.g, &region, cfg)
    }

    fn c_breaks(&self) -> Vec<f64> {
        let mut b = self.g.breakpoints();
        b.extend(&self.c_kinks);
        b
    }

    /// Expected profit under threshold payments:
    /// `E_c[v̂ P(v ≥ v̂)] - E_v[ĉ G(ĉ)]`.
    pub fn profit(&self, cfg: &QuadConfig) -> Result<f64, QuadError> {
        let (f, g) = (&self.f, &self.g);
        let paid = integrate(
            |c| {
                let t = self.threshold(c);
                if t.is_finite() {
                    t * f.sf_left(t) * g.pdf(c)
                } else {
                    0.0
                }
            },
            g.support_lo(),
            g.support_hi(),
            &self.c_breaks(),
            cfg,
        )?;
        let mut v_breaks = f.breakpoints();
        v_breaks.extend(&self.v_kinks);
        let received = integrate(
            |v| {
                let t = self.seller_threshold(v);
                if t.is_finite() {
                    t * g.cdf(t) * f.pdf(v)
                } else {
                    0.0
                }
            },
            f.support_lo(),
            f.support_hi(),
            &v_breaks,
            cfg,
        )?;
        Ok(paid - received)
    }

    /// Expected virtual surplus `E[(φ_F(v) - φ_G(c)) x(v, c)]`, equal to the
    /// profit of any mechanism with this allocation by the envelope argument.
    pub fn virtual_surplus(&self, cfg: &QuadConfig) -> Result<f64, QuadError> {
        let (f, g) = (&self.f, &self.g);
        integrate(
            |c| {
                let t = self.threshold(c);
                if !t.is_finite() {
                    return 0.0;
                }
                // ∫_t φ_F dF = t (1 - F(t))
                let s = f.sf(t);
                (t * s - g.virtual_seller(c).unwrap_or(c) * s) * g.pdf(c)
            },
            g.support_lo(),
            g.support_hi(),
            &self.c_breaks(),
            cfg,
        )
    }
}

/// The broker's optimal allocation together with its payments.
#[derive(Debug, Clone)]
pub enum AllocationRule {
    TwoSided(TwoSided),
    /// Trade iff `v ≥ v_hat`; seller value `c` is public.
    PublicSeller { c: f64, v_hat: f64 },
    /// Trade iff `c ≤ c_hat`; buyer value `v` is public.
    PublicBuyer { v: f64, c_hat: f64 },
}

impl AllocationRule {
    pub fn public_seller(f: &Dist, c: f64) -> Result<Self, MechanismError> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(MechanismError::BadPublicValue(c));
        }
        if f.is_atomic() {
            return Err(MechanismError::AtomicInput);
        }
        if !classify(f, f).buyer_regular {
            return Err(MechanismError::NotRegular("buyer"));
        }
        Ok(AllocationRule::PublicSeller { c, v_hat: buyer_threshold(f, c)? })
    }

    pub fn public_buyer(g: &Dist, v: f64) -> Result<Self, MechanismError> {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(MechanismError::BadPublicValue(v));
        }
        if g.is_atomic() {
            return Err(MechanismError::AtomicInput);
        }
        if !classify(g, g).seller_regular {
            return Err(MechanismError::NotRegular("seller"));
        }
        Ok(AllocationRule::PublicBuyer { v, c_hat: seller_threshold(g, v)? })
    }

    pub fn trades(&self, v: f64, c: f64) -> bool {
        match self {
            AllocationRule::TwoSided(r) => r.trades(v, c),
            AllocationRule::PublicSeller { v_hat, .. } => v >= *v_hat,
            AllocationRule::PublicBuyer { c_hat, .. } => c <= *c_hat,
        }
    }

    pub fn buyer_payment(&self, v: f64, c: f64) -> f64 {
        match self {
            AllocationRule::TwoSided(r) => r.buyer_payment(v, c),
            AllocationRule::PublicSeller { v_hat, .. } => if v >= *v_hat { *v_hat } else { 0.0 },
            AllocationRule::PublicBuyer { v: pv, c_hat } => if c <= *c_hat { *pv } else { 0.0 },
        }
    }

    pub fn seller_payment(&self, v: f64, c: f64) -> f64 {
        match self {
            AllocationRule::TwoSided(r) => r.seller_payment(v, c),
            AllocationRule::PublicSeller { c: pc, v_hat } => if v >= *v_hat { *pc } else { 0.0 },
            AllocationRule::PublicBuyer { c_hat, .. } => if c <= *c_hat { *c_hat } else { 0.0 },
        }
    }
}

/// `v̂(c)` for the two-sided rule.
pub fn two_sided_threshold(f: &Dist, g: &Dist, c: f64) -> Result<f64, MechanismError> {
    let rule = TwoSided::new(f, g)?;
    let phi = g.virtual_seller(c)?;
    Ok(buyer_threshold(&rule.f, phi)?)
}

pub fn optimal_mechanism_metrics(f: &Dist, g: &Dist, cfg: &QuadConfig) -> Result<TradeMetrics, MechanismError> {
    let rule = TwoSided::new(f, g)?;
    let gft = rule.gft(cfg)?;
    let profit = rule.profit(cfg)?;
    let fb = first_best(f, g, cfg)?;
    Ok(TradeMetrics::new(gft, fb, profit, g.expectation()))
}

/// Profit of the optimal mechanism minus that of the best posted-price pair;
/// nonnegative up to numerical error.
pub fn posted_profit_gap(f: &Dist, g: &Dist, m: &TradeMetrics, opt: &OptimizerConfig, cfg: &QuadConfig) -> Result<f64, MechanismError> {
    let posted = optimize_prices(f, g, opt, cfg)?;
    Ok(m.profit - posted.profit)
}

/// Seller value `c` is public; the buyer trades iff `φ_F(v) ≥ c`.
pub fn public_seller_metrics(f: &Dist, c: f64, cfg: &QuadConfig) -> Result<TradeMetrics, MechanismError> {
    let AllocationRule::PublicSeller { v_hat, .. } = AllocationRule::public_seller(f, c)? else {
        unreachable!()
    };
    let (gft, profit) = if v_hat.is_finite() {
        let (s, m) = f.upper_tail(v_hat);
        (m - c * s, (v_hat - c) * s)
    } else {
        (0.0, 0.0)
    };
    let fb = first_best(f, &Dist::point_mass(c)?, cfg)?;
    Ok(TradeMetrics::new(gft.max(0.0), fb, profit, c))
}

/// Buyer value `v` is public; the seller trades iff `φ_G(c) ≤ v`.
pub fn public_buyer_metrics(g: &Dist, v: f64, cfg: &QuadConfig) -> Result<TradeMetrics, MechanismError> {
    let AllocationRule::PublicBuyer { c_hat, .. } = AllocationRule::public_buyer(g, v)? else {
        unreachable!()
    };
    let (gft, profit) = if c_hat.is_finite() {
        let gc = g.cdf(c_hat);
        // E[c 1{c ≤ ĉ}] = ĉ G(ĉ) - ∫^ĉ G
        let below = c_hat * gc - g.cdf_integral(c_hat);
        (v * gc - below, (v - c_hat) * gc)
    } else {
        (0.0, 0.0)
    };
    let fb = first_best(&Dist::point_mass(v)?, g, cfg)?;
    Ok(TradeMetrics::new(gft.max(0.0), fb, profit, g.expectation()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub ratio_before: f64,
    pub ratio_after: f64,
}

/// Optimal-mechanism ratio before and after mapping both distributions by `x ↦ k2 x + k1`.
pub fn normalization_check(f: &Dist, g: &Dist, k1: f64, k2: f64, cfg: &QuadConfig) -> Result<Normalization, MechanismError> {
    let before = optimal_mechanism_metrics(f, g, cfg)?.ratio;
    let (f2, g2) = (f.affine_transform(k1, k2)?, g.affine_transform(k1, k2)?);
    let after = optimal_mechanism_metrics(&f2, &g2, cfg)?.ratio;
    if (before - after).abs() > NORMALIZATION_TOL {
        return Err(MechanismError::NormalizationMismatch { before, after });
    }
    Ok(Normalization { ratio_before: before, ratio_after: after })
}
