//! Extremal instance families, the uniform case table, and bound certification.

mod cases;
mod report;

pub use cases::{case_eval, case_eval_checked, classify_cell, witnesses, CaseCell, CaseCheck, CaseEval, CASE_QUAD_TOL, FEASIBLE_CELLS};
pub use report::{certify, sweep, BoundKind, BoundReport, SweepKind, SweepResult, Theorem, SWEEP_MONO_TOL};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{classify, Dist, DistError};
use crate::optimal::{optimal_mechanism_metrics, public_buyer_metrics, public_seller_metrics, MechanismError, TradeMetrics};
use crate::posted::PostedError;
use crate::quad::{QuadConfig, QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("bad family parameters: {0}")]
    BadFamilyParams(String),
    #[error("[{a}, {b}] falls in cell {label}, which cannot occur")]
    InfeasibleCell { a: f64, b: f64, label: String },
    #[error("no closed form for family {0}")]
    NoClosedForm(String),
    #[error("{0} does not have monotone hazard rates")]
    NotMHR(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Posted(#[from] PostedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MhrTag {
    Uniform,
    TruncExp { rate: f64, hi: f64 },
    LinearDensity { slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum InstanceFamily {
    /// `F` equal-revenue on `[a, b]` with a linear tail on `[b, 2b]`; `G = U[0,1]`.
    GeneralInapprox { a: f64, b: f64 },
    /// Same `F`; seller value fixed at `a`.
    PublicSellerInapprox { a: f64, b: f64 },
    /// Buyer value fixed at 2; `G` linear on `[0,1]` then a rational tail on `[1,2]`.
    PublicBuyerInapprox { delta: f64 },
    /// `F = G` = equal-revenue with linear tail.
    SymmetricInapprox { a: f64, b: f64 },
    /// `F = U[0,1]`, `G = U[a,b]`.
    UniformPair { a: f64, b: f64 },
    SymmetricMHR { tag: MhrTag },
}

impl InstanceFamily {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceFamily::GeneralInapprox { .. } => "general",
            InstanceFamily::PublicSellerInapprox { .. } => "public-seller",
            InstanceFamily::PublicBuyerInapprox { .. } => "public-buyer",
            InstanceFamily::SymmetricInapprox { .. } => "symmetric",
            InstanceFamily::UniformPair { .. } => "uniform-pair",
            InstanceFamily::SymmetricMHR { .. } => "symmetric-mhr",
        }
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: String| Err(InstanceError::BadFamilyParams(m));
        match *self {
            InstanceFamily::GeneralInapprox { a, b }
            | InstanceFamily::PublicSellerInapprox { a, b }
            | InstanceFamily::SymmetricInapprox { a, b } => {
                if !(a >= 1.0 && b > a && b.is_finite()) {
                    return bad(format!("need b > a >= 1, got a = {a}, b = {b}"));
                }
            }
            InstanceFamily::PublicBuyerInapprox { delta } => {
                if !(delta > 0.0 && delta < 0.5) {
                    return bad(format!("need 0 < delta < 1/2, got {delta}"));
                }
            }
            InstanceFamily::UniformPair { a, b } => {
                if !(a < b && a.is_finite() && b.is_finite()) {
                    return bad(format!("need a < b, got a = {a}, b = {b}"));
                }
            }
            InstanceFamily::SymmetricMHR { .. } => {}
        }
        Ok(())
    }
}

/// The `(F, G)` pair of a family.
pub fn build(fam: &InstanceFamily) -> Result<(Dist, Dist), InstanceError> {
    fam.validate()?;
    Ok(match *fam {
        InstanceFamily::GeneralInapprox { a, b } => (Dist::truncated_equal_revenue(a, b)?, Dist::uniform(0.0, 1.0)?),
        InstanceFamily::PublicSellerInapprox { a, b } => (Dist::truncated_equal_revenue(a, b)?, Dist::point_mass(a)?),
        InstanceFamily::PublicBuyerInapprox { delta } => (Dist::point_mass(2.0)?, Dist::public_buyer_seller(delta)?),
        InstanceFamily::SymmetricInapprox { a, b } => {
            let f = Dist::truncated_equal_revenue(a, b)?;
            (f.clone(), f)
        }
        InstanceFamily::UniformPair { a, b } => (Dist::uniform(0.0, 1.0)?, Dist::uniform(a, b)?),
        InstanceFamily::SymmetricMHR { tag } => mhr_family(tag)?,
    })
}

/// Symmetric MHR pair `F = G`, rejected unless the grid check certifies both hazards.
pub fn mhr_family(tag: MhrTag) -> Result<(Dist, Dist), InstanceError> {
    let d = match tag {
        MhrTag::Uniform => Dist::uniform(0.0, 1.0)?,
        MhrTag::TruncExp { rate, hi } => Dist::truncated_exp(rate, hi)?,
        MhrTag::LinearDensity { slope } => Dist::linear_density(slope)?,
    };
    if !classify(&d, &d).both_mhr() {
        return Err(InstanceError::NotMHR(format!("{tag:?}")));
    }
    Ok((d.clone(), d))
}

/// Metrics of the broker-optimal mechanism appropriate to the family.
pub fn family_metrics(fam: &InstanceFamily, cfg: &QuadConfig) -> Result<TradeMetrics, InstanceError> {
    let (f, g) = build(fam)?;
    Ok(match *fam {
        InstanceFamily::PublicSellerInapprox { a, .. } => public_seller_metrics(&f, a, cfg)?,
        InstanceFamily::PublicBuyerInapprox { .. } => public_buyer_metrics(&g, 2.0, cfg)?,
        _ => optimal_mechanism_metrics(&f, &g, cfg)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClosedForms {
    pub gft_upper: Option<f64>,
    pub gft_exact: Option<f64>,
    pub fb_exact: Option<f64>,
    pub fb_lower: Option<f64>,
    /// Upper bound on the optimal-mechanism GFT/FB.
    pub ratio_upper: Option<f64>,
    /// Upper bound on SW/FBW, `(M/FB + r)/(M/FB + 1)` with `M` bounding the seller's value.
    pub sw_ratio_upper: Option<f64>,
}

fn sw_cap(m: f64, fb: f64, r: f64) -> f64 {
    (m / fb + r) / (m / fb + 1.0)
}

/// Closed-form bounds and exact values known for a family.
pub fn closed_form_bounds(fam: &InstanceFamily) -> Result<ClosedForms, InstanceError> {
    fam.validate()?;
    match *fam {
        InstanceFamily::GeneralInapprox { a, b } => {
            let gft_upper = a * (3.0 * b - 1.0) / (2.0 * b);
            let fb = a * ((b / a).ln() + 1.0 / (2.0 * b) - 1.0 / (2.0 * a)) + gft_upper;
            let gft = a * (3.0 * b * b - 2.0 * b + 1.0 / 3.0) / (2.0 * b * b);
            let r = gft_upper / fb;
            Ok(ClosedForms {
                gft_upper: Some(gft_upper),
                gft_exact: Some(gft),
                fb_exact: Some(fb),
                fb_lower: Some(fb),
                ratio_upper: Some(r),
                sw_ratio_upper: Some(sw_cap(1.0, fb, r)),
            })
        }
        InstanceFamily::PublicSellerInapprox { a, b } => {
            let gft = 3.0 * a * (a - 2.0 * b).powi(2) / (8.0 * b * b);
            let fb = a * ((b / a).ln() + a / b - 1.0) + (1.5 * a - a * a / b);
            Ok(ClosedForms {
                gft_upper: Some(gft),
                gft_exact: Some(gft),
                fb_exact: Some(fb),
                fb_lower: Some(fb),
                ratio_upper: Some(gft / fb),
                sw_ratio_upper: Some(sw_cap(a, fb, gft / fb)),
            })
        }
        InstanceFamily::PublicBuyerInapprox { delta: d } => {
            let gft = 1.5 * d;
            let fb = gft + d * (1.0 - d).powi(2) / (2.0 * d - 1.0).powi(2) * ((2.0 * d - 1.0) / (1.0 - d) - (d / (1.0 - d)).ln());
            Ok(ClosedForms {
                gft_upper: Some(gft),
                gft_exact: Some(gft),
                fb_exact: Some(fb),
                fb_lower: Some(fb),
                ratio_upper: Some(gft / fb),
                sw_ratio_upper: Some(sw_cap(2.0, fb, gft / fb)),
            })
        }
        InstanceFamily::SymmetricInapprox { a, b } => {
            let gft_upper = 1.5 * a + a * a / (6.0 * b);
            let fb_lower = a * b.ln() - a * a.ln() - 2.0 * a - 1.5 * a * a / b;
            let fb = a * (b / a).ln() - 0.5 * a + 2.0 * a * a / (3.0 * b);
            Ok(ClosedForms {
                gft_upper: Some(gft_upper),
                gft_exact: None,
                fb_exact: Some(fb),
                fb_lower: Some(fb_lower),
                ratio_upper: (fb_lower > 0.0).then(|| gft_upper / fb_lower),
                sw_ratio_upper: None,
            })
        }
        InstanceFamily::UniformPair { .. } | InstanceFamily::SymmetricMHR { .. } => Err(InstanceError::NoClosedForm(fam.name().into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_family_shape() {
        let (f, g) = build(&InstanceFamily::GeneralInapprox { a: 1.0, b: 100.0 }).unwrap();
        assert_eq!((f.support_lo(), f.support_hi()), (1.0, 200.0));
        assert!((f.cdf(100.0) - 0.99).abs() < 1e-15);
        assert!(classify(&f, &g).buyer_regular);
        assert_eq!(f.virtual_buyer(50.0).unwrap(), 0.0);
        assert!((f.virtual_buyer(150.0).unwrap() - 100.0).abs() < 1e-9);
        let cf = closed_form_bounds(&InstanceFamily::GeneralInapprox { a: 1.0, b: 100.0 }).unwrap();
        assert!((cf.gft_upper.unwrap() - 1.495).abs() < 1e-12);
        assert!((cf.ratio_upper.unwrap() - 0.2667).abs() < 1e-4);
    }

    #[test]
    fn public_buyer_family_shape() {
        let (_, g) = build(&InstanceFamily::PublicBuyerInapprox { delta: 0.1 }).unwrap();
        assert!((g.cdf(1.0) - 0.1).abs() < 1e-15);
        assert_eq!(g.cdf(2.0), 1.0);
        assert!((g.pdf(1.0) - 0.1).abs() < 1e-12);
        assert!(build(&InstanceFamily::PublicBuyerInapprox { delta: 0.5 }).is_err());
    }

    #[test]
    fn closed_form_values() {
        let cf = closed_form_bounds(&InstanceFamily::PublicSellerInapprox { a: 1.0, b: 10.0 }).unwrap();
        assert_eq!(cf.gft_exact.unwrap(), 1083.0 / 800.0);
        let b = 10f64.exp();
        let cf = closed_form_bounds(&InstanceFamily::SymmetricInapprox { a: 1.0, b }).unwrap();
        assert!((cf.gft_upper.unwrap() - (1.5 + (-10f64).exp() / 6.0)).abs() < 1e-15);
        assert!((cf.fb_lower.unwrap() - (8.0 - 1.5 * (-10f64).exp())).abs() < 1e-12);
        assert!(closed_form_bounds(&InstanceFamily::UniformPair { a: 0.0, b: 1.0 }).is_err());
    }

    #[test]
    fn mhr_families() {
        assert!(mhr_family(MhrTag::Uniform).is_ok());
        assert!(mhr_family(MhrTag::TruncExp { rate: 2.0, hi: 3.0 }).is_ok());
        assert!(mhr_family(MhrTag::LinearDensity { slope: 1.0 }).is_ok());
    }
}
