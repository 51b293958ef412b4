use serde::{Deserialize, Serialize};

use super::{integrate, QuadConfig, QuadError};
use crate::dist::Dist;
use crate::posted::PricePair;

/// `FB = E[(v - c)^+] = ∫ (1 - F(x)) G(x) dx` for independent `v ~ F`, `c ~ G`.
pub fn first_best(f: &Dist, g: &Dist, cfg: &QuadConfig) -> Result<f64, QuadError> {
    match (f.is_atomic(), g.is_atomic()) {
        (true, true) => return Ok((f.support_lo() - g.support_lo()).max(0.0)),
        (false, true) => return Ok(f.survival_integral(g.support_lo())),
        (true, false) => return Ok(g.cdf_integral(f.support_lo())),
        (false, false) => {}
    }
    let (lo, hi) = (g.support_lo(), f.support_hi());
    if hi <= lo {
        return Ok(0.0);
    }
    let mut breaks = f.breakpoints();
    breaks.extend(g.breakpoints());
    let v = integrate(|x| f.sf(x) * g.cdf(x), lo, hi, &breaks, cfg)?;
    Ok(v.max(0.0))
}

/// Gains from trade of posting `p` to the buyer and `q` to the seller:
/// `(p - q) S G(q) + G(q) ∫_p (1 - F) + S ∫^q G` with `S = P(v ≥ p)`.
pub fn gft_posted(f: &Dist, g: &Dist, pp: PricePair) -> f64 {
    let (p, q) = (pp.p(), pp.q());
    let s = f.sf_left(p);
    let gq = g.cdf(q);
    let v = (p - q) * s * gq + gq * f.survival_integral(p) + s * g.cdf_integral(q);
    v.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Welfare {
    pub sw: f64,
    pub fbw: f64,
}

/// Social welfare `E[c] + gft` next to the first-best welfare `E[c] + FB`.
pub fn social_welfare(f: &Dist, g: &Dist, gft: f64, cfg: &QuadConfig) -> Result<Welfare, QuadError> {
    let base = g.expectation();
    Ok(Welfare { sw: base + gft, fbw: base + first_best(f, g, cfg)? })
}
