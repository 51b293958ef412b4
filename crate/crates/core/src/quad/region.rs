use super::{integrate, QuadConfig, QuadError};
use crate::dist::Dist;

/// For each seller value `c`, the set of buyer values that trade as a finite
/// union of half-open intervals `[lo, hi)`.
pub trait TradeRegion: Sync {
    /// Disjoint intervals in increasing order; `hi` may be `+∞`.
    fn buyer_intervals(&self, c: f64) -> Vec<(f64, f64)>;

    /// Seller values where the outer integrand may kink, given the buyer distribution.
    fn kinks(&self, _buyer: &Dist) -> Vec<f64> {
        Vec::new()
    }
}

/// Trade iff `v ≥ threshold(c)`; an infinite threshold means no trade.
pub struct ThresholdRegion<T> {
    threshold: T,
    kinks: Vec<f64>,
}

impl<T: Fn(f64) -> f64 + Sync> ThresholdRegion<T> {
    pub fn new(threshold: T, kinks: Vec<f64>) -> Self {
        ThresholdRegion { threshold, kinks }
    }
}

impl<T: Fn(f64) -> f64 + Sync> TradeRegion for ThresholdRegion<T> {
    fn buyer_intervals(&self, c: f64) -> Vec<(f64, f64)> {
        let t = (self.threshold)(c);
        if t == f64::INFINITY {
            Vec::new()
        } else {
            vec![(t, f64::INFINITY)]
        }
    }

    fn kinks(&self, _buyer: &Dist) -> Vec<f64> {
        self.kinks.clone()
    }
}

/// Trade iff `v - c ≥ t`. With `t = 0` this is the first-best region.
#[derive(Debug, Clone, Copy)]
pub struct DiagonalOffset(pub f64);

impl TradeRegion for DiagonalOffset {
    fn buyer_intervals(&self, c: f64) -> Vec<(f64, f64)> {
        vec![(c + self.0, f64::INFINITY)]
    }

    fn kinks(&self, buyer: &Dist) -> Vec<f64> {
        buyer.breakpoints().into_iter().map(|x| x - self.0).collect()
    }
}

/// Trade iff `v ≥ p` and `c ≤ q`.
#[derive(Debug, Clone, Copy)]
pub struct PostedRegion {
    pub p: f64,
    pub q: f64,
}

impl TradeRegion for PostedRegion {
    fn buyer_intervals(&self, c: f64) -> Vec<(f64, f64)> {
        if c <= self.q {
            vec![(self.p, f64::INFINITY)]
        } else {
            Vec::new()
        }
    }

    fn kinks(&self, _buyer: &Dist) -> Vec<f64> {
        vec![self.q]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NoTrade;

impl TradeRegion for NoTrade {
    fn buyer_intervals(&self, _c: f64) -> Vec<(f64, f64)> {
        Vec::new()
    }
}

const SPOT_CHECKS: usize = 64;

fn check_intervals(c: f64, iv: &[(f64, f64)]) -> Result<(), QuadError> {
    let mut prev = f64::NEG_INFINITY;
    for &(lo, hi) in iv {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo < prev {
            return Err(QuadError::BadPredicate(format!("intervals {iv:?} at c = {c} are not ordered and disjoint")));
        }
        prev = hi;
    }
    Ok(())
}

/// `E[(v - c) 1{v in region(c)}]`: closed form in `v`, adaptive quadrature in `c`.
pub fn gft_allocation<R: TradeRegion + ?Sized>(f: &Dist, g: &Dist, region: &R, cfg: &QuadConfig) -> Result<f64, QuadError> {
    let inner = |c: f64| -> f64 {
        region
            .buyer_intervals(c)
            .iter()
            .map(|&(lo, hi)| {
                let (s_lo, m_lo) = f.upper_tail(lo);
                let (s_hi, m_hi) = if hi == f64::INFINITY { (0.0, 0.0) } else { f.upper_tail(hi) };
                (m_lo - m_hi) - c * (s_lo - s_hi)
            })
            .sum()
    };
    let (lo, hi) = (g.support_lo(), g.support_hi());
    for k in 0..=SPOT_CHECKS {
        let c = lo + (hi - lo) * k as f64 / SPOT_CHECKS as f64;
        check_intervals(c, &region.buyer_intervals(c))?;
    }
    if g.is_atomic() {
        return Ok(inner(lo));
    }
    let mut breaks = g.breakpoints();
    breaks.extend(region.kinks(f));
    integrate(|c| inner(c) * g.pdf(c), lo, hi, &breaks, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::first_best;

    #[test]
    fn diagonal_region_recovers_first_best() {
        let cfg = QuadConfig::default();
        let f = Dist::truncated_equal_revenue(1.0, 10.0).unwrap();
        let g = Dist::uniform(0.0, 3.0).unwrap();
        let a = gft_allocation(&f, &g, &DiagonalOffset(0.0), &cfg).unwrap();
        let b = first_best(&f, &g, &cfg).unwrap();
        assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
    }

    #[test]
    fn uniform_offset_half_is_one_twelfth() {
        let u = Dist::uniform(0.0, 1.0).unwrap();
        let v = gft_allocation(&u, &u, &DiagonalOffset(0.5), &QuadConfig::default()).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-13);
        assert_eq!(gft_allocation(&u, &u, &NoTrade, &QuadConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn malformed_region_is_rejected() {
        let u = Dist::uniform(0.0, 1.0).unwrap();
        let bad = ThresholdRegion::new(|_c| f64::NAN, vec![]);
        let r = gft_allocation(&u, &u, &bad, &QuadConfig::default());
        assert!(matches!(r, Err(QuadError::BadPredicate(_))));
    }

    #[test]
    fn atomic_seller_collapses_outer_integral() {
        let u = Dist::uniform(0.0, 1.0).unwrap();
        let pm = Dist::point_mass(0.25).unwrap();
        let v = gft_allocation(&u, &pm, &DiagonalOffset(0.0), &QuadConfig::default()).unwrap();
        assert!((v - 0.28125).abs() < 1e-15);
    }
}
