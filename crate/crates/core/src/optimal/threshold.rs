use crate::dist::{Dist, DistError};

const MAX_BISECT: usize = 200;

/// Bisects a monotone predicate on `[lo, hi]` down to adjacent floats, where
/// `pred(lo)` is false and `pred(hi)` is true. Returns the `(lo, hi)` bracket.
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> (f64, f64) {
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// `min{v in supp F : φ_F(v) ≥ target}`, or `+∞` when no such `v` exists.
/// Assumes `φ_F` is nondecreasing.
pub fn buyer_threshold(f: &Dist, target: f64) -> Result<f64, DistError> {
    let pts = f.breakpoints();
    if f.virtual_buyer(pts[0])? >= target {
        return Ok(pts[0]);
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if f.virtual_buyer_left(b)? >= target {
            let (_, hi) = bisect(a, b, |x| f.virtual_buyer(x).is_ok_and(|p| p >= target));
            return Ok(hi);
        }
        if f.virtual_buyer(b)? >= target {
            return Ok(b);
        }
    }
    Ok(f64::INFINITY)
}

/// `max{c in supp G : φ_G(c) ≤ target}`, or `-∞` when no such `c` exists.
/// Assumes `φ_G` is nondecreasing.
pub fn seller_threshold(g: &Dist, target: f64) -> Result<f64, DistError> {
    let pts = g.breakpoints();
    if g.virtual_seller(pts[0])? > target {
        return Ok(f64::NEG_INFINITY);
    }
    for w in pts.windows(2).rev() {
        let (a, b) = (w[0], w[1]);
        if g.virtual_seller_left(b)? <= target {
            return Ok(b);
        }
        if g.virtual_seller(a)? <= target {
            let (lo, _) = bisect(a, b, |x| g.virtual_seller(x).map_or(true, |p| p > target));
            return Ok(lo);
        }
    }
    Ok(pts[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_inverses() {
        let u = Dist::uniform(0.0, 1.0).unwrap();
        // φ_F = 2v - 1, φ_G = 2c
        assert!((buyer_threshold(&u, 0.2).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(buyer_threshold(&u, -3.0).unwrap(), 0.0);
        assert_eq!(buyer_threshold(&u, 1.5).unwrap(), f64::INFINITY);
        assert!((seller_threshold(&u, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(seller_threshold(&u, -0.1).unwrap(), f64::NEG_INFINITY);
        assert_eq!(seller_threshold(&u, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn public_buyer_cutoff_is_one() {
        let g = Dist::public_buyer_seller(0.1).unwrap();
        let c = seller_threshold(&g, 2.0).unwrap();
        assert!((c - 1.0).abs() < 1e-9, "{c}");
    }
}
