use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{profit, PostedError, PostedResult, PricePair};
use crate::dist::Dist;
use crate::quad::{first_best, QuadConfig};

/// FB at or below this makes the optimum meaningless.
const DEGENERATE_FB: f64 = 1e-12;
const INV_PHI: f64 = 0.618_033_988_749_894_9;
const GOLDEN_STEPS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Quantile grid resolution per axis.
    pub grid_n: usize,
    /// Rounds of coordinate-wise golden-section refinement.
    pub refine_iters: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { grid_n: 2048, refine_iters: 200 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), PostedError> {
        if self.grid_n < 2 {
            return Err(PostedError::InvalidConfig(format!("grid_n must be at least 2, got {}", self.grid_n)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct Best {
    val: f64,
    p: f64,
    q: f64,
    i: usize,
    j: usize,
}

impl Best {
    /// Higher profit wins; ties go to the smaller `p`, then to the larger `q`.
    fn better_than(&self, o: &Best) -> bool {
        if self.val != o.val {
            return self.val > o.val;
        }
        if self.p != o.p {
            return self.p < o.p;
        }
        self.q > o.q
    }
}

fn golden<F: Fn(f64) -> f64>(obj: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (obj(x1), obj(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = obj(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = obj(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Profit-maximizing posted prices: an exhaustive quantile grid followed by
/// golden-section refinement inside the neighbouring grid cells.
pub fn optimize_prices(f: &Dist, g: &Dist, opt: &OptimizerConfig, cfg: &QuadConfig) -> Result<PostedResult, PostedError> {
    opt.validate()?;
    let fb = first_best(f, g, cfg)?;
    if fb <= DEGENERATE_FB {
        return Err(PostedError::DegenerateInstance { fb });
    }
    let n = opt.grid_n;
    let level = |k: usize| k as f64 / n as f64;
    let ps = (0..=n).map(|k| f.quantile_or_lo(level(k))).collect::<Result<Vec<_>, _>>()?;
    let qs = (0..=n).map(|k| g.quantile_or_lo(level(k))).collect::<Result<Vec<_>, _>>()?;
    let surv: Vec<f64> = ps.iter().map(|&p| f.sf_left(p)).collect();
    let gq: Vec<f64> = qs.iter().map(|&q| g.cdf(q)).collect();

    let seed = Best { val: 0.0, p: ps[0], q: qs[0].min(ps[0]), i: 0, j: 0 };
    let best = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut row: Option<Best> = None;
            for j in 0..=n {
                if qs[j] > ps[i] {
                    continue;
                }
                let cand = Best { val: (ps[i] - qs[j]) * surv[i] * gq[j], p: ps[i], q: qs[j], i, j };
                if row.is_none_or(|r| cand.better_than(&r)) {
                    row = Some(cand);
                }
            }
            row
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(seed, |acc, b| if b.better_than(&acc) { b } else { acc });

    let (p_lo, p_hi) = (ps[best.i.saturating_sub(1)], ps[(best.i + 1).min(n)]);
    let (q_lo, q_hi) = (qs[best.j.saturating_sub(1)], qs[(best.j + 1).min(n)]);
    let eval = |p: f64, q: f64| if p >= q { profit(f, g, PricePair { p, q }) } else { f64::NEG_INFINITY };
    let (mut p, mut q, mut val) = (best.p, best.q, best.val);
    for _ in 0..opt.refine_iters {
        let mut improved = false;
        let lo = p_lo.max(q);
        if p_hi > lo {
            let (x, v) = golden(|x| eval(x, q), lo, p_hi);
            if v > val {
                (p, val, improved) = (x, v, true);
            }
        }
        let hi = q_hi.min(p);
        if hi > q_lo {
            let (x, v) = golden(|x| eval(p, x), q_lo, hi);
            if v > val {
                (q, val, improved) = (x, v, true);
            }
        }
        if !improved {
            break;
        }
    }
    Ok(PostedResult::evaluate(f, g, PricePair::new(p, q)?, fb, cfg)?)
}
