use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PostedError, PricePair};
use crate::dist::Dist;
use crate::quad::{first_best, gft_posted, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub samples: u64,
    pub seed: u64,
    pub batches: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig { samples: 1_000_000, seed: 0, batches: 20 }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<(), PostedError> {
        if self.samples < 1000 {
            return Err(PostedError::InvalidConfig(format!("need at least 1000 samples, got {}", self.samples)));
        }
        if self.batches < 2 || self.batches > self.samples {
            return Err(PostedError::InvalidConfig(format!("batches must be in [2, samples], got {}", self.batches)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleSampleReport {
    pub mean_gft: f64,
    /// Batch-means standard error of `mean_gft`.
    pub std_err: f64,
    pub fb: f64,
    /// `mean_gft + 3 std_err ≥ fb / 12`.
    pub passes: bool,
    /// False when `F ≠ G`; the 1/12 guarantee is only claimed for `F = G`.
    pub symmetric: bool,
}

impl SingleSampleReport {
    pub fn lower_bound(&self) -> f64 {
        self.mean_gft - 3.0 * self.std_err
    }
}

fn batch_mean(f: &Dist, g: &Dist, seed: u64, batch: u64, n: u64) -> Result<f64, PostedError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let mut sum = 0.0;
    for _ in 0..n {
        // 1 - U lies in (0, 1], the domain of the quantile function
        let x = f.quantile(1.0 - rng.gen::<f64>())?;
        let y = g.quantile(1.0 - rng.gen::<f64>())?;
        let pp = PricePair::new(x.max(y), x.min(y))?;
        sum += gft_posted(f, g, pp);
    }
    Ok(sum / n as f64)
}

/// Draws one sample from each distribution, posts the larger to the buyer and
/// the smaller to the seller, and averages the exact conditional GFT.
pub fn single_sample(f: &Dist, g: &Dist, mc: &MonteCarloConfig, cfg: &QuadConfig) -> Result<SingleSampleReport, PostedError> {
    mc.validate()?;
    let fb = first_best(f, g, cfg)?;
    let base = mc.samples / mc.batches;
    let extra = mc.samples % mc.batches;
    let sizes: Vec<u64> = (0..mc.batches).map(|b| base + u64::from(b < extra)).collect();
    let means = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &n)| batch_mean(f, g, mc.seed, b as u64, n))
        .collect::<Result<Vec<_>, _>>()?;
    let k = mc.batches as f64;
    let mean = means.iter().zip(&sizes).map(|(m, &n)| m * n as f64).sum::<f64>() / mc.samples as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let std_err = (var / k).sqrt();
    Ok(SingleSampleReport {
        mean_gft: mean,
        std_err,
        fb,
        passes: mean + 3.0 * std_err >= fb / 12.0,
        symmetric: f == g,
    })
}
