use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build, closed_form_bounds, family_metrics, InstanceError, InstanceFamily};
use crate::dist::{classify, Dist};
use crate::optimal::optimal_mechanism_metrics;
use crate::posted::{hazard_bound_factor, median_pricing, optimize_prices, quantile_pricing, single_sample, PostedError, PostedResult, PricePair};
use crate::quad::first_best;
use crate::{Settings, FB_EPS};

/// Slack for lower-bound guarantees, in ratio units.
const LOWER_TOL: f64 = 1e-9;
/// Slack for closed-form caps, in ratio units.
const CAP_TOL: f64 = 1e-6;
/// A sweep is monotone if each ratio is at most the previous one plus this.
pub const SWEEP_MONO_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `measured ≥ guaranteed - tolerance`.
    AtLeast,
    /// `measured ≤ guaranteed + tolerance`.
    AtMost,
    /// `|measured - guaranteed| ≤ tolerance`.
    Equals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: String,
    pub family: String,
    /// The swept parameter, when there is one.
    pub param: Option<f64>,
    pub params: BTreeMap<String, f64>,
    pub fb: f64,
    pub gft: f64,
    pub profit: f64,
    pub measured_ratio: f64,
    pub guaranteed_factor: f64,
    pub kind: BoundKind,
    pub tolerance: f64,
    pub passes: bool,
    pub error: Option<String>,
}

impl BoundReport {
    #[allow(clippy::too_many_arguments)]
    fn judged(theorem: &Theorem, family: &str, fb: f64, gft: f64, profit: f64, measured: f64, guaranteed: f64, kind: BoundKind, tolerance: f64) -> Self {
        let passes = fb <= FB_EPS
            || match kind {
                BoundKind::AtLeast => measured >= guaranteed - tolerance,
                BoundKind::AtMost => measured <= guaranteed + tolerance,
                BoundKind::Equals => (measured - guaranteed).abs() <= tolerance,
            };
        BoundReport {
            theorem: theorem.id().to_string(),
            family: family.to_string(),
            param: theorem.param(),
            params: theorem.params(),
            fb,
            gft,
            profit,
            measured_ratio: measured,
            guaranteed_factor: guaranteed,
            kind,
            tolerance,
            passes,
            error: None,
        }
    }

    fn failed(theorem: &Theorem, family: &str, err: &InstanceError) -> Self {
        BoundReport {
            theorem: theorem.id().to_string(),
            family: family.to_string(),
            param: theorem.param(),
            params: theorem.params(),
            fb: f64::NAN,
            gft: f64::NAN,
            profit: f64::NAN,
            measured_ratio: f64::NAN,
            guaranteed_factor: f64::NAN,
            kind: BoundKind::AtLeast,
            tolerance: 0.0,
            passes: false,
            error: Some(err.to_string()),
        }
    }

    fn posted(theorem: &Theorem, family: &str, r: &PostedResult, guaranteed: f64) -> Self {
        Self::judged(theorem, family, r.fb, r.gft, r.profit, r.ratio(), guaranteed, BoundKind::AtLeast, LOWER_TOL)
    }
}

/// A checkable approximation statement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum Theorem {
    /// Posted GFT is at least the decomposition lower bound; optimal prices if `prices` is absent.
    Thm1 { prices: Option<PricePair> },
    /// Median pricing is a 1/2-approximation when the medians are ordered.
    Cor1,
    /// Optimal posted prices are a 1/36-approximation for symmetric MHR agents.
    Thm2,
    /// Optimal posted prices are a `2/M²`-approximation with hazard rates bounded by `M`.
    Thm3,
    /// Quantile pricing is a `beta (1 - alpha)`-approximation.
    Thm4 { alpha: f64, beta: f64 },
    /// The single-sample mechanism is a 1/12-approximation for `F = G`.
    Cor2,
    /// The optimal mechanism attains exactly half the first best on uniform inputs.
    Thm5,
    Thm6 { a: f64, b: f64 },
    #[serde(rename = "thm7s")]
    Thm7Seller { a: f64, b: f64 },
    #[serde(rename = "thm7b")]
    Thm7Buyer { delta: f64 },
    Thm8 { a: f64, b: f64 },
    Thm9 { a: f64, b: f64 },
}

impl Theorem {
    pub const IDS: [&'static str; 12] = ["thm1", "cor1", "thm2", "thm3", "thm4", "cor2", "thm5", "thm6", "thm7s", "thm7b", "thm8", "thm9"];

    pub fn id(&self) -> &'static str {
        match self {
            Theorem::Thm1 { .. } => "thm1",
            Theorem::Cor1 => "cor1",
            Theorem::Thm2 => "thm2",
            Theorem::Thm3 => "thm3",
            Theorem::Thm4 { .. } => "thm4",
            Theorem::Cor2 => "cor2",
            Theorem::Thm5 => "thm5",
            Theorem::Thm6 { .. } => "thm6",
            Theorem::Thm7Seller { .. } => "thm7s",
            Theorem::Thm7Buyer { .. } => "thm7b",
            Theorem::Thm8 { .. } => "thm8",
            Theorem::Thm9 { .. } => "thm9",
        }
    }

    /// Whether the statement is about a user-supplied `(F, G)` rather than a fixed family.
    pub fn takes_distributions(&self) -> bool {
        matches!(self, Theorem::Thm1 { .. } | Theorem::Cor1 | Theorem::Thm2 | Theorem::Thm3 | Theorem::Thm4 { .. } | Theorem::Cor2 | Theorem::Thm5)
    }

    fn family(&self) -> Option<InstanceFamily> {
        match *self {
            Theorem::Thm6 { a, b } | Theorem::Thm9 { a, b } => Some(InstanceFamily::GeneralInapprox { a, b }),
            Theorem::Thm7Seller { a, b } => Some(InstanceFamily::PublicSellerInapprox { a, b }),
            Theorem::Thm7Buyer { delta } => Some(InstanceFamily::PublicBuyerInapprox { delta }),
            Theorem::Thm8 { a, b } => Some(InstanceFamily::SymmetricInapprox { a, b }),
            _ => None,
        }
    }

    fn param(&self) -> Option<f64> {
        match *self {
            Theorem::Thm6 { b, .. } | Theorem::Thm7Seller { b, .. } | Theorem::Thm8 { b, .. } | Theorem::Thm9 { b, .. } => Some(b),
            Theorem::Thm7Buyer { delta } => Some(delta),
            _ => None,
        }
    }

    fn params(&self) -> BTreeMap<String, f64> {
        let kv: Vec<(&str, f64)> = match *self {
            Theorem::Thm1 { prices: Some(pp) } => vec![("p", pp.p()), ("q", pp.q())],
            Theorem::Thm4 { alpha, beta } => vec![("alpha", alpha), ("beta", beta)],
            Theorem::Thm6 { a, b } | Theorem::Thm7Seller { a, b } | Theorem::Thm8 { a, b } | Theorem::Thm9 { a, b } => vec![("a", a), ("b", b)],
            Theorem::Thm7Buyer { delta } => vec![("delta", delta)],
            _ => vec![],
        };
        kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

fn symmetric_mhr(f: &Dist, g: &Dist) -> Result<f64, InstanceError> {
    if f != g {
        return Err(InstanceError::NotMHR("asymmetric pair".into()));
    }
    let reg = classify(f, g);
    if !reg.both_mhr() {
        return Err(InstanceError::NotMHR("input".into()));
    }
    Ok(reg.hazard_sup_m)
}

fn certify_pair(th: &Theorem, f: &Dist, g: &Dist, s: &Settings) -> Result<BoundReport, InstanceError> {
    let fam = "custom";
    let q = &s.quad;
    let opt_or_degenerate = |guaranteed: f64| -> Result<BoundReport, InstanceError> {
        match optimize_prices(f, g, &s.opt, q) {
            Ok(r) => Ok(BoundReport::posted(th, fam, &r, guaranteed)),
            Err(PostedError::DegenerateInstance { fb }) => {
                Ok(BoundReport::judged(th, fam, fb, 0.0, 0.0, 1.0, guaranteed, BoundKind::AtLeast, LOWER_TOL))
            }
            Err(e) => Err(e.into()),
        }
    };
    match *th {
        Theorem::Thm1 { prices } => {
            let fb = first_best(f, g, q)?;
            let pp = match prices {
                Some(pp) => pp,
                None => match optimize_prices(f, g, &s.opt, q) {
                    Ok(r) => r.prices,
                    Err(PostedError::DegenerateInstance { .. }) => PricePair::new(f.support_lo().max(g.support_lo()), g.support_lo())?,
                    Err(e) => return Err(e.into()),
                },
            };
            let r = PostedResult::evaluate(f, g, pp, fb, q)?;
            let guaranteed = crate::ratio(r.decomposition_rhs, fb);
            Ok(BoundReport::posted(th, fam, &r, guaranteed))
        }
        Theorem::Cor1 => match median_pricing(f, g, q) {
            Ok(r) => Ok(BoundReport::posted(th, fam, &r, 0.5)),
            Err(PostedError::MedianOrderViolated { factor, result }) => Ok(BoundReport::posted(th, fam, &result, factor)),
            Err(e) => Err(e.into()),
        },
        Theorem::Thm2 => {
            symmetric_mhr(f, g)?;
            opt_or_degenerate(1.0 / 36.0)
        }
        Theorem::Thm3 => {
            let m = symmetric_mhr(f, g)?;
            let mut rep = opt_or_degenerate(hazard_bound_factor(m)?)?;
            rep.params.insert("M".into(), m);
            Ok(rep)
        }
        Theorem::Thm4 { alpha, beta } => {
            let r = quantile_pricing(f, g, alpha, beta, q)?;
            Ok(BoundReport::posted(th, fam, &r, beta * (1.0 - alpha)))
        }
        Theorem::Cor2 => {
            let r = single_sample(f, g, &s.mc, q)?;
            let measured = crate::ratio(r.mean_gft, r.fb);
            let tol = if r.fb > FB_EPS { 3.0 * r.std_err / r.fb } else { 0.0 };
            let mut rep = BoundReport::judged(th, fam, r.fb, r.mean_gft, f64::NAN, measured, 1.0 / 12.0, BoundKind::AtLeast, tol);
            rep.params.insert("std_err".into(), r.std_err);
            rep.params.insert("seed".into(), s.mc.seed as f64);
            rep.params.insert("samples".into(), s.mc.samples as f64);
            Ok(rep)
        }
        Theorem::Thm5 => {
            let m = optimal_mechanism_metrics(f, g, q)?;
            Ok(BoundReport::judged(th, fam, m.fb, m.gft, m.profit, m.ratio, 0.5, BoundKind::Equals, 1e-7))
        }
        _ => unreachable!("family theorems are handled by certify_family"),
    }
}

fn certify_family(th: &Theorem, fam: InstanceFamily, s: &Settings) -> Result<BoundReport, InstanceError> {
    let cf = closed_form_bounds(&fam)?;
    let m = family_metrics(&fam, &s.quad)?;
    let name = fam.name();
    let judged = |measured, guaranteed: Option<f64>, kind, tol| {
        let g = guaranteed.ok_or_else(|| InstanceError::NoClosedForm(name.into()))?;
        Ok(BoundReport::judged(th, name, m.fb, m.gft, m.profit, measured, g, kind, tol))
    };
    match th {
        Theorem::Thm6 { .. } | Theorem::Thm8 { .. } => judged(m.ratio, cf.ratio_upper, BoundKind::AtMost, CAP_TOL),
        Theorem::Thm7Seller { .. } => judged(m.ratio, cf.ratio_upper, BoundKind::Equals, LOWER_TOL),
        Theorem::Thm7Buyer { .. } => judged(m.ratio, cf.ratio_upper, BoundKind::Equals, 1e-7),
        Theorem::Thm9 { .. } => judged(m.sw_ratio(), cf.sw_ratio_upper, BoundKind::AtMost, CAP_TOL),
        _ => unreachable!("pair theorems are handled by certify_pair"),
    }
}

/// Evaluates one statement. Theorems about arbitrary inputs use `pair`
/// (default `U[0,1]` on both sides); the rest build their own family.
pub fn certify(th: &Theorem, pair: Option<(&Dist, &Dist)>, s: &Settings) -> Result<BoundReport, InstanceError> {
    match th.family() {
        Some(fam) => {
            build(&fam)?;
            certify_family(th, fam, s)
        }
        None => {
            let unit = Dist::uniform(0.0, 1.0)?;
            let (f, g) = pair.unwrap_or((&unit, &unit));
            certify_pair(th, f, g, s)
        }
    }
}

/// One-parameter family swept by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SweepKind {
    /// Optimal-mechanism ratio of the general family over `b`.
    General { a: f64 },
    PublicSeller { a: f64 },
    /// Public-buyer family over `delta`.
    PublicBuyer,
    Symmetric { a: f64 },
    /// Social-welfare ratio of the general family over `b`.
    Welfare { a: f64 },
}

impl SweepKind {
    pub fn theorem(&self, x: f64) -> Theorem {
        match *self {
            SweepKind::General { a } => Theorem::Thm6 { a, b: x },
            SweepKind::PublicSeller { a } => Theorem::Thm7Seller { a, b: x },
            SweepKind::PublicBuyer => Theorem::Thm7Buyer { delta: x },
            SweepKind::Symmetric { a } => Theorem::Thm8 { a, b: x },
            SweepKind::Welfare { a } => Theorem::Thm9 { a, b: x },
        }
    }

    fn family_name(&self, x: f64) -> &'static str {
        self.theorem(x).family().map_or("custom", |f| f.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub reports: Vec<BoundReport>,
    /// Successive measured ratios never increase by more than [`SWEEP_MONO_TOL`].
    pub monotone: bool,
}

impl SweepResult {
    pub fn all_pass(&self) -> bool {
        self.monotone && self.reports.iter().all(|r| r.passes)
    }
}

#[derive(Serialize)]
struct LogLine<'a> {
    index: usize,
    report: &'a BoundReport,
}

/// Certifies every grid point in parallel. Reports keep grid order; a failed
/// point yields a report carrying its error. Each finished point is appended to
/// `log` as one JSON line, in completion order.
pub fn sweep(kind: SweepKind, grid: &[f64], s: &Settings, log: Option<&Mutex<dyn Write + Send>>) -> Result<SweepResult, InstanceError> {
    if grid.is_empty() {
        return Err(InstanceError::BadFamilyParams("empty sweep grid".into()));
    }
    let reports: Vec<BoundReport> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let th = kind.theorem(x);
            let rep = certify(&th, None, s).unwrap_or_else(|e| BoundReport::failed(&th, kind.family_name(x), &e));
            if let Some(w) = log {
                let line = serde_json::to_string(&LogLine { index: i, report: &rep }).expect("reports serialize");
                // a lost log line must not abort the sweep
                let _ = writeln!(w.lock().unwrap_or_else(|p| p.into_inner()), "{line}");
            }
            rep
        })
        .collect();
    let ok: Vec<f64> = reports.iter().filter(|r| r.error.is_none()).map(|r| r.measured_ratio).collect();
    let monotone = ok.windows(2).all(|w| w[1] <= w[0] + SWEEP_MONO_TOL);
    Ok(SweepResult { reports, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_through_serde() {
        let th = Theorem::Thm7Seller { a: 1.0, b: 10.0 };
        let s = serde_json::to_string(&th).unwrap();
        assert!(s.contains("\"thm7s\""), "{s}");
        assert_eq!(serde_json::from_str::<Theorem>(&s).unwrap(), th);
    }

    #[test]
    fn failed_point_does_not_abort() {
        let s = Settings::default();
        let r = sweep(SweepKind::PublicBuyer, &[0.2, 0.7], &s, None).unwrap();
        assert!(r.reports[0].passes);
        assert!(r.reports[1].error.is_some() && !r.reports[1].passes);
    }
}
