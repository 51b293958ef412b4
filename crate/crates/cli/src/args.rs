use std::path::PathBuf;

use btl_core::dist::{parse_dist, parse_real, Dist, GRAMMAR};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "btl", version, about = "Gains-from-trade analysis for bilateral trade through a profit-maximizing broker")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug)]
pub struct Global {
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    #[arg(long, value_parser = real, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, value_parser = real, global = true)]
    pub rel_tol: Option<f64>,
    /// Quantile grid points per axis for the posted-price optimizer.
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Golden-section refinement rounds after the grid search.
    #[arg(long, global = true)]
    pub refine_iters: Option<usize>,
    #[arg(long, global = true)]
    pub mc_samples: Option<u64>,
    #[arg(long, global = true)]
    pub mc_seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Pair {
    /// Buyer value distribution.
    #[arg(long, value_parser = dist, long_help = dist_help())]
    pub buyer: Option<Dist>,
    /// Seller value distribution.
    #[arg(long, value_parser = dist, long_help = dist_help())]
    pub seller: Option<Dist>,
}

fn dist_help() -> String {
    format!("Distribution spec: {GRAMMAR}")
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Welfare metrics of one mechanism on one instance.
    Analyze {
        #[command(flatten)]
        pair: Pair,
        /// optimal | public-seller:c=<r> | public-buyer:v=<r> | posted | posted:p=<r>,q=<r>
        #[arg(long, value_parser = mech, default_value = "optimal")]
        mech: Mech,
    },
    /// Profit-maximizing posted prices.
    OptimizePp {
        #[command(flatten)]
        pair: Pair,
    },
    /// Check one approximation bound.
    Bounds {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(btl_core::instances::Theorem::IDS))]
        theorem: String,
        #[command(flatten)]
        pair: Pair,
        /// Family parameter `a` (default 1).
        #[arg(long, value_parser = real)]
        a: Option<f64>,
        #[arg(long, value_parser = real)]
        b: Option<f64>,
        #[arg(long, value_parser = real)]
        delta: Option<f64>,
        #[arg(long, value_parser = real)]
        alpha: Option<f64>,
        #[arg(long, value_parser = real)]
        beta: Option<f64>,
        /// Fixed buyer price for thm1 (with --q).
        #[arg(long, value_parser = real)]
        p: Option<f64>,
        #[arg(long, value_parser = real)]
        q: Option<f64>,
    },
    /// Certify a family over a parameter grid.
    Sweep {
        #[arg(value_enum)]
        family: SweepFamily,
        /// Comma-separated values of `b` (or `delta` for public-buyer).
        #[arg(long, value_parser = real, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        #[arg(long, value_parser = real, default_value = "1")]
        a: f64,
        /// Append one JSON line per finished grid point here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Single-sample mechanism by Monte Carlo.
    Mc {
        #[command(flatten)]
        pair: Pair,
    },
    /// Closed-form uniform case table for F = U[0,1], G = U[a,b].
    CaseTable {
        #[arg(long, value_parser = real, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, value_parser = real, allow_hyphen_values = true)]
        b: f64,
        /// Also cross-check against quadrature.
        #[arg(long)]
        check: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepFamily {
    General,
    PublicSeller,
    PublicBuyer,
    Symmetric,
    Welfare,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mech {
    Optimal,
    PublicSeller { c: f64 },
    PublicBuyer { v: f64 },
    Posted,
    PostedAt { p: f64, q: f64 },
}

impl Mech {
    pub fn name(&self) -> &'static str {
        match self {
            Mech::Optimal => "optimal",
            Mech::PublicSeller { .. } => "public-seller",
            Mech::PublicBuyer { .. } => "public-buyer",
            Mech::Posted | Mech::PostedAt { .. } => "posted",
        }
    }
}

pub fn real(s: &str) -> Result<f64, String> {
    parse_real(s).ok_or_else(|| format!("`{s}` is not a finite real (e.g. 0.25, 1e6, e^10)"))
}

fn dist(s: &str) -> Result<Dist, String> {
    parse_dist(s).map_err(|e| format!("{e}\n  grammar: {GRAMMAR}"))
}

fn keyed(body: &str, key: &str) -> Result<f64, String> {
    match body.split_once('=') {
        Some((k, v)) if k.trim() == key => real(v),
        _ => Err(format!("unexpected `{body}`; expected {key}=<r>")),
    }
}

fn mech(s: &str) -> Result<Mech, String> {
    const EXPECTED: &str = "optimal | public-seller:c=<r> | public-buyer:v=<r> | posted | posted:p=<r>,q=<r>";
    let (head, body) = match s.split_once(':') {
        Some((h, b)) => (h.trim(), Some(b)),
        None => (s.trim(), None),
    };
    match (head, body) {
        ("optimal", None) => Ok(Mech::Optimal),
        ("posted", None) => Ok(Mech::Posted),
        ("public-seller", Some(b)) => Ok(Mech::PublicSeller { c: keyed(b, "c")? }),
        ("public-buyer", Some(b)) => Ok(Mech::PublicBuyer { v: keyed(b, "v")? }),
        ("posted", Some(b)) => match b.split_once(',') {
            Some((p, q)) => Ok(Mech::PostedAt { p: keyed(p, "p")?, q: keyed(q, "q")? }),
            None => Err(format!("unexpected `{b}`; expected p=<r>,q=<r>")),
        },
        _ => Err(format!("unexpected `{s}`; expected {EXPECTED}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mechanism_specs() {
        assert_eq!(mech("optimal").unwrap(), Mech::Optimal);
        assert_eq!(mech("public-seller:c=0.5").unwrap(), Mech::PublicSeller { c: 0.5 });
        assert_eq!(mech("posted:p=0.7,q=0.2").unwrap(), Mech::PostedAt { p: 0.7, q: 0.2 });
        let err = mech("public-buyer:w=2").unwrap_err();
        assert!(err.contains("`w=2`"), "{err}");
        assert!(mech("auction").unwrap_err().contains("`auction`"));
    }

    #[test]
    fn reals_accept_exponentials() {
        assert_eq!(real("e^0").unwrap(), 1.0);
        assert!(real("1e400").is_err());
    }
}
