mod args;
mod render;

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Mutex;

use anyhow::{anyhow, bail, Context, Result};
use btl_core::dist::Dist;
use btl_core::instances::{case_eval, case_eval_checked, certify, sweep, BoundReport, SweepKind, Theorem, SWEEP_MONO_TOL};
use btl_core::optimal::{optimal_mechanism_metrics, public_buyer_metrics, public_seller_metrics, TradeMetrics};
use btl_core::posted::{decomposition_rhs, optimize_prices, profit, single_sample, PricePair};
use btl_core::quad::{first_best, gft_posted};
use btl_core::Settings;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command, Global, Mech, Pair, SweepFamily};
use render::{Report, Row, SCHEMA};

fn settings(g: &Global) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(t) = g.abs_tol {
        s.quad.abs_tol = t;
    }
    if let Some(t) = g.rel_tol {
        s.quad.rel_tol = t;
    }
    if let Some(n) = g.grid_n {
        s.opt.grid_n = n;
    }
    if let Some(n) = g.refine_iters {
        s.opt.refine_iters = n;
    }
    if let Some(n) = g.mc_samples {
        s.mc.samples = n;
    }
    if let Some(seed) = g.mc_seed {
        s.mc.seed = seed;
    }
    s.quad.validate()?;
    s.opt.validate()?;
    s.mc.validate()?;
    Ok(s)
}

fn threads() -> Result<()> {
    let Ok(raw) = std::env::var("BTL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| anyhow!("BTL_THREADS: unexpected `{raw}`; expected a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("BTL_THREADS")?;
    Ok(())
}

fn both(pair: &Pair) -> Result<(&Dist, &Dist)> {
    match (&pair.buyer, &pair.seller) {
        (Some(f), Some(g)) => Ok((f, g)),
        (None, _) => bail!("--buyer is required here"),
        (_, None) => bail!("--seller is required here"),
    }
}

fn metrics_report(r: &mut Report, mech: &str, param: Option<f64>, m: &TradeMetrics) {
    r.merge(m);
    r.set("sw_ratio", m.sw_ratio());
    r.rows.push(Row { family: mech.into(), param, fb: m.fb, gft: m.gft, profit: Some(m.profit), ratio: m.ratio, ..Row::default() });
}

fn analyze(pair: &Pair, mech: Mech, s: &Settings) -> Result<Report> {
    let mut r = Report::new("analyze");
    r.set("mech", mech.name());
    match mech {
        Mech::Optimal => {
            let (f, g) = both(pair)?;
            metrics_report(&mut r, "optimal", None, &optimal_mechanism_metrics(f, g, &s.quad)?);
        }
        Mech::PublicSeller { c } => {
            let f = pair.buyer.as_ref().ok_or_else(|| anyhow!("--buyer is required for public-seller"))?;
            r.set("c", c);
            metrics_report(&mut r, "public-seller", Some(c), &public_seller_metrics(f, c, &s.quad)?);
        }
        Mech::PublicBuyer { v } => {
            let g = pair.seller.as_ref().ok_or_else(|| anyhow!("--seller is required for public-buyer"))?;
            r.set("v", v);
            metrics_report(&mut r, "public-buyer", Some(v), &public_buyer_metrics(g, v, &s.quad)?);
        }
        Mech::Posted => {
            let (f, g) = both(pair)?;
            let res = optimize_prices(f, g, &s.opt, &s.quad)?;
            posted_report(&mut r, res.prices, res.profit, res.gft, res.fb, res.decomposition_rhs);
        }
        Mech::PostedAt { p, q } => {
            let (f, g) = both(pair)?;
            let pp = PricePair::new(p, q)?;
            let fb = first_best(f, g, &s.quad)?;
            let rhs = decomposition_rhs(f, g, pp, &s.quad)?;
            posted_report(&mut r, pp, profit(f, g, pp), gft_posted(f, g, pp), fb, rhs);
        }
    }
    Ok(r)
}

fn posted_report(r: &mut Report, pp: PricePair, profit: f64, gft: f64, fb: f64, rhs: f64) {
    let ratio = btl_core::ratio(gft, fb);
    r.set("p", pp.p());
    r.set("q", pp.q());
    r.set("profit", profit);
    r.set("gft", gft);
    r.set("fb", fb);
    r.set("ratio", ratio);
    r.set("decomposition_rhs", rhs);
    r.rows.push(Row { family: "posted".into(), fb, gft, profit: Some(profit), ratio, ..Row::default() });
}

fn bound_row(b: &BoundReport) -> Row {
    Row {
        family: b.family.clone(),
        param: b.param,
        fb: b.fb,
        gft: b.gft,
        profit: Some(b.profit).filter(|x| !x.is_nan()),
        ratio: b.measured_ratio,
        guaranteed: Some(b.guaranteed_factor),
        passes: Some(b.passes),
    }
}

#[allow(clippy::too_many_arguments)]
fn theorem(id: &str, a: Option<f64>, b: Option<f64>, delta: Option<f64>, alpha: Option<f64>, beta: Option<f64>, p: Option<f64>, q: Option<f64>) -> Result<Theorem> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| anyhow!("{id} needs --{flag}"));
    let a = a.unwrap_or(1.0);
    Ok(match id {
        "thm1" => Theorem::Thm1 {
            prices: match (p, q) {
                (Some(p), Some(q)) => Some(PricePair::new(p, q)?),
                (None, None) => None,
                _ => bail!("thm1 takes --p and --q together"),
            },
        },
        "cor1" => Theorem::Cor1,
        "thm2" => Theorem::Thm2,
        "thm3" => Theorem::Thm3,
        "thm4" => Theorem::Thm4 { alpha: need(alpha, "alpha")?, beta: need(beta, "beta")? },
        "cor2" => Theorem::Cor2,
        "thm5" => Theorem::Thm5,
        "thm6" => Theorem::Thm6 { a, b: need(b, "b")? },
        "thm7s" => Theorem::Thm7Seller { a, b: need(b, "b")? },
        "thm7b" => Theorem::Thm7Buyer { delta: need(delta, "delta")? },
        "thm8" => Theorem::Thm8 { a, b: need(b, "b")? },
        "thm9" => Theorem::Thm9 { a, b: need(b, "b")? },
        other => bail!("unexpected theorem `{other}`; expected one of {}", Theorem::IDS.join(", ")),
    })
}

fn bounds(th: &Theorem, pair: &Pair, s: &Settings) -> Result<Report> {
    let dists = match (&pair.buyer, &pair.seller) {
        (None, None) => None,
        _ if !th.takes_distributions() => bail!("{} builds its own instance; drop --buyer/--seller", th.id()),
        (Some(f), Some(g)) => Some((f, g)),
        _ => bail!("--buyer and --seller go together"),
    };
    let rep = certify(th, dists, s)?;
    let mut r = Report::new("bounds");
    r.merge(&rep);
    r.passed = rep.passes;
    r.rows.push(bound_row(&rep));
    Ok(r)
}

fn sweep_kind(fam: SweepFamily, a: f64) -> SweepKind {
    match fam {
        SweepFamily::General => SweepKind::General { a },
        SweepFamily::PublicSeller => SweepKind::PublicSeller { a },
        SweepFamily::PublicBuyer => SweepKind::PublicBuyer,
        SweepFamily::Symmetric => SweepKind::Symmetric { a },
        SweepFamily::Welfare => SweepKind::Welfare { a },
    }
}

fn run_sweep(kind: SweepKind, grid: &[f64], log: Option<&Path>, s: &Settings) -> Result<Report> {
    let file = match log {
        Some(p) => Some(Mutex::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => None,
    };
    let res = sweep(kind, grid, s, file.as_ref().map(|m| m as &Mutex<dyn Write + Send>))?;
    let mut r = Report::new("sweep");
    r.tabular = true;
    r.passed = res.all_pass();
    r.merge(kind);
    r.set("monotone", res.monotone);
    r.set("all_pass", res.all_pass());
    r.rows = res.reports.iter().map(bound_row).collect();
    r.set("reports", &res.reports);
    Ok(r)
}

fn sweep_meta(kind: SweepKind, grid: &[f64], s: &Settings) -> serde_json::Value {
    json!({
        "schema": SCHEMA,
        "tool": "btl",
        "version": env!("CARGO_PKG_VERSION"),
        "sweep": kind,
        "grid": grid,
        "tolerances": { "abs_tol": s.quad.abs_tol, "rel_tol": s.quad.rel_tol, "max_depth": s.quad.max_depth, "monotone": SWEEP_MONO_TOL },
        "optimizer": s.opt,
        "mc": s.mc,
    })
}

fn mc(pair: &Pair, s: &Settings) -> Result<Report> {
    let (f, g) = both(pair)?;
    let rep = single_sample(f, g, &s.mc, &s.quad)?;
    let ratio = btl_core::ratio(rep.mean_gft, rep.fb);
    let mut r = Report::new("mc");
    r.merge(rep);
    r.set("lower_bound", rep.lower_bound());
    r.set("ratio", ratio);
    r.set("seed", s.mc.seed);
    r.set("samples", s.mc.samples);
    r.set("batches", s.mc.batches);
    // the 1/12 guarantee is only claimed for identical distributions
    r.passed = !rep.symmetric || rep.passes;
    r.rows.push(Row {
        family: "single-sample".into(),
        fb: rep.fb,
        gft: rep.mean_gft,
        ratio,
        guaranteed: Some(1.0 / 12.0),
        passes: rep.symmetric.then_some(rep.passes),
        ..Row::default()
    });
    Ok(r)
}

fn case_table(a: f64, b: f64, check: bool, s: &Settings) -> Result<Report> {
    let mut r = Report::new("case-table");
    let e = if check {
        let c = case_eval_checked(a, b, &s.quad)?;
        r.set("quad_fb", c.quad_fb);
        r.set("quad_gft", c.quad_gft);
        r.set("quad_ratio", c.quad_ratio);
        r.set("agrees", c.agrees);
        r.passed = c.agrees;
        c.eval
    } else {
        case_eval(a, b)?
    };
    r.set("a", e.a);
    r.set("b", e.b);
    r.set("cell", e.cell.label());
    r.set("fb_formula", e.cell.fb_formula);
    r.set("gft_formula", e.cell.gft_formula);
    r.set("lower_bound", e.cell.lower_bound);
    r.set("fb", e.fb);
    r.set("gft", e.gft);
    r.set("ratio", e.ratio);
    r.set("meets_lower_bound", e.meets_lower_bound);
    r.passed &= e.meets_lower_bound;
    r.rows.push(Row {
        family: "uniform-pair".into(),
        fb: e.fb,
        gft: e.gft,
        ratio: e.ratio,
        guaranteed: e.cell.lower_bound,
        passes: Some(e.meets_lower_bound),
        ..Row::default()
    });
    Ok(r)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    threads()?;
    let s = settings(&cli.global)?;
    let out = cli.global.out.as_deref();
    let report = match &cli.cmd {
        Command::Analyze { pair, mech } => analyze(pair, *mech, &s)?,
        Command::OptimizePp { pair } => {
            let (f, g) = both(pair)?;
            let res = optimize_prices(f, g, &s.opt, &s.quad)?;
            let mut r = Report::new("optimize-pp");
            posted_report(&mut r, res.prices, res.profit, res.gft, res.fb, res.decomposition_rhs);
            r.set("grid_n", s.opt.grid_n);
            r.set("refine_iters", s.opt.refine_iters);
            r
        }
        Command::Bounds { theorem: id, pair, a, b, delta, alpha, beta, p, q } => {
            let th = theorem(id, *a, *b, *delta, *alpha, *beta, *p, *q)?;
            bounds(&th, pair, &s)?
        }
        Command::Sweep { family, grid, a, log } => {
            let kind = sweep_kind(*family, *a);
            let r = run_sweep(kind, grid, log.as_deref(), &s)?;
            if let Some(p) = out {
                let meta = serde_json::to_string_pretty(&sweep_meta(kind, grid, &s))? + "\n";
                let mp = p.with_extension("meta.json");
                std::fs::write(&mp, meta).with_context(|| format!("cannot write {}", mp.display()))?;
            }
            r
        }
        Command::Mc { pair } => mc(pair, &s)?,
        Command::CaseTable { a, b, check } => case_table(*a, *b, *check, &s)?,
    };
    emit(&report.render(cli.global.format), out)?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
