use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{QuadConfig, QuadError};

// Kronrod nodes on [0, 1]; odd indices and the centre are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Hard cap on live subintervals, independent of depth.
const MAX_SEGMENTS: usize = 200_000;

struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
    depth: u32,
}

impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.err.total_cmp(&o.err) == Ordering::Equal
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, QuadError> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(QuadError::NonFinite(x))
    }
}

/// 15-point Kronrod rule with the embedded 7-point Gauss rule, QUADPACK error heuristic.
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = eval(f, c)?;
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv = [(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, f2) = (eval(f, c - dx)?, eval(f, c + dx)?);
        fv[j] = (f1, f2);
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let (resk, resabs, resasc) = (resk * h, resabs * h.abs(), resasc * h.abs());
    let mut err = (resk - resg * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((resk, err))
}

/// Integrates `f` over `[a, b]`, treating every point of `breaks` inside the
/// interval as a mandatory subdivision point.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], cfg: &QuadConfig) -> Result<f64, QuadError> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadError::InvalidConfig(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a > b {
        return integrate(f, b, a, breaks, cfg).map(|v| -v);
    }
    if a == b {
        return Ok(0.0);
    }
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite() && *x > a && *x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err) = (0.0, 0.0);
    for w in pts.windows(2) {
        let (val, err) = qk15(&f, w[0], w[1])?;
        total += val;
        total_err += err;
        heap.push(Seg { a: w[0], b: w[1], val, err, depth: 0 });
    }
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            // re-sum to shed accumulated update drift
            return Ok(heap.iter().map(|s| s.val).sum());
        }
        let seg = heap.pop().expect("heap holds every subinterval");
        let m = 0.5 * (seg.a + seg.b);
        if seg.depth >= cfg.max_depth || heap.len() >= MAX_SEGMENTS || m <= seg.a || m >= seg.b {
            return Err(QuadError::NoConverge { a, b, estimate: total, error: total_err });
        }
        let (v1, e1) = qk15(&f, seg.a, m)?;
        let (v2, e2) = qk15(&f, m, seg.b)?;
        total += v1 + v2 - seg.val;
        total_err += e1 + e2 - seg.err;
        heap.push(Seg { a: seg.a, b: m, val: v1, err: e1, depth: seg.depth + 1 });
        heap.push(Seg { a: m, b: seg.b, val: v2, err: e2, depth: seg.depth + 1 });
    }
}
