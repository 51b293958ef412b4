//! Random instance generators and brute-force oracles for integration tests.
#![allow(dead_code)]

use btl_core::dist::{Dist, Piece, PieceKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Piecewise-constant density on `[lo, hi]` with 1 to 4 random cells.
pub fn histogram(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> Dist {
    let k = r.gen_range(1..=4);
    let mut cuts: Vec<f64> = (0..k - 1).map(|_| r.gen_range(lo..hi)).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let weights: Vec<f64> = (1..cuts.len()).map(|_| r.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut pieces = Vec::new();
    for (i, w) in weights.iter().enumerate() {
        let (a, b) = (cuts[i], cuts[i + 1]);
        let mass = w / total;
        pieces.push(Piece::new(a, b, PieceKind::Linear { c0: acc, slope: mass / (b - a) }));
        acc += mass;
    }
    Dist::from_pieces(pieces).expect("histogram is a valid distribution")
}

/// A random distribution from the shipped families, or a histogram, or (rarely) an atom.
pub fn any_dist(r: &mut ChaCha8Rng, allow_atoms: bool) -> Dist {
    let lo = r.gen_range(0.0..2.0);
    let w = r.gen_range(0.2..3.0);
    match r.gen_range(0..if allow_atoms { 6 } else { 5 }) {
        0 => Dist::uniform(lo, lo + w).unwrap(),
        1 => histogram(r, lo, lo + w),
        2 => Dist::truncated_exp(r.gen_range(0.2..4.0), w).unwrap().affine_transform(lo, 1.0).unwrap(),
        3 => Dist::truncated_equal_revenue(lo + 0.5, lo + 0.5 + w * 3.0).unwrap(),
        4 => Dist::linear_density(r.gen_range(-2.0..2.0)).unwrap().affine_transform(lo, w).unwrap(),
        _ => Dist::point_mass(lo + w * 0.5).unwrap(),
    }
}

/// A random regular atomless distribution.
pub fn regular_dist(r: &mut ChaCha8Rng) -> Dist {
    let lo = r.gen_range(0.0..1.5);
    let w = r.gen_range(0.3..3.0);
    match r.gen_range(0..4) {
        0 => Dist::uniform(lo, lo + w).unwrap(),
        1 => Dist::truncated_exp(r.gen_range(0.2..4.0), w).unwrap().affine_transform(lo, 1.0).unwrap(),
        2 => Dist::truncated_equal_revenue(lo + 0.5, lo + 0.5 + w * 3.0).unwrap(),
        _ => Dist::linear_density(r.gen_range(-1.9..1.9)).unwrap().affine_transform(lo, w).unwrap(),
    }
}

/// Adaptive Simpson on `[a, b]`, independent of the library's quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Simpson over the sorted, deduplicated cells of `breaks` within `[a, b]`.
pub fn simpson_split<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| simpson(f, w[0], w[1], tol / pts.len() as f64)).sum()
}

/// `E[(v - c) 1{accept(v, c)}]` for atomless `F`, `G` by nested Simpson on the
/// density product. `v_breaks(c)` lists the kinks of the inner integrand.
pub fn gft_2d<A, K>(f: &Dist, g: &Dist, accept: A, v_breaks: K, c_breaks: &[f64], tol: f64) -> f64
where
    A: Fn(f64, f64) -> bool,
    K: Fn(f64) -> Vec<f64>,
{
    let inner = |c: f64| {
        let mut br = f.breakpoints();
        br.extend(v_breaks(c));
        let h = |v: f64| if accept(v, c) { (v - c) * f.pdf(v) } else { 0.0 };
        simpson_split(&h, f.support_lo(), f.support_hi(), &br, tol)
    };
    let mut br = g.breakpoints();
    br.extend_from_slice(c_breaks);
    simpson_split(&|c| inner(c) * g.pdf(c), g.support_lo(), g.support_hi(), &br, tol)
}

/// First best by the 2-D definition.
pub fn fb_2d(f: &Dist, g: &Dist, tol: f64) -> f64 {
    let mut cb = f.breakpoints();
    cb.extend(g.breakpoints());
    gft_2d(f, g, |v, c| v >= c, |c| vec![c], &cb, tol)
}
