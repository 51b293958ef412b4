//! Closed forms for `F = U[0,1]`, `G = U[a,b]`, where the optimal mechanism
//! trades iff `v - c ≥ T = (1 - a)/2`.
//!
//! Case (from `a`, `b` against 0 and 1):
//! 1: `b ≤ 0`; 2: `a ≤ 0 < b ≤ 1`; 3: `a ≤ 0 < 1 < b`; 4: `0 < a < b ≤ 1`;
//! 5: `0 < a < 1 < b`; 6: `a ≥ 1` (no trade is possible).
//!
//! Subcase (from `A = a + T`, `B = b + T` against 0 and 1):
//! (a) `B ≤ 0`; (b) `A ≤ 0 < B ≤ 1`; (c) `A ≤ 0 < 1 < B`;
//! (d) `0 < A < B ≤ 1`; (e) `0 < A < 1 < B`.

use serde::Serialize;

use super::InstanceError;
use crate::dist::Dist;
use crate::optimal::optimal_mechanism_metrics;
use crate::quad::QuadConfig;

/// Agreement required between the closed forms and quadrature.
pub const CASE_QUAD_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseCell {
    pub case_id: u8,
    /// `None` only for case 6.
    pub subcase: Option<char>,
    pub fb_formula: &'static str,
    pub gft_formula: &'static str,
    /// Worst ratio over the cell; `None` for the degenerate case 6.
    pub lower_bound: Option<f64>,
}

impl CaseCell {
    pub fn label(&self) -> String {
        match self.subcase {
            Some(s) => format!("{}({s})", self.case_id),
            None => self.case_id.to_string(),
        }
    }
}

const FB_FORMULAS: [&str; 6] = [
    "(1-a-b)/2",
    "(3a^2-3a+b^3-3b^2+3b)/(6(b-a))",
    "(3a^2-3a+1)/(6(b-a))",
    "(a^2+ab+b^2-3a-3b+3)/6",
    "(1-a)^3/(6(b-a))",
    "0",
];

const GFT_FORMULAS: [&str; 5] = [
    "(1-a-b)/2",
    "(a+b-1)(a^2-4ab+10a+4b^2-8b+1)/(24(b-a))",
    "(3a-1)^2/(24(b-a))",
    "(a+2b-3)^2/24",
    "(1-a)^3/(12(b-a))",
];

/// Reachable cells and their lower bounds.
pub const FEASIBLE_CELLS: [(u8, char, f64); 12] = [
    (1, 'a', 1.0),
    (1, 'b', 2.0 / 3.0),
    (1, 'c', 2.0 / 3.0),
    (1, 'd', 2.0 / 3.0),
    (2, 'c', 4.0 / 7.0),
    (2, 'd', 4.0 / 7.0),
    (2, 'e', 0.5),
    (3, 'c', 4.0 / 7.0),
    (3, 'e', 0.5),
    (4, 'd', 4.0 / 7.0),
    (4, 'e', 0.5),
    (5, 'e', 0.5),
];

/// Raw `(case, subcase)` for `a < b`, without the feasibility check.
pub fn classify_cell(a: f64, b: f64) -> (u8, Option<char>) {
    let case = if b <= 0.0 {
        1
    } else if a >= 1.0 {
        6
    } else if a <= 0.0 {
        if b <= 1.0 {
            2
        } else {
            3
        }
    } else if b <= 1.0 {
        4
    } else {
        5
    };
    if case == 6 {
        return (6, None);
    }
    let t = 0.5 * (1.0 - a);
    let (lo, hi) = (a + t, b + t);
    let sub = if hi <= 0.0 {
        'a'
    } else if lo <= 0.0 {
        if hi <= 1.0 {
            'b'
        } else {
            'c'
        }
    } else if hi <= 1.0 {
        'd'
    } else {
        'e'
    };
    (case, Some(sub))
}

fn fb_closed(case: u8, a: f64, b: f64) -> f64 {
    match case {
        1 => (1.0 - a - b) / 2.0,
        2 => (3.0 * a * a - 3.0 * a + b.powi(3) - 3.0 * b * b + 3.0 * b) / (6.0 * (b - a)),
        3 => (3.0 * a * a - 3.0 * a + 1.0) / (6.0 * (b - a)),
        4 => (a * a + a * b + b * b - 3.0 * a - 3.0 * b + 3.0) / 6.0,
        5 => (1.0 - a).powi(3) / (6.0 * (b - a)),
        _ => 0.0,
    }
}

fn gft_closed(sub: char, a: f64, b: f64) -> f64 {
    match sub {
        'a' => (1.0 - a - b) / 2.0,
        'b' => (a + b - 1.0) * (a * a - 4.0 * a * b + 10.0 * a + 4.0 * b * b - 8.0 * b + 1.0) / (24.0 * (b - a)),
        'c' => (3.0 * a - 1.0).powi(2) / (24.0 * (b - a)),
        'd' => (a + 2.0 * b - 3.0).powi(2) / 24.0,
        _ => (1.0 - a).powi(3) / (12.0 * (b - a)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseEval {
    pub a: f64,
    pub b: f64,
    pub cell: CaseCell,
    pub fb: f64,
    pub gft: f64,
    pub ratio: f64,
    /// `ratio ≥ lower_bound - 1e-9` (always true for case 6).
    pub meets_lower_bound: bool,
}

/// Closed-form FB, GFT and ratio for `F = U[0,1]`, `G = U[a,b]`.
pub fn case_eval(a: f64, b: f64) -> Result<CaseEval, InstanceError> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(InstanceError::BadFamilyParams(format!("need finite a < b, got a = {a}, b = {b}")));
    }
    let (case, sub) = classify_cell(a, b);
    let cell = match sub {
        None => CaseCell { case_id: 6, subcase: None, fb_formula: FB_FORMULAS[5], gft_formula: "0", lower_bound: None },
        Some(s) => {
            let bound = FEASIBLE_CELLS
                .iter()
                .find(|(c, x, _)| *c == case && *x == s)
                .map(|t| t.2)
                .ok_or(InstanceError::InfeasibleCell { a, b, label: format!("{case}({s})") })?;
            CaseCell {
                case_id: case,
                subcase: sub,
                fb_formula: FB_FORMULAS[case as usize - 1],
                gft_formula: GFT_FORMULAS[(s as u8 - b'a') as usize],
                lower_bound: Some(bound),
            }
        }
    };
    let fb = fb_closed(case, a, b);
    let gft = sub.map_or(0.0, |s| gft_closed(s, a, b));
    let ratio = crate::ratio(gft, fb);
    let meets_lower_bound = cell.lower_bound.is_none_or(|lb| ratio >= lb - 1e-9);
    Ok(CaseEval { a, b, cell, fb, gft, ratio, meets_lower_bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseCheck {
    pub eval: CaseEval,
    pub quad_fb: f64,
    pub quad_gft: f64,
    pub quad_ratio: f64,
    /// FB and GFT agree with quadrature within [`CASE_QUAD_TOL`].
    pub agrees: bool,
}

/// [`case_eval`] cross-checked against the optimal mechanism computed by quadrature.
pub fn case_eval_checked(a: f64, b: f64, cfg: &QuadConfig) -> Result<CaseCheck, InstanceError> {
    let eval = case_eval(a, b)?;
    let (f, g) = (Dist::uniform(0.0, 1.0)?, Dist::uniform(a, b)?);
    let m = optimal_mechanism_metrics(&f, &g, cfg)?;
    let agrees = (m.fb - eval.fb).abs() <= CASE_QUAD_TOL && (m.gft - eval.gft).abs() <= CASE_QUAD_TOL;
    Ok(CaseCheck { eval, quad_fb: m.fb, quad_gft: m.gft, quad_ratio: m.ratio, agrees })
}

/// Interval `[a, b]` attaining each cell's lower bound (in the limit `eps → 0` for 1(c), 1(d)).
pub fn witnesses(eps: f64) -> Vec<(&'static str, f64, f64)> {
    vec![
        ("1(a)", -3.0, -2.0),
        ("1(b)", -1.0, 0.0),
        ("1(c)", -1.0 - eps, 0.0),
        ("1(d)", -1.0 + eps, 0.0),
        ("2(c)", -1.0, 1.0),
        ("2(d)", 0.0, 0.5),
        ("2(e)", 0.0, 1.0),
        ("3(c)", -1.0, 2.0),
        ("3(e)", 0.0, 2.0),
        ("4(d)", 1.0 / 3.0, 2.0 / 3.0),
        ("4(e)", 0.5, 1.0),
        ("5(e)", 0.5, 1.5),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_examples() {
        let e = case_eval(0.0, 1.0).unwrap();
        assert_eq!(e.cell.label(), "2(e)");
        assert!((e.fb - 1.0 / 6.0).abs() < 1e-15 && (e.gft - 1.0 / 12.0).abs() < 1e-15);
        let e = case_eval(1.0 / 3.0, 2.0 / 3.0).unwrap();
        assert_eq!(e.cell.label(), "4(d)");
        assert!((e.fb - 7.0 / 54.0).abs() < 1e-15 && (e.gft - 2.0 / 27.0).abs() < 1e-15);
        assert!((e.ratio - 4.0 / 7.0).abs() < 1e-14);
        let e = case_eval(-3.0, -2.0).unwrap();
        assert_eq!(e.cell.label(), "1(a)");
        assert_eq!(e.ratio, 1.0);
        let e = case_eval(1.5, 2.0).unwrap();
        assert_eq!((e.cell.label().as_str(), e.fb, e.gft), ("6", 0.0, 0.0));
    }

    #[test]
    fn boundary_conventions() {
        // b = 0 is case 1; b + T = 1 is subcase (b) at a = -1
        assert_eq!(classify_cell(-1.0, 0.0), (1, Some('b')));
        assert_eq!(classify_cell(0.0, 1.0), (2, Some('e')));
        assert_eq!(classify_cell(1.0, 2.0), (6, None));
    }

    #[test]
    fn witnesses_land_in_their_cells() {
        for (label, a, b) in witnesses(1e-4) {
            assert_eq!(case_eval(a, b).unwrap().cell.label(), label);
        }
    }
}
