//! Real equilibria of polynomial fields on a window.
//!
//! Roots are isolated by splitting the window at the real critical points,
//! found recursively from the derivative. On each piece the polynomial is
//! monotone, so a sign change brackets exactly one root; a critical point
//! where the polynomial (nearly) vanishes is a multiple root.

use serde::Serialize;

use super::UnfoldError;

/// Multiplicity tolerance relative to the largest coefficient.
pub const MULTIPLICITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Attracting,
    Repelling,
    SemiStable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Attracting => "attracting",
            Stability::Repelling => "repelling",
            Stability::SemiStable => "semi-stable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub location: f64,
    pub multiplicity: usize,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub params: Vec<f64>,
    pub equilibria: Vec<Equilibrium>,
    pub window: (f64, f64),
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

// Bound on the rounding error of evaluating p at x.
fn eval_scale(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x.abs() + c.abs())
}

fn derivative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| i as f64 * c)
        .collect()
}

fn trim(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    while v.last() == Some(&0.0) {
        v.pop();
    }
    v
}

fn bisect(p: &[f64], mut lo: f64, mut hi: f64, mut p_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * mid.abs().max(1e-300) {
            break;
        }
        let pm = horner(p, mid);
        if pm == 0.0 {
            return mid;
        }
        if (pm > 0.0) == (p_lo > 0.0) {
            lo = mid;
            p_lo = pm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Distinct real roots of `p` in `[lo, hi]`, sorted.
fn distinct_roots(p: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let p = trim(p);
    match p.len() {
        0 | 1 => return Vec::new(),
        2 => {
            let r = -p[0] / p[1];
            return if (lo..=hi).contains(&r) {
                vec![r]
            } else {
                Vec::new()
            };
        }
        _ => {}
    }
    if p[0] == 0.0 && lo <= 0.0 && hi >= 0.0 {
        // Exact root at the origin: deflate so it is reported as exactly 0.
        let mut roots: Vec<f64> = distinct_roots(&p[1..], lo, hi)
            .into_iter()
            .filter(|&r| r != 0.0)
            .collect();
        let at = roots.partition_point(|&r| r < 0.0);
        roots.insert(at, 0.0);
        return roots;
    }
    let mut points = vec![lo];
    points.extend(
        distinct_roots(&derivative(&p), lo, hi)
            .into_iter()
            .filter(|&c| c > lo && c < hi),
    );
    points.push(hi);
    // Values with near-zeros at the break points snapped to 0.
    let values: Vec<f64> = points
        .iter()
        .map(|&x| {
            let v = horner(&p, x);
            if v.abs() <= 1e-10 * eval_scale(&p, x) {
                0.0
            } else {
                v
            }
        })
        .collect();
    let mut roots = Vec::new();
    for i in 0..points.len() {
        if values[i] == 0.0 {
            roots.push(points[i]);
        }
        if i + 1 < points.len()
            && values[i] != 0.0
            && values[i + 1] != 0.0
            && (values[i] > 0.0) != (values[i + 1] > 0.0)
        {
            roots.push(bisect(&p, points[i], points[i + 1], values[i]));
        }
    }
    roots
}

/// Order of the first derivative of `p` at `x` that is not negligible, with its value.
fn multiplicity(p: &[f64], x: f64) -> (usize, f64) {
    let tol = MULTIPLICITY_TOL * p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut d = derivative(p);
    let mut m = 1;
    loop {
        let v = horner(&d, x);
        if v.abs() > tol || d.len() <= 1 {
            return (m, v);
        }
        d = derivative(&d);
        m += 1;
    }
}

/// Equilibria of the field `Σ p_i x^i` in the closed window.
pub fn equilibria(p: &[f64], window: (f64, f64)) -> Result<EquilibriumReport, UnfoldError> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(UnfoldError::BadWindow { lo, hi });
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(UnfoldError::NonFiniteCoefficient);
    }
    let p = trim(p);
    if p.is_empty() {
        return Err(UnfoldError::ZeroPolynomial);
    }
    let equilibria = distinct_roots(&p, lo, hi)
        .into_iter()
        .map(|location| {
            let (multiplicity, leading) = multiplicity(&p, location);
            let stability = if multiplicity % 2 == 0 {
                Stability::SemiStable
            } else if leading > 0.0 {
                Stability::Repelling
            } else {
                Stability::Attracting
            };
            Equilibrium {
                location: location + 0.0,
                multiplicity,
                stability,
            }
        })
        .collect();
    Ok(EquilibriumReport {
        params: Vec::new(),
        equilibria,
        window,
    })
}
