//! Conjugation of a finitely determined germ to its C¹ model.
//!
//! For `f` of order `k ≥ 1` write `1/f = Σ w_j x^(j-k)`. Its canonical
//! antiderivative
//!
//! `T_f(x) = Σ_{j<k-1} w_j x^(j-k+1)/(j-k+1) + w_{k-1} log|x| + ∫_0^x R`,
//!
//! with `R` the regular part of `1/f`, satisfies `T_f(f^t(x)) = T_f(x) + t`.
//! The model `a x^k` has `T(y) = y^(1-k)/(a(1-k))` (or `log|y|/a` for `k = 1`)
//! with the same singular leading term, so `phi = T_model^-1 ∘ T_f` is tangent
//! to the identity on each side and glues to a C¹ map at 0.

use std::sync::Arc;

use crate::classify::{classify_germ, ClassifyOptions, GermKind};
use crate::expr::Expression;
use crate::jets::{self, TruncatedSeries};
use crate::quad::{self, QuadTolerance};

use super::{
    rectify_regular, scale_conjugacy, side_sign, ConjugacyError, ConjugacyWitness, MapFn,
    Orientation, Side, Smoothness,
};

// Terms of the regular part kept in the series near 0.
const REGULAR_TERMS: usize = 40;

#[derive(Debug)]
struct CanonicalTime {
    field: Expression,
    k: usize,
    /// Coefficients `w_0 .. w_{k-1}` of the principal part of `1/f`.
    principal: Vec<f64>,
    /// `∫_0^x R` as a series.
    regular: TruncatedSeries,
    /// Radius below which the series is used.
    delta: f64,
    /// `∫_0^{±delta} R`.
    at_delta: (f64, f64),
}

impl CanonicalTime {
    fn new(f: &Expression, k: usize, eps: f64) -> Result<CanonicalTime, ConjugacyError> {
        let s = jets::taylor(f, k + REGULAR_TERMS)?;
        let w = s.shift_down(k)?.reciprocal()?;
        let principal = w.coeffs()[..k].to_vec();
        let mut regular = vec![0.0; REGULAR_TERMS + 1];
        for j in k..=w.order() {
            let p = j - k + 1;
            if p <= REGULAR_TERMS {
                regular[p] = w.coeff(j) / p as f64;
            }
        }
        let regular = TruncatedSeries::from_polynomial(&regular, REGULAR_TERMS);
        // Root test on the tail of w for its radius of convergence.
        let lo = (w.order() - k) / 2;
        let inv_radius = (lo.max(1)..=w.order() - k)
            .filter(|&m| w.coeff(k + m) != 0.0)
            .map(|m| w.coeff(k + m).abs().powf(1.0 / m as f64))
            .fold(0.0f64, f64::max);
        let radius = if inv_radius > 0.0 {
            1.0 / inv_radius
        } else {
            f64::INFINITY
        };
        let delta = (0.5 * eps).min(0.25 * radius);
        let at_delta = (regular.eval(-delta), regular.eval(delta));
        Ok(CanonicalTime {
            field: f.clone(),
            k,
            principal,
            regular,
            delta,
            at_delta,
        })
    }

    fn principal_part(&self, y: f64) -> f64 {
        let k = self.k as i32;
        self.principal
            .iter()
            .enumerate()
            .map(|(j, w)| w * y.powi(j as i32 - k))
            .sum()
    }

    fn eval(&self, x: f64) -> Result<f64, ConjugacyError> {
        let k = self.k as i32;
        let mut singular = self.principal[self.k - 1] * x.abs().ln();
        for (j, w) in self.principal[..self.k - 1].iter().enumerate() {
            let p = j as i32 - k + 1;
            singular += w * x.powi(p) / p as f64;
        }
        let regular = if x.abs() <= self.delta {
            self.regular.eval(x)
        } else {
            let (start, value) = if x > 0.0 {
                (self.delta, self.at_delta.1)
            } else {
                (-self.delta, self.at_delta.0)
            };
            let q = quad::integrate(
                |y| {
                    self.field
                        .evaluate(y)
                        .map(|v| 1.0 / v - self.principal_part(y))
                },
                start,
                x,
                QuadTolerance::default(),
            )?;
            value + q.value
        };
        Ok(singular + regular)
    }
}

/// The time function of the model `a x^k` and its inverse on each side.
#[derive(Debug, Clone, Copy)]
struct ModelTime {
    a: f64,
    k: usize,
}

impl ModelTime {
    fn field(&self, y: f64) -> f64 {
        self.a * y.powi(self.k as i32)
    }

    fn inverse(&self, t: f64, side: Side) -> Result<f64, ConjugacyError> {
        let s = side.sign();
        let y = if self.k == 1 {
            s * (self.a * t).exp()
        } else {
            let one_minus_k = 1.0 - self.k as f64;
            // |y|^(1-k) = a (1-k) s^(k-1) t
            let base = self.a * one_minus_k * s.powi(self.k as i32 - 1) * t;
            if base <= 0.0 || !base.is_finite() {
                return Err(ConjugacyError::NotInvertible { target: t });
            }
            s * base.powf(1.0 / one_minus_k)
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(ConjugacyError::NotInvertible { target: t })
        }
    }
}

fn monomial(c: f64, k: usize) -> Expression {
    let mut coeffs = vec![0.0; k + 1];
    coeffs[k] = c;
    Expression::polynomial(&coeffs)
}

/// C¹ conjugacy from `f` to its model: the constant `1` or `f(0)` for
/// regular germs, `a x` for hyperbolic ones, and `a x^k` (`tti`) or
/// `±x^k` for degenerate ones.
pub fn c1_conjugator(
    f: &Expression,
    eps: f64,
    tti: bool,
) -> Result<ConjugacyWitness, ConjugacyError> {
    c1_conjugator_with(f, eps, tti, &ClassifyOptions::default())
}

pub fn c1_conjugator_with(
    f: &Expression,
    eps: f64,
    tti: bool,
    opts: &ClassifyOptions,
) -> Result<ConjugacyWitness, ConjugacyError> {
    super::check_eps(eps)?;
    let c = classify_germ(f, opts)?;
    match c.kind {
        GermKind::Flat => {
            return Err(
                crate::classify::ClassifyError::NotFinitelyDetermined { kind: c.kind }.into(),
            )
        }
        GermKind::Regular => return rectify_regular(f, tti, eps),
        GermKind::Hyperbolic | GermKind::Degenerate => {}
    }
    let (k, a) = (c.k, c.a);
    for side in [Side::Negative, Side::Positive] {
        side_sign(f, side, eps)?;
    }
    // Final linear change y -> scale*y from a x^k to the monic model.
    let (scale, target) = if tti || k == 1 || (a - c.sign as f64) == 0.0 {
        (1.0, monomial(a, k))
    } else {
        let s = scale_conjugacy(c.sign as f64, a, k as u32)?;
        (s.eval(1.0)?, monomial(c.sign as f64, k))
    };
    let time = Arc::new(CanonicalTime::new(f, k, eps)?);
    let model = ModelTime { a, k };
    let forward: MapFn = {
        let time = Arc::clone(&time);
        Arc::new(move |x| {
            if x == 0.0 {
                return Ok(0.0);
            }
            Ok(scale * model.inverse(time.eval(x)?, Side::of(x))?)
        })
    };
    let derivative: MapFn = {
        let field = f.clone();
        let forward = Arc::clone(&forward);
        Arc::new(move |x| {
            if x == 0.0 {
                return Ok(scale);
            }
            let y = forward(x)? / scale;
            Ok(scale * model.field(y) / field.evaluate(x)?)
        })
    };
    let orientation = if scale < 0.0 {
        Orientation::Reversing
    } else {
        Orientation::Preserving
    };
    let mut w = ConjugacyWitness::new(
        if tti {
            "time-function-tti"
        } else {
            "time-function"
        },
        forward,
        (-eps, eps),
        Smoothness::C1,
        orientation,
    )
    .with_derivative(derivative)
    .with_target(target)
    .tangent_to_identity(scale == 1.0);
    w.check_c1_at_origin((1e-2f64).min(0.25 * eps))?;
    Ok(w)
}
