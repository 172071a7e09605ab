//! Conjugating maps between germs.
//!
//! A witness `phi` from `f` to `g` satisfies `phi ∘ f^t = g^t ∘ phi`, or
//! infinitesimally `phi'(x) f(x) = g(phi(x))`.
//!
//! * [`c0_conjugacy`] glues time maps `tau_g^-1 ∘ tau_f` on each side.
//! * [`rectify_regular`] straightens a non-vanishing field.
//! * [`scale_conjugacy`] relates the monomial fields `a x^k` and `b x^k`.
//! * [`c1_conjugator`] builds the map to the C¹ model of a germ.
//! * [`solve_homological`] solves the infinitesimal conjugacy equation.

mod c1;
mod homological;
mod time_map;

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::classify::ClassifyError;
use crate::expr::{EvalError, Expression};
use crate::jets::SeriesError;
use crate::quad::{self, QuadError, QuadTolerance};

pub use c1::{c1_conjugator, c1_conjugator_with};
pub use homological::{
    solve_homological, solve_homological_with, HomologicalOptions, HomologicalSolution,
    HomologicalSummary,
};
pub use time_map::{time_map, Side, TimeMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConjugacyError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("{x} is outside the witness domain ({lo}, {hi})")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("witness has no derivative (C0 only)")]
    NoDerivative,
    #[error("{which} does not vanish at 0 (value {value})")]
    NotSingular { which: &'static str, value: f64 },
    #[error("field vanishes or changes sign near {x}")]
    FieldVanishes { x: f64 },
    #[error("no admissible pairing of half-axes: f has signs {f_signs:?} and g has signs {g_signs:?} on (left, right)")]
    NoAdmissiblePairing {
        f_signs: (i8, i8),
        g_signs: (i8, i8),
    },
    #[error("base point {base} is not on the requested side")]
    BaseOffSide { base: f64 },
    #[error("{x} is not on the side of this time map")]
    OffSide { x: f64 },
    #[error("time value {target} is outside the range of the time map")]
    NotInvertible { target: f64 },
    #[error("field vanishes at 0 (value {value}); rectification needs a regular point")]
    NotRegular { value: f64 },
    #[error("hyperbolic coefficients {a} and {b} differ; they are a C1 invariant")]
    HyperbolicInvariant { a: f64, b: f64 },
    #[error("no real scaling relates {a}*x^{k} and {b}*x^{k}")]
    NoRealScaling { a: f64, b: f64, k: u32 },
    #[error("scaling needs k >= 1, got {0}")]
    InvalidOrder(u32),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unknown builtin map `{0}` (known: {known})", known = BUILTINS.join(", "))]
    UnknownBuiltin(String),
    #[error("eps must be positive and finite, got {0}")]
    InvalidEps(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Smoothness {
    C0,
    C1,
    Cinf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Preserving,
    Reversing,
}

pub type MapFn = Arc<dyn Fn(f64) -> Result<f64, ConjugacyError> + Send + Sync>;

/// A numerically evaluable conjugating map on an interval around 0.
#[derive(Clone)]
pub struct ConjugacyWitness {
    forward: MapFn,
    derivative: Option<MapFn>,
    pub domain: (f64, f64),
    pub smoothness: Smoothness,
    pub orientation: Orientation,
    pub tangent_to_identity: bool,
    /// A C¹ construction failed its numerical check at 0 and only C⁰ is claimed.
    pub downgraded: bool,
    /// `max_side |phi(h)/h - phi'(0)|` along the checked step sizes.
    pub quotient_errors: Vec<f64>,
    /// The field `g` the witness conjugates to, when known.
    pub target: Option<Expression>,
    pub label: String,
}

impl fmt::Debug for ConjugacyWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConjugacyWitness")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("smoothness", &self.smoothness)
            .field("orientation", &self.orientation)
            .field("tangent_to_identity", &self.tangent_to_identity)
            .field("downgraded", &self.downgraded)
            .field("target", &self.target.as_ref().map(|t| t.to_string()))
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessSample {
    pub x: f64,
    pub phi: f64,
    pub dphi: Option<f64>,
}

/// Serializable description of a witness (without the map itself).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSummary {
    pub label: String,
    pub domain: (f64, f64),
    pub smoothness: Smoothness,
    pub orientation: Orientation,
    pub tangent_to_identity: bool,
    pub downgraded: bool,
    pub quotient_errors: Vec<f64>,
    pub target: Option<String>,
}

impl ConjugacyWitness {
    pub fn new(
        label: impl Into<String>,
        forward: MapFn,
        domain: (f64, f64),
        smoothness: Smoothness,
        orientation: Orientation,
    ) -> Self {
        ConjugacyWitness {
            forward,
            derivative: None,
            domain,
            smoothness,
            orientation,
            tangent_to_identity: false,
            downgraded: false,
            quotient_errors: Vec::new(),
            target: None,
            label: label.into(),
        }
    }

    pub fn with_derivative(mut self, derivative: MapFn) -> Self {
        self.derivative = Some(derivative);
        self
    }

    pub fn with_target(mut self, target: Expression) -> Self {
        self.target = Some(target);
        self
    }

    pub fn tangent_to_identity(mut self, tti: bool) -> Self {
        self.tangent_to_identity = tti;
        self
    }

    pub fn identity(domain: (f64, f64)) -> Self {
        ConjugacyWitness::new(
            "identity",
            Arc::new(Ok),
            domain,
            Smoothness::Cinf,
            Orientation::Preserving,
        )
        .with_derivative(Arc::new(|_| Ok(1.0)))
        .tangent_to_identity(true)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain.0 && x <= self.domain.1
    }

    fn check(&self, x: f64) -> Result<(), ConjugacyError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(ConjugacyError::OutOfDomain {
                x,
                lo: self.domain.0,
                hi: self.domain.1,
            })
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, ConjugacyError> {
        self.check(x)?;
        (self.forward)(x)
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn eval_derivative(&self, x: f64) -> Result<f64, ConjugacyError> {
        self.check(x)?;
        match &self.derivative {
            Some(d) => d(x),
            None => Err(ConjugacyError::NoDerivative),
        }
    }

    /// `n` evenly spaced samples over the domain (or `[-1, 1]` if unbounded),
    /// skipping points where evaluation fails.
    pub fn samples(&self, n: usize) -> Vec<WitnessSample> {
        let lo = if self.domain.0.is_finite() {
            self.domain.0
        } else {
            -1.0
        };
        let hi = if self.domain.1.is_finite() {
            self.domain.1
        } else {
            1.0
        };
        let n = n.max(2);
        (0..n)
            .filter_map(|i| {
                let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                let phi = self.eval(x).ok()?;
                let dphi = self.eval_derivative(x).ok();
                Some(WitnessSample { x, phi, dphi })
            })
            .collect()
    }

    /// `x,phi,dphi` rows with a header; `dphi` is empty for C⁰ witnesses.
    pub fn to_csv(&self, n: usize) -> String {
        let mut out = String::from("x,phi,dphi\n");
        for s in self.samples(n) {
            match s.dphi {
                Some(d) => {
                    let _ = writeln!(out, "{},{},{}", s.x, s.phi, d);
                }
                None => {
                    let _ = writeln!(out, "{},{},", s.x, s.phi);
                }
            }
        }
        out
    }

    pub fn summary(&self) -> WitnessSummary {
        WitnessSummary {
            label: self.label.clone(),
            domain: self.domain,
            smoothness: self.smoothness,
            orientation: self.orientation,
            tangent_to_identity: self.tangent_to_identity,
            downgraded: self.downgraded,
            quotient_errors: self.quotient_errors.clone(),
            target: self.target.as_ref().map(|t| t.to_string()),
        }
    }

    /// Records `|phi(±h)/(±h) - phi'(0)|` for `h = h0, h0/10, h0/100` and
    /// downgrades the claim to C⁰ unless the errors decrease.
    pub(crate) fn check_c1_at_origin(&mut self, h0: f64) -> Result<(), ConjugacyError> {
        let slope = self.eval_derivative(0.0)?;
        let mut errors = Vec::with_capacity(3);
        for i in 0..3 {
            let h = h0 * 10f64.powi(-i);
            let right = (self.eval(h)? / h - slope).abs();
            let left = (self.eval(-h)? / -h - slope).abs();
            errors.push(right.max(left));
        }
        let decreasing = errors.windows(2).all(|w| w[1] <= w[0] || w[1] <= 1e-10);
        if !decreasing {
            self.downgraded = true;
            self.smoothness = Smoothness::C0;
            self.derivative = None;
        }
        self.quotient_errors = errors;
        Ok(())
    }
}

pub const BUILTINS: [&str; 4] = ["signed-square", "example2-phi", "identity", "negate"];

/// Closed-form maps used as verification baselines.
pub fn builtin(name: &str) -> Result<ConjugacyWitness, ConjugacyError> {
    let all = (f64::NEG_INFINITY, f64::INFINITY);
    let w = match name {
        "identity" => ConjugacyWitness::identity(all),
        "negate" => ConjugacyWitness::new(
            "negate",
            Arc::new(|x| Ok(-x)),
            all,
            Smoothness::Cinf,
            Orientation::Reversing,
        )
        .with_derivative(Arc::new(|_| Ok(-1.0))),
        // Conjugates x to 2x.
        "signed-square" => ConjugacyWitness::new(
            "signed-square",
            Arc::new(|x| Ok(x * x.abs())),
            all,
            Smoothness::C0,
            Orientation::Preserving,
        ),
        // Conjugates x^2 + x^3 to x^2; C¹ but not C².
        "example2-phi" => ConjugacyWitness::new(
            "example2-phi",
            Arc::new(|x: f64| {
                if x == 0.0 {
                    return Ok(0.0);
                }
                let l = x.abs().ln() - x.ln_1p();
                Ok(x / (1.0 + x * l))
            }),
            (-0.5, 0.5),
            Smoothness::C1,
            Orientation::Preserving,
        )
        .with_derivative(Arc::new(|x: f64| {
            if x == 0.0 {
                return Ok(1.0);
            }
            let d = 1.0 + x * (x.abs().ln() - x.ln_1p());
            Ok(1.0 / ((1.0 + x) * d * d))
        }))
        .with_target(Expression::polynomial(&[0.0, 0.0, 1.0]))
        .tangent_to_identity(true),
        other => return Err(ConjugacyError::UnknownBuiltin(other.to_string())),
    };
    Ok(w)
}

fn check_eps(eps: f64) -> Result<(), ConjugacyError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(ConjugacyError::InvalidEps(eps))
    }
}

/// Sign of `f` on `side * (0, eps)`, requiring it to be nonzero and constant
/// on a logarithmic sample.
pub(crate) fn side_sign(f: &Expression, side: Side, eps: f64) -> Result<i8, ConjugacyError> {
    let n = 48;
    let mut sign = 0i8;
    for i in 0..n {
        let r = (1e-8f64.ln() * (1.0 - i as f64 / (n - 1) as f64)).exp();
        let x = side.sign() * eps * r * (1.0 - 1e-9);
        let v = f.evaluate(x)?;
        if v == 0.0 {
            return Err(ConjugacyError::FieldVanishes { x });
        }
        let s: i8 = if v > 0.0 { 1 } else { -1 };
        if sign != 0 && s != sign {
            return Err(ConjugacyError::FieldVanishes { x });
        }
        sign = s;
    }
    Ok(sign)
}

/// Straightens a field with `f(0) != 0`: `psi(x) = ∫_0^x c/f` with `c = 1`
/// (conjugating to `1`) or `c = f(0)` when `tti` (conjugating to `f(0)`).
pub fn rectify_regular(
    f: &Expression,
    tti: bool,
    eps: f64,
) -> Result<ConjugacyWitness, ConjugacyError> {
    check_eps(eps)?;
    let a = f.evaluate(0.0)?;
    if a == 0.0 {
        return Err(ConjugacyError::NotRegular { value: a });
    }
    for side in [Side::Negative, Side::Positive] {
        if side_sign(f, side, eps)? as f64 != a.signum() {
            return Err(ConjugacyError::FieldVanishes {
                x: side.sign() * eps,
            });
        }
    }
    let c = if tti { a } else { 1.0 };
    let field = f.clone();
    let forward: MapFn = Arc::new(move |x| {
        let q = quad::integrate(
            |y| field.evaluate(y).map(|v| c / v),
            0.0,
            x,
            QuadTolerance::default(),
        )?;
        Ok(q.value)
    });
    let field = f.clone();
    let derivative: MapFn = Arc::new(move |x| Ok(c / field.evaluate(x)?));
    Ok(ConjugacyWitness::new(
        if tti { "rectify-tti" } else { "rectify" },
        forward,
        (-eps, eps),
        Smoothness::Cinf,
        Orientation::Preserving,
    )
    .with_derivative(derivative)
    .with_target(Expression::constant(c))
    .tangent_to_identity(tti || a == 1.0))
}

/// The linear map `psi(x) = (a/b)^(1/(1-k)) x`, which satisfies
/// `b x^k = a psi(x)^k / psi'(x)`: it carries the flow of `b x^k` onto the
/// flow of `a x^k`.
pub fn scale_conjugacy(a: f64, b: f64, k: u32) -> Result<ConjugacyWitness, ConjugacyError> {
    if k == 0 {
        return Err(ConjugacyError::InvalidOrder(k));
    }
    if a == 0.0 || b == 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(ConjugacyError::NoRealScaling { a, b, k });
    }
    let c = if k == 1 {
        if a != b {
            return Err(ConjugacyError::HyperbolicInvariant { a, b });
        }
        1.0
    } else {
        let ratio = a / b;
        let p = 1.0 / (1.0 - k as f64);
        if ratio < 0.0 {
            if k % 2 == 1 {
                return Err(ConjugacyError::NoRealScaling { a, b, k });
            }
            -(-ratio).powf(p)
        } else {
            ratio.powf(p)
        }
    };
    let all = (f64::NEG_INFINITY, f64::INFINITY);
    let orientation = if c < 0.0 {
        Orientation::Reversing
    } else {
        Orientation::Preserving
    };
    let mut target = vec![0.0; k as usize + 1];
    target[k as usize] = a;
    Ok(ConjugacyWitness::new(
        format!("scale({c})"),
        Arc::new(move |x| Ok(c * x)),
        all,
        Smoothness::Cinf,
        orientation,
    )
    .with_derivative(Arc::new(move |_| Ok(c)))
    .with_target(Expression::polynomial(&target))
    .tangent_to_identity(c == 1.0))
}

/// Topological conjugacy `tau_g^-1 ∘ tau_f` glued at 0, base points `±eps/2`.
///
/// Half-axes are paired side to side when the flows point the same way
/// relative to 0 on each side; otherwise the sides are swapped, giving an
/// orientation-reversing map.
pub fn c0_conjugacy(
    f: &Expression,
    g: &Expression,
    eps: f64,
) -> Result<ConjugacyWitness, ConjugacyError> {
    check_eps(eps)?;
    for (which, e) in [("f", f), ("g", g)] {
        let value = e.evaluate(0.0)?;
        if value.abs() > 1e-14 {
            return Err(ConjugacyError::NotSingular { which, value });
        }
    }
    let f_signs = (
        side_sign(f, Side::Negative, eps)?,
        side_sign(f, Side::Positive, eps)?,
    );
    let g_signs = (
        side_sign(g, Side::Negative, eps)?,
        side_sign(g, Side::Positive, eps)?,
    );
    let orientation = if f_signs == g_signs {
        Orientation::Preserving
    } else if f_signs.1 == -g_signs.0 && f_signs.0 == -g_signs.1 {
        Orientation::Reversing
    } else {
        return Err(ConjugacyError::NoAdmissiblePairing { f_signs, g_signs });
    };
    let base = 0.5 * eps;
    let tf_neg = time_map(f, -base, Side::Negative)?;
    let tf_pos = time_map(f, base, Side::Positive)?;
    let tg_neg = time_map(g, -base, Side::Negative)?;
    let tg_pos = time_map(g, base, Side::Positive)?;
    let (to_neg, to_pos) = match orientation {
        Orientation::Preserving => (tg_neg, tg_pos),
        Orientation::Reversing => (tg_pos, tg_neg),
    };
    let forward: MapFn = Arc::new(move |x| {
        if x == 0.0 {
            Ok(0.0)
        } else if x > 0.0 {
            to_pos.inverse(tf_pos.eval(x)?)
        } else {
            to_neg.inverse(tf_neg.eval(x)?)
        }
    });
    let label = match orientation {
        Orientation::Preserving => "time-map",
        Orientation::Reversing => "time-map-reversing",
    };
    Ok(
        ConjugacyWitness::new(label, forward, (-eps, eps), Smoothness::C0, orientation)
            .with_target(g.clone()),
    )
}
