//! One-dimensional flows `x' = f(x)`.
//!
//! [`flow`] integrates with an embedded Dormand–Prince 5(4) pair and reports
//! finite-time escape; [`model_flow`] gives the closed forms of the model
//! fields; [`verify_conjugacy`] checks `phi(f^t(x)) = g^t(phi(x))` on a grid.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::conjugacy::ConjugacyWitness;
use crate::expr::{EvalError, Expression};

pub const X_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    pub x_max: f64,
    /// Step-size floor; hitting it is an error, not a silent degradation.
    pub h_min: f64,
    pub max_steps: usize,
    /// Optional open interval the trajectory must stay in.
    pub domain: Option<(f64, f64)>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            rtol: 1e-10,
            atol: 1e-12,
            x_max: X_MAX,
            h_min: 1e-14,
            max_steps: 200_000,
            domain: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FlowStatus {
    Ok,
    Blowup { t_escape: f64 },
    LeftDomain { t_exit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowResult {
    pub value: f64,
    #[serde(flatten)]
    pub status: FlowStatus,
}

impl FlowResult {
    pub fn ok(&self) -> Option<f64> {
        matches!(self.status, FlowStatus::Ok).then_some(self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("initial value {0} exceeds the escape bound")]
    InitialOutOfRange(f64),
    #[error("step size fell below {h_min} at t = {t}, x = {x}")]
    StepSizeUnderflow { t: f64, x: f64, h_min: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("closed-form flow undefined: 1 - (k-1) b t x0^(k-1) = {0} <= 0")]
    ModelBlowup(f64),
    #[error("every grid point was skipped")]
    AllSkipped,
}

/// `f^t(x0)` with default tolerances.
pub fn flow(f: &Expression, x0: f64, t: f64) -> Result<FlowResult, FlowError> {
    flow_with(f, x0, t, &FlowOptions::default())
}

pub fn flow_with(
    f: &Expression,
    x0: f64,
    t: f64,
    opts: &FlowOptions,
) -> Result<FlowResult, FlowError> {
    integrate_field(|x| f.evaluate(x), x0, t, opts)
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Step {
    y: f64,
    dy: f64,
    err: f64,
}

fn dp_step<F>(field: &F, y: f64, k1: f64, h: f64) -> Result<Step, EvalError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let mut k = [k1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    for s in 0..6 {
        let incr: f64 = (0..=s).map(|j| A[s][j] * k[j]).sum();
        k[s + 1] = field(y + h * incr)?;
    }
    let y_new = y + h * (0..6).map(|j| A[5][j] * k[j]).sum::<f64>();
    let err = h * (0..7).map(|j| E[j] * k[j]).sum::<f64>();
    Ok(Step {
        y: y_new,
        dy: k[6],
        err: err.abs(),
    })
}

/// Integrates `x' = field(x)` from `x0` over time `t` (either sign).
pub fn integrate_field<F>(
    field: F,
    x0: f64,
    t: f64,
    opts: &FlowOptions,
) -> Result<FlowResult, FlowError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    if x0.is_nan() || x0.abs() > opts.x_max {
        return Err(FlowError::InitialOutOfRange(x0));
    }
    let direction = if t < 0.0 { -1.0 } else { 1.0 };
    let duration = t.abs();
    // Negative time runs the reversed field forward.
    let rhs = |x: f64| field(x).map(|v| direction * v);

    let mut y = x0;
    let mut dy = rhs(y)?;
    if dy == 0.0 || duration == 0.0 {
        return Ok(FlowResult {
            value: y,
            status: FlowStatus::Ok,
        });
    }
    let mut elapsed = 0.0_f64;
    let scale0 = opts.atol + opts.rtol * y.abs();
    let mut h = (0.01 * (y.abs() / scale0).max(1.0) * scale0 / dy.abs())
        .max(1e-6)
        .min(duration);
    let mut steps = 0;
    while elapsed < duration {
        steps += 1;
        if steps > opts.max_steps {
            return Err(FlowError::TooManySteps {
                t: direction * elapsed,
            });
        }
        let remaining = duration - elapsed;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let step = match dp_step(&rhs, y, dy, h) {
            Ok(s) if s.y.is_finite() && s.dy.is_finite() => Ok(s),
            Ok(_) => Err(None),
            Err(e) => Err(Some(e)),
        };
        let escape_floor = opts.h_min.max(4.0 * f64::EPSILON * elapsed);
        let step = match step {
            Ok(s) => s,
            Err(cause) => {
                // Stage left the field's domain or overflowed: retry shorter.
                if h <= escape_floor {
                    return match cause {
                        Some(e) => Err(FlowError::Eval(e)),
                        None => Ok(FlowResult {
                            value: y,
                            status: FlowStatus::Blowup {
                                t_escape: direction * (elapsed + h),
                            },
                        }),
                    };
                }
                h *= 0.5;
                continue;
            }
        };
        let tol = opts.atol + opts.rtol * y.abs().max(step.y.abs());
        let ratio = step.err / tol;
        if ratio > 1.0 {
            let shrink = (0.9 * ratio.powf(-0.2)).max(0.2);
            h *= shrink;
            if h < opts.h_min {
                return Err(FlowError::StepSizeUnderflow {
                    t: direction * elapsed,
                    x: y,
                    h_min: opts.h_min,
                });
            }
            continue;
        }
        if step.y.abs() > opts.x_max {
            // Bisect the step onto the escape time.
            if h <= escape_floor {
                return Ok(FlowResult {
                    value: step.y,
                    status: FlowStatus::Blowup {
                        t_escape: direction * (elapsed + h),
                    },
                });
            }
            h *= 0.5;
            continue;
        }
        elapsed = if last { duration } else { elapsed + h };
        y = step.y;
        dy = step.dy;
        if let Some((lo, hi)) = opts.domain {
            if !(y > lo && y < hi) {
                return Ok(FlowResult {
                    value: y,
                    status: FlowStatus::LeftDomain {
                        t_exit: direction * elapsed,
                    },
                });
            }
        }
        let grow = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= grow;
    }
    Ok(FlowResult {
        value: y,
        status: FlowStatus::Ok,
    })
}

/// The closed-form model fields `a x` and `b x^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelField {
    Linear { a: f64 },
    Power { coeff: f64, k: u32 },
}

impl ModelField {
    pub fn expression(&self) -> Expression {
        match *self {
            ModelField::Linear { a } => Expression::polynomial(&[0.0, a]),
            ModelField::Power { coeff, k } => {
                let mut c = vec![0.0; k as usize + 1];
                c[k as usize] = coeff;
                Expression::polynomial(&c)
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ModelField::Linear { a } => a * x,
            ModelField::Power { coeff, k } => coeff * x.powi(k as i32),
        }
    }
}

/// Closed-form flow: `x0 e^(a t)` or `x0 (1 - (k-1) b t x0^(k-1))^(-1/(k-1))`.
pub fn model_flow(model: ModelField, x0: f64, t: f64) -> Result<f64, FlowError> {
    match model {
        ModelField::Linear { a } => Ok(x0 * (a * t).exp()),
        ModelField::Power { coeff, k } => {
            if k == 0 {
                return Ok(x0 + coeff * t);
            }
            if k == 1 {
                return Ok(x0 * (coeff * t).exp());
            }
            let m = (k - 1) as f64;
            let base = 1.0 - m * coeff * t * x0.powi(k as i32 - 1);
            if base <= 0.0 {
                return Err(FlowError::ModelBlowup(base));
            }
            Ok(x0 * base.powf(-1.0 / m))
        }
    }
}

/// Sampling plan for [`verify_conjugacy`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

impl VerifyGrid {
    pub fn uniform(x_range: (f64, f64), nx: usize, t_range: (f64, f64), nt: usize) -> Self {
        VerifyGrid {
            xs: linspace(x_range.0, x_range.1, nx),
            ts: linspace(t_range.0, t_range.1, nt),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub max_residual: f64,
    pub evaluated: usize,
    pub skipped: usize,
    #[serde(skip)]
    pub samples: Vec<(f64, f64, f64)>,
}

impl VerifyReport {
    /// `x,t,residual` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,t,residual\n");
        for (x, t, r) in &self.samples {
            let _ = writeln!(out, "{x},{t},{r}");
        }
        out
    }
}

/// Max over the grid of `|phi(f^t(x)) - g^t(phi(x))|`.
///
/// Points outside the witness domain, or whose flows escape or leave the
/// domain, are skipped and counted.
pub fn verify_conjugacy(
    f: &Expression,
    g: &Expression,
    witness: &ConjugacyWitness,
    grid: &VerifyGrid,
) -> Result<VerifyReport, FlowError> {
    let opts = FlowOptions::default();
    let points: Vec<(f64, f64)> = grid
        .xs
        .iter()
        .flat_map(|&x| grid.ts.iter().map(move |&t| (x, t)))
        .collect();
    let results: Vec<Option<(f64, f64, f64)>> = points
        .par_iter()
        .map(|&(x, t)| {
            if !witness.contains(x) {
                return None;
            }
            let phi_x = witness.eval(x).ok()?;
            let fx = flow_with(f, x, t, &opts).ok()?.ok()?;
            if !witness.contains(fx) {
                return None;
            }
            let lhs = witness.eval(fx).ok()?;
            let rhs = flow_with(g, phi_x, t, &opts).ok()?.ok()?;
            Some((x, t, (lhs - rhs).abs()))
        })
        .collect();
    let samples: Vec<(f64, f64, f64)> = results.iter().flatten().copied().collect();
    if samples.is_empty() {
        return Err(FlowError::AllSkipped);
    }
    Ok(VerifyReport {
        max_residual: samples.iter().fold(0.0, |m, s| m.max(s.2)),
        evaluated: samples.len(),
        skipped: results.len() - samples.len(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Expression {
        Expression::parse(text).unwrap()
    }

    #[test]
    fn linear_flow() {
        let r = flow(&parse("x"), 1.0, 1.0).unwrap();
        assert_eq!(r.status, FlowStatus::Ok);
        assert!((r.value - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn quadratic_flow_and_escape() {
        let r = flow(&parse("x^2"), 1.0, 0.5).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
        match flow(&parse("x^2"), 1.0, 1.5).unwrap().status {
            FlowStatus::Blowup { t_escape } => assert!((t_escape - 1.0).abs() < 1e-5, "{t_escape}"),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn backward_escape_has_negative_time() {
        match flow(&parse("x^2"), -1.0, -2.0).unwrap().status {
            FlowStatus::Blowup { t_escape } => assert!((t_escape + 1.0).abs() < 1e-5),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn fixed_points_stay_put() {
        for t in [-3.0, 0.7, 10.0] {
            assert_eq!(flow(&parse("x^2 - x"), 0.0, t).unwrap().value, 0.0);
        }
    }

    #[test]
    fn domain_errors_propagate() {
        // x' = -1/x reaches 0 at t = 1/2 from x0 = 1 and leaves the domain of 1/x.
        let err = flow(&parse("-1/x"), 1.0, 1.0);
        assert!(err.is_err(), "{err:?}");
    }

    #[test]
    fn leaving_a_domain_is_reported() {
        let opts = FlowOptions {
            domain: Some((-1.0, 1.0)),
            ..FlowOptions::default()
        };
        let r = flow_with(&parse("x"), 0.5, 2.0, &opts).unwrap();
        assert!(matches!(r.status, FlowStatus::LeftDomain { .. }));
    }

    #[test]
    fn model_flow_examples() {
        let v = model_flow(ModelField::Linear { a: -1.0 }, 2.0, 2f64.ln()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let p2 = ModelField::Power { coeff: 1.0, k: 2 };
        assert!((model_flow(p2, 1.0, 0.5).unwrap() - 2.0).abs() < 1e-15);
        let p3 = ModelField::Power { coeff: 1.0, k: 3 };
        assert!((model_flow(p3, 1.0, 0.375).unwrap() - 2.0).abs() < 1e-15);
        let numeric = flow(&p3.expression(), 1.0, 0.375).unwrap().value;
        assert!((numeric - 2.0).abs() < 1e-8);
        assert!(matches!(
            model_flow(p2, 1.0, 1.0),
            Err(FlowError::ModelBlowup(_))
        ));
    }
}
