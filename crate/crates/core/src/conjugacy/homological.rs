//! The homological equation `-X' f + X f' = f g + f' k` for `g ∈ m`, `k ∈ m²`.
//!
//! The solution is `X = k - f I` with `I(x) = ∫ (g + k')/f` taken from the
//! origin. When that improper integral diverges (degenerate `f`), it is taken
//! from a base point on each side instead; the two choices differ by a
//! multiple of `f` on each side, which the operator annihilates.

use serde::Serialize;

use crate::expr::{BinOp, Expression, Node};
use crate::jets;
use crate::quad::{self, QuadTolerance};

use super::ConjugacyError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomologicalOptions {
    /// Half-width of the neighborhood where the solution is built and checked.
    pub radius: f64,
    pub tol: QuadTolerance,
    /// Grid points per side for the residual estimate.
    pub grid: usize,
}

impl Default for HomologicalOptions {
    fn default() -> Self {
        HomologicalOptions {
            radius: 0.5,
            tol: QuadTolerance::default(),
            grid: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HomologicalSolution {
    f: Expression,
    df: Expression,
    g: Expression,
    k: Expression,
    integrand: Expression,
    /// Lower limits of `I` on the negative and positive side (0 when the
    /// integral converges at the origin).
    lower_limits: (f64, f64),
    pub radius: f64,
    /// Max of `|-X' f + X f' - f g - f' k|` on the check grid, with `X'`
    /// from finite differences.
    pub residual_bound: f64,
    /// The integral diverged at the origin; the solution is one member of
    /// the family `X + c f` (with `c` chosen per side).
    pub kernel_note: bool,
    tol: QuadTolerance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomologicalSummary {
    pub residual_bound: f64,
    pub kernel_note: bool,
    pub radius: f64,
    pub lower_limits: (f64, f64),
}

fn check_jet(e: &Expression, below: usize, what: &str) -> Result<(), ConjugacyError> {
    let s = jets::taylor(e, below.max(2))?;
    let scale = s.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
    for i in 0..below {
        if s.coeff(i).abs() > jets::DEFAULT_ZERO_TOL * scale {
            return Err(ConjugacyError::Precondition(format!(
                "{what} must vanish to order {below} at 0, but its coefficient of x^{i} is {}",
                s.coeff(i)
            )));
        }
    }
    Ok(())
}

pub fn solve_homological(
    f: &Expression,
    g: &Expression,
    k: &Expression,
) -> Result<HomologicalSolution, ConjugacyError> {
    solve_homological_with(f, g, k, &HomologicalOptions::default())
}

pub fn solve_homological_with(
    f: &Expression,
    g: &Expression,
    k: &Expression,
    opts: &HomologicalOptions,
) -> Result<HomologicalSolution, ConjugacyError> {
    if !(opts.radius > 0.0 && opts.radius.is_finite()) {
        return Err(ConjugacyError::Precondition(format!(
            "radius must be positive, got {}",
            opts.radius
        )));
    }
    check_jet(g, 1, "g")?;
    check_jet(k, 2, "k")?;
    let f_jet = jets::taylor(f, jets::default_truncation(8))?;
    let nonzero_jet = f_jet.coeffs().iter().any(|&c| c != 0.0);
    let nonzero_sample = (1..=8).any(|i| {
        let x = opts.radius * i as f64 / 8.0;
        matches!(f.evaluate(x), Ok(v) if v != 0.0) || matches!(f.evaluate(-x), Ok(v) if v != 0.0)
    });
    if !nonzero_jet && !nonzero_sample {
        return Err(ConjugacyError::Precondition(
            "f vanishes identically".into(),
        ));
    }
    let dk = k.derivative();
    let numerator = Node::Binary(
        BinOp::Add,
        Box::new(g.root().clone()),
        Box::new(dk.root().clone()),
    );
    let integrand = Expression::from_node(Node::Binary(
        BinOp::Div,
        Box::new(numerator),
        Box::new(f.root().clone()),
    ));
    let mut solution = HomologicalSolution {
        f: f.clone(),
        df: f.derivative(),
        g: g.clone(),
        k: k.clone(),
        integrand,
        lower_limits: (0.0, 0.0),
        radius: opts.radius,
        residual_bound: 0.0,
        kernel_note: false,
        tol: opts.tol,
    };
    let half = 0.5 * opts.radius;
    let negative = if solution.converges_at_origin(-half)? {
        0.0
    } else {
        -half
    };
    let positive = if solution.converges_at_origin(half)? {
        0.0
    } else {
        half
    };
    solution.lower_limits = (negative, positive);
    solution.kernel_note = negative != 0.0 || positive != 0.0;
    solution.residual_bound = solution.estimate_residual(opts.grid)?;
    Ok(solution)
}

impl HomologicalSolution {
    fn integrate(&self, a: f64, b: f64) -> Result<f64, ConjugacyError> {
        let q = quad::integrate(|y| self.integrand.evaluate(y), a, b, self.tol)?;
        Ok(q.value)
    }

    // Cauchy test on lower limits 1e-4, 1e-6, 1e-8 towards the origin.
    fn converges_at_origin(&self, end: f64) -> Result<bool, ConjugacyError> {
        let s = end.signum();
        let mut values = [0.0; 3];
        for (v, l) in values.iter_mut().zip([1e-4, 1e-6, 1e-8]) {
            *v = match self.integrate(s * l, end) {
                Ok(v) => v,
                Err(ConjugacyError::Quad(_)) => return Ok(false),
                Err(e) => return Err(e),
            };
        }
        let first = (values[1] - values[0]).abs();
        let second = (values[2] - values[1]).abs();
        let negligible = 1e-10 * (1.0 + values[0].abs());
        Ok(second <= 0.1 * first || (first <= negligible && second <= negligible))
    }

    fn lower_limit(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.lower_limits.0
        } else {
            self.lower_limits.1
        }
    }

    fn integral_to(&self, x: f64) -> Result<f64, ConjugacyError> {
        self.integrate(self.lower_limit(x), x)
    }

    pub fn eval(&self, x: f64) -> Result<f64, ConjugacyError> {
        if x == 0.0 {
            return Ok(0.0);
        }
        let i = self.integral_to(x)?;
        Ok(self.k.evaluate(x)? - self.f.evaluate(x)? * i)
    }

    /// `X' = -f' I - g`.
    pub fn eval_derivative(&self, x: f64) -> Result<f64, ConjugacyError> {
        if x == 0.0 {
            return Ok(0.0);
        }
        let i = self.integral_to(x)?;
        Ok(-self.df.evaluate(x)? * i - self.g.evaluate(x)?)
    }

    /// `|-X' f + X f' - f g - f' k|` at `x`, with `X'` from a five-point
    /// stencil of width `h`.
    pub fn residual_at(&self, x: f64, h: f64) -> Result<f64, ConjugacyError> {
        if x == 0.0 || h <= 0.0 || 2.0 * h >= x.abs() {
            return Err(ConjugacyError::Precondition(format!(
                "stencil at {x} with width {h} would cross the origin"
            )));
        }
        let base = self.integral_to(x)?;
        let value_at = |y: f64| -> Result<f64, ConjugacyError> {
            let i = base + self.integrate(x, y)?;
            Ok(self.k.evaluate(y)? - self.f.evaluate(y)? * i)
        };
        let dx = (-value_at(x + 2.0 * h)? + 8.0 * value_at(x + h)? - 8.0 * value_at(x - h)?
            + value_at(x - 2.0 * h)?)
            / (12.0 * h);
        let xv = self.k.evaluate(x)? - self.f.evaluate(x)? * base;
        let (f, df) = (self.f.evaluate(x)?, self.df.evaluate(x)?);
        let rhs = f * self.g.evaluate(x)? + df * self.k.evaluate(x)?;
        Ok((-dx * f + xv * df - rhs).abs())
    }

    fn estimate_residual(&self, n: usize) -> Result<f64, ConjugacyError> {
        let n = n.max(2);
        let mut worst = 0.0f64;
        for side in [-1.0, 1.0] {
            for i in 0..n {
                let x = side * self.radius * (0.05 + 0.95 * i as f64 / (n - 1) as f64);
                worst = worst.max(self.residual_at(x, 2e-3 * x.abs())?);
            }
        }
        Ok(worst)
    }

    pub fn summary(&self) -> HomologicalSummary {
        HomologicalSummary {
            residual_bound: self.residual_bound,
            kernel_note: self.kernel_note,
            radius: self.radius,
            lower_limits: self.lower_limits,
        }
    }
}
