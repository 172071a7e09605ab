//! Time maps `tau(x) = ∫_base^x dy / f(y)` on one side of the origin.

use serde::Serialize;

use crate::expr::Expression;
use crate::quad::{self, QuadTolerance};

use super::ConjugacyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    pub fn of(x: f64) -> Side {
        if x < 0.0 {
            Side::Negative
        } else {
            Side::Positive
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Side::Positive => 1.0,
            Side::Negative => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Positive => Side::Negative,
            Side::Negative => Side::Positive,
        }
    }
}

const TABLE_DEPTH: usize = 40;

/// A point `x` with its time value `tau(x)`.
type Knot = (f64, f64);
const NEWTON_TOL: f64 = 1e-12;

/// Antiderivative of `1/f` on one side, with a precomputed table of values at
/// the dyadic points `base * 2^-j` used for bracketing and as anchors.
#[derive(Debug, Clone)]
pub struct TimeMap {
    field: Expression,
    base: f64,
    side: Side,
    /// `(x, tau(x))` with `|x|` decreasing from `|base|`.
    table: Vec<Knot>,
    /// Sign of `f` on this side.
    field_sign: f64,
    tol: QuadTolerance,
}

/// Builds the time map of `f` anchored at `base`, which must lie on `side`.
pub fn time_map(f: &Expression, base: f64, side: Side) -> Result<TimeMap, ConjugacyError> {
    TimeMap::new(f, base, side, QuadTolerance::default())
}

impl TimeMap {
    pub fn new(
        f: &Expression,
        base: f64,
        side: Side,
        tol: QuadTolerance,
    ) -> Result<TimeMap, ConjugacyError> {
        if !base.is_finite() || base == 0.0 || Side::of(base) != side {
            return Err(ConjugacyError::BaseOffSide { base });
        }
        let at_base = f.evaluate(base)?;
        if at_base == 0.0 {
            return Err(ConjugacyError::FieldVanishes { x: base });
        }
        let mut map = TimeMap {
            field: f.clone(),
            base,
            side,
            table: vec![(base, 0.0)],
            field_sign: at_base.signum(),
            tol,
        };
        for j in 1..=TABLE_DEPTH {
            let (x_prev, tau_prev) = *map.table.last().expect("table starts at base");
            let x = base * 0.5f64.powi(j as i32);
            match map.integral(x_prev, x) {
                Ok(v) if (tau_prev + v).is_finite() => map.table.push((x, tau_prev + v)),
                // Near the origin 1/f may overflow; the table just stops there.
                _ if j > 1 => break,
                Err(e) => return Err(e),
                Ok(_) => return Err(ConjugacyError::FieldVanishes { x }),
            }
        }
        Ok(map)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn field(&self) -> &Expression {
        &self.field
    }

    /// `∫_a^b dy/f(y)`, both ends on this side.
    fn integral(&self, a: f64, b: f64) -> Result<f64, ConjugacyError> {
        let sign = self.field_sign;
        let q = quad::integrate(
            |y| match self.field.evaluate(y) {
                Ok(v) if v != 0.0 && v.signum() == sign => Ok(1.0 / v),
                Ok(_) => Err(ConjugacyError::FieldVanishes { x: y }),
                Err(e) => Err(e.into()),
            },
            a,
            b,
            self.tol,
        )?;
        Ok(q.value)
    }

    fn check_side(&self, x: f64) -> Result<(), ConjugacyError> {
        if x == 0.0 || Side::of(x) != self.side || !x.is_finite() {
            return Err(ConjugacyError::OffSide { x });
        }
        Ok(())
    }

    // Table entry closest to x in log scale.
    fn anchor(&self, x: f64) -> Knot {
        let ratio = self.base / x;
        if ratio <= 1.0 {
            return self.table[0];
        }
        let j = ratio.log2().round() as usize;
        self.table[j.min(self.table.len() - 1)]
    }

    pub fn eval(&self, x: f64) -> Result<f64, ConjugacyError> {
        self.check_side(x)?;
        let (xa, ta) = self.anchor(x);
        Ok(ta + self.integral(xa, x)?)
    }

    /// Derivative `1/f(x)`.
    pub fn derivative(&self, x: f64) -> Result<f64, ConjugacyError> {
        let v = self.field.evaluate(x)?;
        if v == 0.0 {
            return Err(ConjugacyError::FieldVanishes { x });
        }
        Ok(1.0 / v)
    }

    fn contains_value(lo: f64, hi: f64, target: f64) -> bool {
        (lo.min(hi)..=lo.max(hi)).contains(&target)
    }

    // Finds consecutive points (x, tau) bracketing target.
    fn bracket(&self, target: f64) -> Result<(Knot, Knot), ConjugacyError> {
        for pair in self.table.windows(2) {
            if Self::contains_value(pair[0].1, pair[1].1, target) {
                return Ok((pair[0], pair[1]));
            }
        }
        // Outward from the base.
        let increasing_outward = self.field_sign * self.side.sign() > 0.0;
        let beyond_base = if increasing_outward {
            target > 0.0
        } else {
            target < 0.0
        };
        if beyond_base {
            let mut inner = self.table[0];
            for _ in 0..400 {
                let x = inner.0 * 1.25;
                let tau = inner.1 + self.integral(inner.0, x)?;
                if Self::contains_value(inner.1, tau, target) {
                    return Ok((inner, (x, tau)));
                }
                inner = (x, tau);
            }
        } else {
            let mut outer = *self.table.last().expect("table is non-empty");
            while outer.0.abs() > 1e-300 {
                let x = outer.0 * 0.5;
                let tau = match self.integral(outer.0, x) {
                    Ok(v) if (outer.1 + v).is_finite() => outer.1 + v,
                    _ => break,
                };
                if Self::contains_value(outer.1, tau, target) {
                    return Ok((outer, (x, tau)));
                }
                outer = (x, tau);
            }
        }
        Err(ConjugacyError::NotInvertible { target })
    }

    /// Solves `tau(x) = target` on this side: bracketing from the table
    /// followed by Newton steps safeguarded by bisection.
    pub fn inverse(&self, target: f64) -> Result<f64, ConjugacyError> {
        if !target.is_finite() {
            return Err(ConjugacyError::NotInvertible { target });
        }
        let ((mut xa, mut ta), (mut xb, mut tb)) = self.bracket(target)?;
        if ta == target {
            return Ok(xa);
        }
        if tb == target {
            return Ok(xb);
        }
        // Newton from the anchor ta, keeping [xa, xb] as a bracket.
        let mut x = xa + (xb - xa) * (target - ta) / (tb - ta);
        for _ in 0..100 {
            if !(x > xa.min(xb) && x < xa.max(xb)) {
                x = 0.5 * (xa + xb);
            }
            let (anchor_x, anchor_t) = if (x - xa).abs() < (x - xb).abs() {
                (xa, ta)
            } else {
                (xb, tb)
            };
            let tau = anchor_t + self.integral(anchor_x, x)?;
            let residual = tau - target;
            if residual == 0.0 {
                return Ok(x);
            }
            if (residual > 0.0) == (ta > target) {
                xa = x;
                ta = tau;
            } else {
                xb = x;
                tb = tau;
            }
            let fx = self.field.evaluate(x)?;
            let next = x - residual * fx;
            let step = (next - x).abs();
            x = next;
            if step <= NEWTON_TOL * x.abs().max(f64::MIN_POSITIVE)
                || (xa - xb).abs() <= NEWTON_TOL * x.abs()
            {
                if x >= xa.min(xb) && x <= xa.max(xb) {
                    return Ok(x);
                }
                return Ok(0.5 * (xa + xb));
            }
        }
        Err(ConjugacyError::NotInvertible { target })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Expression {
        Expression::parse(text).unwrap()
    }

    #[test]
    fn logarithmic_time_map() {
        let tau = time_map(&parse("x"), 1.0, Side::Positive).unwrap();
        assert!((tau.eval(2.0).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((tau.eval(1e-9).unwrap() - 1e-9f64.ln()).abs() < 1e-8);
        assert!((tau.inverse(-5.0).unwrap() - (-5f64).exp()).abs() < 1e-14);
        assert!((tau.inverse(3.0).unwrap() - 3f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn quadratic_time_map() {
        let tau = time_map(&parse("x^2"), 1.0, Side::Positive).unwrap();
        assert!((tau.eval(0.5).unwrap() + 1.0).abs() < 1e-12);
        let x = tau.inverse(-99.0).unwrap();
        assert!((x - 0.01).abs() < 1e-14, "{x}");
    }

    #[test]
    fn negative_side() {
        // f = -x^2 on x < 0 from base -1: tau = 1/x + 1.
        let tau = time_map(&parse("-x^2"), -1.0, Side::Negative).unwrap();
        assert!((tau.eval(-0.5).unwrap() + 1.0).abs() < 1e-12);
        assert!((tau.inverse(-1.0).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_base_and_sides() {
        let f = parse("x");
        assert!(matches!(
            time_map(&f, -1.0, Side::Positive),
            Err(ConjugacyError::BaseOffSide { .. })
        ));
        let tau = time_map(&f, 1.0, Side::Positive).unwrap();
        assert!(matches!(
            tau.eval(-0.5),
            Err(ConjugacyError::OffSide { .. })
        ));
        // x - 0.5 vanishes between base 1 and 0.25.
        let tau = time_map(&parse("x - 0.5"), 1.0, Side::Positive);
        assert!(tau.is_err() || tau.unwrap().eval(0.25).is_err());
    }
}
