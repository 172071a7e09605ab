//! Truncated power series at the origin.
//!
//! A [`TruncatedSeries`] of order `N` holds the Taylor coefficients
//! `c_0, ..., c_N` of a germ. Every operation is exact modulo `x^(N+1)`:
//! results never carry coefficients beyond the order both operands know.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{BinOp, Expression, Func, Node};

/// Relative threshold below which a coefficient counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

// Leading coefficients this small relative to the series scale are treated
// as exact zeros when dividing.
const NEGLIGIBLE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series coefficients must be non-empty and finite")]
    InvalidCoefficients,
    #[error("reciprocal of a series with zero constant term")]
    ZeroConstantTerm,
    #[error("composition needs an inner series with zero constant term, got {0}")]
    NonzeroInnerConstant(f64),
    #[error("`{node}` is singular at the origin")]
    SingularAtOrigin { node: String },
    #[error("`{node}` evaluates {func} at a singular point (argument {value} at the origin)")]
    SingularComposition {
        func: &'static str,
        node: String,
        value: f64,
    },
    #[error("truncation order {order} too small, need at least {needed}")]
    OrderTooSmall { order: usize, needed: usize },
}

/// Taylor coefficients `c_0..c_N` with `c_i = f^(i)(0)/i!`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for TruncatedSeries {
    type Error = SeriesError;

    fn try_from(coeffs: Vec<f64>) -> Result<Self, Self::Error> {
        TruncatedSeries::new(coeffs)
    }
}

impl From<TruncatedSeries> for Vec<f64> {
    fn from(s: TruncatedSeries) -> Self {
        s.coeffs
    }
}

/// Outcome of the search for the first non-vanishing coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JetOrder {
    Finite(usize),
    /// No coefficient passed the test; only orders `0..=checked_order` were examined.
    Flat {
        checked_order: usize,
    },
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, SeriesError> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(SeriesError::InvalidCoefficients);
        }
        Ok(TruncatedSeries { coeffs })
    }

    fn from_vec(coeffs: Vec<f64>) -> Self {
        debug_assert!(!coeffs.is_empty());
        TruncatedSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::from_vec(vec![0.0; order + 1])
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The series of `x`.
    pub fn identity(order: usize) -> Self {
        Self::monomial(1.0, 1, order)
    }

    pub fn monomial(c: f64, degree: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if degree <= order {
            s.coeffs[degree] = c;
        }
        s
    }

    /// Pads or truncates a finite coefficient list to `order`.
    pub fn from_polynomial(coeffs: &[f64], order: usize) -> Self {
        let mut s = Self::zero(order);
        for (dst, src) in s.coeffs.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient `i`, or zero past the truncation order.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Self::from_vec(self.coeffs[..=n].to_vec())
    }

    /// Extends with zero coefficients; only meaningful for exact polynomials.
    pub fn pad(&self, order: usize) -> Self {
        Self::from_polynomial(&self.coeffs, order.max(self.order()))
    }

    fn scale_magnitude(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_vec(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Evaluates the truncated polynomial at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Derivative, of order `N - 1` (order 0 stays order 0 with value zero).
    pub fn derive(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self::from_vec(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c)
                .collect(),
        )
    }

    /// Antiderivative vanishing at the origin, of order `N + 1`.
    pub fn integrate(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c / (i as f64 + 1.0)),
        );
        Self::from_vec(out)
    }

    /// Divides by `x^v`, dropping the first `v` coefficients (order `N - v`).
    pub fn shift_down(&self, v: usize) -> Result<Self, SeriesError> {
        if v > self.order() {
            return Err(SeriesError::OrderTooSmall {
                order: self.order(),
                needed: v,
            });
        }
        Ok(Self::from_vec(self.coeffs[v..].to_vec()))
    }

    /// Smallest `k` with `|c_k| > tol * max(1, max|c_i|)`.
    pub fn first_nonzero_order(&self, tol: f64) -> JetOrder {
        let threshold = tol * self.scale_magnitude().max(1.0);
        match self.coeffs.iter().position(|c| c.abs() > threshold) {
            Some(k) => JetOrder::Finite(k),
            None => JetOrder::Flat {
                checked_order: self.order(),
            },
        }
    }

    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let c0 = self.coeffs[0];
        if c0 == 0.0 {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let n = self.order();
        let mut r = vec![0.0; n + 1];
        r[0] = 1.0 / c0;
        for i in 1..=n {
            let acc: f64 = (1..=i).map(|k| self.coeffs[k] * r[i - k]).sum();
            r[i] = -acc / c0;
        }
        Ok(Self::from_vec(r))
    }

    /// `self / denom`. A common factor `x^v` is cancelled first, which lowers
    /// the result order by `v`.
    pub fn divide(&self, denom: &Self) -> Result<Self, SeriesError> {
        let scale = denom.scale_magnitude().max(f64::MIN_POSITIVE);
        if denom.coeffs[0].abs() > NEGLIGIBLE * scale {
            return Ok(self * &denom.reciprocal()?);
        }
        let v = denom
            .coeffs
            .iter()
            .position(|c| c.abs() > NEGLIGIBLE * scale)
            .ok_or(SeriesError::ZeroConstantTerm)?;
        let num_scale = self.scale_magnitude().max(1.0);
        if self
            .coeffs
            .iter()
            .take(v)
            .any(|c| c.abs() > NEGLIGIBLE * num_scale)
        {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let num = self.shift_down(v.min(self.order()))?;
        let den = denom.shift_down(v)?;
        Ok(&num * &den.reciprocal()?)
    }

    /// `self(inner(x))`; requires `inner(0) = 0`.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        if inner.coeffs[0] != 0.0 {
            return Err(SeriesError::NonzeroInnerConstant(inner.coeffs[0]));
        }
        let order = self.order().min(inner.order());
        let inner = inner.truncate(order);
        let mut acc = Self::constant(self.coeffs[order], order);
        for i in (0..order).rev() {
            acc = &acc * &inner;
            acc.coeffs[0] += self.coeffs[i];
        }
        Ok(acc)
    }

    pub fn powi(&self, n: i64) -> Result<Self, SeriesError> {
        if n < 0 {
            return self.reciprocal()?.powi(-n);
        }
        let mut result = Self::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// `self^p` for real `p`; requires a positive constant term.
    pub fn powf(&self, p: f64) -> Result<Self, SeriesError> {
        let u0 = self.coeffs[0];
        if u0 <= 0.0 {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let n = self.order();
        let mut w = vec![0.0; n + 1];
        w[0] = u0.powf(p);
        for m in 1..=n {
            let acc: f64 = (1..=m)
                .map(|k| (p * k as f64 - (m - k) as f64) * self.coeffs[k] * w[m - k])
                .sum();
            w[m] = acc / (m as f64 * u0);
        }
        Ok(Self::from_vec(w))
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = self.coeffs[0].exp();
        for m in 1..=n {
            let acc: f64 = (1..=m).map(|k| k as f64 * self.coeffs[k] * e[m - k]).sum();
            e[m] = acc / m as f64;
        }
        Self::from_vec(e)
    }

    /// Natural logarithm; requires a positive constant term.
    pub fn ln(&self) -> Result<Self, SeriesError> {
        let u0 = self.coeffs[0];
        if u0 <= 0.0 {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let n = self.order();
        let mut l = vec![0.0; n + 1];
        l[0] = u0.ln();
        for m in 1..=n {
            let acc: f64 = (1..m).map(|k| k as f64 * l[k] * self.coeffs[m - k]).sum();
            l[m] = (self.coeffs[m] - acc / m as f64) / u0;
        }
        Ok(Self::from_vec(l))
    }

    /// `(sin(self), cos(self))`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.order();
        let mut s = vec![0.0; n + 1];
        let mut c = vec![0.0; n + 1];
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for m in 1..=n {
            let mut acc_s = 0.0;
            let mut acc_c = 0.0;
            for k in 1..=m {
                let w = k as f64 * self.coeffs[k];
                acc_s += w * c[m - k];
                acc_c += w * s[m - k];
            }
            s[m] = acc_s / m as f64;
            c[m] = -acc_c / m as f64;
        }
        (Self::from_vec(s), Self::from_vec(c))
    }

    /// Square root; requires a positive constant term.
    pub fn sqrt(&self) -> Result<Self, SeriesError> {
        let u0 = self.coeffs[0];
        if u0 <= 0.0 {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let n = self.order();
        let mut r = vec![0.0; n + 1];
        r[0] = u0.sqrt();
        for m in 1..=n {
            let acc: f64 = (1..m).map(|k| r[k] * r[m - k]).sum();
            r[m] = (self.coeffs[m] - acc) / (2.0 * r[0]);
        }
        Ok(Self::from_vec(r))
    }

    pub fn atan(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return Self::constant(self.coeffs[0].atan(), 0);
        }
        let du = self.derive();
        let u = self.truncate(n - 1);
        let mut denom = &u * &u;
        denom.coeffs[0] += 1.0;
        let q = &du
            * &denom
                .reciprocal()
                .expect("1 + u^2 has a positive constant term");
        let mut a = q.integrate();
        a.coeffs[0] = self.coeffs[0].atan();
        a
    }

    /// Pullback `f(psi(x)) / psi'(x)` of the field `self` by the polynomial
    /// `psi` (treated as exact, `psi(0) = 0`, `psi'(0) != 0`).
    ///
    /// This is the transformed coefficient `g` with `g(x) = f(psi(x)) / psi'(x)`.
    pub fn pullback_by_polynomial(&self, psi: &Self) -> Result<Self, SeriesError> {
        let order = self.order();
        let psi = psi.pad(order).truncate(order);
        let composed = self.compose(&psi)?;
        let dpsi = psi.derive().pad(order);
        Ok(&composed * &dpsi.reciprocal()?)
    }
}

fn combine(
    a: &TruncatedSeries,
    b: &TruncatedSeries,
    op: impl Fn(f64, f64) -> f64,
) -> TruncatedSeries {
    let n = a.order().min(b.order());
    TruncatedSeries::from_vec((0..=n).map(|i| op(a.coeffs[i], b.coeffs[i])).collect())
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        combine(self, rhs, |u, v| u + v)
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        combine(self, rhs, |u, v| u - v)
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(rhs.order());
        let mut out = vec![0.0; n + 1];
        for (i, &a) in self.coeffs.iter().take(n + 1).enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().take(n + 1 - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        TruncatedSeries::from_vec(out)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        self.scale(-1.0)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "] + O(x^{})", self.order() + 1)
    }
}

/// Truncation order used when orders up to `k_max` are of interest.
pub fn default_truncation(k_max: usize) -> usize {
    (2 * k_max + 2).max(16)
}

/// Maclaurin coefficients of `e` through order `order`, by propagating
/// series through the expression tree.
pub fn taylor(e: &Expression, order: usize) -> Result<TruncatedSeries, SeriesError> {
    // Cancelled factors in quotients cost orders; retry with headroom.
    let mut working = order;
    for _ in 0..4 {
        let s = series_of(e.root(), working)?;
        if s.order() >= order {
            return Ok(s.truncate(order));
        }
        working += order - s.order();
    }
    Err(SeriesError::OrderTooSmall {
        order: working,
        needed: order,
    })
}

fn node_text(node: &Node) -> String {
    Expression::from_node(node.clone()).to_string()
}

fn singular(node: &Node) -> SeriesError {
    SeriesError::SingularAtOrigin {
        node: node_text(node),
    }
}

fn singular_call(func: &'static str, node: &Node, value: f64) -> SeriesError {
    SeriesError::SingularComposition {
        func,
        node: node_text(node),
        value,
    }
}

fn constant_value(s: &TruncatedSeries) -> Option<f64> {
    s.coeffs[1..]
        .iter()
        .all(|c| *c == 0.0)
        .then_some(s.coeffs[0])
}

fn series_of(node: &Node, order: usize) -> Result<TruncatedSeries, SeriesError> {
    Ok(match node {
        Node::Const(c) => TruncatedSeries::constant(*c, order),
        Node::Var => TruncatedSeries::identity(order),
        Node::Neg(a) => -&series_of(a, order)?,
        Node::Binary(op, a, b) => {
            let u = series_of(a, order)?;
            let v = series_of(b, order)?;
            match op {
                BinOp::Add => &u + &v,
                BinOp::Sub => &u - &v,
                BinOp::Mul => &u * &v,
                BinOp::Div => u.divide(&v).map_err(|_| singular(node))?,
                BinOp::Pow => power_series(node, &u, &v)?,
            }
        }
        Node::Call(func, a) => {
            let u = series_of(a, order)?;
            let u0 = u.coeffs[0];
            match func {
                Func::Sin => u.sin_cos().0,
                Func::Cos => u.sin_cos().1,
                Func::Exp => u.exp(),
                Func::Atan => u.atan(),
                Func::Log => u.ln().map_err(|_| singular_call("log", node, u0))?,
                Func::Sqrt => u.sqrt().map_err(|_| singular_call("sqrt", node, u0))?,
            }
        }
    })
}

fn power_series(
    node: &Node,
    base: &TruncatedSeries,
    exponent: &TruncatedSeries,
) -> Result<TruncatedSeries, SeriesError> {
    match constant_value(exponent) {
        Some(p) if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 => {
            let n = p as i64;
            if n >= 0 {
                base.powi(n)
            } else {
                let one = TruncatedSeries::constant(1.0, base.order());
                one.divide(base).map_err(|_| singular(node))?.powi(-n)
            }
        }
        Some(p) => base.powf(p).map_err(|_| singular(node)),
        None => {
            let log = base.ln().map_err(|_| singular(node))?;
            Ok((&log * exponent).exp())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::new(c.to_vec()).unwrap()
    }

    fn close(a: &TruncatedSeries, b: &[f64], tol: f64) {
        assert_eq!(a.order() + 1, b.len(), "{a} vs {b:?}");
        for (x, y) in a.coeffs().iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a} vs {b:?}");
        }
    }

    fn taylor_of(text: &str, n: usize) -> TruncatedSeries {
        taylor(&Expression::parse(text).unwrap(), n).unwrap()
    }

    #[test]
    fn maclaurin_examples() {
        close(
            &taylor_of("sin(x)", 5),
            &[0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0],
            1e-15,
        );
        close(&taylor_of("x^2 + x^3", 4), &[0.0, 0.0, 1.0, 1.0, 0.0], 0.0);
        close(&taylor_of("1/(1+x)", 3), &[1.0, -1.0, 1.0, -1.0], 0.0);
    }

    #[test]
    fn elementary_functions() {
        close(
            &taylor_of("exp(x)", 4),
            &[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0],
            1e-15,
        );
        close(
            &taylor_of("log(1+x)", 4),
            &[0.0, 1.0, -0.5, 1.0 / 3.0, -0.25],
            1e-15,
        );
        close(
            &taylor_of("sqrt(1+x)", 3),
            &[1.0, 0.5, -0.125, 0.0625],
            1e-15,
        );
        close(
            &taylor_of("atan(x)", 5),
            &[0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 0.2],
            1e-15,
        );
        close(
            &taylor_of("cos(x)", 4),
            &[1.0, 0.0, -0.5, 0.0, 1.0 / 24.0],
            1e-15,
        );
        close(
            &taylor_of("(1+x)^0.5", 3),
            &[1.0, 0.5, -0.125, 0.0625],
            1e-15,
        );
        close(&taylor_of("(1+x)^(-2)", 3), &[1.0, -2.0, 3.0, -4.0], 1e-15);
        // (1+x)^x = exp(x log(1+x)) = 1 + x^2 - x^3/2 + ...
        close(&taylor_of("(1+x)^x", 3), &[1.0, 0.0, 1.0, -0.5], 1e-15);
    }

    #[test]
    fn removable_quotients() {
        close(
            &taylor_of("sin(x)/x", 4),
            &[1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0],
            1e-15,
        );
        close(&taylor_of("(exp(x)-1)/x", 2), &[1.0, 0.5, 1.0 / 6.0], 1e-15);
    }

    #[test]
    fn singular_inputs() {
        let err = taylor(&Expression::parse("1/x").unwrap(), 4).unwrap_err();
        assert_eq!(err, SeriesError::SingularAtOrigin { node: "1/x".into() });
        assert!(matches!(
            taylor(&Expression::parse("log(x)").unwrap(), 4).unwrap_err(),
            SeriesError::SingularComposition { func: "log", .. }
        ));
        assert!(taylor(&Expression::parse("sqrt(x)").unwrap(), 4).is_err());
        assert!(taylor(&Expression::parse("x^(-1)").unwrap(), 4).is_err());
        assert!(taylor(&Expression::parse("x^0.5").unwrap(), 4).is_err());
    }

    #[test]
    fn series_op_examples() {
        close(
            &series(&[1.0, 1.0, 0.0, 0.0]).reciprocal().unwrap(),
            &[1.0, -1.0, 1.0, -1.0],
            0.0,
        );
        close(
            &series(&[0.0, 0.0, 1.0, 1.0]).derive(),
            &[0.0, 2.0, 3.0],
            0.0,
        );
        let sin = taylor_of("sin(x)", 3);
        close(
            &sin.compose(&sin).unwrap(),
            &[0.0, 1.0, 0.0, -1.0 / 3.0],
            1e-15,
        );
    }

    #[test]
    fn series_op_errors() {
        assert_eq!(
            series(&[0.0, 1.0]).reciprocal().unwrap_err(),
            SeriesError::ZeroConstantTerm
        );
        assert_eq!(
            series(&[0.0, 1.0])
                .compose(&series(&[0.5, 1.0]))
                .unwrap_err(),
            SeriesError::NonzeroInnerConstant(0.5)
        );
        assert_eq!(
            TruncatedSeries::new(vec![]).unwrap_err(),
            SeriesError::InvalidCoefficients
        );
        assert!(TruncatedSeries::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn first_nonzero_order_examples() {
        assert_eq!(
            series(&[0.0, 0.0, 1.0, 1.0]).first_nonzero_order(DEFAULT_ZERO_TOL),
            JetOrder::Finite(2)
        );
        assert_eq!(
            series(&[3.0, 1.0]).first_nonzero_order(DEFAULT_ZERO_TOL),
            JetOrder::Finite(0)
        );
        assert_eq!(
            series(&[0.0; 4]).first_nonzero_order(DEFAULT_ZERO_TOL),
            JetOrder::Flat { checked_order: 3 }
        );
    }

    #[test]
    fn zero_test_is_relative_to_largest_coefficient() {
        let s = series(&[1e-8, 0.0, 100.0]);
        assert_eq!(s.first_nonzero_order(1e-12), JetOrder::Finite(0));
        assert_eq!(s.first_nonzero_order(1e-9), JetOrder::Finite(2));
    }

    #[test]
    fn pullback_by_scaling() {
        // f = x^3, psi = 2x: f(2x)/2 = 4x^3.
        let f = TruncatedSeries::monomial(1.0, 3, 6);
        let psi = series(&[0.0, 2.0]);
        close(
            &f.pullback_by_polynomial(&psi).unwrap(),
            &[0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0],
            0.0,
        );
    }

    #[test]
    fn json_is_a_plain_array() {
        let s = series(&[0.0, 1.0, -0.5]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[0.0,1.0,-0.5]");
        let back: TruncatedSeries = serde_json::from_str("[1.0,2.0]").unwrap();
        assert_eq!(back.coeffs(), &[1.0, 2.0]);
        assert!(serde_json::from_str::<TruncatedSeries>("[]").is_err());
    }

    #[test]
    fn default_truncation_order() {
        assert_eq!(default_truncation(4), 16);
        assert_eq!(default_truncation(10), 22);
    }
}
