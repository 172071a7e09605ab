//! Univariate expressions in `x`: the coefficient `f` of a field `f(x) d/dx`.
//!
//! Expressions are parsed once and then evaluated, differentiated or
//! expanded into truncated series. An [`Expression`] is immutable and can be
//! shared freely between threads.

mod parser;

use std::fmt;

use thiserror::Error;

pub use parser::ParseError;

/// Binary operators of the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Elementary functions accepted by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            _ => return None,
        })
    }
}

/// A node of the expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Evaluation failure: the point lies outside the natural domain of a sub-node.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{node}` at x = {x}: {reason}")]
pub struct EvalError {
    /// Printed form of the offending sub-expression.
    pub node: String,
    pub x: f64,
    pub reason: &'static str,
}

/// A parsed univariate expression in the variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
}

impl Expression {
    /// Parses `text` according to the grammar
    /// `expr := term (('+'|'-') term)*`, `term := unary (('*'|'/') unary)*`,
    /// `unary := '-' unary | power`, `power := atom ('^' unary)?`.
    pub fn parse(text: &str) -> Result<Expression, ParseError> {
        parser::parse(text).map(|root| Expression { root })
    }

    pub fn from_node(root: Node) -> Expression {
        Expression { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn constant(c: f64) -> Expression {
        Expression {
            root: Node::Const(c),
        }
    }

    pub fn var() -> Expression {
        Expression { root: Node::Var }
    }

    /// Builds `c0 + c1*x + c2*x^2 + ...`, skipping zero coefficients.
    pub fn polynomial(coeffs: &[f64]) -> Expression {
        let mut acc: Option<Node> = None;
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let monomial = match i {
                0 => None,
                1 => Some(Node::Var),
                _ => Some(Node::Binary(
                    BinOp::Pow,
                    Box::new(Node::Var),
                    Box::new(Node::Const(i as f64)),
                )),
            };
            let (negative, magnitude) = (c < 0.0, c.abs());
            let leading_minus = negative && acc.is_none();
            let factor = if leading_minus {
                Node::Neg(Box::new(Node::Const(magnitude)))
            } else {
                Node::Const(magnitude)
            };
            let term = match monomial {
                None => factor,
                Some(m) if magnitude == 1.0 && leading_minus => Node::Neg(Box::new(m)),
                Some(m) if magnitude == 1.0 => m,
                Some(m) => Node::Binary(BinOp::Mul, Box::new(factor), Box::new(m)),
            };
            acc = Some(match acc {
                None => term,
                Some(prev) => Node::Binary(
                    if negative { BinOp::Sub } else { BinOp::Add },
                    Box::new(prev),
                    Box::new(term),
                ),
            });
        }
        Expression {
            root: acc.unwrap_or(Node::Const(0.0)),
        }
    }

    /// Evaluates the expression at `x`.
    pub fn evaluate(&self, x: f64) -> Result<f64, EvalError> {
        eval_node(&self.root, x)
    }

    /// Symbolic derivative with respect to `x`, lightly simplified.
    pub fn derivative(&self) -> Expression {
        Expression {
            root: derive_node(&self.root),
        }
    }

    /// Replaces every occurrence of `x` by `inner`.
    pub fn compose(&self, inner: &Expression) -> Expression {
        Expression {
            root: substitute(&self.root, &inner.root),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root)
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

fn domain(node: &Node, x: f64, reason: &'static str) -> EvalError {
    EvalError {
        node: Expression::from_node(node.clone()).to_string(),
        x,
        reason,
    }
}

fn eval_node(node: &Node, x: f64) -> Result<f64, EvalError> {
    let value = match node {
        Node::Const(c) => return Ok(*c),
        Node::Var => return Ok(x),
        Node::Neg(a) => -eval_node(a, x)?,
        Node::Binary(op, a, b) => {
            let u = eval_node(a, x)?;
            let v = eval_node(b, x)?;
            match op {
                BinOp::Add => u + v,
                BinOp::Sub => u - v,
                BinOp::Mul => u * v,
                BinOp::Div => {
                    if v == 0.0 {
                        return Err(domain(node, x, "division by zero"));
                    }
                    u / v
                }
                BinOp::Pow => power(node, u, v, x)?,
            }
        }
        Node::Call(func, a) => {
            let u = eval_node(a, x)?;
            match func {
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Exp => u.exp(),
                Func::Atan => u.atan(),
                Func::Log => {
                    if u <= 0.0 {
                        return Err(domain(node, x, "logarithm of a non-positive number"));
                    }
                    u.ln()
                }
                Func::Sqrt => {
                    if u < 0.0 {
                        return Err(domain(node, x, "square root of a negative number"));
                    }
                    u.sqrt()
                }
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(node, x, "non-finite result"))
    }
}

/// Integer exponents are expanded exactly; other exponents need a
/// non-negative base (strictly positive for negative exponents).
fn power(node: &Node, base: f64, exponent: f64, x: f64) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        let n = exponent as i32;
        if base == 0.0 && n < 0 {
            return Err(domain(node, x, "division by zero"));
        }
        return Ok(base.powi(n));
    }
    if base < 0.0 || (base == 0.0 && exponent < 0.0) {
        return Err(domain(node, x, "non-integer power of a non-positive base"));
    }
    Ok(base.powf(exponent))
}

fn is_const(node: &Node, value: f64) -> bool {
    matches!(node, Node::Const(c) if *c == value)
}

fn add(a: Node, b: Node) -> Node {
    match (&a, &b) {
        _ if is_const(&a, 0.0) => b,
        _ if is_const(&b, 0.0) => a,
        (Node::Const(u), Node::Const(v)) => Node::Const(u + v),
        _ => Node::Binary(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Node, b: Node) -> Node {
    match (&a, &b) {
        _ if is_const(&b, 0.0) => a,
        _ if is_const(&a, 0.0) => neg(b),
        (Node::Const(u), Node::Const(v)) => Node::Const(u - v),
        _ => Node::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Node, b: Node) -> Node {
    match (&a, &b) {
        _ if is_const(&a, 0.0) || is_const(&b, 0.0) => Node::Const(0.0),
        _ if is_const(&a, 1.0) => b,
        _ if is_const(&b, 1.0) => a,
        (Node::Const(u), Node::Const(v)) => Node::Const(u * v),
        _ => Node::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Node, b: Node) -> Node {
    if is_const(&a, 0.0) {
        return Node::Const(0.0);
    }
    if is_const(&b, 1.0) {
        return a;
    }
    Node::Binary(BinOp::Div, Box::new(a), Box::new(b))
}

fn neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(-c),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

fn pow(a: Node, b: Node) -> Node {
    if is_const(&b, 1.0) {
        return a;
    }
    if is_const(&b, 0.0) {
        return Node::Const(1.0);
    }
    Node::Binary(BinOp::Pow, Box::new(a), Box::new(b))
}

fn call(func: Func, a: Node) -> Node {
    Node::Call(func, Box::new(a))
}

fn derive_node(node: &Node) -> Node {
    match node {
        Node::Const(_) => Node::Const(0.0),
        Node::Var => Node::Const(1.0),
        Node::Neg(a) => neg(derive_node(a)),
        Node::Binary(op, a, b) => {
            let (u, v) = (a.as_ref().clone(), b.as_ref().clone());
            let (du, dv) = (derive_node(a), derive_node(b));
            match op {
                BinOp::Add => add(du, dv),
                BinOp::Sub => sub(du, dv),
                BinOp::Mul => add(mul(du, v), mul(u, dv)),
                BinOp::Div => div(
                    sub(mul(du, v.clone()), mul(u, dv)),
                    pow(v, Node::Const(2.0)),
                ),
                BinOp::Pow => {
                    if let Node::Const(p) = v {
                        mul(mul(Node::Const(p), pow(u, Node::Const(p - 1.0))), du)
                    } else {
                        // d(u^v) = u^v (v' log u + v u'/u)
                        let inner = add(
                            mul(dv, call(Func::Log, u.clone())),
                            div(mul(v.clone(), du), u.clone()),
                        );
                        mul(pow(u, v), inner)
                    }
                }
            }
        }
        Node::Call(func, a) => {
            let u = a.as_ref().clone();
            let du = derive_node(a);
            let outer = match func {
                Func::Sin => call(Func::Cos, u),
                Func::Cos => neg(call(Func::Sin, u)),
                Func::Exp => call(Func::Exp, u),
                Func::Log => div(Node::Const(1.0), u),
                Func::Sqrt => div(Node::Const(0.5), call(Func::Sqrt, u)),
                Func::Atan => div(
                    Node::Const(1.0),
                    add(Node::Const(1.0), pow(u, Node::Const(2.0))),
                ),
            };
            mul(outer, du)
        }
    }
}

fn substitute(node: &Node, inner: &Node) -> Node {
    match node {
        Node::Const(c) => Node::Const(*c),
        Node::Var => inner.clone(),
        Node::Neg(a) => Node::Neg(Box::new(substitute(a, inner))),
        Node::Binary(op, a, b) => Node::Binary(
            *op,
            Box::new(substitute(a, inner)),
            Box::new(substitute(b, inner)),
        ),
        Node::Call(func, a) => Node::Call(*func, Box::new(substitute(a, inner))),
    }
}

// Binding strength used for printing: 1 sum, 2 product, 3 unary minus,
// 4 power, 5 atom.
fn level(node: &Node) -> u8 {
    match node {
        Node::Const(c) if *c < 0.0 => 5,
        Node::Const(_) | Node::Var | Node::Call(..) => 5,
        Node::Neg(_) => 3,
        Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Binary(BinOp::Pow, ..) => 4,
    }
}

fn write_at_least(f: &mut fmt::Formatter<'_>, node: &Node, min: u8) -> fmt::Result {
    if level(node) < min {
        write!(f, "(")?;
        write_node(f, node)?;
        write!(f, ")")
    } else {
        write_node(f, node)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node) -> fmt::Result {
    match node {
        Node::Const(c) if *c < 0.0 => write!(f, "(-{})", -c),
        Node::Const(c) => write!(f, "{c}"),
        Node::Var => write!(f, "x"),
        Node::Neg(a) => {
            write!(f, "-")?;
            write_at_least(f, a, 3)
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a)?;
            write!(f, ")")
        }
        Node::Binary(op, a, b) => {
            let (symbol, left, right) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => ("*", 2, 3),
                BinOp::Div => ("/", 2, 3),
                BinOp::Pow => ("^", 5, 3),
            };
            write_at_least(f, a, left)?;
            write!(f, "{symbol}")?;
            write_at_least(f, b, right)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(text: &str, x: f64) -> f64 {
        Expression::parse(text).unwrap().evaluate(x).unwrap()
    }

    #[test]
    fn evaluates_spec_examples() {
        assert_eq!(eval("x^2 + x^3", 0.5), 0.375);
        assert_eq!(eval("sin(x)", 0.0), 0.0);
        assert_eq!(eval("2*x + x^3", 1.0), 3.0);
        assert_eq!(eval("exp(x)-1", 0.0), 0.0);
    }

    #[test]
    fn division_by_zero_names_the_node() {
        let err = Expression::parse("1/x").unwrap().evaluate(0.0).unwrap_err();
        assert_eq!(err.node, "1/x");
        assert_eq!(err.reason, "division by zero");
    }

    #[test]
    fn log_and_sqrt_domains() {
        let e = Expression::parse("x + log(x)").unwrap();
        assert_eq!(e.evaluate(-1.0).unwrap_err().node, "log(x)");
        assert!(Expression::parse("sqrt(x)")
            .unwrap()
            .evaluate(-0.5)
            .is_err());
        assert!(Expression::parse("x^0.5").unwrap().evaluate(-0.5).is_err());
        assert_eq!(eval("x^0.5", 4.0), 2.0);
    }

    #[test]
    fn integer_powers_are_exact_for_negative_bases() {
        assert_eq!(eval("x^3", -2.0), -8.0);
        assert_eq!(eval("x^(-2)", -2.0), 0.25);
        assert_eq!(eval("x^2.0", -3.0), 9.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(eval("-x^2", 3.0), -9.0);
        assert_eq!(eval("2^-1", 0.0), 0.5);
        assert_eq!(eval("2*-x", 1.5), -3.0);
        assert_eq!(eval("--x", 2.0), 2.0);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(eval("2^3^2", 0.0), 512.0);
    }

    #[test]
    fn derivative_matches_closed_forms() {
        type Case = (&'static str, fn(f64) -> f64);
        let cases: &[Case] = &[
            ("x^2 + x^3", |x| 2.0 * x + 3.0 * x * x),
            ("sin(x)*exp(x)", |x| x.exp() * (x.sin() + x.cos())),
            ("log(1+x)", |x| 1.0 / (1.0 + x)),
            ("sqrt(1+x^2)", |x| x / (1.0 + x * x).sqrt()),
            ("atan(2*x)", |x| 2.0 / (1.0 + 4.0 * x * x)),
            ("1/(1+x)", |x| -1.0 / ((1.0 + x) * (1.0 + x))),
            ("(1+x)^x", |x| {
                (1.0 + x).powf(x) * ((1.0 + x).ln() + x / (1.0 + x))
            }),
        ];
        for (text, exact) in cases {
            let d = Expression::parse(text).unwrap().derivative();
            for &x in &[0.1, 0.4, 0.9] {
                let got = d.evaluate(x).unwrap();
                assert!((got - exact(x)).abs() < 1e-12, "{text} at {x}: {got}");
            }
        }
    }

    #[test]
    fn polynomial_constructor_prints_and_evaluates() {
        let p = Expression::polynomial(&[0.0, -3.0, 1.0, 0.0, 2.5]);
        assert_eq!(p.to_string(), "-3*x + x^2 + 2.5*x^4");
        assert_eq!(p.evaluate(2.0).unwrap(), -6.0 + 4.0 + 40.0);
        assert_eq!(Expression::polynomial(&[]).to_string(), "0");
    }

    #[test]
    fn compose_substitutes_the_variable() {
        let f = Expression::parse("x^2 + x").unwrap();
        let g = Expression::parse("sin(x)").unwrap();
        let h = f.compose(&g);
        let x: f64 = 0.3;
        assert!((h.evaluate(x).unwrap() - (x.sin().powi(2) + x.sin())).abs() < 1e-15);
    }

    #[test]
    fn printing_round_trips_precedence() {
        for text in [
            "x - (x - 1)",
            "x/(x*2)",
            "(-x)^2",
            "-(x^2)",
            "(x + 1)^(x - 1)",
            "2^(3^x)",
            "(2^3)^x",
            "-(x + 1)*3",
        ] {
            let e = Expression::parse(text).unwrap();
            let again = Expression::parse(&e.to_string()).unwrap();
            for &x in &[0.3, 1.7] {
                assert_eq!(e.evaluate(x).unwrap(), again.evaluate(x).unwrap(), "{text}");
            }
        }
    }
}
