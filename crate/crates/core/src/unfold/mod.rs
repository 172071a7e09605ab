//! Unfoldings of degenerate germs and their equilibria.
//!
//! * `Q`:  `x^k + Σ_{i<k} λ_i x^i`
//! * `Q1`: `(a + λ_k) x^k + Σ_{i<k} λ_i x^i`
//! * `F`:  `±x^k + Σ_{i=1}^{k-1} λ_i x^(k-1-i) + d x^(2k-1)`
//! * `F1`: as `F` with leading term `a x^k`
//!
//! [`sweep`] evaluates [`equilibria`] over a parameter grid.

mod roots;

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::jets::TruncatedSeries;

pub use roots::{equilibria, Equilibrium, EquilibriumReport, Stability, MULTIPLICITY_TOL};

pub const DEFAULT_WINDOW: (f64, f64) = (-2.0, 2.0);
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnfoldError {
    #[error("unfoldings need k >= 2, got {0}")]
    OrderTooSmall(usize),
    #[error("family {0} requires the leading coefficient a")]
    MissingLeading(FamilyKind),
    #[error("family {0} requires the modulus d")]
    MissingModulus(FamilyKind),
    #[error("leading coefficient must be nonzero and finite, got {0}")]
    BadLeading(f64),
    #[error("sign must be +1 or -1 and only applies to family F, got {0}")]
    BadSign(i8),
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("window [{lo}, {hi}] is not a finite non-degenerate interval")]
    BadWindow { lo: f64, hi: f64 },
    #[error("polynomial vanishes identically")]
    ZeroPolynomial,
    #[error("polynomial has non-finite coefficients")]
    NonFiniteCoefficient,
    #[error("grid has {size} nodes, above the cap of {cap}")]
    GridTooLarge { size: usize, cap: usize },
    #[error("parameter range {index} is invalid: {reason}")]
    BadRange { index: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FamilyKind {
    Q,
    Q1,
    F,
    F1,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Q => "Q",
            FamilyKind::Q1 => "Q1",
            FamilyKind::F => "F",
            FamilyKind::F1 => "F1",
        })
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Q" | "q" => Ok(FamilyKind::Q),
            "Q1" | "q1" => Ok(FamilyKind::Q1),
            "F" | "f" => Ok(FamilyKind::F),
            "F1" | "f1" => Ok(FamilyKind::F1),
            other => Err(format!(
                "unknown family `{other}` (expected Q, Q1, F or F1)"
            )),
        }
    }
}

/// A polynomial family `base + Σ λ_i x^(schedule_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnfoldingFamily {
    pub kind: FamilyKind,
    pub k: usize,
    pub a: Option<f64>,
    pub d: Option<f64>,
    pub sign: Option<i8>,
    /// Coefficients of the germ at `λ = 0`.
    pub base: Vec<f64>,
    /// Exponent each parameter multiplies, in parameter order.
    pub schedule: Vec<usize>,
}

/// Builds a family; `F` starts with sign `+1` (see [`UnfoldingFamily::with_sign`]).
pub fn build_unfolding(
    kind: FamilyKind,
    k: usize,
    a: Option<f64>,
    d: Option<f64>,
) -> Result<UnfoldingFamily, UnfoldError> {
    if k < 2 {
        return Err(UnfoldError::OrderTooSmall(k));
    }
    let leading = match kind {
        FamilyKind::Q => 1.0,
        FamilyKind::F => 1.0,
        FamilyKind::Q1 | FamilyKind::F1 => {
            let a = a.ok_or(UnfoldError::MissingLeading(kind))?;
            if a == 0.0 || !a.is_finite() {
                return Err(UnfoldError::BadLeading(a));
            }
            a
        }
    };
    let smooth = matches!(kind, FamilyKind::F | FamilyKind::F1);
    let modulus = if smooth {
        Some(d.ok_or(UnfoldError::MissingModulus(kind))?)
    } else {
        None
    };
    let mut base = vec![0.0; if smooth { 2 * k } else { k + 1 }];
    base[k] = leading;
    if let Some(d) = modulus {
        base[2 * k - 1] += d;
    }
    let schedule = match kind {
        FamilyKind::Q => (1..k).collect(),
        FamilyKind::Q1 => (1..=k).collect(),
        FamilyKind::F | FamilyKind::F1 => (1..k).map(|i| k - 1 - i).collect(),
    };
    Ok(UnfoldingFamily {
        kind,
        k,
        a: matches!(kind, FamilyKind::Q1 | FamilyKind::F1).then_some(leading),
        d: modulus,
        sign: (kind == FamilyKind::F).then_some(1),
        base,
        schedule,
    })
}

impl UnfoldingFamily {
    pub fn param_count(&self) -> usize {
        self.schedule.len()
    }

    pub fn with_sign(mut self, sign: i8) -> Result<Self, UnfoldError> {
        if self.kind != FamilyKind::F || (sign != 1 && sign != -1) {
            return Err(UnfoldError::BadSign(sign));
        }
        self.sign = Some(sign);
        self.base[self.k] = sign as f64;
        Ok(self)
    }

    /// Adds a final parameter perturbing the modulus `d` (families `F`, `F1`).
    pub fn with_modulus_parameter(mut self) -> Self {
        if matches!(self.kind, FamilyKind::F | FamilyKind::F1)
            && !self.schedule.contains(&(2 * self.k - 1))
        {
            self.schedule.push(2 * self.k - 1);
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.base.len() - 1
    }

    /// Coefficient vector at the given parameters.
    pub fn instantiate(&self, lambda: &[f64]) -> Result<TruncatedSeries, UnfoldError> {
        if lambda.len() != self.param_count() {
            return Err(UnfoldError::ParameterCount {
                expected: self.param_count(),
                got: lambda.len(),
            });
        }
        let mut c = self.base.clone();
        for (&e, &l) in self.schedule.iter().zip(lambda) {
            c[e] += l;
        }
        Ok(TruncatedSeries::from_polynomial(&c, self.degree()))
    }

    /// `∂/∂λ_i` as coefficient vectors through degree `k`, i.e. modulo `m^(k+1)`.
    pub fn parameter_directions(&self) -> Vec<Vec<f64>> {
        self.schedule
            .iter()
            .map(|&e| {
                let mut v = vec![0.0; self.k + 1];
                if e <= self.k {
                    v[e] = 1.0;
                }
                v
            })
            .collect()
    }

    /// Rank of the parameter directions modulo `m^(k+1)`.
    pub fn quotient_rank(&self) -> usize {
        matrix_rank(self.parameter_directions())
    }
}

impl fmt::Display for UnfoldingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let power = |e: usize| match e {
            0 => String::new(),
            1 => "*x".to_string(),
            _ => format!("*x^{e}"),
        };
        write!(f, "{}{}", self.base[self.k], power(self.k))?;
        if let Some(i) = self.schedule.iter().position(|&e| e == self.k) {
            write!(f, " + lambda_{}{}", i + 1, power(self.k))?;
        }
        for (i, &e) in self.schedule.iter().enumerate() {
            if e != self.k {
                write!(f, " + lambda_{}{}", i + 1, power(e))?;
            }
        }
        if let Some(d) = self.d {
            write!(f, " + {d}{}", power(2 * self.k - 1))?;
        }
        Ok(())
    }
}

fn matrix_rank(mut rows: Vec<Vec<f64>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col].abs() > 1e-12) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank {
                let factor = rows[r][col] / rows[rank][col];
                let pivot_row = rows[rank].clone();
                for (x, p) in rows[r].iter_mut().zip(pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Grid for one parameter: `count` evenly spaced values from `lo` to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl ParamRange {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        ParamRange { lo, hi, count }
    }

    pub fn fixed(value: f64) -> Self {
        ParamRange::new(value, value, 1)
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub window: (f64, f64),
    pub cap: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            window: DEFAULT_WINDOW,
            cap: DEFAULT_GRID_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationTable {
    pub param_count: usize,
    pub rows: Vec<EquilibriumReport>,
}

impl BifurcationTable {
    pub fn counts(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.equilibria.len()).collect()
    }

    pub fn to_csv(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.equilibria.len())
            .max()
            .unwrap_or(0);
        let mut header: Vec<String> = (1..=self.param_count)
            .map(|i| format!("lambda_{i}"))
            .collect();
        header.push("n_equilibria".into());
        for i in 1..=width {
            header.push(format!("root_{i}"));
            header.push(format!("multiplicity_{i}"));
            header.push(format!("stability_{i}"));
        }
        let mut out = header.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut fields: Vec<String> = row.params.iter().map(|p| p.to_string()).collect();
            fields.push(row.equilibria.len().to_string());
            for i in 0..width {
                match row.equilibria.get(i) {
                    Some(e) => {
                        fields.push(e.location.to_string());
                        fields.push(e.multiplicity.to_string());
                        fields.push(e.stability.as_str().to_string());
                    }
                    None => fields.extend(std::iter::repeat_n(String::new(), 3)),
                }
            }
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

/// Equilibria at every node of the product grid, rows in lexicographic
/// order with the first parameter varying slowest.
pub fn sweep(
    fam: &UnfoldingFamily,
    grid: &[ParamRange],
    opts: &SweepOptions,
) -> Result<BifurcationTable, UnfoldError> {
    if grid.len() != fam.param_count() {
        return Err(UnfoldError::ParameterCount {
            expected: fam.param_count(),
            got: grid.len(),
        });
    }
    for (index, r) in grid.iter().enumerate() {
        if r.count == 0 {
            return Err(UnfoldError::BadRange {
                index,
                reason: "count must be at least 1".into(),
            });
        }
        if !(r.lo.is_finite() && r.hi.is_finite()) {
            return Err(UnfoldError::BadRange {
                index,
                reason: "bounds must be finite".into(),
            });
        }
    }
    let size = grid
        .iter()
        .try_fold(1usize, |acc, r| acc.checked_mul(r.count))
        .unwrap_or(usize::MAX);
    if size > opts.cap {
        return Err(UnfoldError::GridTooLarge {
            size,
            cap: opts.cap,
        });
    }
    let rows = (0..size)
        .into_par_iter()
        .map(|node| {
            let mut rest = node;
            let mut params = vec![0.0; grid.len()];
            for (slot, r) in params.iter_mut().zip(grid).rev() {
                *slot = r.value(rest % r.count);
                rest /= r.count;
            }
            let poly = fam.instantiate(&params)?;
            let mut report = equilibria(poly.coeffs(), opts.window)?;
            report.params = params;
            Ok(report)
        })
        .collect::<Result<Vec<_>, UnfoldError>>()?;
    Ok(BifurcationTable {
        param_count: fam.param_count(),
        rows,
    })
}
