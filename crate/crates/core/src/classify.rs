//! Classification of germs `f(x) d/dx` at the origin.
//!
//! From the jet of `f` we read the order `k` of the first non-vanishing
//! coefficient and its value `a = f^(k)(0)/k!`. These decide the C⁰ class,
//! the C¹ models (`1`/`a`, `a x`, `±x^k`/`a x^k`) and, through the jet
//! reduction in [`belitskii_reduce`], the C∞ modulus `d` of the model
//! `a x^k + d x^(2k-1)`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::expr::Expression;
use crate::jets::{self, JetOrder, SeriesError, TruncatedSeries, DEFAULT_ZERO_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("maximum order must be at least 2, got {0}")]
    MaxOrderTooSmall(usize),
    #[error("the field vanishes identically (jet checked through order {checked_order} and sampled values are zero)")]
    ZeroField { checked_order: usize },
    #[error("{kind:?} germ is not finitely determined and has no finite normal form")]
    NotFinitelyDetermined { kind: GermKind },
    #[error("series does not start at order {k}: {reason}")]
    WrongOrder { k: usize, reason: String },
    #[error("jet reduction needs k >= 2, got {0}")]
    NotDegenerate(usize),
    #[error("truncation order {order} too small, need {needed}")]
    InsufficientOrder { order: usize, needed: usize },
    #[error("modulus from the jet reduction ({reduction}) disagrees with the residue formula ({residue})")]
    ModulusMismatch { reduction: f64, residue: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GermKind {
    Regular,
    Hyperbolic,
    Degenerate,
    Flat,
}

/// Topological class of the singular point (regular points included).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum C0Class {
    Regular,
    Attracting,
    Repelling,
    /// Attracting from the left, repelling to the right (`x^2`).
    SemiStableRight,
    /// Repelling to the left, attracting from the right (`-x^2`).
    SemiStableLeft,
}

impl C0Class {
    /// Class from the sign of `f` just left and just right of the origin.
    pub fn from_side_signs(left: f64, right: f64) -> C0Class {
        match (left > 0.0, right > 0.0) {
            (false, true) => C0Class::Repelling,
            (true, false) => C0Class::Attracting,
            (true, true) => C0Class::SemiStableRight,
            (false, false) => C0Class::SemiStableLeft,
        }
    }

    fn from_jet(k: usize, a: f64) -> C0Class {
        if k == 0 {
            return C0Class::Regular;
        }
        let right = a;
        let left = if k.is_multiple_of(2) { a } else { -a };
        C0Class::from_side_signs(left, right)
    }

    /// Image of the class under the orientation reversal `x -> -x`.
    pub fn reversed(self) -> C0Class {
        match self {
            C0Class::SemiStableRight => C0Class::SemiStableLeft,
            C0Class::SemiStableLeft => C0Class::SemiStableRight,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Largest degeneracy order searched for.
    pub max_order: usize,
    /// Relative zero threshold for jet coefficients.
    pub tol: f64,
    /// Classify flat germs topologically by sampling the sign of `f`.
    pub sample_signs: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            max_order: 7,
            tol: DEFAULT_ZERO_TOL,
            sample_signs: false,
        }
    }
}

impl ClassifyOptions {
    pub fn truncation(&self) -> usize {
        jets::default_truncation(self.max_order)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GermClassification {
    pub kind: GermKind,
    /// Order of the first non-vanishing coefficient; 0 for flat germs.
    pub k: usize,
    /// Taylor coefficient `f^(k)(0) / k!`.
    pub a: f64,
    /// Modulus of the tangent-to-identity C∞ model `a x^k + d x^(2k-1)`.
    pub d: Option<f64>,
    /// Residue of `1/f` at the origin (degenerate germs).
    pub residue: Option<f64>,
    pub sign: i8,
    pub determinacy_c1: Option<usize>,
    pub determinacy_cinf: Option<usize>,
    pub c0_class: Option<C0Class>,
    /// Highest jet order inspected.
    pub checked_order: usize,
    /// Tangent-to-identity change `psi` bringing the jet to its C∞ model.
    pub change: Option<TruncatedSeries>,
}

/// Result of the order-by-order reduction to `a x^k + d x^(2k-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BelitskiiReduction {
    pub a: f64,
    pub d: f64,
    /// Polynomial jet `psi` with `psi(0) = 0`, `psi'(0) = 1`.
    pub change: TruncatedSeries,
    /// Pullback `s(psi)/psi'` through order `2k-1`.
    pub reduced: TruncatedSeries,
}

fn check_leading(s: &TruncatedSeries, k: usize, tol: f64) -> Result<f64, ClassifyError> {
    match s.first_nonzero_order(tol) {
        JetOrder::Finite(found) if found == k => Ok(s.coeff(k)),
        JetOrder::Finite(found) => Err(ClassifyError::WrongOrder {
            k,
            reason: format!("first non-vanishing coefficient has order {found}"),
        }),
        JetOrder::Flat { .. } => Err(ClassifyError::WrongOrder {
            k,
            reason: "all coefficients vanish".into(),
        }),
    }
}

/// Removes the terms of orders `k+1 .. 2k-2` by tangent-to-identity
/// substitutions `x -> x + c x^(m-k+1)`; the coefficient left at the
/// resonant order `2k-1` is the modulus `d`.
pub fn belitskii_reduce(
    s: &TruncatedSeries,
    k: usize,
) -> Result<BelitskiiReduction, ClassifyError> {
    belitskii_reduce_with(s, k, DEFAULT_ZERO_TOL)
}

pub fn belitskii_reduce_with(
    s: &TruncatedSeries,
    k: usize,
    tol: f64,
) -> Result<BelitskiiReduction, ClassifyError> {
    if k < 2 {
        return Err(ClassifyError::NotDegenerate(k));
    }
    let top = 2 * k - 1;
    if s.order() < top {
        return Err(ClassifyError::InsufficientOrder {
            order: s.order(),
            needed: top,
        });
    }
    let jet = s.truncate(top);
    let a = check_leading(&jet, k, tol)?;
    let mut change = TruncatedSeries::identity(top);
    let mut current = jet.clone();
    for m in (k + 1)..=(2 * k - 2) {
        let c_m = current.coeff(m);
        if c_m == 0.0 {
            continue;
        }
        let j = m - k + 1;
        // a (x + c x^j)^k / (1 + j c x^(j-1)) = a x^k + a (k - j) c x^m + ...
        let c = -c_m / (a * (k - j) as f64);
        let mut step = TruncatedSeries::identity(top);
        step = &step + &TruncatedSeries::monomial(c, j, top);
        change = change.compose(&step)?;
        current = jet.pullback_by_polynomial(&change)?;
    }
    Ok(BelitskiiReduction {
        a,
        d: current.coeff(top),
        change,
        reduced: current,
    })
}

/// Coefficient of `x^(-1)` in the Laurent expansion of `1/f`, where `s`
/// starts at order `k`.
pub fn residue_of_reciprocal(s: &TruncatedSeries, k: usize) -> Result<f64, ClassifyError> {
    if s.order() < 2 * k - 1 {
        return Err(ClassifyError::InsufficientOrder {
            order: s.order(),
            needed: 2 * k - 1,
        });
    }
    let unit = s.shift_down(k)?;
    Ok(unit.reciprocal()?.coeff(k - 1))
}

/// Classifies a jet. Orders above `opts.max_order` are not searched, so a
/// jet vanishing through `max_order` is reported as flat.
pub fn classify_series(
    s: &TruncatedSeries,
    opts: &ClassifyOptions,
) -> Result<GermClassification, ClassifyError> {
    if opts.max_order < 2 {
        return Err(ClassifyError::MaxOrderTooSmall(opts.max_order));
    }
    let searched = s.truncate(opts.max_order);
    let k = match searched.first_nonzero_order(opts.tol) {
        JetOrder::Finite(k) => k,
        JetOrder::Flat { checked_order } => {
            return Ok(GermClassification {
                kind: GermKind::Flat,
                k: 0,
                a: 0.0,
                d: None,
                residue: None,
                sign: 0,
                determinacy_c1: None,
                determinacy_cinf: None,
                c0_class: None,
                checked_order,
                change: None,
            })
        }
    };
    let a = s.coeff(k);
    let sign_a: i8 = if a > 0.0 { 1 } else { -1 };
    let (kind, sign, determinacy_cinf) = match k {
        0 => (GermKind::Regular, sign_a, 0),
        1 => (GermKind::Hyperbolic, sign_a, 1),
        // x -> -x flips the sign of x^k exactly when k is even.
        _ => (
            GermKind::Degenerate,
            if k % 2 == 0 { 1 } else { sign_a },
            2 * k - 1,
        ),
    };
    let (d, residue, change) = if kind == GermKind::Degenerate {
        let reduction = belitskii_reduce_with(s, k, opts.tol)?;
        let residue = residue_of_reciprocal(s, k)?;
        let from_residue = -a * a * residue;
        if (reduction.d - from_residue).abs() > 1e-6 * reduction.d.abs().max(1.0) {
            return Err(ClassifyError::ModulusMismatch {
                reduction: reduction.d,
                residue: from_residue,
            });
        }
        (Some(reduction.d), Some(residue), Some(reduction.change))
    } else {
        (None, None, None)
    };
    Ok(GermClassification {
        kind,
        k,
        a,
        d,
        residue,
        sign,
        determinacy_c1: Some(k),
        determinacy_cinf: Some(determinacy_cinf),
        c0_class: Some(C0Class::from_jet(k, a)),
        checked_order: s.order(),
        change,
    })
}

fn logspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (l + (h - l) * i as f64 / (n - 1) as f64).exp())
}

// Sign of f on one side, if it is constant over the samples.
fn side_sign(f: &Expression, side: f64) -> Option<f64> {
    let mut sign = None;
    for x in logspace(1e-6, 1e-2, 25) {
        let v = f.evaluate(side * x).ok()?;
        if v == 0.0 {
            return None;
        }
        let s = v.signum();
        match sign {
            None => sign = Some(s),
            Some(prev) if prev != s => return None,
            _ => {}
        }
    }
    sign
}

/// Classifies the germ of the expression `f` at the origin.
pub fn classify_germ(
    f: &Expression,
    opts: &ClassifyOptions,
) -> Result<GermClassification, ClassifyError> {
    if opts.max_order < 2 {
        return Err(ClassifyError::MaxOrderTooSmall(opts.max_order));
    }
    let s = jets::taylor(f, opts.truncation())?;
    let mut c = classify_series(&s, opts)?;
    if c.kind != GermKind::Flat {
        return Ok(c);
    }
    let vanishes = [-1.0, 1.0].iter().all(|&side| {
        logspace(1e-6, 0.5, 40).all(|x| matches!(f.evaluate(side * x), Ok(v) if v.abs() <= 1e-14))
    });
    if vanishes {
        return Err(ClassifyError::ZeroField {
            checked_order: c.checked_order,
        });
    }
    if opts.sample_signs {
        if let (Some(left), Some(right)) = (side_sign(f, -1.0), side_sign(f, 1.0)) {
            c.c0_class = Some(C0Class::from_side_signs(left, right));
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    C0,
    C1,
    Cinf,
}

/// A local model: a polynomial field with its structural terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalForm {
    pub relation: Relation,
    pub tangent_to_identity: bool,
    /// `(degree, coefficient)` pairs in increasing degree.
    pub terms: Vec<(usize, f64)>,
}

impl NormalForm {
    pub fn coefficients(&self) -> TruncatedSeries {
        let degree = self.terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut c = vec![0.0; degree + 1];
        for &(n, v) in &self.terms {
            c[n] += v;
        }
        TruncatedSeries::from_polynomial(&c, degree)
    }

    pub fn expression(&self) -> Expression {
        Expression::polynomial(self.coefficients().coeffs())
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, c: f64, n: usize, leading: bool) -> fmt::Result {
    let power = match n {
        0 => String::new(),
        1 => "x".to_string(),
        _ => format!("x^{n}"),
    };
    if n == 0 {
        return write!(f, "{c}");
    }
    if leading && c == 1.0 {
        write!(f, "{power}")
    } else if leading && c == -1.0 {
        write!(f, "-{power}")
    } else {
        write!(f, "{c}*{power}")
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &(n, c)) in self.terms.iter().enumerate() {
            if i == 0 {
                write_monomial(f, c, n, true)?;
            } else {
                write!(f, "{}", if c < 0.0 { " - " } else { " + " })?;
                write_monomial(f, c.abs(), n, false)?;
            }
        }
        Ok(())
    }
}

/// The model of `c` under `relation`, in general or tangent-to-identity form.
///
/// The general C∞ model rescales `x` so the leading coefficient becomes the
/// sign `c.sign`; the modulus then becomes `d / a^2`, which is what the
/// residue of `1/f` preserves.
pub fn normal_form(
    c: &GermClassification,
    relation: Relation,
    tti: bool,
) -> Result<NormalForm, ClassifyError> {
    if c.kind == GermKind::Flat {
        return Err(ClassifyError::NotFinitelyDetermined { kind: c.kind });
    }
    let sign = c.sign as f64;
    let terms = match (relation, c.kind) {
        (Relation::C0, _) => match c.c0_class.unwrap_or(C0Class::Regular) {
            C0Class::Regular => vec![(0, 1.0)],
            C0Class::Attracting => vec![(1, -1.0)],
            C0Class::Repelling => vec![(1, 1.0)],
            C0Class::SemiStableLeft | C0Class::SemiStableRight => vec![(2, 1.0)],
        },
        (_, GermKind::Regular) => vec![(0, if tti { c.a } else { 1.0 })],
        (_, GermKind::Hyperbolic) => vec![(1, c.a)],
        (Relation::C1, GermKind::Degenerate) => {
            vec![(c.k, if tti { c.a } else { sign })]
        }
        (Relation::Cinf, GermKind::Degenerate) => {
            let d = c.d.unwrap_or(0.0);
            if tti {
                vec![(c.k, c.a), (2 * c.k - 1, d)]
            } else {
                vec![(c.k, sign), (2 * c.k - 1, d / (c.a * c.a))]
            }
        }
        (_, GermKind::Flat) => unreachable!("flat germs rejected above"),
    };
    Ok(NormalForm {
        relation,
        tangent_to_identity: tti && relation != Relation::C0,
        terms,
    })
}

/// All five models in display form, for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalForms {
    pub c0: String,
    pub c1: String,
    pub c1_tti: String,
    pub cinf: String,
    pub cinf_tti: String,
}

/// Serializable summary of a classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub kind: GermKind,
    pub k: usize,
    pub a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    pub sign: i8,
    pub determinacy_c1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub determinacy_cinf: Option<usize>,
    pub c0_class: Option<C0Class>,
    pub checked_order: usize,
    pub normal_forms: Option<NormalForms>,
}

impl GermClassification {
    pub fn normal_forms(&self) -> Option<NormalForms> {
        let nf = |r, tti| normal_form(self, r, tti).ok().map(|n| n.to_string());
        Some(NormalForms {
            c0: nf(Relation::C0, false)?,
            c1: nf(Relation::C1, false)?,
            c1_tti: nf(Relation::C1, true)?,
            cinf: nf(Relation::Cinf, false)?,
            cinf_tti: nf(Relation::Cinf, true)?,
        })
    }

    pub fn report(&self) -> ClassificationReport {
        ClassificationReport {
            kind: self.kind,
            k: self.k,
            a: self.a,
            d: self.d,
            sign: self.sign,
            determinacy_c1: self.determinacy_c1,
            determinacy_cinf: self.determinacy_cinf,
            c0_class: self.c0_class,
            checked_order: self.checked_order,
            normal_forms: self.normal_forms(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(text: &str) -> GermClassification {
        classify_germ(
            &Expression::parse(text).unwrap(),
            &ClassifyOptions::default(),
        )
        .unwrap()
    }

    fn series(c: &[f64], order: usize) -> TruncatedSeries {
        TruncatedSeries::from_polynomial(c, order)
    }

    #[test]
    fn degenerate_example() {
        let c = classify("x^2 + x^3");
        assert_eq!(c.kind, GermKind::Degenerate);
        assert_eq!((c.k, c.a, c.d), (2, 1.0, Some(1.0)));
        assert_eq!(c.determinacy_c1, Some(2));
        assert_eq!(c.determinacy_cinf, Some(3));
        assert_eq!(c.c0_class, Some(C0Class::SemiStableRight));
    }

    #[test]
    fn hyperbolic_and_regular_examples() {
        let h = classify("2*x + x^2");
        assert_eq!((h.kind, h.k, h.a), (GermKind::Hyperbolic, 1, 2.0));
        assert_eq!(
            normal_form(&h, Relation::C1, false).unwrap().to_string(),
            "2*x"
        );
        let r = classify("3 + x");
        assert_eq!((r.kind, r.k, r.a), (GermKind::Regular, 0, 3.0));
        assert_eq!(
            normal_form(&r, Relation::C1, false).unwrap().to_string(),
            "1"
        );
        assert_eq!(
            normal_form(&r, Relation::C1, true).unwrap().to_string(),
            "3"
        );
    }

    #[test]
    fn negative_square_pairs_with_square_under_reversal() {
        let neg = classify("-x^2");
        let pos = classify("x^2");
        assert_eq!(neg.c0_class, Some(C0Class::SemiStableLeft));
        assert_eq!(neg.c0_class.unwrap().reversed(), pos.c0_class.unwrap());
        assert_eq!(
            normal_form(&neg, Relation::C0, false).unwrap(),
            normal_form(&pos, Relation::C0, false).unwrap()
        );
        // Orientation reversal also removes the sign in the smooth model.
        assert_eq!(
            normal_form(&neg, Relation::Cinf, false)
                .unwrap()
                .to_string(),
            "x^2 + 0*x^3"
        );
    }

    #[test]
    fn c0_classes_from_parity_and_sign() {
        assert_eq!(classify("x^3").c0_class, Some(C0Class::Repelling));
        assert_eq!(classify("-x^3").c0_class, Some(C0Class::Attracting));
        assert_eq!(classify("-2*x").c0_class, Some(C0Class::Attracting));
        assert_eq!(classify("1 + x").c0_class, Some(C0Class::Regular));
        assert_eq!(
            normal_form(&classify("-x^3"), Relation::C0, false)
                .unwrap()
                .to_string(),
            "-x"
        );
    }

    #[test]
    fn normal_form_table_entries() {
        let deg = classify("x^2 + x^3");
        assert_eq!(
            normal_form(&deg, Relation::Cinf, false)
                .unwrap()
                .to_string(),
            "x^2 + 1*x^3"
        );
        let hyp = classify("-3*x + x^2");
        assert_eq!(
            normal_form(&hyp, Relation::C1, true).unwrap().to_string(),
            "-3*x"
        );
        let reg = classify("5 + sin(x)");
        assert_eq!(
            normal_form(&reg, Relation::C1, false).unwrap().to_string(),
            "1"
        );
        let cubic = classify("2*x^3 + x^5");
        assert_eq!(
            normal_form(&cubic, Relation::C1, true).unwrap().to_string(),
            "2*x^3"
        );
        assert_eq!(
            normal_form(&cubic, Relation::C1, false)
                .unwrap()
                .to_string(),
            "x^3"
        );
    }

    #[test]
    fn sign_of_the_smooth_model() {
        // Odd k keeps the sign of a (attracting stays attracting); even k is always +.
        for (text, sign) in [
            ("x^3", 1),
            ("-x^3", -1),
            ("x^2", 1),
            ("-x^2", 1),
            ("-2*x^4", 1),
            ("-x^5", -1),
        ] {
            let c = classify(text);
            let nf = normal_form(&c, Relation::Cinf, false).unwrap();
            assert_eq!(nf.terms[0].1, sign as f64, "{text}");
        }
    }

    #[test]
    fn general_smooth_modulus_is_rescaled() {
        // f = 2x^2 + 4x^3: d_tti = -a^2 Res = 4, general model x^2 + (d/a^2) x^3 = x^2 + x^3.
        let c = classify("2*x^2 + 4*x^3");
        assert!((c.d.unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(
            normal_form(&c, Relation::Cinf, false).unwrap().to_string(),
            "x^2 + 1*x^3"
        );
        assert_eq!(
            normal_form(&c, Relation::Cinf, true).unwrap().to_string(),
            "2*x^2 + 4*x^3"
        );
    }

    #[test]
    fn belitskii_examples() {
        let r = belitskii_reduce(&series(&[0.0, 0.0, 1.0, 1.0], 8), 2).unwrap();
        assert_eq!((r.a, r.d), (1.0, 1.0));
        let r = belitskii_reduce(&series(&[0.0, 0.0, 1.0], 8), 2).unwrap();
        assert_eq!((r.a, r.d), (1.0, 0.0));
        assert_eq!(r.change, TruncatedSeries::identity(3));
        let r = belitskii_reduce(&series(&[0.0, 0.0, 0.0, 1.0, 1.0], 8), 3).unwrap();
        assert_eq!(r.a, 1.0);
        assert!((r.d + 1.0).abs() < 1e-14, "{}", r.d);
        // Reduced jet is x^3 - x^5 through order 5.
        let reduced = r.reduced.coeffs();
        assert!(reduced[4].abs() < 1e-14);
        let psi = &r.change;
        assert_eq!((psi.coeff(0), psi.coeff(1)), (0.0, 1.0));
    }

    #[test]
    fn belitskii_errors() {
        assert!(matches!(
            belitskii_reduce(&series(&[0.0, 0.0, 1.0], 2), 2),
            Err(ClassifyError::InsufficientOrder { .. })
        ));
        assert!(matches!(
            belitskii_reduce(&series(&[0.0, 1.0, 1.0], 8), 2),
            Err(ClassifyError::WrongOrder { .. })
        ));
        assert!(matches!(
            belitskii_reduce(&series(&[0.0, 1.0], 8), 1),
            Err(ClassifyError::NotDegenerate(1))
        ));
    }

    #[test]
    fn residue_matches_laurent_expansion() {
        // 1/(x^2 + x^3) = x^-2 - x^-1 + 1 - ...
        let res = residue_of_reciprocal(&series(&[0.0, 0.0, 1.0, 1.0], 8), 2).unwrap();
        assert_eq!(res, -1.0);
    }

    #[test]
    fn zero_and_flat_fields() {
        let opts = ClassifyOptions::default();
        let err = classify_germ(&Expression::parse("0").unwrap(), &opts).unwrap_err();
        assert!(matches!(err, ClassifyError::ZeroField { .. }));
        let err = classify_germ(&Expression::parse("x - x").unwrap(), &opts).unwrap_err();
        assert!(matches!(err, ClassifyError::ZeroField { .. }));
        let flat = classify_germ(&Expression::parse("x^20").unwrap(), &opts).unwrap();
        assert_eq!(flat.kind, GermKind::Flat);
        assert_eq!(flat.c0_class, None);
        assert!(matches!(
            normal_form(&flat, Relation::C1, false),
            Err(ClassifyError::NotFinitelyDetermined { .. })
        ));
        let sampled = ClassifyOptions {
            sample_signs: true,
            ..opts
        };
        let flat = classify_germ(&Expression::parse("-x^21").unwrap(), &sampled).unwrap();
        assert_eq!(flat.c0_class, Some(C0Class::Attracting));
    }

    #[test]
    fn max_order_is_validated() {
        let opts = ClassifyOptions {
            max_order: 1,
            ..ClassifyOptions::default()
        };
        assert!(matches!(
            classify_germ(&Expression::parse("x").unwrap(), &opts),
            Err(ClassifyError::MaxOrderTooSmall(1))
        ));
    }

    #[test]
    fn report_shape() {
        let report = classify("x^2 + x^3").report();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["kind"], "Degenerate");
        assert_eq!(json["normal_forms"]["cinf"], "x^2 + 1*x^3");
        assert_eq!(json["c0_class"], "semi-stable-right");
        let hyp = serde_json::to_value(classify("2*x").report()).unwrap();
        assert!(hyp.get("d").is_none());
    }
}
