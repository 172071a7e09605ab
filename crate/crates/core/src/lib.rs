//! Germs of one-dimensional vector fields `f(x) d/dx` at the origin.
//!
//! * [`expr`]: parsing, evaluation and differentiation of `f`.
//! * [`jets`]: truncated Taylor series and their arithmetic.
//! * [`classify`]: order, coefficients, modulus and local models.
//! * [`conjugacy`]: explicit conjugating maps and the homological equation.
//! * [`flows`]: flows of the fields and verification of conjugacies.
//! * [`unfold`]: unfolding families, their equilibria and parameter sweeps.

pub mod classify;
pub mod conjugacy;
pub mod expr;
pub mod flows;
pub mod jets;
pub mod quad;
pub mod unfold;

pub use classify::{
    belitskii_reduce, classify_germ, classify_series, normal_form, ClassifyError, ClassifyOptions,
    GermClassification, GermKind, NormalForm, Relation,
};
pub use conjugacy::{
    c0_conjugacy, c1_conjugator, rectify_regular, scale_conjugacy, solve_homological, time_map,
    ConjugacyError, ConjugacyWitness,
};
pub use expr::Expression;
pub use flows::{flow, model_flow, verify_conjugacy, FlowResult, FlowStatus};
pub use jets::TruncatedSeries;
pub use unfold::{build_unfolding, equilibria, sweep, FamilyKind, UnfoldingFamily};
