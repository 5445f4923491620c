//! Diophantine properties of deformation parameters: interval reals,
//! continued fractions, badly-approximable scans and Jarnik-type
//! constructions of very well approximable numbers.

mod bv;
mod cf;
mod hp;
mod jarnik;

pub use bv::{
    bv_search, bv_search_with, classify_matrix, classify_normalized, ApproximabilityReport,
    BvOptions, MatrixReport, Verdict, Witness, DEFAULT_U_BOUND,
};
pub use cf::{
    cf_expand, cf_expand_available, irrationality_exponent_estimate, ContinuedFraction,
    IrrationalityEstimate,
};
pub use hp::{
    interval_less, ln_big_abs, ln_bounds, rational_to_decimal, rational_to_f64, Decision, HpReal,
    DEFAULT_DIGITS,
};
pub use jarnik::{
    jarnik_construct, jarnik_construct_with, Certificate, JarnikOptions, JarnikResult, Profile,
};
