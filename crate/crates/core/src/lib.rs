//! Numerical toolkit for integral solvability criteria of degenerate
//! Beltrami equations.
//!
//! The crate decides divergence-type integral conditions on dilatation
//! bounds, runs the Lehto-type solvability tests they feed, constructs the
//! explicit radial maps that show the criteria sharp, and builds the sewn
//! convex growth functions whose pathologies delimit them.
//!
//! Module map:
//! - [`ext`]: arithmetic on `[0, ∞]`.
//! - [`monotone`]: monotone functions, generalized inverses, compositions,
//!   tail convexification.
//! - [`conditions`]: the six equivalent divergence conditions and their
//!   truncation-based classifier.
//! - [`dilatation`]: complex coefficients, pointwise and tangential
//!   dilatations, circle averages.
//! - [`solvability`]: Lehto tests, the Jensen-type lower bound, and the
//!   integral existence criteria.
//! - [`radial`]: the radial construction machinery and its verifications.
//! - [`phi_factory`]: sewn piecewise growth functions and their
//!   certificates.
//! - [`oracle`]: brute-force reference evaluators for test suites.

pub mod conditions;
pub mod dilatation;
pub mod ext;
pub mod monotone;
pub mod oracle;
pub mod phi_factory;
pub mod quad;
pub mod radial;
pub mod sample;
pub mod solvability;

pub use ext::ExtReal;
