//! Exact arithmetic in `Q_p` and its unramified extensions, Volkenborn
//! integration, and the p-adic log-gamma functions it supports, together
//! with a mechanical checker for the identities relating them.
//!
//! The crate is organized bottom-up:
//!
//! - [`context`] / [`number`]: truncated arithmetic with honest precision
//!   tracking, residue-field queries, Teichmueller lifts, the Dwork shift.
//! - [`iwasawa`]: the Iwasawa logarithm (`log_p(p) = 0`).
//! - [`volkenborn`]: the limit-of-Riemann-sums integration engine with a
//!   convergence trace and certified achieved precision.
//! - [`loggamma`]: the special functions (`phi_p`, the log-gamma functions of
//!   Morita and Diamond and their common locally analytic refinement, the
//!   `R_P` correction term, the Morita series coefficients).
//! - [`distribution`]: the shift-sequence construction and both sides of the
//!   distribution formula.
//! - [`checks`]: the identity catalogue, reproducible sampling plans, and
//!   `CheckReport` production.

pub mod checks;
pub mod context;
pub mod distribution;
pub mod error;
pub mod exact;
pub mod iwasawa;
pub mod loggamma;
pub mod number;
pub mod volkenborn;

pub use context::PadicContext;
pub use error::{PadicError, Result};
pub use exact::ExactValue;
pub use number::{PadicNumber, ResidueElement, Valuation};
pub use volkenborn::{Certified, ConvergencePolicy, IntegralResult};
