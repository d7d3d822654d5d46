//! Fractional derivatives as series of ordinary derivatives.
//!
//! The library evaluates the Grünwald-Letnikov, Riemann-Liouville and Caputo
//! fractional derivatives of order `q > 0` through the expansion
//!
//! ```text
//! D^q f(x) = Σ_k  C(q, k) (x - a)^(k - q) / Γ(k - q + 1) · f^(k)(x)
//! ```
//!
//! truncated after a finite number of terms. Integer derivatives come from
//! exact Taylor jets of a small catalog of functions, so truncations up to
//! a few dozen terms are evaluated without finite-difference noise.
//!
//! Module map:
//!
//! * [`specials`]: gamma, reciprocal gamma, generalized binomials,
//!   Mittag-Leffler and Fox-Wright series, Hermite polynomials.
//! * [`jets`]: truncated Taylor arithmetic and the function catalog.
//! * [`gl_discrete`]: the discrete Grünwald-Letnikov sum used as an oracle.
//! * [`grid`]: uniform and geometric evaluation grids.
//! * [`expansion`]: the truncated series for all three definitions.
//! * [`fde`]: truncated second-order ODEs for two linear fractional
//!   differential equations, RK4 integration and shooting.
//! * [`metrics`]: relative error and truncation sweeps.
//! * [`cli`]: the `fracseries` command-line front end.

pub mod cli;
pub mod error;
pub mod expansion;
pub mod fde;
pub mod gl_discrete;
pub mod grid;
pub mod jets;
pub mod metrics;
pub mod selftest;
pub mod specials;
pub mod summation;

pub use error::{Error, Result};
pub use expansion::{frac_derivative, series_weight, Definition, ExpansionConfig, Order};
pub use jets::{CatalogFn, Jet};
