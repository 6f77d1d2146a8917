//! Numerics for a regularized Finsleroid metric family.
//!
//! The library evaluates the metric function `K`, the Finsler metric tensor,
//! the Cartan tensor, and the spray coefficients of a positive-definite
//! Finsler structure built from a Riemannian metric `a_ij(x)`, an axis 1-form
//! `b_i(x)` with norm `c` strictly between 0 and 1, and a scalar charge
//! `g(x)` in (-2, 2). All derivatives are produced by exact forward-mode
//! automatic differentiation (nested dual numbers); the verification suites
//! cross-check every closed form against an independent differentiated route.
//!
//! Entry points:
//! - [`jets`]: validated pointwise input data and special-case builders.
//! - [`metric`], [`cartan`], [`spray`]: the tensor evaluations.
//! - [`landsberg`]: classification harnesses (Berwald verdicts, the
//!   proportional-covariant-derivative family, and the probe that shows the
//!   Landsberg condition collapsing to the Berwald one).
//! - [`fields`]: analytic field definitions, jet extraction, geodesics.
//! - [`verify`]: seeded identity suites with machine-readable reports.
//!
//! Runnable walkthroughs live in `examples/`; the `frspace` binary exposes
//! the same functionality as subcommands.
//!
//! ```
//! use frspace::{jets, metric, spray};
//!
//! // a reproducible random point with axis norm in (0.2, 0.8) and charge in (-1.5, 1.5)
//! let jet = jets::random_jet(3, 42, (0.2, 0.8), (-1.5, 1.5))?;
//! let y = [0.7, -0.3, 0.5];
//!
//! // metric function and metric tensor
//! let (k, _, scalars) = metric::metric_k(&jet, &y)?;
//! let eval = metric::metric_tensor(&jet, &y)?;
//! assert!((eval.gmat.dot(&eval.ginv)[(0, 0)] - 1.0).abs() < 1e-12);
//! assert!(scalars.nu > 0.0);
//!
//! // spray coefficients against the independent oracle route
//! let closed = spray::spray(&jet, &y)?.g;
//! let oracle = spray::spray_oracle(&jet, &y)?;
//! for i in 0..3 {
//!     assert!((closed[i] - oracle[i]).abs() <= 1e-10 * (1.0 + k));
//! }
//! # Ok::<(), frspace::Error>(())
//! ```

// indexed loops with row swaps and mirrored writes are the clearest form for
// the small dense kernels here
#![allow(clippy::needless_range_loop)]

pub mod cartan;
pub mod cli;
pub mod dual;
mod error;
pub mod fields;
mod geom;
pub mod jets;
pub mod landsberg;
pub mod linalg;
pub mod metric;
pub mod riemannian;
pub mod rng;
pub mod spray;
pub mod verify;

pub use error::{Error, Result};
