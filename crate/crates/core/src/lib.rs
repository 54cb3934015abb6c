//! Numerical laboratory for the one-dimensional stochastic Allen-Cahn equation
//!
//! ```text
//! du = (1/2) u_xx + u - u^3 + sqrt(eps) dW,   u(±L, t) = 0,   u(x, 0) = 0
//! ```
//!
//! on the growing interval `L = |ln eps|`, together with the Gaussian machinery
//! that governs the escape from the unstable zero state.
//!
//! Modules, bottom up:
//!
//! * [`kernels`]: whole-line and Dirichlet heat kernels (image and eigenfunction
//!   series) and the survival mass.
//! * [`gaussian`]: exact covariances of the stochastic convolution, exact
//!   samplers (folded Ornstein-Uhlenbeck modes, Cholesky for the limit field) and
//!   the sup-norm budget.
//! * [`scaling`]: every eps-derived scale and the x <-> r rescaling.
//! * [`solver`]: exponential-Euler spectral integrator for the stochastic and
//!   deterministic equations, comparison variants and periodic surrogates.
//! * [`verify`]: seeded Monte Carlo experiments producing [`verify::EnsembleSummary`].
//! * [`cli`]: configuration, dispatch, CSV/SVG output for the `spinodal` binary.

// Negated comparisons deliberately reject NaN; oracle constants keep every quoted digit.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod gaussian;
pub mod kernels;
pub mod quadrature;
pub mod rng;
pub mod scaling;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
