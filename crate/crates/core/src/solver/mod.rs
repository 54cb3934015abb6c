//! Time integration of the stochastic and deterministic equations on
//! `[-L, L]` with Dirichlet conditions, comparison variants, periodic
//! surrogates and the explicit ODE solution.

pub mod config;
pub mod dst;
pub mod field;
pub mod integrator;
pub mod noise;
pub mod ode;
pub mod periodic;

pub use config::{Drift, Scheme, SolverConfig};
pub use field::{plateau, Field, PeriodicField};
pub use integrator::{run_arms, run_comparison_triple, run_deterministic, run_stochastic, ComparisonRun, RunOutput, Stepper};
pub use noise::{NoiseDigest, NoisePanel};
pub use ode::{ode_w, time_to_level};
pub use periodic::{clamp_extend, reflect_extend, run_periodic};
