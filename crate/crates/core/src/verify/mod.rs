//! Monte Carlo and quadrature experiments, one per claim, each returning an
//! [`EnsembleSummary`].
//!
//! Verdicts come only from [`Thresholds`], which are read from
//! `config/thresholds.toml` (embedded at build time, overridable at run time).

pub mod comparison;
pub mod contraction;
pub mod coupling;
pub mod ensemble;
pub mod lemma_xy;
pub mod stage1;
pub mod stats;
pub mod summary;
pub mod supnorm;
pub mod theorem_a;
pub mod theorem_b;

pub use comparison::exp_comparison;
pub use contraction::exp_det_contraction;
pub use coupling::exp_stage2_coupling;
pub use ensemble::run_replicas;
pub use lemma_xy::exp_lemma_xy;
pub use stage1::{exp_stage1, exp_u_minus_z};
pub use summary::{EnsembleSummary, Plot, Series, Statistic, Table, Verdict};
pub use supnorm::exp_supnorm;
pub use theorem_a::exp_theorem_a;
pub use theorem_b::exp_theorem_b;

use crate::error::{Error, Result};
use crate::solver::SolverConfig;
use serde::Deserialize;

/// Text of the shipped threshold file.
pub const DEFAULT_THRESHOLDS: &str = include_str!("../../config/thresholds.toml");

/// Pre-registered thresholds.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub min_replicas: usize,
    pub wilson_z: f64,
    pub sigma_band: f64,
    pub lag1_rel: f64,
    pub stage1_freq: f64,
    pub stage1_pass_max_eps: f64,
    pub theorem_b_freq: f64,
    pub supnorm_exceed_freq: f64,
    pub gamma_freq: f64,
    pub umz_freq: f64,
    pub umz_wilson_lower: f64,
    pub cubic_rel_tol: f64,
    pub coupling_freq: f64,
    pub coupling_m_z: f64,
    pub det_reflect_tol: f64,
    pub det_clamp_tol: f64,
    pub det_interface_exclusion: f64,
    pub comparison_tol: f64,
}

impl Thresholds {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("threshold file: {e}")))
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self::parse(DEFAULT_THRESHOLDS).expect("shipped threshold file parses")
    }
}

/// Settings shared by every experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub master_seed: u64,
    pub threads: usize,
    pub thresholds: Thresholds,
    /// Overrides of the experiment grid spacing and time step.
    pub dx: Option<f64>,
    pub dt: Option<f64>,
}

impl Default for Context {
    fn default() -> Self {
        Self { master_seed: 0, threads: 1, thresholds: Thresholds::default(), dx: None, dt: None }
    }
}

impl Context {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    /// Solver resolution for an interval of half-length `l`.
    pub fn solver_config(&self, l: f64) -> Result<SolverConfig> {
        let mut cfg = match self.dx {
            Some(dx) => SolverConfig::for_length(l, dx, 0.01, crate::solver::Drift::Full, self.master_seed),
            None => SolverConfig::experiment(l, self.master_seed),
        };
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_thresholds_parse() {
        let t = Thresholds::default();
        assert_eq!(t.min_replicas, 100);
        assert_eq!(t.sigma_band, 4.0);
    }

    #[test]
    fn unknown_threshold_key_is_rejected() {
        let text = format!("{DEFAULT_THRESHOLDS}\nbogus = 1.0\n");
        let err = Thresholds::parse(&text).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn dt_override_is_validated() {
        let ctx = Context { dt: Some(1.0), ..Context::default() };
        assert!(ctx.solver_config(5.0).is_err());
    }
}
