//! Front end of the `spinodal` binary: configuration, dispatch and result files.
//!
//! Exit status: 0 when every verdict is pass or report-only, 1 when any
//! pre-registered check fails, 2 on usage, configuration or runtime errors.

pub mod config;
pub mod output;
pub mod plot;
pub mod reports;

pub use config::{Command, FileConfig, Flags, ParseFailure, RunConfig};
pub use output::{fmt_num, write_atomic, write_results, Provenance};
pub use plot::emit_plot;

use crate::error::{Error, Result};
use crate::verify::{self, Context, EnsembleSummary, Thresholds, Verdict, DEFAULT_THRESHOLDS};
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Replica counts used when `--n` is not given.
pub fn default_replicas(cmd: Command) -> usize {
    match cmd {
        Command::VerifyA => 10_000,
        Command::VerifyB | Command::VerifyStage1 => 500,
        Command::VerifySupnorm | Command::VerifyUmz | Command::VerifyCoupling => 200,
        Command::VerifyComparison => 100,
        _ => 0,
    }
}

/// One finished experiment.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: String,
    pub verdict: Verdict,
    pub dir: PathBuf,
}

fn load_thresholds(cfg: &RunConfig) -> Result<(Thresholds, String)> {
    let text = match &cfg.thresholds {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
        None => DEFAULT_THRESHOLDS.to_string(),
    };
    Ok((Thresholds::parse(&text)?, config::hex_digest(text.as_bytes())))
}

fn run_one(cmd: Command, cfg: &RunConfig, ctx: &Context) -> Result<Vec<(EnsembleSummary, String)>> {
    let n = cfg.n_replicas.unwrap_or_else(|| default_replicas(cmd));
    let label = cfg.label.clone();
    let one = |s: EnsembleSummary| Ok(vec![(s, label.clone())]);
    match cmd {
        Command::Simulate => one(reports::simulate_report(cfg.eps, cfg.b, cfg.theta, cfg.k, ctx)?),
        Command::Kernels => one(reports::kernels_report(cfg.eps)?),
        Command::Covariance => one(reports::covariance_report(cfg.eps, cfg.k, &cfg.lags)?),
        Command::VerifyA => one(verify::exp_theorem_a(cfg.eps, n, cfg.k, &cfg.lags, ctx)?),
        Command::VerifyB => one(verify::exp_theorem_b(cfg.eps, cfg.b, cfg.theta, cfg.k, n, ctx)?),
        Command::VerifyStage1 => one(verify::exp_stage1(cfg.eps, cfg.theta, cfg.k, n, ctx)?),
        Command::VerifyUmz => one(verify::exp_u_minus_z(cfg.eps, n, ctx)?),
        Command::VerifySupnorm => {
            // Without an explicit rho both levels of the tail bound are run.
            let rhos = cfg.rho.map_or(vec![0.0, 2.0], |r| vec![r]);
            let single = rhos.len() == 1;
            rhos.into_iter()
                .map(|r| {
                    let s = verify::exp_supnorm(cfg.eps, r, n, cfg.threshold_scale, ctx)?;
                    Ok((s, if single { label.clone() } else { format!("{label}-rho-{r}") }))
                })
                .collect()
        }
        Command::VerifyCoupling => one(verify::exp_stage2_coupling(cfg.eps, cfg.b, &cfg.m_levels, cfg.delta, cfg.q, cfg.k, n, ctx)?),
        Command::VerifyComparison => one(verify::exp_comparison(cfg.eps, n, ctx)?),
        Command::VerifyDet => one(verify::exp_det_contraction(cfg.eps, cfg.theta, cfg.rho.unwrap_or(0.1), cfg.q, cfg.k, ctx)?),
        Command::VerifyXy => one(verify::exp_lemma_xy(&cfg.eps_list, cfg.c, ctx)?),
        Command::All => unreachable!("expanded by dispatch"),
    }
}

/// Run the configured subcommand and write its results.
///
/// `progress` receives one line per finished experiment.
pub fn dispatch(cfg: &RunConfig, mut progress: impl FnMut(&Outcome)) -> Result<Vec<Outcome>> {
    let (thresholds, th_hash) = load_thresholds(cfg)?;
    let ctx = Context { master_seed: cfg.seed, threads: cfg.threads, thresholds, dx: cfg.dx, dt: cfg.dt };
    let cmds: Vec<Command> = if cfg.command == Command::All { Command::VERIFY.to_vec() } else { vec![cfg.command] };
    let mut outcomes = vec![];
    for cmd in cmds {
        let sub = RunConfig { command: cmd, ..cfg.clone() };
        let prov_base = Provenance {
            command: cmd.name().into(),
            label: String::new(),
            seed: cfg.seed,
            config_sha256: sub.hash(),
            thresholds_sha256: th_hash.clone(),
        };
        for (summary, label) in run_one(cmd, &sub, &ctx)? {
            let prov = Provenance { label, ..prov_base.clone() };
            let dir = write_results(&cfg.out, &summary, &prov)?;
            let o = Outcome { experiment: summary.experiment.clone(), verdict: summary.verdict, dir };
            progress(&o);
            outcomes.push(o);
        }
    }
    Ok(outcomes)
}

/// Exit status for a set of outcomes.
pub fn exit_code(outcomes: &[Outcome]) -> i32 {
    if outcomes.iter().any(|o| o.verdict == Verdict::Fail) {
        EXIT_FAIL
    } else {
        EXIT_OK
    }
}

/// Full command-line entry point; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::from_args(args) {
        Ok(c) => c,
        Err(ParseFailure::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
        Err(ParseFailure::Config(e)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match dispatch(&cfg, |o| println!("{:<16} {:<7} {}", o.experiment, o.verdict.as_str(), o.dir.display())) {
        Ok(outcomes) => exit_code(&outcomes),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
