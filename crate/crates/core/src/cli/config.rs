//! Run configuration: flat TOML file, command-line flags on top, documented defaults.

use crate::error::{Error, Result};
use crate::scaling::make_schedule;
use clap::{Parser, ValueEnum};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SPINODAL_OUT";
/// Output directory when neither `--out` nor the environment variable is set.
pub const DEFAULT_OUT: &str = "results";

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_EPS_LIST: [f64; 3] = [1e-2, 1e-4, 1e-6];
pub const DEFAULT_LAGS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
pub const DEFAULT_M_LEVELS: [f64; 2] = [2.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// One stochastic run with profiles at T_hat/2, T_hat and T^b
    #[value(name = "simulate")]
    Simulate,
    /// Dirichlet heat kernel tables (images vs eigenfunctions)
    #[value(name = "kernels")]
    Kernels,
    /// Exact and limit covariance of the normalized field
    #[value(name = "covariance")]
    Covariance,
    #[value(name = "verify-a")]
    VerifyA,
    #[value(name = "verify-b")]
    VerifyB,
    #[value(name = "verify-stage1")]
    VerifyStage1,
    #[value(name = "verify-umz")]
    VerifyUmz,
    #[value(name = "verify-supnorm")]
    VerifySupnorm,
    #[value(name = "verify-coupling")]
    VerifyCoupling,
    #[value(name = "verify-comparison")]
    VerifyComparison,
    #[value(name = "verify-det")]
    VerifyDet,
    #[value(name = "verify-xy")]
    VerifyXy,
    /// Every verify-* subcommand with its defaults
    #[value(name = "all")]
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Kernels => "kernels",
            Command::Covariance => "covariance",
            Command::VerifyA => "verify-a",
            Command::VerifyB => "verify-b",
            Command::VerifyStage1 => "verify-stage1",
            Command::VerifyUmz => "verify-umz",
            Command::VerifySupnorm => "verify-supnorm",
            Command::VerifyCoupling => "verify-coupling",
            Command::VerifyComparison => "verify-comparison",
            Command::VerifyDet => "verify-det",
            Command::VerifyXy => "verify-xy",
            Command::All => "all",
        }
    }

    /// The verify-* subcommands in the order `all` runs them.
    pub const VERIFY: [Command; 9] = [
        Command::VerifyXy,
        Command::VerifyDet,
        Command::VerifySupnorm,
        Command::VerifyA,
        Command::VerifyComparison,
        Command::VerifyUmz,
        Command::VerifyStage1,
        Command::VerifyCoupling,
        Command::VerifyB,
    ];
}

/// Command-line interface. Every flag overrides the same key of the config file.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "spinodal", version, about = "Stochastic Allen-Cahn laboratory: simulation and Monte Carlo checks")]
pub struct Flags {
    /// Subcommand; may also be given as `subcommand = "..."` in the config file
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Flat TOML config file with the same keys as the flags (underscores for dashes)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Noise intensity, in (0, e^-1) for every subcommand [default: 1e-6]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated eps sweep for verify-xy [default: 1e-2,1e-4,1e-6]
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    /// Pattern constant b in T^b = T_hat + 1/4 ln|ln eps| + b [default: 3]
    #[arg(long)]
    pub b: Option<f64>,
    /// Excursion constant theta [default: 1]
    #[arg(long)]
    pub theta: Option<f64>,
    /// Window constant K in K_eps = K sqrt|ln eps| [default: 2]
    #[arg(long)]
    pub k: Option<f64>,
    /// Inner window fraction q in (0, 1) [default: 0.8]
    #[arg(long)]
    pub q: Option<f64>,
    /// Tolerance rho: sup-norm level for verify-supnorm, contraction target for verify-det [default: 0 and 0.1]
    #[arg(long)]
    pub rho: Option<f64>,
    /// Interior band fraction c in (0, 1) for verify-xy [default: 0.5]
    #[arg(long)]
    pub c: Option<f64>,
    /// Comma-separated adverse clamp levels M >= 1 for verify-coupling [default: 2,10]
    #[arg(long, value_delimiter = ',')]
    pub m_levels: Option<Vec<f64>>,
    /// Coupling distance delta [default: 0.1]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated lags for verify-a and covariance [default: 0,0.5,1,2]
    #[arg(long, value_delimiter = ',')]
    pub lags: Option<Vec<f64>>,
    /// Number of replicas [default: 10000 for verify-a, 500 for verify-b and verify-stage1, 200 for verify-supnorm, verify-umz and verify-coupling, 100 for verify-comparison]
    #[arg(long = "n")]
    pub n_replicas: Option<usize>,
    /// Grid spacing override [default: 0.1 for Monte Carlo runs, 0.05 for verify-det]
    #[arg(long)]
    pub dx: Option<f64>,
    /// Time step override [default: min(dx^2, 0.01), 1e-3 for verify-det]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Threshold scale for verify-supnorm; values other than 1 make the run report-only [default: 1]
    #[arg(long)]
    pub threshold_scale: Option<f64>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: $SPINODAL_OUT, else ./results]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run label, the last path component of the output directory [default: seed-<seed>]
    #[arg(long)]
    pub label: Option<String>,
    /// Worker threads; results do not depend on it [default: available parallelism]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Threshold file replacing the shipped one
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
}

/// Keys accepted in the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub subcommand: Option<Command>,
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    pub b: Option<f64>,
    pub theta: Option<f64>,
    pub k: Option<f64>,
    pub q: Option<f64>,
    pub rho: Option<f64>,
    pub c: Option<f64>,
    pub m_levels: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub lags: Option<Vec<f64>>,
    pub n_replicas: Option<usize>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub threshold_scale: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub label: Option<String>,
    pub threads: Option<usize>,
    pub thresholds: Option<PathBuf>,
}

impl FileConfig {
    /// Parse config text; errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub eps: f64,
    pub eps_list: Vec<f64>,
    pub b: f64,
    pub theta: f64,
    pub k: f64,
    pub q: f64,
    /// `None` means the subcommand default.
    pub rho: Option<f64>,
    pub c: f64,
    pub m_levels: Vec<f64>,
    pub delta: f64,
    pub lags: Vec<f64>,
    pub n_replicas: Option<usize>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub threshold_scale: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub label: String,
    pub threads: usize,
    pub thresholds: Option<PathBuf>,
}

impl RunConfig {
    /// Merge flags over file over defaults and validate.
    pub fn resolve(flags: Flags, file: FileConfig) -> Result<Self> {
        let command = flags.command.or(file.subcommand).ok_or_else(|| Error::Config("no subcommand given (see --help)".into()))?;
        let seed = flags.seed.or(file.seed).unwrap_or(0);
        let out = flags
            .out
            .or(file.out)
            .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let threads = flags.threads.or(file.threads).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let cfg = Self {
            command,
            eps: flags.eps.or(file.eps).unwrap_or(DEFAULT_EPS),
            eps_list: flags.eps_list.or(file.eps_list).unwrap_or_else(|| DEFAULT_EPS_LIST.to_vec()),
            b: flags.b.or(file.b).unwrap_or(3.0),
            theta: flags.theta.or(file.theta).unwrap_or(1.0),
            k: flags.k.or(file.k).unwrap_or(2.0),
            q: flags.q.or(file.q).unwrap_or(0.8),
            rho: flags.rho.or(file.rho),
            c: flags.c.or(file.c).unwrap_or(0.5),
            m_levels: flags.m_levels.or(file.m_levels).unwrap_or_else(|| DEFAULT_M_LEVELS.to_vec()),
            delta: flags.delta.or(file.delta).unwrap_or(0.1),
            lags: flags.lags.or(file.lags).unwrap_or_else(|| DEFAULT_LAGS.to_vec()),
            n_replicas: flags.n_replicas.or(file.n_replicas),
            dx: flags.dx.or(file.dx),
            dt: flags.dt.or(file.dt),
            threshold_scale: flags.threshold_scale.or(file.threshold_scale).unwrap_or(1.0),
            seed,
            out,
            label: flags.label.or(file.label).unwrap_or_else(|| format!("seed-{seed}")),
            threads,
            thresholds: flags.thresholds.or(file.thresholds),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse the process arguments (plus the config file they name).
    pub fn from_args<I, T>(args: I) -> std::result::Result<Self, ParseFailure>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let flags = Flags::try_parse_from(args).map_err(ParseFailure::Clap)?;
        let file = match &flags.config {
            Some(p) => FileConfig::load(p).map_err(ParseFailure::Config)?,
            None => FileConfig::default(),
        };
        Self::resolve(flags, file).map_err(ParseFailure::Config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let unit = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be in (0,1), got {v}")))
            }
        };
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        unit("eps", self.eps)?;
        if self.eps_list.is_empty() {
            return bad("eps_list is empty".into());
        }
        for &e in &self.eps_list {
            unit("eps_list entry", e)?;
            make_schedule(e, 1.0, 1.0).map_err(|err| Error::Config(format!("eps_list entry {e}: {err}")))?;
        }
        positive("theta", self.theta)?;
        positive("k", self.k)?;
        unit("q", self.q)?;
        unit("c", self.c)?;
        positive("delta", self.delta)?;
        positive("threshold_scale", self.threshold_scale)?;
        if !self.b.is_finite() {
            return bad(format!("b must be finite, got {}", self.b));
        }
        if let Some(r) = self.rho {
            if !(r >= 0.0 && r.is_finite()) {
                return bad(format!("rho must be nonnegative and finite, got {r}"));
            }
        }
        if let Some(&m) = self.m_levels.iter().find(|&&m| !(m >= 1.0 && m.is_finite())) {
            return bad(format!("clamp levels must be at least 1, got {m}"));
        }
        if self.lags.is_empty() || self.lags.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return bad(format!("lags must be a nonempty list of nonnegative numbers, got {:?}", self.lags));
        }
        if self.n_replicas == Some(0) {
            return bad("n must be at least 1".into());
        }
        if let Some(dx) = self.dx {
            positive("dx", dx)?;
        }
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        if self.label.is_empty() || self.label.contains(['/', '\\']) || self.label == "." || self.label == ".." {
            return bad(format!("label must be a plain directory name, got {:?}", self.label));
        }
        make_schedule(self.eps, self.b, self.k).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// SHA-256 over every setting that can change the results (not threads, output paths or label).
    pub fn hash(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let opt = |v: Option<f64>| v.map_or("default".to_string(), |x| format!("{x:e}"));
        let canon = format!(
            "command={}\neps={:e}\neps_list={}\nb={:e}\ntheta={:e}\nk={:e}\nq={:e}\nrho={}\nc={:e}\nm_levels={}\ndelta={:e}\nlags={}\nn={}\ndx={}\ndt={}\nthreshold_scale={:e}\nseed={}\n",
            self.command.name(),
            self.eps,
            list(&self.eps_list),
            self.b,
            self.theta,
            self.k,
            self.q,
            opt(self.rho),
            self.c,
            list(&self.m_levels),
            self.delta,
            list(&self.lags),
            self.n_replicas.map_or("default".to_string(), |n| n.to_string()),
            opt(self.dx),
            opt(self.dt),
            self.threshold_scale,
            self.seed,
        );
        hex_digest(canon.as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Why the arguments could not be turned into a [`RunConfig`].
#[derive(Debug)]
pub enum ParseFailure {
    /// Usage error, `--help` or `--version`, rendered by clap.
    Clap(clap::Error),
    Config(Error),
}
