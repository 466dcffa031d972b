//! `warptrap` experiment driver. Each subcommand resolves a config (file, then
//! flags), runs, and writes CSV tables, summary.json, a gnuplot script and
//! manifest.json into `--out`.
//!
//! Exit codes: 0 all checks pass, 1 invalid input, 2 a check failed,
//! 3 a numerical method did not converge.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Quasimode,
    Bifurcation,
    Confinement,
    Le1Growth,
    MultiplierAudit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Quasimode => "quasimode",
            Command::Bifurcation => "bifurcation",
            Command::Confinement => "confinement",
            Command::Le1Growth => "le1-growth",
            Command::MultiplierAudit => "multiplier-audit",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "warptrap", version, about = "Dirichlet wave experiments on a warped product")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Quasimode scan over l: τ², bracket, residuals, Agmon ratio and decay fits.
    Quasimode(RunArgs),
    /// Matched x0 > 0 / x0 < 0 runs: local energy curves and LE ratio tables.
    Bifurcation(RunArgs),
    /// Evolution of quasimode data: E, E_R, running LE¹ and the Duhamel gap.
    Confinement(RunArgs),
    /// LE¹[0,T] / D(B^k) ratios of quasimode data against a threshold A.
    Le1Growth(RunArgs),
    /// Multiplier identity, Hardy inequality and coefficient positivity.
    MultiplierAudit(RunArgs),
}

/// Flags override the config file.
#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config, or a CSV written by this tool (its `# config:` header is read).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long)]
    x0_plus: Option<f64>,
    /// Explicit degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    l: Option<Vec<usize>>,
    #[arg(long)]
    lmin: Option<usize>,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long)]
    lstep: Option<usize>,
    /// Interior nodes on (x0, 0).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Ratio A for le1-growth.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if self.x0.is_some() {
            cfg.x0 = self.x0;
        }
        if let Some(v) = self.x0_plus {
            cfg.x0_plus = v;
        }
        let range_given = self.lmin.is_some() || self.lmax.is_some() || self.lstep.is_some();
        if let Some(v) = &self.l {
            cfg.l_list = v.clone();
        } else if range_given {
            cfg.l_list.clear();
        }
        cfg.l_min = self.lmin.or(cfg.l_min);
        cfg.l_max = self.lmax.or(cfg.l_max);
        cfg.l_step = self.lstep.or(cfg.l_step);
        if let Some(v) = self.n {
            cfg.n_interval = v;
        }
        if let Some(v) = self.x_max {
            cfg.x_max = v;
        }
        if self.r.is_some() {
            cfg.r = self.r;
        }
        if let Some(t) = self.t {
            cfg.t_max = Some(t);
            cfg.checkpoints.clear();
            cfg.x_max_plus = None;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        if self.delta.is_some() {
            cfg.delta = self.delta;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        Ok(cfg)
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<warptrap::Error>() {
        Some(e) if e.is_numerical() => 3,
        Some(warptrap::Error::Fit(_) | warptrap::Error::WallContaminated { .. }) => 2,
        _ => 1,
    }
}

fn run(cmd: Command, args: &RunArgs) -> anyhow::Result<bool> {
    let start = Instant::now();
    let cfg = args.config()?.resolve(cmd)?;
    let artifacts = commands::run(cmd, &cfg)?;
    for c in &artifacts.checks {
        eprintln!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let passed = artifacts.passed();
    let files = artifacts.write(&args.out, cmd, &cfg, start.elapsed())?;
    eprintln!("wrote {} files to {}", files.len(), args.out.display());
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Sub::Quasimode(a) => (Command::Quasimode, a),
        Sub::Bifurcation(a) => (Command::Bifurcation, a),
        Sub::Confinement(a) => (Command::Confinement, a),
        Sub::Le1Growth(a) => (Command::Le1Growth, a),
        Sub::MultiplierAudit(a) => (Command::MultiplierAudit, a),
    };
    match run(cmd, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
