//! Command-line front end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::numerics::NumericContext;

pub use output::{fmt_f64, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "berezin-lab",
    version,
    about = "Berezin transforms on Fock-type spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
    /// Worker threads for grid evaluation; 0 uses all cores.
    #[arg(long, global = true, env = "BEREZIN_LAB_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub eps_series: Option<f64>,
    #[arg(long, global = true)]
    pub eps_match: Option<f64>,
    /// Row truncation K for residual and rank decisions.
    #[arg(long = "rows-K", global = true)]
    pub rows_k: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply B_m to a polynomial.
    Transform {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        poly: String,
        /// Evaluate at this point ("re,im" or "re").
        #[arg(long, value_parser = parse_point)]
        at: Option<Complex64>,
        /// Disk radius on which strip-series tails are certified.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Decide whether B_m f = f.
    Check {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        poly: String,
    },
    /// Emit [B_2] (without --m) or the operator matrix a_{j,k}(m).
    Matrix {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        tau: i32,
        #[arg(long)]
        m: Option<f64>,
    },
    /// Scan det S_n(m) over a grid of m for sign changes.
    Scan {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        tau: i32,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
    },
    /// Compare the series and quadrature evaluations of B_m f.
    OracleDiff {
        /// Comma-separated weights; defaults to 1,2,4.
        #[arg(long, value_delimiter = ',')]
        m: Vec<f64>,
        /// Defaults to every monomial of degree at most 4.
        #[arg(long)]
        poly: Option<String>,
        /// Repeatable; defaults to 0.5, 1+i, 2i and -1.5.
        #[arg(long, value_parser = parse_point)]
        at: Vec<Complex64>,
    },
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad number {t:?}: {e}"))
    };
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(s)?, 0.0)),
    }
}

impl Common {
    pub fn context(&self) -> NumericContext {
        let mut ctx = NumericContext::default();
        if let Some(e) = self.eps_series {
            ctx.eps_series = e;
        }
        if let Some(e) = self.eps_match {
            ctx.eps_match = e;
        }
        if self.rows_k.is_some() {
            ctx.rows_k = self.rows_k;
        }
        ctx
    }
}

/// Rendered output and the exit status it implies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub code: u8,
}

/// Runs a parsed command line and returns its output without printing it.
pub fn execute(cli: &Cli) -> crate::Result<Outcome> {
    let ctx = cli.common.context();
    ctx.validate()?;
    let work = || commands::dispatch(&cli.command, cli.common.format, &ctx);
    match cli.common.threads {
        Some(t) if t > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| crate::Error::Precondition(e.to_string()))?
            .install(work),
        _ => work(),
    }
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            let written = match &cli.common.out {
                Some(path) => std::fs::write(path, &outcome.text),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(outcome.text.as_bytes())
                }
            };
            match written {
                Ok(()) => ExitCode::from(outcome.code),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
