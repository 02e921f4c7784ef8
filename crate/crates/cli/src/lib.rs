//! Command-line front end for `wallach-core`.
//!
//! Every subcommand produces a [`report::RunReport`]. Text output is a
//! human summary of it; `--format json` prints the report itself and
//! `--format csv` is available for `scan`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

mod commands;
pub mod report;

use report::{ErrorReport, RunReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "wallach", version, about = "Projective-inducibility checks for Bergman metrics on bounded symmetric domains")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariants and Wallach set of a domain (e.g. I:2,2, III:3, IV:5, CH:2).
    Info { domain: String },
    /// Truncated Calabi verdict for N^{-lambda}.
    Calabi {
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 4)]
        cutoff: u32,
        #[arg(long, default_value_t = wallach_core::calabi::DEFAULT_TOL_ABS)]
        tol_abs: f64,
        #[arg(long, default_value_t = wallach_core::calabi::DEFAULT_TOL_REL)]
        tol_rel: f64,
    },
    /// Closed-form Wallach-set membership.
    Wallach {
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Random search for a point configuration with an indefinite Gram matrix.
    Gram {
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 6)]
        points: usize,
        /// Number of random restarts.
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the witness (if any) to this file.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Cartan–Hartogs reduction, e.g. "CHD(I:2,2;mu=einstein)".
    ChCheck {
        chspec: String,
        #[arg(long)]
        c: f64,
        /// Also compute the block verdict at this cutoff.
        #[arg(long)]
        cutoff: Option<u32>,
    },
    /// Finite-difference Einstein residual at seeded interior points.
    Einstein {
        chspec: String,
        #[arg(long, default_value_t = 3)]
        points: usize,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Minimum eigenvalue of every graded block over a lambda grid.
    Scan {
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda_from: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda_to: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value_t = 4)]
        cutoff: u32,
    },
    /// Component polynomials of the truncated immersion.
    Immersion {
        domain: String,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 3)]
        cutoff: u32,
    },
    /// Recompute the minimum eigenvalue of an archived Gram witness.
    Replay { witness: PathBuf },
}

/// What a subcommand hands back for rendering.
pub(crate) struct Output {
    pub report: RunReport,
    pub text: String,
    pub csv: Option<String>,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code: 0 on a consistent verdict, 2 when closed form and
/// numerics disagree, 1 on usage or runtime errors.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let msg = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{msg}");
            } else if json_requested(&argv) {
                let err = ErrorReport {
                    error: report::ErrorBody { kind: "usage".into(), message: msg.trim().to_string() },
                };
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&err).expect("serializable"));
            } else {
                let _ = write!(stderr, "{msg}");
            }
            return code;
        }
    };

    let (format, out) = (cli.format, cli.out.clone());
    match execute(cli, &argv).and_then(|o| render(&o, format).map(|s| (s, o.report.exit_code()))) {
        Ok((body, code)) => match emit(&body, out.as_deref(), stdout) {
            Ok(()) => code,
            Err(e) => fail(&e, format, stdout, stderr),
        },
        Err(e) => fail(&e, format, stdout, stderr),
    }
}

fn json_requested(argv: &[String]) -> bool {
    argv.windows(2).any(|w| w[0] == "--format" && w[1] == "json") || argv.iter().any(|a| a == "--format=json")
}

fn fail(e: &anyhow::Error, format: Format, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    if format == Format::Json {
        let err = ErrorReport::from_anyhow(e);
        let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&err).expect("serializable"));
    } else {
        let _ = writeln!(stderr, "error: {e:#}");
    }
    1
}

fn emit(body: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => stdout.write_all(body.as_bytes()).context("writing stdout"),
    }
}

fn render(o: &Output, format: Format) -> Result<String> {
    Ok(match format {
        Format::Text => o.text.clone(),
        Format::Json => serde_json::to_string_pretty(&o.report)? + "\n",
        Format::Csv => match &o.csv {
            Some(csv) => csv.clone(),
            None => bail!("--format csv is only supported by `scan`"),
        },
    })
}

fn execute(cli: Cli, argv: &[String]) -> Result<Output> {
    let start = Instant::now();
    let threads = cli.threads;
    let mut out = with_threads(threads, || -> Result<Output> {
        let mut o = commands::dispatch(cli.command, argv)?;
        o.report.threads = current_threads();
        Ok(o)
    })??;
    out.report.duration_s = start.elapsed().as_secs_f64();
    Ok(out)
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().context("building thread pool")?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    if threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    Ok(f())
}

fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
