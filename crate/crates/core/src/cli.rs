//! The `kms` command line.
//!
//! Exit codes: 0 success, 2 invalid input or violated invariant, 3 numerical
//! failure, 4 partial fit (stage 1 succeeded, stage 2 failed or was flagged).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimator::{fit_trace, FitReport};
use crate::format::significant;
use crate::model::{curve, threshold_grid, ChannelParams, DopplerParams, Statistic};
use crate::simulator::{generate, measure, EnvelopeTrace, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PARTIAL_FIT: i32 = 4;

const DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "kms", version, about = "κ-μ shadowed fading statistics, simulation and fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one statistic at one amplitude.
    Eval {
        #[arg(long)]
        stat: Statistic,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        r: f64,
    },
    /// Tabulate a statistic over a dB threshold grid relative to r̄.
    Curve {
        #[arg(long)]
        stat: Statistic,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize an envelope trace.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        /// Maximum Doppler frequency, Hz.
        #[arg(long)]
        fm: f64,
        /// Sample rate, Hz.
        #[arg(long)]
        fs: f64,
        /// Record length, s.
        #[arg(long)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shadowing bandwidth, Hz (default: --fm).
        #[arg(long)]
        shadow_fm: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count crossings of a trace and derive normalized LCR and AFD.
    Empirical {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        fm: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit (κ, μ, m, r̄) to the amplitude PDF, then (f_m, ρ) to the LCR.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Overrides the sample rate stored in the trace file, Hz.
        #[arg(long)]
        fs: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    kappa: f64,
    #[arg(long, allow_negative_numbers = true)]
    mu: f64,
    #[arg(long, allow_negative_numbers = true)]
    m: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    rbar: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rho: f64,
}

impl ParamArgs {
    fn build(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.kappa, self.mu, self.m, self.rbar, self.rho)
    }
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = -30.0, allow_negative_numbers = true)]
    db_from: f64,
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    db_to: f64,
    #[arg(long, default_value_t = 37)]
    points: usize,
}

impl GridArgs {
    fn build(&self) -> Result<Vec<f64>> {
        threshold_grid(self.db_from, self.db_to, self.points)
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Eval { stat, params, r } => {
            let value = stat.evaluate(&params.build()?, r)?;
            writeln!(stdout, "{}", significant(value, DIGITS))?;
            Ok(EXIT_OK)
        }
        Command::Curve { stat, params, grid, out } => {
            let c = curve(&params.build()?, stat, &grid.build()?)?;
            for miss in &c.missing {
                writeln!(stderr, "warning: {} at {} dB: {}", stat, c.thresholds_db[miss.index], miss.reason)?;
            }
            emit(out.as_deref(), stdout, |w| {
                writeln!(w, "threshold_db,value")?;
                for (db, v) in c.thresholds_db.iter().zip(&c.values) {
                    writeln!(w, "{},{}", significant(*db, DIGITS), significant(*v, DIGITS))?;
                }
                Ok(())
            })?;
            Ok(EXIT_OK)
        }
        Command::Simulate { params, fm, fs, duration, seed, shadow_fm, out } => {
            let mut cfg = SimConfig::new(params.build()?, DopplerParams::new(fm)?, fs, duration, seed)?;
            if let Some(hz) = shadow_fm {
                cfg = cfg.with_shadow_doppler(hz)?;
            }
            let trace = generate(&cfg)?;
            emit(out.as_deref(), stdout, |w| trace.write_to(w))?;
            Ok(EXIT_OK)
        }
        Command::Empirical { input, fm, grid, out } => {
            let trace = EnvelopeTrace::load(&input).map_err(|e| in_file(&input, e))?;
            let e = measure(&trace, &DopplerParams::new(fm)?, &grid.build()?)?;
            emit(out.as_deref(), stdout, |w| {
                writeln!(w, "threshold_db,lcr_normalized,afd_normalized,upcrossings,n_fades")?;
                for i in 0..e.thresholds_db.len() {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        significant(e.thresholds_db[i], DIGITS),
                        significant(e.lcr_normalized[i], DIGITS),
                        significant(e.afd_normalized[i], DIGITS),
                        e.upcrossings[i],
                        e.n_fades[i]
                    )?;
                }
                Ok(())
            })?;
            Ok(EXIT_OK)
        }
        Command::Fit { input, fs, out } => {
            let mut trace = EnvelopeTrace::load(&input).map_err(|e| in_file(&input, e))?;
            if let Some(fs) = fs {
                trace = EnvelopeTrace::from_samples(trace.samples().to_vec(), fs)?;
            }
            let report = fit_trace(&trace)?;
            emit(out.as_deref(), stdout, |w| {
                writeln!(w, "{}", report.to_json())?;
                Ok(())
            })?;
            if out.is_some() {
                write_table_row(stdout, &report)?;
            }
            if let Some(why) = &report.lcr_error {
                writeln!(stderr, "warning: LCR stage: {why}")?;
            }
            if !report.pdf_converged {
                writeln!(stderr, "warning: PDF stage did not converge")?;
            }
            Ok(if report.is_complete() { EXIT_OK } else { EXIT_PARTIAL_FIT })
        }
    }
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        Error::Io(msg) => Error::Io(format!("{}: {msg}", path.display())),
        other => other,
    }
}

/// Writes through `body` to `path`, or to `stdout` when no path is given.
fn emit(path: Option<&Path>, stdout: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn write_table_row(w: &mut dyn Write, r: &FitReport) -> Result<()> {
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| significant(x, 4));
    writeln!(w, "{:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "kappa_hat", "mu_hat", "r_bar_hat", "m_hat", "f_m_hat", "rho_hat")?;
    writeln!(
        w,
        "{:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        significant(r.kappa_hat, 4),
        significant(r.mu_hat, 4),
        significant(r.r_bar_hat, 4),
        significant(r.m_hat, 4),
        opt(r.f_m_hat),
        opt(r.rho_hat)
    )?;
    Ok(())
}
