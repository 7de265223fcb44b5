//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a
//! verification check fails. Data goes to stdout or `--out`, diagnostics to
//! stderr.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::channels::{is_majorized_by, KrausChannel, CHANNEL_TOL};
use crate::matrix::{psd_eig, ComplexMatrix};
use crate::polarization::PolarizationMatrix;
use crate::scheme::{build_density_matrix, build_density_matrix_oracle, SchemeParams};
use crate::sweep::{
    run_sweep_to_csv, saturating_config, verify_csv, SweepConfig, SweepMode, BOUND_TOL,
};
use crate::twoqubit::TwoQubitState;

pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (rng: chacha20/rand_chacha-0.9/seed_from_u64)"
);

/// Majorization tolerance used by `channel-verify`.
const MAJORIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "pumpent", version = VERSION, about = "Pump-polarization bounds on two-qubit entanglement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Concurrence of a two-qubit state and its four spin-flip singular values.
    Concurrence {
        #[arg(long = "in", value_name = "STATE_JSON")]
        input: PathBuf,
    },
    /// Two-qubit state produced by the two-arm source.
    Scheme {
        #[arg(long, value_name = "PARAMS_JSON")]
        params: PathBuf,
        /// Build the state from arm transfer matrices instead of the closed-form moments.
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_name = "RHO_JSON")]
        out: PathBuf,
    },
    /// Monte Carlo sweep over the source parameters, written as CSV.
    Sweep {
        /// Number of samples.
        #[arg(long)]
        n: u64,
        #[arg(long)]
        seed: u64,
        /// `general` samples every parameter, `two_d` pins t = 1.
        #[arg(long, value_parser = parse_mode)]
        mode: SweepMode,
        /// Worker threads. Output bytes do not depend on this.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Audit a sweep CSV against both concurrence bounds.
    Verify {
        #[arg(long = "in", value_name = "CSV")]
        input: PathBuf,
    },
    /// Evaluate the known saturating source setting for a given P.
    Saturate {
        #[arg(long = "pump-p")]
        pump_p: f64,
    },
    /// Check a Kraus channel for double stochasticity, and a target state
    /// against majorization and the general bound.
    ChannelVerify {
        #[arg(long, value_name = "CHANNEL_JSON")]
        channel: PathBuf,
        /// 4x4 source state, or a 2x2 polarization matrix to embed.
        #[arg(long, value_name = "SIGMA_JSON")]
        source: PathBuf,
        #[arg(long, value_name = "RHO_JSON")]
        target: Option<PathBuf>,
    },
    /// Canonical pump polarization matrix [[1/2, P/2], [P/2, 1/2]] as JSON.
    Pump {
        #[arg(long = "p", visible_alias = "pump-p")]
        p: f64,
    },
}

fn parse_mode(s: &str) -> Result<SweepMode, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    Failed,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Passed
        } else {
            Outcome::Failed
        }
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f))
        .with_context(|| format!("cannot parse {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{shown}");
                    0
                }
                _ => {
                    let _ = write!(err, "{shown}");
                    1
                }
            };
        }
    };
    match dispatch(&cli.command, out) {
        Ok(Outcome::Passed) => 0,
        Ok(Outcome::Failed) => 2,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

pub fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Concurrence { input } => {
            let state: TwoQubitState = read_json(input)?;
            let c = state.concurrence()?;
            writeln!(out, "concurrence {}", fmt17(c.value))?;
            let s: Vec<String> = c.singular_values.iter().map(|&x| fmt17(x)).collect();
            writeln!(out, "s {}", s.join(" "))?;
            Ok(Outcome::Passed)
        }
        Command::Scheme {
            params,
            oracle,
            out: path,
        } => {
            let p: SchemeParams = read_json(params)?;
            let state = if *oracle {
                build_density_matrix_oracle(&p)?
            } else {
                build_density_matrix(&p)?
            };
            write_json(path, state.matrix())?;
            Ok(Outcome::Passed)
        }
        Command::Sweep {
            n,
            seed,
            mode,
            workers,
            out: path,
        } => {
            let cfg = SweepConfig::new(*n, *seed, *mode).with_workers(*workers);
            cfg.validate()?;
            let f =
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let report = run_sweep_to_csv(&cfg, BufWriter::new(f))?;
            write!(out, "{report}")?;
            Ok(Outcome::from_bool(report.violations() == 0))
        }
        Command::Verify { input } => {
            let f =
                File::open(input).with_context(|| format!("cannot open {}", input.display()))?;
            let report = verify_csv(BufReader::new(f))?;
            write!(out, "{report}")?;
            Ok(Outcome::from_bool(report.violations() == 0))
        }
        Command::Saturate { pump_p } => {
            let (params, c) = saturating_config(*pump_p)?;
            writeln!(out, "{}", serde_json::to_string(&params)?)?;
            writeln!(out, "concurrence {}", fmt17(c))?;
            writeln!(out, "bound_general {}", fmt17((1.0 + pump_p) / 2.0))?;
            Ok(Outcome::Passed)
        }
        Command::ChannelVerify {
            channel,
            source,
            target,
        } => channel_verify(channel, source, target.as_deref(), out),
        Command::Pump { p } => {
            let j = PolarizationMatrix::canonical(*p)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&j)?)?;
            Ok(Outcome::Passed)
        }
    }
}

fn channel_verify(
    channel: &Path,
    source: &Path,
    target: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Outcome> {
    let ch: KrausChannel = read_json(channel)?;
    let src: ComplexMatrix = read_json(source)?;
    let sigma = match src.dim() {
        2 => PolarizationMatrix::new(src)?.embed()?.sigma,
        _ => *TwoQubitState::new(src)?.matrix(),
    };
    let validity = ch.validate_doubly_stochastic(CHANNEL_TOL);
    writeln!(out, "trace_preserving {}", validity.trace_preserving)?;
    writeln!(out, "unital {}", validity.unital)?;
    writeln!(out, "trace_defect {}", fmt17(validity.trace_defect))?;
    writeln!(out, "unital_defect {}", fmt17(validity.unital_defect))?;
    let mut ok = validity.doubly_stochastic();

    if let Some(target) = target {
        let rho: TwoQubitState = read_json(target)?;
        let report = is_majorized_by(rho.matrix(), &sigma, MAJORIZATION_TOL)?;
        let join = |v: &[f64]| v.iter().map(|&x| fmt17(x)).collect::<Vec<_>>().join(" ");
        writeln!(out, "majorized {}", report.holds)?;
        writeln!(
            out,
            "partial_sums_source {}",
            join(&report.partial_sums_source)
        )?;
        writeln!(
            out,
            "partial_sums_target {}",
            join(&report.partial_sums_target)
        )?;
        writeln!(out, "worst_slack {}", fmt17(report.worst_slack))?;

        // (1 + P)/2 is the source's largest eigenvalue
        let bound = psd_eig(&sigma)?.spectrum.values()[0];
        let c = rho.concurrence()?.value;
        let within = c <= bound + BOUND_TOL;
        writeln!(out, "concurrence {}", fmt17(c))?;
        writeln!(out, "bound_general {}", fmt17(bound))?;
        writeln!(out, "within_bound {within}")?;
        ok &= report.holds && within;
    }
    Ok(Outcome::from_bool(ok))
}
