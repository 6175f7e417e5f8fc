//! Command-line front end: `bell`, `sweep`, `crossover` and `simulate`.
//!
//! Exit codes: 0 on success, 1 on runtime or I/O failure, 2 on usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::attack::AttackParams;
use crate::correlations::{bell_s, correlation_q_closed, thresholds, CorrelationValue};
use crate::error::QkdError;
use crate::information::LogBase;
use crate::protocol::{run as run_protocol, SimConfig, Source, TranscriptSummary};
use crate::quantum::{standard_settings, PhaseVector, Settings};
use crate::sweep::{crossover, sweep, CrossoverOptions, Range, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qutrit-qkd",
    version,
    about = "Entangled-qutrit key distribution: Bell test, attack analysis and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the correlation functions and the Bell quantity.
    Bell(BellArgs),
    /// Tabulate error rates and mutual informations over an (F, lambda) grid as CSV.
    Sweep(SweepArgs),
    /// Find the largest visibility F*lambda at which I_AE = I_AB.
    Crossover(CrossoverArgs),
    /// Run a seeded Monte Carlo simulation of the protocol.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct BellArgs {
    /// Six phase triples "a1;a2;a3;b1;b2;b3", each "p0,p1,p2" in radians;
    /// terms like "pi/3" or "-2pi/3" are accepted.
    #[arg(long)]
    settings: Option<String>,
    /// Attenuate every correlation by this factor.
    #[arg(long, default_value_t = 1.0)]
    visibility: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// F range as "lo,hi".
    #[arg(long, default_value = "0,1")]
    f_range: String,
    /// lambda range as "lo,hi".
    #[arg(long, default_value = "-0.5,1")]
    lam_range: String,
    /// Grid points per axis.
    #[arg(long, default_value_t = 51)]
    steps: usize,
    #[arg(long, default_value_t = 3.0)]
    log_base: f64,
    /// Output CSV path; "-" writes to standard output.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Debug, Args)]
struct CrossoverArgs {
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long, default_value_t = 3.0)]
    log_base: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the undisturbed maximally entangled source.
    #[arg(long, conflicts_with_all = ["f", "lam"])]
    honest: bool,
    /// Eve's diagonal weight F.
    #[arg(long, requires = "lam")]
    f: Option<f64>,
    /// Eve's diagonal ancilla overlap lambda.
    #[arg(long, requires = "f")]
    lam: Option<f64>,
    /// Nine comma-separated settings-pair weights, Alice's setting outer.
    #[arg(long)]
    weights: Option<String>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Transcript path; the summary goes to "<out>.summary.json".
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<QkdError> for CliError {
    fn from(e: QkdError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn stdout_error(e: std::io::Error) -> CliError {
    CliError::Runtime(format!("cannot write output: {e}"))
}

/// Parses and runs a command line, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let target: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(target, "{rendered}");
            return code;
        }
    };
    let result = match cli.command {
        Command::Bell(args) => cmd_bell(&args, out),
        Command::Sweep(args) => cmd_sweep(&args, out),
        Command::Crossover(args) => cmd_crossover(&args, out),
        Command::Simulate(args) => cmd_simulate(&args, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

/// Parses one phase: a plain number, or a multiple of pi such as `pi`,
/// `-pi/6`, `2pi/3` or `2*pi/3`.
pub fn parse_phase(token: &str) -> Result<f64, QkdError> {
    let bad = || QkdError::InvalidInput(format!("cannot parse phase {token:?}"));
    let t: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    if let Ok(x) = t.parse::<f64>() {
        return if x.is_finite() { Ok(x) } else { Err(bad()) };
    }
    let lower = t.to_ascii_lowercase();
    let (before, after) = lower.split_once("pi").ok_or_else(bad)?;
    let before = before.trim_end_matches('*');
    let coefficient = match before {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match after {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(bad)?,
    };
    Ok(coefficient * std::f64::consts::PI / divisor)
}

fn parse_triple(text: &str) -> Result<PhaseVector, QkdError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(QkdError::InvalidInput(format!(
            "phase triple {text:?} must have three comma-separated values"
        )));
    }
    PhaseVector::new([
        parse_phase(parts[0])?,
        parse_phase(parts[1])?,
        parse_phase(parts[2])?,
    ])
}

/// Parses `"a1;a2;a3;b1;b2;b3"`.
pub fn parse_settings(text: &str) -> Result<Settings, QkdError> {
    let triples: Vec<&str> = text.split(';').collect();
    if triples.len() != 6 {
        return Err(QkdError::InvalidInput(format!(
            "expected six ';'-separated phase triples, got {}",
            triples.len()
        )));
    }
    let v = triples
        .iter()
        .map(|t| parse_triple(t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Settings {
        alice: [v[0], v[1], v[2]],
        bob: [v[3], v[4], v[5]],
    })
}

fn parse_range(text: &str) -> Result<Range, QkdError> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| QkdError::InvalidInput(format!("range {text:?} must be \"lo,hi\"")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| QkdError::InvalidInput(format!("cannot parse {s:?} in range")))
    };
    Range::new(num(lo)?, num(hi)?)
}

fn parse_weights(text: &str) -> Result<[[f64; 3]; 3], QkdError> {
    let values = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| QkdError::InvalidInput(format!("cannot parse weight {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != 9 {
        return Err(QkdError::InvalidInput(format!(
            "expected nine weights, got {}",
            values.len()
        )));
    }
    let mut w = [[0.0; 3]; 3];
    for (i, v) in values.into_iter().enumerate() {
        w[i / 3][i % 3] = v;
    }
    Ok(w)
}

fn format_complex(z: num_complex::Complex64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    format!("{re:.6}{im:+.6}i")
}

fn cmd_bell(args: &BellArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let settings = match &args.settings {
        Some(text) => parse_settings(text)?,
        None => standard_settings(),
    };
    if !(0.0..=1.0).contains(&args.visibility) {
        return Err(CliError::Usage(format!(
            "visibility must lie in [0, 1], got {}",
            args.visibility
        )));
    }
    let q = |k: u8, l: u8| -> CorrelationValue {
        correlation_q_closed(settings.alice(k), settings.bob(l)).scaled(args.visibility)
    };
    let s = bell_s(q(1, 1), q(1, 2), q(2, 1), q(2, 2));
    let t = thresholds();
    let mut text = String::new();
    for (k, l) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 3)] {
        text.push_str(&format!("Q{k}{l} = {}\n", format_complex(q(k, l).value())));
    }
    text.push_str(&format!("S = {s:.6}\n"));
    text.push_str(&format!("local_realistic_bound = {:.6}\n", t.lr_bound));
    text.push_str(&format!("quantum_value = {:.6}\n", t.qm_value));
    text.push_str(&format!("v0 = {:.6}\n", t.v0));
    text.push_str(&format!("visibility = {:.6}\n", args.visibility));
    text.push_str(&format!("violated = {}\n", s > t.lr_bound));
    out.write_all(text.as_bytes()).map_err(stdout_error)
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = SweepSpec {
        f_range: parse_range(&args.f_range)?,
        lam_range: parse_range(&args.lam_range)?,
        steps: args.steps,
        base: LogBase::new(args.log_base)?,
    };
    let result = sweep(spec)?;
    if args.out == "-" {
        result.write_csv(&mut *out).map_err(stdout_error)
    } else {
        let path = Path::new(&args.out);
        let file = File::create(path).map_err(|e| io_error(path, e))?;
        let mut w = BufWriter::new(file);
        result
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| io_error(path, e))?;
        writeln!(
            out,
            "wrote {} rows to {}",
            result.rows.len(),
            path.display()
        )
        .map_err(stdout_error)
    }
}

fn cmd_crossover(args: &CrossoverArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let opts = CrossoverOptions {
        tolerance: args.tolerance,
        base: LogBase::new(args.log_base)?,
        ..Default::default()
    };
    let r = crossover(&opts)?;
    let t = thresholds();
    writeln!(
        out,
        "v_max = {:.6}\nargmax_f = {:.6}\nargmax_lam = {:.6}\ntolerance = {:e}\ninfo_gap = {:.3e}\nv0 = {:.6}\nbuffer = {:.6}",
        r.v_max,
        r.argmax_f,
        r.argmax_lam,
        r.tolerance,
        r.info_gap,
        t.v0,
        t.v0 - r.v_max
    )
    .map_err(stdout_error)
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.json");
    PathBuf::from(name)
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let source = match (args.honest, args.f, args.lam) {
        (true, _, _) => Source::Honest,
        (false, Some(f), Some(lam)) => Source::Attack(AttackParams::new(f, lam)?),
        _ => {
            return Err(CliError::Usage(
                "choose a source: --honest, or --f and --lam".into(),
            ))
        }
    };
    let mut config = SimConfig::new(args.trials, args.seed, source)?.with_workers(args.workers)?;
    if let Some(w) = &args.weights {
        config = config.with_setting_weights(parse_weights(w)?)?;
    }
    let transcript = run_protocol(&config).map_err(|e| CliError::Runtime(e.to_string()))?;
    let summary = TranscriptSummary::new(&config, &transcript).to_json();

    if let Some(path) = &args.out {
        let file = File::create(path).map_err(|e| io_error(path, e))?;
        let mut w = BufWriter::new(file);
        transcript
            .write_records(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| io_error(path, e))?;
        let spath = summary_path(path);
        std::fs::write(&spath, format!("{summary}\n")).map_err(|e| io_error(&spath, e))?;
    }
    writeln!(out, "{summary}").map_err(stdout_error)
}
