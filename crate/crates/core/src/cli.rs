//! The `iqp` command line: `synth`, `verify`, `simulate`, `decompose`.
//!
//! [`run`] takes the argument list and output streams explicitly and returns
//! the process exit code, so the binary is a one-line wrapper.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse or validation
//! error, 3 size limit exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bits::{fmt_sig17, to_bitstring};
use crate::decompose::{
    allocate_3sparse, build_multiplicity_map, certificate_json, decompose_2sparse,
    round_to_dyadic, rows_to_dists, tv_bound, MAX_MAP_BITS,
};
use crate::error::Error;
use crate::probdist::{mix, tv_distance, ProbVector};
use crate::sim::{self, marginal_full, marginal_mixture, DEFAULT_SEED};
use crate::synth::{
    approx_phase_table, exact_phase_table, walsh_lower, CircuitFile, PhaseTable,
    MAX_LOWER_QUBITS,
};

/// Default pass threshold on the realized total variation distance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Registers up to this size are also checked by full simulation.
pub const CROSS_CHECK_QUBITS: usize = 20;
/// Allowed disagreement between the two marginal evaluators.
pub const CROSS_CHECK_TOL: f64 = 1e-12;
/// Allowed reconstruction error for `decompose --check`.
pub const RECONSTRUCTION_TOL: f64 = 1e-12;
/// Environment variable that lowers the qubit caps.
pub const MAX_QUBITS_ENV: &str = "IQP_MAX_QUBITS";

#[derive(Debug, Parser)]
#[command(name = "iqp", version, about = "Synthesize and verify IQP circuits with hidden qubits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize circuit phases for a target distribution.
    Synth(SynthArgs),
    /// Check a circuit's visible marginal against a distribution.
    Verify(VerifyArgs),
    /// Print a circuit's visible marginal and optional samples.
    Simulate(SimulateArgs),
    /// Write a sparse mixture decomposition certificate.
    Decompose(DecomposeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `m = n + 1` hidden qubits, exact marginal.
    Exact,
    /// User-chosen `m`, marginal within `(1/2)·2^{-(m-n)}`.
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Phasetable,
    Gates,
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Distribution file.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    /// Hidden qubits (approx mode).
    #[arg(long)]
    pub m: Option<usize>,
    /// Circuit output path; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also emit the XROT gate form.
    #[arg(long)]
    pub lower: bool,
    #[arg(long, value_enum, default_value = "phasetable")]
    pub format: Format,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    pub circuit: PathBuf,
    /// Distribution file the circuit should reproduce.
    pub input: PathBuf,
    /// Report output path; standard output when omitted.
    #[arg(short = 'o', long = "report")]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    pub circuit: PathBuf,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, clap::Args)]
pub struct DecomposeArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub sparsity: u8,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Re-mix the components and report the largest entry error.
    #[arg(long)]
    pub check: bool,
}

/// Stage timings in milliseconds. These vary between runs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub parse: f64,
    pub marginal: f64,
    pub cross_check: f64,
    pub total: f64,
}

/// Outcome of `verify`, serialized with a fixed key order.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub mode: Mode,
    pub n: usize,
    pub m: usize,
    pub tv_realized: f64,
    pub tv_bound: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub gate_count: Option<usize>,
    pub cross_check_max_diff: Option<f64>,
    pub timings_ms: Timings,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Limit(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
            Failure::Limit(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Limit(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TooManyQubits { .. } => Failure::Limit(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Qubit caps after applying the environment override.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub state: usize,
    pub mixture: usize,
    pub lower: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { state: sim::MAX_STATE_QUBITS, mixture: sim::MAX_MIXTURE_QUBITS, lower: MAX_LOWER_QUBITS }
    }
}

impl Limits {
    /// Lowers every cap to `cap`; caps never rise above their defaults.
    pub fn capped(cap: usize) -> Self {
        let d = Self::default();
        Self { state: d.state.min(cap), mixture: d.mixture.min(cap), lower: d.lower.min(cap) }
    }

    pub fn from_env() -> Result<Self, String> {
        match std::env::var(MAX_QUBITS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .map(Self::capped)
                .map_err(|_| format!("{MAX_QUBITS_ENV}={v:?} is not a qubit count")),
            Err(_) => Ok(Self::default()),
        }
    }

    fn check(requested: usize, max: usize, what: &str) -> Result<(), Failure> {
        if requested > max {
            Err(Failure::Limit(format!("{what} needs {requested} qubits, limit is {max}")))
        } else {
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let stream: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(stream, "{}", e.render());
            return code;
        }
    };
    let limits = match Limits::from_env() {
        Ok(l) => l,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
    };
    run_command(&cli.command, limits, out, err)
}

/// Runs a parsed command under explicit limits.
pub fn run_command(command: &Command, limits: Limits, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match command {
        Command::Synth(a) => cmd_synth(a, limits, out, err),
        Command::Verify(a) => cmd_verify(a, limits, out),
        Command::Simulate(a) => cmd_simulate(a, limits, out),
        Command::Decompose(a) => cmd_decompose(a, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn read_distribution(path: &Path) -> Result<ProbVector, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    ProbVector::from_json_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_circuit(path: &Path) -> Result<CircuitFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    CircuitFile::parse(&text).map_err(|e| match e {
        Error::TooManyQubits { .. } => Failure::Limit(e.to_string()),
        e => Failure::Input(format!("{}: {e}", path.display())),
    })
}

/// Writes through a temporary file in the destination directory so a failed
/// run never leaves a partial file behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(())
}

fn emit(path: Option<&Path>, contents: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => Ok(out.write_all(contents.as_bytes())?),
    }
}

fn cmd_synth(
    args: &SynthArgs,
    limits: Limits,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let p = read_distribution(&args.input)?;
    let n = p.n();
    let table: PhaseTable = match args.mode {
        Mode::Exact => {
            Limits::check(2 * n + 1, limits.state, "exact synthesis")?;
            exact_phase_table(&p)?
        }
        Mode::Approx => {
            let m = args
                .m
                .ok_or_else(|| Failure::Input("--mode approx requires --m".into()))?;
            Limits::check(m + n, limits.state, "approximate synthesis")?;
            Limits::check(m, MAX_MAP_BITS, "the multiplicity map")?;
            if m < n {
                let _ = writeln!(err, "warning: m = {m} < n = {n}, the distance bound is vacuous");
            }
            let rounding = round_to_dyadic(&p, m)?;
            let bound = tv_bound(n, m);
            let tv = tv_distance(&p, &rounding.q)?;
            let flag = if bound >= 1.0 { " (vacuous)" } else { "" };
            let _ = writeln!(err, "tv bound: {bound}{flag}");
            let _ = writeln!(err, "rounding tv: {tv}");
            approx_phase_table(&build_multiplicity_map(&rounding)?)
        }
    };
    let total = table.total_qubits();
    let want_gates = args.lower || args.format == Format::Gates;
    let gates = if !want_gates {
        None
    } else if total <= limits.lower {
        Some(walsh_lower(&table)?)
    } else if args.format == Format::Gates {
        return Err(Failure::Limit(format!(
            "gate lowering needs {total} qubits, limit is {}",
            limits.lower
        )));
    } else {
        let _ = writeln!(err, "warning: {total} qubits exceed the lowering limit, gates omitted");
        None
    };
    let file = CircuitFile {
        m: table.m(),
        n: table.n(),
        phases: (args.format == Format::Phasetable).then_some(table),
        gates,
    };
    emit(args.output.as_deref(), &file.to_text(), out)
}

fn cmd_verify(args: &VerifyArgs, limits: Limits, out: &mut dyn Write) -> Result<(), Failure> {
    let start = Instant::now();
    let circuit = read_circuit(&args.circuit)?;
    let p = read_distribution(&args.input)?;
    if circuit.n != p.n() {
        return Err(Failure::Input(format!(
            "circuit has {} visible qubits, distribution has {}",
            circuit.n,
            p.n()
        )));
    }
    let total = circuit.total_qubits();
    Limits::check(total, limits.mixture, "verification")?;
    Limits::check(circuit.n, limits.state, "verification")?;
    let table = circuit.phase_table()?;
    let parsed = Instant::now();

    let marginal = marginal_mixture(&table)?;
    let tv_realized = tv_distance(&p, &marginal)?;
    let simulated = Instant::now();

    let cross_check_max_diff = if total <= CROSS_CHECK_QUBITS.min(limits.state) {
        let full = marginal_full(&table)?;
        Some(
            full.probs()
                .iter()
                .zip(marginal.probs())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    let checked = Instant::now();

    let tv_bound = (args.mode == Mode::Approx).then(|| tv_bound(circuit.n, circuit.m));
    let consistent = cross_check_max_diff.is_none_or(|d| d <= CROSS_CHECK_TOL);
    let within = match tv_bound {
        Some(bound) => tv_realized <= bound,
        None => tv_realized <= args.tolerance,
    };
    let ms = |a: Instant, b: Instant| (b - a).as_secs_f64() * 1e3;
    let report = VerificationReport {
        mode: args.mode,
        n: circuit.n,
        m: circuit.m,
        tv_realized,
        tv_bound,
        tolerance: args.tolerance,
        passed: within && consistent,
        gate_count: circuit.gates.as_ref().map(|g| g.len()),
        cross_check_max_diff,
        timings_ms: Timings {
            parse: ms(start, parsed),
            marginal: ms(parsed, simulated),
            cross_check: ms(simulated, checked),
            total: ms(start, checked),
        },
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    emit(args.report.as_deref(), &json, out)?;
    if report.passed {
        Ok(())
    } else if !consistent {
        Err(Failure::Verification(format!(
            "marginal evaluators disagree by {}",
            cross_check_max_diff.unwrap_or(f64::NAN)
        )))
    } else {
        Err(Failure::Verification(format!("total variation distance {tv_realized} too large")))
    }
}

fn cmd_simulate(args: &SimulateArgs, limits: Limits, out: &mut dyn Write) -> Result<(), Failure> {
    let circuit = read_circuit(&args.circuit)?;
    Limits::check(circuit.total_qubits(), limits.mixture, "simulation")?;
    Limits::check(circuit.n, limits.state, "simulation")?;
    let marginal = marginal_mixture(&circuit.phase_table()?)?;
    let mut text = String::new();
    for (b, &prob) in marginal.probs().iter().enumerate() {
        text.push_str(&format!("{} {}\n", to_bitstring(b, circuit.n), fmt_sig17(prob)));
    }
    if let Some(count) = args.samples {
        text.push_str(&format!("# samples count={count} seed={}\n", args.seed));
        for b in sim::sample(&marginal, count, args.seed) {
            text.push_str(&to_bitstring(b, circuit.n));
            text.push('\n');
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn cmd_decompose(args: &DecomposeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let p = read_distribution(&args.input)?;
    let components = match args.sparsity {
        3 => rows_to_dists(&allocate_3sparse(&p)),
        _ => decompose_2sparse(&p)?,
    };
    emit(args.output.as_deref(), &certificate_json(p.n(), &components), out)?;
    if args.check {
        let mixed = mix(p.n(), &components, 1.0 / components.len() as f64);
        let max_error = mixed
            .iter()
            .zip(p.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let stream: &mut dyn Write = if args.output.is_some() { out } else { err };
        writeln!(stream, "max_error {max_error:e}")?;
        if max_error > RECONSTRUCTION_TOL {
            return Err(Failure::Verification(format!(
                "reconstruction error {max_error:e} exceeds {RECONSTRUCTION_TOL:e}"
            )));
        }
    }
    Ok(())
}
