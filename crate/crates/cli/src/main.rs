//! `ec3r`: command-line front end for the exact-cover resonance simulator.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use ec3r::engine::TrotterOrder;
use ec3r::model::{p_sequence, parse_instance, random_instance, serialize_instance, brute_force_solutions, Ec3Instance};
use ec3r::operator::{CouplingGuard, StructuredHamiltonian};
use ec3r::protocol::{prepare_round_input, run_full, Evolution, ProtocolParams, RoundOracle, RunStatus, TimeMode};
use ec3r::reduced::{emit_figure_data, format_sig, linear_grid, offres_ceiling, Figure};
use ec3r::report::{write_atomic, RunReport};
use ec3r::validation::{cross_validate, loglog_slope, trotter_convergence, DEVIATION_TOL, LEAKAGE_TOL};
use ec3r::Error;

const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_TOLERANCE: u8 = 1;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NUMERICAL: u8 = 70;

#[derive(Parser)]
#[command(name = "ec3r", version, about = "Probe-qubit resonance simulator for 3-bit exact cover")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical counts, transition weights and solutions.
    Oracle { instance: PathBuf },
    /// Run the full protocol and write a JSON report.
    Solve(SolveArgs),
    /// Data tables for the reduced-model figures (2, 3 or 4).
    Figures(FigureArgs),
    /// Compare one round of the full simulation with the three-level model.
    Validate(ValidateArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Split-operator error against exact evolution for a range of step counts.
    TrotterBench(TrotterArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TMode {
    TimeScan,
    OracleInformed,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 0.02)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TMode::TimeScan)]
    t_mode: TMode,
    /// Use split-operator evolution with this many steps.
    #[arg(long)]
    trotter_steps: Option<usize>,
    #[arg(long, default_value_t = 2)]
    trotter_order: u8,
    /// Probe decays per round, the first one included (default: clause count).
    #[arg(long)]
    purify_successes: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    max_trials: usize,
    #[arg(long, default_value_t = 512)]
    scan_points: usize,
    /// Upper end of the time scan.
    #[arg(long)]
    tmax: Option<f64>,
    /// Relative weight cut for reported assignments.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(2..=4))]
    figure: u8,
    #[arg(long, default_value_t = 0.02)]
    c: f64,
    /// Transition weight, `a/b` or decimal.
    #[arg(long, default_value = "1/27")]
    p: String,
    #[arg(long, default_value_t = 1200.0)]
    tmax: f64,
    #[arg(long, default_value_t = 2000)]
    points: usize,
    #[arg(long, default_value_t = 0.1)]
    eps0: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    round: usize,
    #[arg(long, default_value_t = 0.02)]
    c: f64,
    /// End of the time sweep; scaled as 24/c when omitted.
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Per-time comparison table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Plant an assignment that satisfies every clause.
    #[arg(long)]
    satisfiable: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrotterArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    round: usize,
    #[arg(long, default_value_t = 0.02)]
    c: f64,
    /// Evolution time; the round's oracle resonance time when omitted.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "256,512,1024,2048")]
    trotter_steps: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    trotter_order: u8,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure of a command, already mapped to an exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParameter(_) | Error::EnumerationTooLarge { .. } => EXIT_USAGE,
            Error::Parse { .. }
            | Error::InvalidClause(_)
            | Error::InvalidInstance(_)
            | Error::Generation(_)
            | Error::Io(_)
            | Error::Json(_) => EXIT_DATA,
            _ => EXIT_NUMERICAL,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

type CmdResult = Result<u8, Failure>;

fn read_instance(path: &Path) -> Result<Ec3Instance, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure { code: EXIT_DATA, msg: format!("{}: {e}", path.display()) })?;
    parse_instance(&text).map_err(|e| Failure { code: EXIT_DATA, msg: format!("{}: {e}", path.display()) })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => Ok(write_atomic(p, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_p(s: &str) -> Result<f64, Failure> {
    if let Ok(r) = s.parse::<Ratio<u64>>() {
        if *r.denom() == 0 {
            return Err(usage(format!("invalid --p {s}")));
        }
        return Ok(*r.numer() as f64 / *r.denom() as f64);
    }
    s.parse::<f64>().map_err(|_| usage(format!("--p expects a/b or a decimal, got {s}")))
}

fn trotter_order(o: u8) -> Result<TrotterOrder, Failure> {
    TrotterOrder::try_from(o).map_err(|_| usage(format!("--trotter-order must be 1 or 2, got {o}")))
}

fn cmd_oracle(path: &Path) -> CmdResult {
    let inst = read_instance(path)?;
    let seq = p_sequence(&inst)?;
    let mut s = String::new();
    let counts: Vec<String> = seq.counts.iter().map(|c| c.to_string()).collect();
    let ps: Vec<String> =
        seq.values.iter().map(|p| p.map_or_else(|| "undefined".to_string(), |p| p.to_string())).collect();
    let _ = writeln!(s, "n = {}", inst.n());
    let _ = writeln!(s, "M = {}", inst.m());
    let _ = writeln!(s, "N_k: {}", counts.join(" "));
    let _ = writeln!(s, "p_k: {}", ps.join(" "));
    match seq.counts.iter().position(|&c| c == 0) {
        Some(k) => {
            let _ = writeln!(s, "UNSAT (N_{k} = 0)");
        }
        None => {
            let sols: Vec<String> = brute_force_solutions(&inst)?.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(s, "solutions ({}): {}", sols.len(), sols.join(" "));
        }
    }
    print!("{s}");
    Ok(0)
}

fn cmd_solve(a: &SolveArgs) -> CmdResult {
    let evolution = match a.trotter_steps {
        Some(steps) => Evolution::Trotter { steps, order: trotter_order(a.trotter_order)? },
        None => Evolution::default(),
    };
    let params = ProtocolParams {
        omega: a.omega,
        c: a.c,
        t_mode: match a.t_mode {
            TMode::TimeScan => TimeMode::TimeScan,
            TMode::OracleInformed => TimeMode::OracleInformed,
        },
        purify_successes: a.purify_successes,
        max_trials_per_round: a.max_trials,
        seed: a.seed,
        evolution,
        scan_points: a.scan_points,
        scan_t_max: a.tmax,
        t0: None,
        extract_threshold: a.threshold,
    };
    params.validate()?;
    let inst = read_instance(&a.instance)?;
    let run = run_full(&inst, &params)?;
    let report = RunReport::new(&inst, &run);
    let json = report.to_json()?;
    match &a.out {
        Some(p) => {
            write_atomic(p, json.as_bytes())?;
            println!("status: {}", status_name(run.status));
            for w in &run.solutions {
                println!("solution: {} weight {}", w.assignment, format_sig(w.weight));
            }
        }
        None => print!("{json}"),
    }
    Ok(if run.status == RunStatus::Inconclusive { EXIT_INCONCLUSIVE } else { 0 })
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Sat => "sat",
        RunStatus::UnsatDetected => "unsat_detected",
        RunStatus::Inconclusive => "inconclusive",
    }
}

fn cmd_figures(a: &FigureArgs) -> CmdResult {
    let figure = if a.figure == 4 {
        if !(0.0..=1.0).contains(&a.eps0) {
            return Err(usage(format!("--eps0 must lie in [0, 1], got {}", a.eps0)));
        }
        Figure::by_id(4, a.c, 0.0, Vec::new(), a.eps0)?
    } else {
        let grid = linear_grid(a.tmax, a.points)?;
        Figure::by_id(a.figure, a.c, parse_p(&a.p)?, grid, a.eps0)?
    };
    let table = emit_figure_data(&figure)?;
    emit(a.out.as_deref(), &table.to_csv())?;
    Ok(0)
}

fn cmd_validate(a: &ValidateArgs) -> CmdResult {
    if !(a.c > 0.0) {
        return Err(usage(format!("--c must be positive, got {}", a.c)));
    }
    let inst = read_instance(&a.instance)?;
    let grid = linear_grid(a.tmax.unwrap_or(24.0 / a.c), a.points)?;
    let cv = cross_validate(&inst, a.round, a.c, &grid)?;
    if let Some(p) = &a.out {
        write_atomic(p, cv.to_csv().as_bytes())?;
    }
    let ok = cv.within_tolerance();
    println!("round {} p_k {} c {}", cv.k, format_sig(cv.p_k), format_sig(cv.c));
    println!("max_deviation {} (tolerance {})", format_sig(cv.max_deviation()), format_sig(DEVIATION_TOL));
    println!("max_leakage {} (tolerance {})", format_sig(cv.max_leakage()), format_sig(LEAKAGE_TOL));
    println!(
        "max_decay full {} reduced {} off-resonant ceiling {}",
        format_sig(cv.max_full_decay()),
        format_sig(cv.max_reduced_decay()),
        format_sig(offres_ceiling(a.c))
    );
    println!("within tolerance: {}", if ok { "yes" } else { "no" });
    Ok(if ok { 0 } else { EXIT_TOLERANCE })
}

fn cmd_gen(a: &GenArgs) -> CmdResult {
    let inst = random_instance(a.n, a.m, a.seed, a.satisfiable)?;
    emit(a.out.as_deref(), &serialize_instance(&inst))?;
    Ok(0)
}

fn cmd_trotter(a: &TrotterArgs) -> CmdResult {
    if !(a.c > 0.0) {
        return Err(usage(format!("--c must be positive, got {}", a.c)));
    }
    if a.trotter_steps.is_empty() || a.trotter_steps.contains(&0) {
        return Err(usage("--trotter-steps must list positive counts"));
    }
    let order = trotter_order(a.trotter_order)?;
    let inst = read_instance(&a.instance)?;
    let oracle = RoundOracle::new(&inst, a.round)?;
    let t = match a.t {
        Some(t) => t,
        None => {
            let p = oracle.p_k.filter(|p| *p.numer() > 0).ok_or_else(|| usage("round has p_k = 0; pass --t"))?;
            ec3r::protocol::resonance_evolution_time(p, a.c)?
        }
    };
    let clause = inst.clauses()[a.round - 1];
    let h = StructuredHamiltonian::for_clause(&clause, inst.n(), 1.0, a.c, CouplingGuard::Default)?;
    let v0 = prepare_round_input(&oracle.basis.phi_prev)?;
    let points = trotter_convergence(&h, &v0, t, &a.trotter_steps, order)?;
    let mut csv = String::from("steps,error\n");
    for p in &points {
        let _ = writeln!(csv, "{},{}", p.steps, format_sig(p.error));
    }
    emit(a.out.as_deref(), &csv)?;
    if points.len() >= 2 {
        if let Ok(slope) = loglog_slope(&points) {
            eprintln!("t {} log-log slope {}", format_sig(t), format_sig(slope));
        }
    }
    Ok(0)
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("EC3R_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("EC3R_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure { code: EXIT_NUMERICAL, msg: e.to_string() })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Oracle { instance } => cmd_oracle(instance),
        Command::Solve(a) => cmd_solve(a),
        Command::Figures(a) => cmd_figures(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Gen(a) => cmd_gen(a),
        Command::TrotterBench(a) => cmd_trotter(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ec3r: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
