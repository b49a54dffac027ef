//! Command-line front end: construct cycles through matchings in faulty
//! hypercubes, verify witnesses, sweep whole parameter ranges, and export
//! the exceptional-configuration catalog.
//!
//! Exit codes are part of the contract: 0 success, 2 parse or argument
//! error, 3 precondition violation, 4 exceptional-shape verdict, 5
//! internal invariant failure, 6 verification failure, 7 catalog mismatch.

mod formats;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hamcube::constructor::{
    extend_matching_faulty_traced, extend_matching_traced, missing_labels, FaultyOutcome, Trace,
};
use hamcube::cube::Cube;
use hamcube::error::Error;
use hamcube::primitives::set_default_node_limit;
use hamcube::structures::validate_cycle;
use hamcube::verify::{legal_cells, sweep, Theorem};

use formats::{render_dot, CycleFile, InstanceFile};

pub const EXIT_PARSE: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;
pub const EXIT_CASE_A: u8 = 4;
pub const EXIT_INTERNAL: u8 = 5;
pub const EXIT_VERIFY: u8 = 6;
pub const EXIT_CATALOG: u8 = 7;

/// Hamiltonian cycles through prescribed matchings in faulty hypercubes.
#[derive(Parser)]
#[command(name = "hamcube", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Hamiltonian cycle through the instance's matching.
    Construct {
        /// Instance file (n / m / f lines).
        instance: PathBuf,
        /// Where to write the cycle file.
        #[arg(short, long)]
        out: PathBuf,
        /// Use the fault-tolerant construction (required when faults are
        /// present).
        #[arg(long)]
        faulty: bool,
        /// Record the case labels in the cycle file.
        #[arg(long)]
        trace: bool,
        /// Also write a DOT rendering of the verified cycle.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check a cycle file against an instance file.
    Verify {
        instance: PathBuf,
        cycle: PathBuf,
    },
    /// Run a constructor sweep over instance cells and report per cell.
    Sweep {
        /// Theorem to exercise: 1 (matching only) or 2 (fault tolerant).
        #[arg(long)]
        theorem: u32,
        /// Cube dimension.
        #[arg(short = 'n', long)]
        n: u32,
        /// Cells as M,F pairs (repeatable); all legal cells by default.
        #[arg(long = "cell", value_parser = parse_cell)]
        cells: Vec<(usize, usize)>,
        /// Samples per cell above the exhaustive range.
        #[arg(long, default_value_t = 1000)]
        sample: usize,
        /// Seed for the sampled range.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report file (one line per cell plus a summary).
        #[arg(short, long)]
        out: PathBuf,
        /// Optional machine-readable summary.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Derive and export the exceptional-configuration catalog.
    Exceptions {
        /// Write the catalog here (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Re-derive the catalog and compare against an existing file.
        #[arg(long)]
        check: Option<PathBuf>,
    },
}

fn parse_cell(s: &str) -> Result<(usize, usize), String> {
    let (m, f) = s.split_once(',').ok_or("expected M,F")?;
    Ok((
        m.trim().parse().map_err(|e| format!("bad M: {e}"))?,
        f.trim().parse().map_err(|e| format!("bad F: {e}"))?,
    ))
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::InvalidArgument(_) | Error::InvalidInstance(_) => EXIT_PARSE,
            Error::Precondition(_) | Error::Unsupported(_) | Error::ExceptionalPair { .. } => {
                EXIT_PRECONDITION
            }
            Error::CatalogMismatch(_) => EXIT_CATALOG,
            Error::BudgetExceeded { .. } | Error::InternalInvariant(_) => EXIT_INTERNAL,
        };
        fail(code, e.to_string())
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)
        .and_then(|()| std::fs::rename(&tmp, path))
        .map_err(|e| fail(EXIT_PARSE, format!("writing {}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_PARSE, format!("reading {}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<InstanceFile, Failure> {
    InstanceFile::parse(&read_file(path)?)
        .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn cmd_construct(
    instance: &Path,
    out: &Path,
    faulty: bool,
    trace_flag: bool,
    dot: Option<&Path>,
) -> Result<(), Failure> {
    let inst = read_instance(instance)?;
    if !faulty && !inst.faults.is_empty() {
        return Err(fail(
            EXIT_PARSE,
            "instance declares faults; pass --faulty to use the fault-tolerant construction",
        ));
    }
    let mut trace = Trace::new();
    let cycle = if faulty {
        match extend_matching_faulty_traced(inst.cube, &inst.matching, &inst.faults, &mut trace)? {
            FaultyOutcome::Cycle(c) => c,
            FaultyOutcome::CaseA => {
                return Err(fail(
                    EXIT_CASE_A,
                    "the instance is the exceptional configuration: no Hamiltonian cycle \
                     contains the matching while avoiding the fault",
                ));
            }
        }
    } else {
        extend_matching_traced(inst.cube, &inst.matching, &mut trace)?
    };
    // Fail closed: re-verify before writing anything.
    let verdict = validate_cycle(inst.cube, cycle.seq(), &inst.matching, &inst.faults);
    if !verdict.pass() {
        return Err(fail(EXIT_INTERNAL, format!("construction failed its own check:\n{verdict}")));
    }
    let file = CycleFile {
        n: inst.cube.n(),
        seq: cycle.seq().to_vec(),
        trace: if trace_flag {
            trace.labels().iter().cloned().collect()
        } else {
            Vec::new()
        },
    };
    write_atomic(out, &file.render())?;
    if let Some(dot_path) = dot {
        let rendered = render_dot(inst.cube, cycle.seq(), &inst.matching, &inst.faults);
        write_atomic(dot_path, &rendered)?;
    }
    println!("cycle of {} vertices written to {}", cycle.len(), out.display());
    Ok(())
}

fn cmd_verify(instance: &Path, cycle: &Path) -> Result<(), Failure> {
    let inst = read_instance(instance)?;
    let cyc = CycleFile::parse(&read_file(cycle)?)
        .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", cycle.display())))?;
    if cyc.n != inst.cube.n() {
        return Err(fail(EXIT_PARSE, "instance and cycle dimensions differ"));
    }
    let verdict = validate_cycle(inst.cube, &cyc.seq, &inst.matching, &inst.faults);
    print!("{verdict}");
    if verdict.pass() {
        println!("verdict: pass");
        Ok(())
    } else {
        Err(fail(EXIT_VERIFY, "verdict: fail"))
    }
}

fn cmd_sweep(
    theorem: u32,
    n: u32,
    cells: &[(usize, usize)],
    sample: usize,
    seed: u64,
    out: &Path,
    json: Option<&Path>,
) -> Result<(), Failure> {
    let theorem = match theorem {
        1 => Theorem::MatchingOnly,
        2 => Theorem::Faulty,
        other => return Err(fail(EXIT_PARSE, format!("unknown theorem {other}"))),
    };
    let cube = Cube::new(n)?;
    let cells: Vec<(usize, usize)> = if cells.is_empty() {
        legal_cells(theorem, n)
    } else {
        cells.to_vec()
    };
    let report = sweep(theorem, cube, &cells, sample, seed).map_err(|e| match e {
        Error::InvalidArgument(msg) => fail(EXIT_PARSE, msg),
        other => Failure::from(other),
    })?;
    let mut text = report.render_text();
    let missing = missing_labels(&report.labels);
    text.push_str(&format!(
        "labels reached={} missing={}\n",
        report.labels.len(),
        if missing.is_empty() {
            "none".to_string()
        } else {
            missing.join(",")
        }
    ));
    write_atomic(out, &text)?;
    if let Some(json_path) = json {
        let rendered = serde_json::to_string_pretty(&report)
            .map_err(|e| fail(EXIT_INTERNAL, e.to_string()))?;
        write_atomic(json_path, &rendered)?;
    }
    print!("{text}");
    if report.pass() {
        Ok(())
    } else {
        Err(fail(EXIT_VERIFY, "sweep found oracle disagreements"))
    }
}

fn cmd_exceptions(out: Option<&Path>, check: Option<&Path>) -> Result<(), Failure> {
    let catalog = hamcube::basecases::exception_catalog()?;
    let rendered = catalog.render();
    if let Some(check_path) = check {
        let existing = read_file(check_path)?;
        if existing != rendered {
            return Err(fail(
                EXIT_CATALOG,
                format!("{} does not match the derived catalog", check_path.display()),
            ));
        }
        println!("catalog check: ok");
        return Ok(());
    }
    match out {
        Some(path) => {
            write_atomic(path, &rendered)?;
            println!("catalog written to {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn run() -> Result<(), Failure> {
    if let Ok(value) = std::env::var("HAMCUBE_NODE_LIMIT") {
        let limit: u64 = value
            .parse()
            .map_err(|e| fail(EXIT_PARSE, format!("HAMCUBE_NODE_LIMIT: {e}")))?;
        set_default_node_limit(limit);
    }
    match Cli::parse().command {
        Command::Construct { instance, out, faulty, trace, dot } => {
            cmd_construct(&instance, &out, faulty, trace, dot.as_deref())
        }
        Command::Verify { instance, cycle } => cmd_verify(&instance, &cycle),
        Command::Sweep { theorem, n, cells, sample, seed, out, json } => {
            cmd_sweep(theorem, n, &cells, sample, seed, &out, json.as_deref())
        }
        Command::Exceptions { out, check } => cmd_exceptions(out.as_deref(), check.as_deref()),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
