#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fluxlab::error::FluxError;
use serde::Serialize;

use crate::report::Sink;

#[derive(Parser)]
#[command(name = "fluxlab", version, about = "Flux calculus laboratory for first-order linear PDE systems")]
struct Cli {
    /// Worker threads; falls back to FLUXLAB_THREADS, then to rayon's default.
    #[arg(long, global = true, env = "FLUXLAB_THREADS")]
    threads: Option<usize>,

    /// Seed for every randomized step; recorded in each report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory for `<command>.json` / `<command>.csv`; without it the JSON
    /// report goes to standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the principal symbol at a point.
    AnalyzeSymbol(commands::SymbolArgs),
    /// Truncated operator values over a geometric radius schedule.
    FluxApply(commands::LimitArgs),
    /// Limit estimate, residuals and observed order over a radius schedule.
    ConvergeStudy(commands::LimitArgs),
    /// Generalized Morera test over random cube families.
    MoreraTest(commands::MoreraArgs),
    /// Jump of 𝔸(ν)u across a plane from thin-slab fluxes.
    JumpTrace(commands::JumpArgs),
    /// Boundary flux through shrinking neighbourhoods of a candidate singular set.
    RemovableProbe(commands::RemovableArgs),
    /// Commutator kernel norms and the Friedrichs identity over halving radii.
    MollifyCheck(commands::MollifyArgs),
    /// Discrete p-modulus of a surface family with a duality certificate.
    ModuliEstimate(commands::ModuliArgs),
    /// List, show or export catalog fixtures.
    Catalog(commands::CatalogArgs),
}

/// Settings shared by every command; echoed into reports.
#[derive(Debug, Clone, Serialize)]
pub struct Common {
    pub seed: u64,
}

fn exit_code(e: &FluxError) -> u8 {
    match e {
        FluxError::Argument(_) | FluxError::Dimension { .. } | FluxError::Format(_) | FluxError::Io(_) => 2,
        FluxError::Domain(_) | FluxError::Capability(_) | FluxError::Precondition(_) => 3,
        FluxError::NonConvergence(_) => 4,
    }
}

fn error_kind(e: &FluxError) -> &'static str {
    match e {
        FluxError::Argument(_) => "argument",
        FluxError::Dimension { .. } => "dimension",
        FluxError::Format(_) => "format",
        FluxError::Io(_) => "io",
        FluxError::Domain(_) => "domain",
        FluxError::Capability(_) => "capability",
        FluxError::Precondition(_) => "precondition",
        FluxError::NonConvergence(_) => "non_convergence",
    }
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    let body = serde_json::json!({ "error": { "kind": kind, "message": message, "exit_code": code } });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn run(cli: Cli) -> fluxlab::error::Result<u8> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(FluxError::Argument("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| FluxError::Argument(format!("thread pool: {e}")))?;
    }
    let common = Common { seed: cli.seed };
    let sink = Sink::new(cli.out)?;
    match cli.command {
        Command::AnalyzeSymbol(a) => commands::analyze_symbol(&a, &common, &sink),
        Command::FluxApply(a) => commands::flux_apply(&a, &common, &sink),
        Command::ConvergeStudy(a) => commands::converge_study(&a, &common, &sink),
        Command::MoreraTest(a) => commands::morera_test(&a, &common, &sink),
        Command::JumpTrace(a) => commands::jump_trace(&a, &common, &sink),
        Command::RemovableProbe(a) => commands::removable_probe(&a, &common, &sink),
        Command::MollifyCheck(a) => commands::mollify_check(&a, &common, &sink),
        Command::ModuliEstimate(a) => commands::moduli_estimate(&a, &common, &sink),
        Command::Catalog(a) => commands::catalog(&a, &sink),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail("argument", e.render().to_string().trim().to_string(), 2);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(error_kind(&e), e.to_string(), exit_code(&e)),
    }
}
