//! Command-line surface for the unextendible-orthogonal-matrix engine.
//!
//! Exit codes: 0 on success, 1 when a verification fails (inequivalent
//! inputs, failed table checks, extendible evaluations, missed closure
//! targets, exhausted search budgets), 2 on usage errors (bad flags, bad
//! files, unsupported shapes). Failures are itemized on standard error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use uom_core::catalog::{catalog, catalog_entry, tables_are_complete, verify};
use uom_core::enumerate::{search, DEFAULT_BUDGET};
use uom_core::error::Error;
use uom_core::matrix::VarMatrix;
use uom_core::numeric::{
    closure_path, evaluate, numeric_is_upb, sample_generic, Tolerances,
};
use uom_core::order::{apply_identification, build_hasse, classify, Identification};
use uom_core::report::{
    closure_text, enumeration_text, verify_text, CanonReport, CheckReport, EquivReport,
    EvalReport, NeighborsReport,
};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Parser)]
#[command(
    name = "uom",
    version,
    about = "Exact calculus of unextendible orthogonal matrices",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; `dot` is only meaningful for `hasse`
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Worker threads (defaults to all cores; 1 forces the sequential path)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed feeding every randomized operation
    #[arg(long, global = true, default_value_t = 1729)]
    seed: u64,

    /// Directory overriding the bundled class tables
    #[arg(long, global = true, env = "UOM_DATA_DIR")]
    data_dir: Option<PathBuf>,

    /// Orthogonality tolerance for numeric checks
    #[arg(long, global = true)]
    ortho_tol: Option<f64>,

    /// Parallelism tolerance for recovering letters from vectors
    #[arg(long, global = true)]
    parallel_tol: Option<f64>,

    /// Minimum separation for an evaluation to count as generic
    #[arg(long, global = true)]
    generic_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Report orthogonality, unextendibility and level statistics of a matrix file
    Check { file: PathBuf },

    /// Print the canonical form, canonical key and the relabeling that reaches it
    Canon { file: PathBuf },

    /// Decide whether two matrix files hold equivalent matrices (exit 1 when not)
    Equiv { a: PathBuf, b: PathBuf },

    /// List the unextendible images (--down) or preimages (--up) of a matrix
    #[command(group(ArgGroup::new("direction").required(true).multiple(false)))]
    Neighbors {
        file: PathBuf,
        /// One-identification images a level below
        #[arg(long, group = "direction")]
        down: bool,
        /// One-splitting preimages a level above
        #[arg(long, group = "direction")]
        up: bool,
    },

    /// Build and classify the full order diagram of the bundled classes
    Hasse {
        /// Row count of the tables to load (complete tables: 8, 9, 10)
        #[arg(long)]
        m: usize,
    },

    /// Check the bundled tables: classes, arrows, and structure statements
    Verify {
        /// Row count of the tables to check (8, 9, 10 or 12)
        #[arg(long)]
        m: usize,
    },

    /// Evaluate a matrix at random generic points and test unextendibility numerically
    Eval {
        file: PathBuf,
        /// Number of seeded evaluations
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },

    /// Walk a one-identification closure path and report the terminal deviation
    Closure {
        /// Row count selecting the source table
        #[arg(long, default_value_t = 8)]
        m: usize,
        /// Source class as `level,index`, e.g. 13,1
        #[arg(long)]
        src: String,
        /// Identification to follow, e.g. c4=a4
        #[arg(long)]
        id: String,
        /// Number of sampled points along the path
        #[arg(long, default_value_t = 64)]
        steps: usize,
    },

    /// Exhaustively enumerate all classes of shape (M, N)
    Enumerate {
        m: usize,
        n: usize,
        /// Node-expansion budget; the search stops with an error when exceeded
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        // Ignore the error from configuring twice; only reachable in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// 1 for failed verifications, 2 for unusable inputs.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::BudgetExhausted { .. } | Error::Integrity(_) => 1,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let tol = tolerances(cli)?;
    let data_dir = cli.data_dir.as_deref();
    match &cli.command {
        Command::Check { file } => {
            let x = load_matrix(file)?;
            let report = CheckReport::for_matrix(&x)?;
            emit(cli, || report.text(), &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Canon { file } => {
            let x = load_matrix(file)?;
            let report = CanonReport::for_matrix(&x);
            emit(cli, || report.text(), &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Equiv { a, b } => {
            let left = load_matrix(a)?;
            let right = load_matrix(b)?;
            let report = EquivReport::for_pair(&left, &right);
            emit(cli, || report.text(), &report)?;
            if report.equivalent {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("verification failed: the matrices are inequivalent");
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Neighbors { file, down, up } => {
            let x = load_matrix(file)?;
            let report = if *down {
                NeighborsReport::down(&x)?
            } else {
                debug_assert!(*up);
                NeighborsReport::up(&x)?
            };
            emit(cli, || report.text(), &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Hasse { m } => {
            if !tables_are_complete(*m) {
                return Err(Error::invalid(format!(
                    "no complete class tables for m={m}; the full diagram needs m = 8, 9 or 10"
                )));
            }
            let entries = catalog(*m, data_dir)?;
            let reps: Vec<VarMatrix> = entries.iter().map(|e| e.matrix.clone()).collect();
            let labels: Vec<String> = entries.iter().map(|e| e.label()).collect();
            let diagram = build_hasse(&reps, Some(&labels))?;
            let cls = classify(&diagram);
            match cli.format {
                Format::Text => {
                    let mut out = format!(
                        "{} classes, {} arrows, {} maximal, {} minimal, {} components",
                        diagram.nodes.len(),
                        diagram.arrows.len(),
                        cls.maximal.len(),
                        cls.minimal.len(),
                        cls.components.len()
                    );
                    for &(s, t) in &diagram.arrows {
                        out.push_str(&format!(
                            "\n{} -> {}",
                            diagram.nodes[s].label, diagram.nodes[t].label
                        ));
                    }
                    println!("{out}");
                }
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&diagram.to_json(&cls))
                        .expect("diagram serializes")
                ),
                Format::Dot => print!("{}", diagram.to_dot()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { m } => {
            let report = verify(*m, data_dir)?;
            emit(cli, || verify_text(&report), &report)?;
            if report.ok() {
                Ok(ExitCode::SUCCESS)
            } else {
                for f in report
                    .catalog
                    .failures
                    .iter()
                    .chain(report.arrows.failures.iter())
                    .chain(report.structure.iter().flat_map(|r| r.failures.iter()))
                    .chain(report.maximal_check.iter().flat_map(|r| r.failures.iter()))
                {
                    eprintln!("verification failed: {f}");
                }
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Eval { file, trials } => {
            let x = load_matrix(file)?;
            let mut unextendible = 0usize;
            for trial in 0..*trials {
                let alpha = sample_generic(&x, cli.seed.wrapping_add(trial as u64), tol)?;
                let p = evaluate(&x, &alpha, tol)?;
                if numeric_is_upb(&p, tol)?.is_upb {
                    unextendible += 1;
                }
            }
            let report = EvalReport {
                trials: *trials,
                unextendible_trials: unextendible,
                seed: cli.seed,
            };
            emit(cli, || report.text(), &report)?;
            if unextendible == *trials {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "verification failed: {} of {} evaluations were extendible",
                    trials - unextendible,
                    trials
                );
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Closure { m, src, id, steps } => {
            let (level, index) = parse_src(src)?;
            let x = catalog_entry(*m, level, index, data_dir)?.matrix;
            let id: Identification = id.parse()?;
            let y = apply_identification(&x, &id)?;
            let beta = sample_generic(&y, cli.seed, tol)?;
            let report = closure_path(&x, &id, &beta, *steps, cli.seed, tol)?;
            emit(cli, || closure_text(&report), &report)?;
            let interior_generic = report.points.iter().filter(|p| p.t < 1.0).all(|p| p.generic);
            if report.terminal_deviation < tol.ortho && interior_generic {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "verification failed: terminal deviation {:.3e} (interior generic: {})",
                    report.terminal_deviation, interior_generic
                );
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Enumerate { m, n, budget } => {
            let run = search(*m, *n, *budget)?;
            let summary = run.summary();
            let reps: Vec<VarMatrix> = run.classes.iter().map(|k| k.to_matrix()).collect();
            emit(cli, || enumeration_text(&summary, &reps), &summary)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn tolerances(cli: &Cli) -> Result<Tolerances, Error> {
    let mut tol = Tolerances::default();
    if let Some(v) = cli.ortho_tol {
        tol.ortho = v;
    }
    if let Some(v) = cli.parallel_tol {
        tol.parallel = v;
    }
    if let Some(v) = cli.generic_tol {
        tol.generic = v;
    }
    tol.validate()?;
    Ok(tol)
}

fn load_matrix(path: &Path) -> Result<VarMatrix, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    VarMatrix::parse(&text)
}

fn parse_src(src: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::invalid(format!("bad --src '{src}': expected level,index such as 13,1"));
    let (l, k) = src.split_once(',').ok_or_else(bad)?;
    Ok((
        l.trim().parse().map_err(|_| bad())?,
        k.trim().parse().map_err(|_| bad())?,
    ))
}

/// Print the text or JSON rendering of a report on standard output.
fn emit<T: serde::Serialize>(
    cli: &Cli,
    text: impl FnOnce() -> String,
    report: &T,
) -> Result<(), Error> {
    match cli.format {
        Format::Text => println!("{}", text()),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(report).expect("report serializes")
        ),
        Format::Dot => {
            return Err(Error::invalid(
                "dot output is only available for the hasse subcommand",
            ))
        }
    }
    Ok(())
}
