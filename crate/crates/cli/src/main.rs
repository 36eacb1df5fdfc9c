mod report;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _};
use clap::{Parser, Subcommand};
use conichom::graph::ProductKind;
use conichom::hom::{decide_hom_with, DecideOptions, HomMode, Verdict};
use conichom::theta::{self, ConeTag, ThetaKind};
use conichom::{Error, Graph, SolveOptions};

use report::VerificationReport;
use verify::{is_suite, run_suite, Context, SUITES};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_NO: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "conichom",
    version,
    about = "Conic graph homomorphisms and generalized theta functions"
)]
struct Cli {
    /// Feasibility tolerance of the interior-point solver [default: 1e-8
    /// for theta, 1e-9 for decisions].
    #[arg(long, global = true)]
    feas_tol: Option<f64>,
    /// Relative duality-gap tolerance of the interior-point solver [default:
    /// as --feas-tol].
    #[arg(long, global = true)]
    gap_tol: Option<f64>,
    /// θ(X ⋉ Y) must fall this far below |V(X)| to refute a homomorphism.
    #[arg(long, global = true, default_value_t = 1e-4)]
    decision_gap: f64,
    /// Seed for the random part of the verification corpus.
    #[arg(long, global = true, default_value_t = conichom::corpus::DEFAULT_SEED)]
    seed: u64,
    /// Largest corpus graph used by `verify`.
    #[arg(long, global = true, default_value_t = 10)]
    max_size: usize,
    /// Largest |V(X)|·|V(Y)| among the pairs `verify` decides.
    #[arg(long, global = true, default_value_t = 24)]
    max_product: usize,
    /// Also write the result JSON to this file.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Print solver progress and per-instance failures.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute θ^K or Θ^K of a graph.
    Theta {
        /// Graph JSON file or generator string (complete:n, cycle:n, ...).
        graph: String,
        #[arg(long, default_value = "splus")]
        cone: ConeTag,
        #[arg(long, default_value = "theta")]
        kind: ThetaKind,
    },
    /// Decide whether a conic homomorphism X → Y exists.
    Hom {
        x: String,
        y: String,
        #[arg(long, default_value = "splus")]
        cone: ConeTag,
        #[arg(long, default_value = "strong")]
        mode: HomMode,
    },
    /// Run invariant suites over the seeded corpus.
    Verify {
        /// Suite id, or `all`.
        #[arg(default_value = "all")]
        suite: String,
        /// List suite ids and exit.
        #[arg(long)]
        list: bool,
    },
    /// Print a graph product as JSON.
    Product {
        /// homomorphic, strong, lexicographic, disjunctive, categorical or union.
        op: String,
        x: String,
        y: String,
    },
}

/// A file path if it exists, otherwise a generator string.
fn load_graph(spec: &str) -> anyhow::Result<Graph> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        return Graph::from_json(&text).with_context(|| format!("parsing {spec}"));
    }
    Graph::from_generator(spec)
        .with_context(|| format!("graph spec {spec:?} is neither a file nor a generator"))
}

fn emit(cli: &Cli, text: &str) -> anyhow::Result<()> {
    println!("{text}");
    if let Some(path) = &cli.json {
        std::fs::write(path, format!("{text}\n"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// `base` with the tolerance flags applied.
fn with_flags(cli: &Cli, base: SolveOptions) -> anyhow::Result<SolveOptions> {
    let opts = SolveOptions {
        feas_tol: cli.feas_tol.unwrap_or(base.feas_tol),
        gap_tol: cli.gap_tol.unwrap_or(base.gap_tol),
        verbose: cli.verbose,
        ..base
    };
    opts.validate()?;
    Ok(opts)
}

fn solve_options(cli: &Cli) -> anyhow::Result<SolveOptions> {
    with_flags(cli, SolveOptions::default())
}

fn decide_options(cli: &Cli) -> anyhow::Result<DecideOptions> {
    if !(cli.decision_gap > 0.0) {
        bail!("--decision-gap must be positive");
    }
    let base = DecideOptions::default();
    Ok(DecideOptions {
        solve: with_flags(cli, base.solve.clone())?,
        theta_no_gap: cli.decision_gap,
        ..base
    })
}

/// Solver trouble is inconclusive; everything else is a usage error.
fn error_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Numerical { .. } | Error::Inconclusive(_) | Error::Capability(_)) => {
            EXIT_INCONCLUSIVE
        }
        _ => EXIT_USAGE,
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Theta { graph, cone, kind } => {
            let g = load_graph(graph)?;
            let r = theta::compute(&g, *cone, *kind, &solve_options(cli)?)?;
            emit(cli, &r.to_json())?;
            Ok(if r.attained {
                EXIT_OK
            } else {
                EXIT_INCONCLUSIVE
            })
        }
        Command::Hom { x, y, cone, mode } => {
            let (gx, gy) = (load_graph(x)?, load_graph(y)?);
            let d = decide_hom_with(&gx, &gy, *cone, *mode, &decide_options(cli)?)?;
            emit(cli, &d.to_json())?;
            Ok(match d.verdict {
                Verdict::Yes(_) => EXIT_OK,
                Verdict::No(_) => EXIT_NO,
                Verdict::Inconclusive(_) => EXIT_INCONCLUSIVE,
            })
        }
        Command::Verify { suite, list } => {
            if *list {
                for (id, what) in SUITES {
                    println!("{id:<20} {what}");
                }
                return Ok(EXIT_OK);
            }
            let ids: Vec<&str> = if suite == "all" {
                SUITES.iter().map(|(id, _)| *id).collect()
            } else if is_suite(suite) {
                vec![suite.as_str()]
            } else {
                bail!("unknown suite {suite:?}; `verify --list` shows the ids");
            };
            let ctx = Context::new(
                cli.seed,
                cli.max_size,
                cli.max_product,
                solve_options(cli)?,
                decide_options(cli)?,
            );
            let mut suites = Vec::new();
            for id in ids {
                let entry = run_suite(id, &ctx);
                println!("{}", entry.summary_line());
                if cli.verbose || entry.fail > 0 {
                    for f in entry.failures.iter().chain(&entry.undecided) {
                        println!("    {}: {}", f.instance, f.detail);
                    }
                }
                std::io::stdout().flush().ok();
                suites.push(entry);
            }
            let report = VerificationReport {
                seed: cli.seed,
                max_size: cli.max_size,
                max_product: cli.max_product,
                suites,
            };
            if let Some(path) = &cli.json {
                let text = serde_json::to_string_pretty(&report)?;
                std::fs::write(path, text + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if report.any_failed() {
                EXIT_NO
            } else {
                EXIT_OK
            })
        }
        Command::Product { op, x, y } => {
            let kind: ProductKind = op.parse()?;
            let p = kind.apply(&load_graph(x)?, &load_graph(y)?);
            emit(cli, &p.to_json())?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
