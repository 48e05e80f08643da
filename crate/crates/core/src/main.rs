use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use possdro::document::ModelDocument;
use possdro::problems::{build_portfolio_with, gen_knapsack, KnapsackParams, PortfolioData, PortfolioParams, PRNG_NAME};
use possdro::reform::build_problem;
use possdro::solver::{solve_conic, SolverConfig, Status};
use possdro::sweep::{default_workers, knapsack_csv, knapsack_sweep, portfolio_csv, portfolio_sweep};
use possdro::verify::{run_verification, VERIFY_TOL};
use possdro::Error;

/// Exit code of a failed verification run.
const EXIT_VERIFY_FAILED: u8 = 5;

#[derive(Parser)]
#[command(name = "possdro", version, about = "Worst-case CVaR models over possibilistic ambiguity sets")]
struct Cli {
    #[command(flatten)]
    solver: SolverFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverFlags {
    /// Primal feasibility tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    feas_tol: f64,
    /// Cone violation accepted by the cut loop.
    #[arg(long, global = true, default_value_t = 1e-6)]
    cone_tol: f64,
    #[arg(long, global = true, default_value_t = 5_000_000)]
    max_pivots: usize,
    /// Cuts allowed per cone before giving up.
    #[arg(long, global = true, default_value_t = 200)]
    max_cuts: usize,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            feas_tol: self.feas_tol,
            cone_tol: self.cone_tol,
            max_pivots: self.max_pivots,
            max_cuts_per_cone: self.max_cuts,
        }
    }
}

#[derive(Args)]
struct SweepOutput {
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Write 0 in the solve_ms column so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a JSON model document.
    Solve { path: PathBuf },
    /// Knapsack sweep over deviation budgets and risk levels.
    Knapsack {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        ell: usize,
        /// Relative weight deviation.
        #[arg(long, default_value_t = 0.4)]
        q: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3")]
        delta_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        eps_list: Vec<f64>,
        #[command(flatten)]
        output: SweepOutput,
    },
    /// Portfolio sweep with the gap of the nominal portfolio.
    Portfolio {
        /// Deviation budgets.
        #[arg(long, value_delimiter = ',', default_value = "4")]
        delta_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        eps_list: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        ell: usize,
        /// Tangent pieces of the exponential disutility.
        #[arg(long, default_value_t = 10)]
        pieces: usize,
        /// JSON file with mean_return and covariance_upper; bundled data
        /// when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        output: SweepOutput,
    },
    /// Cross-check the reformulation against brute force on random instances.
    Verify {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Export a model: a document file, or a built-in instance.
    Export {
        /// Path to a model document, or `knapsack` / `portfolio`.
        source: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Budget of a built-in instance.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        pieces: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// LP-style listing of the assembled model.
    Text,
    /// Model document.
    Json,
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Optimal => 0,
        Status::Infeasible => 2,
        Status::Unbounded => 3,
        Status::IterationLimit => 4,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_document(path: &Path) -> Result<ModelDocument, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ModelDocument::parse(&text).map_err(|e| match e {
        Error::Parse { line, column, message } => format!("{}:{line}:{column}: {message}", path.display()),
        other => format!("{}: {other}", path.display()),
    })
}

fn fmt_value(v: f64) -> String {
    let v = if v.abs() < 5e-10 { 0.0 } else { v };
    format!("{v:.9}")
}

fn cmd_solve(path: &Path, cfg: &SolverConfig) -> Result<u8, String> {
    let doc = load_document(path)?;
    let (objective, constraints, domain) = doc.to_problem().map_err(|e| e.to_string())?;
    let built = build_problem(&objective, &constraints, &domain).map_err(|e| e.to_string())?;
    let res = solve_conic(&built.model, cfg);
    println!("status: {}", res.status);
    println!("objective: {}", fmt_value(res.objective));
    for (j, v) in built.decision(&res).iter().enumerate() {
        println!("x{} = {}", j + 1, fmt_value(*v));
    }
    println!("iterations: {}", res.iterations);
    println!("cuts: {}", res.cut_count);
    Ok(status_code(res.status))
}

fn run(cli: Cli) -> Result<u8, String> {
    let cfg = cli.solver.config();
    cfg.validate().map_err(|e| e.to_string())?;
    match cli.command {
        Command::Solve { path } => cmd_solve(&path, &cfg),
        Command::Knapsack {
            n,
            seed,
            ell,
            q,
            delta_list,
            eps_list,
            output,
        } => {
            let base = KnapsackParams {
                n,
                seed,
                q,
                ell,
                ..Default::default()
            };
            let workers = output.workers.unwrap_or_else(default_workers);
            let cells = knapsack_sweep(&base, &delta_list, &eps_list, &cfg, workers).map_err(|e| e.to_string())?;
            let meta = format!("possdro knapsack n={n} seed={seed} prng={PRNG_NAME} ell={ell} q={q}");
            emit(output.out.as_deref(), &knapsack_csv(&meta, &cells, !output.no_timing))?;
            Ok(cells.iter().map(|c| status_code(c.status)).max().unwrap_or(0))
        }
        Command::Portfolio {
            delta_list,
            eps_list,
            ell,
            pieces,
            data,
            output,
        } => {
            let data = match &data {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
                    PortfolioData::from_json(&text).map_err(|e| format!("{}: {e}", p.display()))?
                }
                None => PortfolioData::bundled(),
            };
            let base = PortfolioParams {
                ell,
                pieces,
                ..Default::default()
            };
            let workers = output.workers.unwrap_or_else(default_workers);
            let cells = portfolio_sweep(&data, &base, &delta_list, &eps_list, &cfg, workers).map_err(|e| e.to_string())?;
            let meta = format!("possdro portfolio assets={} seed=none prng=none ell={ell} pieces={pieces}", data.mean.len());
            emit(output.out.as_deref(), &portfolio_csv(&meta, &cells, !output.no_timing))?;
            Ok(cells.iter().map(|c| status_code(c.status)).max().unwrap_or(0))
        }
        Command::Verify { trials, seed } => {
            if trials == 0 {
                return Err("usage error: --trials must be at least 1".into());
            }
            let rep = run_verification(trials, seed, &cfg).map_err(|e| e.to_string())?;
            println!("# possdro verify trials={trials} seed={seed} prng={PRNG_NAME} tol={VERIFY_TOL:e}");
            println!("max_discrepancy: {:.3e} (trial {})", rep.max_discrepancy, rep.worst_trial);
            println!("eps0_trials: {} max_discrepancy: {:.3e}", rep.eps0_trials, rep.eps0_discrepancy);
            println!("zero_budget_trials: {} max_discrepancy: {:.3e}", rep.degenerate_trials, rep.degenerate_discrepancy);
            println!("solve_failures: {}", rep.failures);
            println!("result: {}", if rep.passed() { "PASS" } else { "FAIL" });
            Ok(if rep.passed() { 0 } else { EXIT_VERIFY_FAILED })
        }
        Command::Export {
            source,
            format,
            delta,
            eps,
            ell,
            seed,
            n,
            pieces,
            out,
        } => {
            let doc = match source.as_str() {
                "knapsack" => {
                    let p = KnapsackParams {
                        n,
                        seed,
                        delta: delta.unwrap_or(0.0),
                        eps,
                        ell: ell.unwrap_or(100),
                        ..Default::default()
                    };
                    let (inst, _) = gen_knapsack(&p).map_err(|e| e.to_string())?;
                    ModelDocument::knapsack(&inst).map_err(|e| e.to_string())?
                }
                "portfolio" => {
                    let p = PortfolioParams {
                        delta_bar: delta.unwrap_or(4.0),
                        eps,
                        ell: ell.unwrap_or(20),
                        pieces,
                    };
                    let (inst, _) = build_portfolio_with(&PortfolioData::bundled(), &p).map_err(|e| e.to_string())?;
                    ModelDocument::portfolio(&inst).map_err(|e| e.to_string())?
                }
                path => load_document(Path::new(path))?,
            };
            let text = match format {
                Format::Json => doc.to_json() + "\n",
                Format::Text => {
                    let (o, c, d) = doc.to_problem().map_err(|e| e.to_string())?;
                    build_problem(&o, &c, &d).map_err(|e| e.to_string())?.model.export_text()
                }
            };
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
