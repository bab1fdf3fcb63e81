use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use otcert::cli::{self, GenParams, Options};
use otcert::error::Result;
use otcert::report::Report;
use otcert::scalar::{Rational, Scalar};

/// Certify optimality, c-monotonicity and robust optimality of discrete
/// transport plans. Exit status: 0 all verdicts pass, 1 a verdict fails,
/// 2 bad input.
#[derive(Parser)]
#[command(name = "otcert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Exact rational arithmetic (default).
    #[arg(long, global = true, conflicts_with = "float")]
    rational: bool,
    /// f64 arithmetic with absolute tolerance 1e-9.
    #[arg(long, global = true)]
    float: bool,
    /// Gaps up to this value count as zero in verdicts.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Run on every *.json file of a directory instead of a single file.
    #[arg(long, global = true)]
    batch: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum-cost plan of an instance.
    Solve { instance: Option<PathBuf> },
    /// Optimality, c-monotonicity, robust optimality and strong
    /// c-monotonicity of a plan (inline, --plan, or the solver's).
    Check {
        instance: Option<PathBuf>,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Number of storage points.
        #[arg(long, default_value_t = 1)]
        z_size: usize,
        /// Storage mass per point.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Adversarial toll samples.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Reroute along violating cycles until the plan is c-monotone.
    Improve {
        instance: Option<PathBuf>,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Print a generated instance: ap, shift, zero-one or random.
    Gen {
        example: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value = "1")]
        a: String,
        #[arg(long, default_value = "2")]
        b: String,
        #[arg(long, default_value_t = 0.0)]
        inf_density: f64,
        /// Embed a plan: identity, shift or optimal.
        #[arg(long)]
        plan: Option<String>,
    },
    /// Multi-marginal P(B) versus L(B).
    Kellerer { instance: Option<PathBuf> },
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let code = if args.float { run::<f64>(&args) } else { run::<Rational>(&args) };
    ExitCode::from(code)
}

type Runner<'a> = Box<dyn Fn(&Path) -> Result<Report> + Sync + 'a>;

fn run<S: Scalar>(args: &Cli) -> u8 {
    let mut opts = Options { tolerance: args.tolerance, seed: args.seed, ..Options::default() };
    let single: Runner = match &args.command {
        Command::Gen { example, n, a, b, inf_density, plan } => {
            let params = GenParams {
                n: *n,
                a: a.clone(),
                b: b.clone(),
                seed: args.seed,
                inf_density: *inf_density,
                plan: plan.clone(),
            };
            return match cli::cmd_gen::<S>(example, &params) {
                Ok(v) => {
                    println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            };
        }
        Command::Solve { .. } => Box::new(cli::cmd_solve::<S>),
        Command::Check { plan, z_size, lambda, trials, .. } => {
            opts.z_size = *z_size;
            opts.lambda = *lambda;
            opts.trials = *trials;
            let (plan, opts) = (plan.clone(), opts.clone());
            Box::new(move |p: &Path| cli::cmd_check::<S>(p, plan.as_deref(), &opts))
        }
        Command::Improve { plan, max_iters, .. } => {
            opts.max_iters = *max_iters;
            let (plan, opts) = (plan.clone(), opts.clone());
            Box::new(move |p: &Path| cli::cmd_improve::<S>(p, plan.as_deref(), &opts))
        }
        Command::Kellerer { .. } => Box::new(cli::cmd_kellerer::<S>),
    };
    let instance = match &args.command {
        Command::Solve { instance }
        | Command::Check { instance, .. }
        | Command::Improve { instance, .. }
        | Command::Kellerer { instance } => instance.clone(),
        Command::Gen { .. } => None,
    };
    let files = match (&args.batch, instance) {
        (Some(dir), None) => match cli::batch_files(dir) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        },
        (None, Some(file)) => vec![file],
        _ => {
            eprintln!("error: give exactly one of an instance path or --batch DIR");
            return 2;
        }
    };
    let mut worst = 0;
    for (file, outcome) in cli::run_batch(&files, single) {
        let code = match outcome {
            Ok(report) => {
                if args.json {
                    let mut v = report.to_json();
                    v["file"] = serde_json::json!(file.display().to_string());
                    println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
                } else {
                    if args.batch.is_some() {
                        println!("# {}", file.display());
                    }
                    print!("{}", report.render_text());
                }
                report.exit_code() as u8
            }
            Err(e) => {
                eprintln!("error: {}: {e}", file.display());
                2
            }
        };
        worst = worst.max(code);
    }
    worst
}
