use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use crowd_assign::generate::{gen_adversarial, gen_lower_bound_family, gen_uniform_hetero, Seed};
use crowd_assign::harness::{
    run_adversarial_experiment, run_uniform_experiment, verify_lower_bound, AdversarialConfig,
    UniformConfig,
};
use crowd_assign::instance::{parse_instance, serialize_instance, Assignment, Instance};
use crowd_assign::offline::{brute_force_optimal, greedy_homogeneous, offline_optimal};
use crowd_assign::online::{oha, rpa, BudgetMode, PaymentMode, RpaConfig};
use crowd_assign::threshold::{ftp, oa};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Simulator for budgeted online assignment of heterogeneous tasks.
#[derive(Parser)]
#[command(name = "crowd-assign", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance offline and print the optimal (or baseline) result.
    SolveOffline(SolveOffline),
    /// Run the fixed threshold policy or the offline threshold search.
    RunThreshold(RunThreshold),
    /// Run an online algorithm over the instance's arrival order.
    RunOnline(RunOnline),
    /// Generate a seeded instance file from one of the families.
    GenInstance(GenInstance),
    /// Seeded experiment sweeps emitting CSV.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Clone, Copy, ValueEnum)]
enum OfflineAlgorithm {
    Flow,
    Brute,
    Greedy,
}

#[derive(Args)]
struct SolveOffline {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "flow")]
    algorithm: OfflineAlgorithm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Ftp,
    Oa,
}

#[derive(Args)]
struct RunThreshold {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    policy: Policy,
    /// Threshold price; required by (and only valid for) the ftp policy.
    #[arg(long)]
    price: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnlineAlgorithm {
    Oha,
    Rpa,
}

#[derive(Clone, Copy, ValueEnum)]
enum BudgetModeArg {
    Half,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum PaymentArg {
    Bid,
    Threshold,
}

#[derive(Args)]
struct RunOnline {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    algorithm: OnlineAlgorithm,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "half")]
    budget_mode: BudgetModeArg,
    #[arg(long, value_enum, default_value = "bid")]
    payment: PaymentArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Adversarial,
    Uniform,
    Lowerbound,
}

#[derive(Args)]
struct GenInstance {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long = "R")]
    r: f64,
    /// Geometric bid decay of the lower-bound family.
    #[arg(long)]
    eta: Option<f64>,
    /// Budget of the lower-bound family.
    #[arg(long = "B")]
    budget: Option<f64>,
    /// Which nested instance of the lower-bound family to write
    /// (defaults to the last, longest one).
    #[arg(long)]
    u: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Experiment {
    /// Staircase sweep: R over powers of two, B = 2R, OHA on arrival order
    /// plus OHA and RPA on a random permutation.
    Adversarial(AdversarialArgs),
    /// Random bipartite sweep: R = 2..=50, n = m = 200, B = 200.
    Uniform(UniformArgs),
    /// Check the hard-distribution inequality over random budget splits.
    Lowerbound(LowerboundArgs),
}

#[derive(Args)]
struct AdversarialArgs {
    #[arg(long = "R-min", default_value_t = 2)]
    r_min: u64,
    #[arg(long = "R-max", default_value_t = 1 << 12)]
    r_max: u64,
    #[arg(long, default_value_t = 200)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
    /// Run trials sequentially (output is identical either way).
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct UniformArgs {
    #[arg(long = "R-min", default_value_t = 2)]
    r_min: u64,
    #[arg(long = "R-max", default_value_t = 50)]
    r_max: u64,
    #[arg(long, default_value_t = 80)]
    trials: u32,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct LowerboundArgs {
    #[arg(long)]
    eta: f64,
    #[arg(long = "R")]
    r: f64,
    #[arg(long, default_value_t = 1000)]
    samples: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize)]
struct OfflineReport<'a> {
    algorithm: &'a str,
    #[serde(rename = "F")]
    flow_value: usize,
    total_cost: f64,
    assignment: &'a Assignment,
}

#[derive(Serialize)]
struct ThresholdReport<'a> {
    policy: &'a str,
    q: usize,
    p_star: f64,
    assignment: &'a Assignment,
}

#[derive(Serialize)]
struct OnlineReport<'a> {
    algorithm: &'a str,
    pairs: usize,
    spend: f64,
    assignment: &'a Assignment,
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading instance file {}", path.display()))?;
    Ok(parse_instance(&text)?)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn solve_offline(args: &SolveOffline) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    match args.algorithm {
        OfflineAlgorithm::Flow => {
            let result = offline_optimal(&inst);
            print_json(&OfflineReport {
                algorithm: "flow",
                flow_value: result.flow_value,
                total_cost: result.total_cost,
                assignment: &result.assignment,
            })
        }
        OfflineAlgorithm::Brute => {
            let result = brute_force_optimal(&inst)?;
            print_json(&OfflineReport {
                algorithm: "brute",
                flow_value: result.flow_value,
                total_cost: result.total_cost,
                assignment: &result.assignment,
            })
        }
        OfflineAlgorithm::Greedy => {
            let assignment = greedy_homogeneous(&inst);
            print_json(&OfflineReport {
                algorithm: "greedy",
                flow_value: assignment.len(),
                total_cost: assignment.total_payment(),
                assignment: &assignment,
            })
        }
    }
}

fn run_threshold(args: &RunThreshold) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let tasks = inst.all_tasks();
    match args.policy {
        Policy::Ftp => {
            let Some(price) = args.price else {
                bail!("--price is required for the ftp policy");
            };
            let assignment = ftp(
                price,
                inst.budget(),
                inst.workers(),
                &tasks,
                inst.num_tasks(),
            );
            let q = assignment.len();
            let p_star = if q > 0 { inst.budget() / q as f64 } else { 0.0 };
            print_json(&ThresholdReport {
                policy: "ftp",
                q,
                p_star,
                assignment: &assignment,
            })
        }
        Policy::Oa => {
            if args.price.is_some() {
                bail!("--price only applies to the ftp policy");
            }
            let result = oa(inst.workers(), &tasks, inst.budget(), inst.num_tasks());
            print_json(&ThresholdReport {
                policy: "oa",
                q: result.q,
                p_star: result.p_star,
                assignment: &result.assignment,
            })
        }
    }
}

fn run_online(args: &RunOnline) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let assignment = match args.algorithm {
        OnlineAlgorithm::Oha => {
            let mode = match args.payment {
                PaymentArg::Bid => PaymentMode::Bid,
                PaymentArg::Threshold => PaymentMode::Threshold,
            };
            oha(&inst, mode)?
        }
        OnlineAlgorithm::Rpa => {
            let mode = match args.budget_mode {
                BudgetModeArg::Half => BudgetMode::Half,
                BudgetModeArg::Full => BudgetMode::Full,
            };
            rpa(&inst, &RpaConfig::new(args.alpha, mode)?)?
        }
    };
    let name = match args.algorithm {
        OnlineAlgorithm::Oha => "oha",
        OnlineAlgorithm::Rpa => "rpa",
    };
    print_json(&OnlineReport {
        algorithm: name,
        pairs: assignment.len(),
        spend: assignment.total_payment(),
        assignment: &assignment,
    })
}

fn gen_instance(args: &GenInstance) -> Result<()> {
    let inst = match args.family {
        Family::Adversarial => {
            if args.r.fract() != 0.0 || args.r < 0.0 {
                bail!("adversarial family needs an integral power-of-two R");
            }
            gen_adversarial(args.r as u64, Seed(args.seed))?
        }
        Family::Uniform => {
            if args.r.fract() != 0.0 || args.r < 0.0 {
                bail!("uniform family needs an integral R");
            }
            let r = args.r as u64;
            if r > 50 {
                eprintln!(
                    "warning: R = {r} is outside the calibrated range 2..=50 of the uniform family"
                );
            }
            gen_uniform_hetero(r, Seed(args.seed))?
        }
        Family::Lowerbound => {
            let Some(eta) = args.eta else {
                bail!("--eta is required for the lowerbound family");
            };
            let Some(budget) = args.budget else {
                bail!("--B is required for the lowerbound family");
            };
            let family = gen_lower_bound_family(eta, args.r, budget)?;
            let index = args.u.unwrap_or(family.k);
            let Some(inst) = family.instances.get(index).cloned() else {
                bail!(
                    "--u {} is out of range; the family has instances 0..={}",
                    index,
                    family.k
                );
            };
            inst
        }
    };
    let mut text = serialize_instance(&inst);
    text.push('\n');
    std::fs::write(&args.out, text)
        .with_context(|| format!("writing instance to {}", args.out.display()))?;
    eprintln!(
        "wrote instance with {} workers, {} tasks to {}",
        inst.num_workers(),
        inst.num_tasks(),
        args.out.display()
    );
    Ok(())
}

fn experiment(args: &Experiment) -> Result<()> {
    match args {
        Experiment::Adversarial(a) => {
            let cfg = AdversarialConfig {
                min_ceiling: a.r_min,
                max_ceiling: a.r_max,
                trials: a.trials,
                base_seed: a.seed,
                alpha: a.alpha,
                parallel: !a.serial,
            };
            let output = run_adversarial_experiment(&cfg)?;
            std::fs::write(&a.out, output.to_csv())
                .with_context(|| format!("writing CSV to {}", a.out.display()))?;
            eprintln!(
                "adversarial sweep complete: {} rows, every competitive bound held",
                output.rows.len()
            );
            Ok(())
        }
        Experiment::Uniform(u) => {
            let cfg = UniformConfig {
                min_ceiling: u.r_min,
                max_ceiling: u.r_max,
                trials: u.trials,
                alpha: u.alpha,
                base_seed: u.seed,
                parallel: !u.serial,
            };
            let output = run_uniform_experiment(&cfg)?;
            std::fs::write(&u.out, output.to_csv())
                .with_context(|| format!("writing CSV to {}", u.out.display()))?;
            eprintln!(
                "uniform sweep complete: {} rows, every competitive bound held",
                output.rows.len()
            );
            Ok(())
        }
        Experiment::Lowerbound(l) => {
            let report = verify_lower_bound(&[l.eta], &[l.r], l.samples, l.seed)?;
            for case in &report.cases {
                println!(
                    "eta={} R={} k={} bound={} max_observed={} concentrated={} samples={} OK",
                    case.eta,
                    case.ceiling,
                    case.k,
                    case.bound,
                    case.max_observed,
                    case.concentrated,
                    case.samples
                );
            }
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::SolveOffline(args) => solve_offline(args),
        Command::RunThreshold(args) => run_threshold(args),
        Command::RunOnline(args) => run_online(args),
        Command::GenInstance(args) => gen_instance(args),
        Command::Experiment(args) => experiment(args),
    }
}
