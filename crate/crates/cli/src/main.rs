mod grid;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cutlab::corpus;
use cutlab::family::{self, write_theorem_csv, IntervalCertificate};
use cutlab::graph::encode;
use cutlab::numfmt::{self, fmt_f64};
use cutlab::policy::{self, seed_search, PolicyParams};
use cutlab::trainer::{
    self, grid_search, relative_improvement, write_grid_csv, write_train_log_csv, CutSelectionEnv,
    Environment as _, RolloutConfig, RolloutEnv, TrainConfig,
};
use cutlab::{Error, MilpInstance};

/// Cut-selection experiments: adversarial instance demo, weight grid search,
/// policy training and evaluation.
///
/// Every command writes `manifest.json` into its output directory before any
/// other file. Exit status: 0 success, 1 an expectation was violated, 2 bad
/// usage or input.
#[derive(Parser, Debug)]
#[command(name = "cutlab", version)]
struct Cli {
    /// Global seed (env CUTLAB_SEED is used when the flag is absent).
    #[arg(long, env = "CUTLAB_SEED", default_value_t = 0, global = true)]
    seed: u64,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the adversarial instance for a λ grid and show every grid value
    /// fails while the certified interval midpoint solves in one round.
    TheoremDemo(TheoremArgs),
    /// Roll out every weight vector β/resolution (β ∈ N⁴, Σβ = resolution).
    GridSearch(GridArgs),
    /// Seed search followed by batch REINFORCE over a corpus directory.
    Train(TrainArgs),
    /// Roll out each instance with the policy mean as scoring weights.
    Evaluate(EvalArgs),
    /// Write a synthetic corpus (packing, covering, lot sizing, P(a,d)).
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Serialize)]
struct TheoremArgs {
    /// λ grid: "start:step:end" or a comma list, values in [0, 1].
    #[arg(long, default_value = "0:0.1:1")]
    grid: String,
    #[arg(long, default_value_t = 1000)]
    max_rounds: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RolloutArgs {
    /// Separation rounds per rollout.
    #[arg(long, default_value_t = 50)]
    rounds: usize,
    #[arg(long, default_value_t = 10)]
    cuts_per_round: usize,
    #[arg(long, default_value_t = cutlab::selector::DEFAULT_PARALLEL_THRESHOLD)]
    parallel_threshold: f64,
    /// Clamp negative weights to zero before scoring.
    #[arg(long)]
    clamp_actions: bool,
    /// Refill the round with parallelism-filtered cuts.
    #[arg(long)]
    refill: bool,
}

impl RolloutArgs {
    fn config(&self) -> RolloutConfig {
        RolloutConfig {
            n_rounds: self.rounds,
            cuts_per_round: self.cuts_per_round,
            parallel_threshold: self.parallel_threshold,
            clamp_actions: self.clamp_actions,
            refill: self.refill,
            ..RolloutConfig::default()
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct GridArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 10)]
    resolution: usize,
    #[command(flatten)]
    rollout: RolloutArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    /// Directory of instance JSON files.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    /// Sampled actions per instance and epoch.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Initialisation seeds tried by the seed search.
    #[arg(long, default_value_t = 1000)]
    seeds: usize,
    #[arg(long, default_value_t = policy::DEFAULT_HIDDEN)]
    hidden: usize,
    #[arg(long, default_value_t = trainer::DEFAULT_LR)]
    lr: f64,
    /// Subtract each batch's mean reward per instance.
    #[arg(long)]
    center_rewards: bool,
    #[command(flatten)]
    rollout: RolloutArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Instance JSON files.
    instances: Vec<PathBuf>,
    #[command(flatten)]
    rollout: RolloutArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Expectation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::InvalidInstance(_)
            | Error::DimensionMismatch { .. }
            | Error::Checkpoint(_)
            | Error::Empty(_)
            | Error::OutOfRange(_)
            | Error::TooLarge(_)
            | Error::NoUsableGap => Failure::Usage(e.to_string()),
            _ => Failure::Expectation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Serialize)]
struct RunManifest<'a, P: Serialize> {
    command: &'a str,
    version: &'static str,
    seed: u64,
    params: &'a P,
    outputs: Vec<String>,
}

fn prepare_out(dir: &Path, command: &str, seed: u64, params: &impl Serialize, outputs: &[&str]) -> CmdResult {
    fs::create_dir_all(dir)?;
    let m = RunManifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        params,
        outputs: outputs.iter().map(|o| dir.join(o).display().to_string()).collect(),
    };
    fs::write(dir.join("manifest.json"), numfmt::to_json_string(&m).map_err(Error::from)?)?;
    Ok(())
}

fn read_instance(path: &Path) -> Result<MilpInstance, Failure> {
    MilpInstance::read_json(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn theorem_demo(args: &TheoremArgs, seed: u64) -> CmdResult {
    let grid = grid::parse_grid(&args.grid).map_err(Failure::Usage)?;
    prepare_out(&args.out, "theorem-demo", seed, args, &["theorem.csv", "interval.json"])?;
    let report = family::theorem_demo(&grid, args.max_rounds)?;
    write_theorem_csv(args.out.join("theorem.csv"), &report.rows)?;
    IntervalCertificate::new(&report.interval, &report.grid).write_json(args.out.join("interval.json"))?;
    let p = report.params;
    println!(
        "a = {}  d = {}  interval = [{}, {}]",
        fmt_f64(p.a()),
        fmt_f64(p.d()),
        fmt_f64(report.interval.lb),
        fmt_f64(report.interval.ub)
    );
    for r in &report.rows {
        println!("lambda {:<8.5} {}", r.lambda, r.status_str());
    }
    let bad = report.violations();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Expectation(bad.join("; ")))
    }
}

#[derive(Serialize)]
struct BestWeights {
    weights: [f64; 4],
    gap: f64,
    baseline_gap: f64,
    improvement: f64,
}

fn grid_cmd(args: &GridArgs, seed: u64) -> CmdResult {
    let inst = read_instance(&args.instance)?;
    prepare_out(&args.out, "grid-search", seed, args, &["grid.csv", "best.json"])?;
    let env = RolloutEnv::new(inst, args.rollout.config())?;
    let res = grid_search(&env, args.resolution)?;
    write_grid_csv(args.out.join("grid.csv"), &res.table)?;
    let best = BestWeights {
        weights: res.best_weights,
        gap: res.best_gap,
        baseline_gap: res.baseline_gap,
        improvement: res.best_improvement,
    };
    fs::write(args.out.join("best.json"), numfmt::to_json_string(&best).map_err(Error::from)?)?;
    println!(
        "{} scenarios, best {:?} gap {} (baseline {}, improvement {})",
        res.table.len(),
        res.best_weights,
        fmt_f64(res.best_gap),
        fmt_f64(res.baseline_gap),
        fmt_f64(res.best_improvement)
    );
    Ok(())
}

fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .filter(|p| p.file_name().is_some_and(|n| n != "manifest.json"))
        .collect();
    files.sort();
    Ok(files)
}

fn train_cmd(args: &TrainArgs, seed: u64) -> CmdResult {
    let files = corpus_files(&args.corpus)?;
    if files.is_empty() {
        return Err(Failure::Usage(format!("no instances in {}", args.corpus.display())));
    }
    prepare_out(&args.out, "train", seed, args, &["checkpoint.bin", "train_log.csv", "seed_search.json"])?;
    let cfg = args.rollout.config();
    let envs = files
        .iter()
        .map(|f| Ok(CutSelectionEnv::new(read_instance(f)?, cfg.clone())?))
        .collect::<Result<Vec<_>, Failure>>()?;
    let graphs: Vec<_> = envs.iter().map(|e| e.graph().clone()).collect();
    let ss = seed_search(&graphs, args.seeds, args.hidden)?;
    fs::write(args.out.join("seed_search.json"), numfmt::to_json_string(&ss).map_err(Error::from)?)?;
    println!("seed search: seed {} objective {}", ss.seed, fmt_f64(ss.objective));

    let mut theta = PolicyParams::init(args.hidden, ss.seed);
    let tcfg = TrainConfig {
        epochs: args.epochs,
        n_samples: args.samples,
        lr: args.lr,
        seed,
        center_rewards: args.center_rewards,
    };
    let logs = trainer::train(&mut theta, &envs, &tcfg, |l| {
        if l.epoch % 50 == 0 {
            println!("epoch {:>4}  reward {:+.6}  gamma {:.5}", l.epoch, l.mean_reward, l.gamma);
        }
    })?;
    write_train_log_csv(args.out.join("train_log.csv"), &logs)?;
    theta.write_checkpoint(args.out.join("checkpoint.bin"))?;
    Ok(())
}

fn eval_cmd(args: &EvalArgs, seed: u64) -> CmdResult {
    let theta = PolicyParams::read_checkpoint(&args.checkpoint)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.checkpoint.display())))?;
    let insts = args.instances.iter().map(|p| read_instance(p)).collect::<Result<Vec<_>, _>>()?;
    prepare_out(&args.out, "evaluate", seed, args, &["evaluation.csv"])?;
    let cfg = args.rollout.config();
    let mut w = csv::Writer::from_path(args.out.join("evaluation.csv")).map_err(Error::from)?;
    w.write_record(["instance", "mu1", "mu2", "mu3", "mu4", "gap", "improvement"]).map_err(Error::from)?;
    for (path, inst) in args.instances.iter().zip(insts) {
        let mu = policy::forward(&encode(&inst), &theta)?;
        let env = CutSelectionEnv::new(inst, cfg.clone())?;
        let gap = env.gap(&mu)?;
        let imp = relative_improvement(env.baseline_gap(), gap);
        let mut rec = vec![path.display().to_string()];
        rec.extend(mu.iter().map(|&v| fmt_f64(v)));
        rec.push(fmt_f64(gap));
        rec.push(fmt_f64(imp));
        w.write_record(&rec).map_err(Error::from)?;
        println!("{}  gap {}  improvement {}", path.display(), fmt_f64(gap), fmt_f64(imp));
    }
    w.flush()?;
    Ok(())
}

fn generate_cmd(args: &GenerateArgs, seed: u64) -> CmdResult {
    prepare_out(&args.out, "generate", seed, args, &["*.json"])?;
    for (k, inst) in corpus::mixed_corpus(args.count, seed).iter().enumerate() {
        let stem: String =
            inst.name().chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
        inst.write_json(args.out.join(format!("{k:04}-{stem}.json")))?;
    }
    println!("wrote {} instances to {}", args.count, args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Command::TheoremDemo(a) => theorem_demo(a, cli.seed),
        Command::GridSearch(a) => grid_cmd(a, cli.seed),
        Command::Train(a) => train_cmd(a, cli.seed),
        Command::Evaluate(a) => eval_cmd(a, cli.seed),
        Command::Generate(a) => generate_cmd(a, cli.seed),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Expectation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
