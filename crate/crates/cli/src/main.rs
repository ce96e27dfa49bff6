//! Command-line front end. Every subcommand is a thin composition of library calls.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use myopic_auth::adversary::ForgeryTarget;
use myopic_auth::channel::{blahut_arimoto, load_channel, MyopicAvc};
use myopic_auth::code::DEFAULT_C_TAG_PROXY;
use myopic_auth::math::Distribution;
use myopic_auth::overwrite::{classify_with, kappa, nu_estimate_with, ClassifyOptions};
use myopic_auth::reproduce::{reproduce_examples, ReproduceOptions, DEFAULT_SEED, DEFAULT_TRIALS};
use myopic_auth::sim::experiment::{
    load_config, run_experiment_config, write_outputs, ChannelSource, CodeConfig, ExperimentConfig,
    StrategyConfig, TagConfig, TagKind,
};
use myopic_auth::tag::{build_set_family_with, FamilyParams, PairwiseRule};
use myopic_auth::{Error, Execution};

#[derive(Parser, Debug)]
#[command(name = "myopic-auth", version, about = "Authentication over channels with a myopic adversary")]
struct Cli {
    /// Worker threads for parallel stages [default: available cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run every stage sequentially
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide the four overwritability tiers of a channel
    Classify(ClassifyArgs),
    /// κ(P, x′) for one input distribution and target symbol
    Kappa(KappaArgs),
    /// Lower bound on the class margin ν
    Nu(NuArgs),
    /// Build an overlapping set family and check its properties
    SetFamily(SetFamilyArgs),
    /// Simulate tag error probabilities over an n sweep
    TagSim(TagSimArgs),
    /// Simulate a two-phase authentication code
    CodeSim(CodeSimArgs),
    /// Regenerate the worked examples of the BSC/BEC family
    ReproduceExamples(ReproduceArgs),
    /// Capacity of the no-adversary channel
    Capacity(CapacityArgs),
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Net radius for the distribution tiers
    #[arg(long, default_value_t = 0.05)]
    grid_delta: f64,
    /// Net radius for class representatives [default: grid-delta]
    #[arg(long)]
    class_grid_delta: Option<f64>,
    /// Seed for vertex sampling on large input alphabets
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Channel file (TOML or JSON)
    #[arg(long)]
    channel: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Write the full JSON report here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KappaArgs {
    #[arg(long)]
    channel: PathBuf,
    /// Input distribution, comma separated [default: uniform]
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Target input symbol
    #[arg(long, default_value_t = 0)]
    x_prime: usize,
}

#[derive(Args, Debug)]
struct NuArgs {
    #[arg(long)]
    channel: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct SetFamilyArgs {
    /// Block length
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    /// Number of sets
    #[arg(long, default_value_t = 16)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    max_retries: usize,
    /// Enforce only the size window, not the pairwise properties
    #[arg(long)]
    size_only: bool,
    /// Write the family as JSON here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TagStrategy {
    Absent,
    OverwriteWitness,
    BestMemoryless,
}

#[derive(Args, Debug)]
struct ChannelChoice {
    /// Channel file; the BSC/BEC family is used when absent
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Family crossover probability
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Family overwrite flip probability
    #[arg(long, default_value_t = 0.3)]
    r: f64,
    /// Family erasure probability of the adversary's view
    #[arg(long, default_value_t = 0.5)]
    u: f64,
}

impl ChannelChoice {
    fn source(&self) -> Result<ChannelSource, anyhow::Error> {
        Ok(match &self.channel {
            Some(path) => ChannelSource::File {
                path: std::path::absolute(path).context("resolving channel path")?,
            },
            None => ChannelSource::ROwBscBec {
                p: self.p,
                r: self.r,
                u: self.u,
            },
        })
    }
}

#[derive(Args, Debug)]
struct TagSimArgs {
    /// Run this experiment config instead of building one from flags
    #[arg(long, conflicts_with_all = ["channel", "n"])]
    config: Option<PathBuf>,
    #[command(flatten)]
    channel: ChannelChoice,
    /// Tag lengths, comma separated
    #[arg(long, value_delimiter = ',', default_value = "200")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    #[arg(long, default_value_t = 0.2)]
    mu: f64,
    /// Decoder threshold [default: mu/4]
    #[arg(long)]
    rho: Option<f64>,
    /// Number of messages (sets)
    #[arg(long, default_value_t = 8)]
    sets: usize,
    #[arg(long, default_value_t = 0)]
    x_prime: usize,
    /// Sent message
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Decoded candidate; equal to m measures false alarm
    #[arg(long, default_value_t = 1)]
    m_hat: usize,
    /// Use the largest-overlap pair of each family instead of m, m-hat
    #[arg(long)]
    worst_pair: bool,
    #[arg(long, default_value_t = 0)]
    family_seed: u64,
    /// Adversaries to simulate (repeatable)
    #[arg(long = "strategy", value_enum, default_values_t = [TagStrategy::Absent])]
    strategies: Vec<TagStrategy>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for results.csv, manifest.json and decay.csv
    #[arg(long, default_value = "tag-sim-out")]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CodeStrategy {
    Absent,
    Forger,
}

#[derive(Args, Debug)]
struct CodeSimArgs {
    #[command(flatten)]
    channel: ChannelChoice,
    #[arg(long, default_value_t = 0.25)]
    rate: f64,
    /// Payload block length
    #[arg(long, default_value_t = 512)]
    block_len: usize,
    /// Tag length [default: fixed point of the length rule]
    #[arg(long)]
    tag_len: Option<usize>,
    /// Stand-in for the tag capacity in the length rule
    #[arg(long, default_value_t = DEFAULT_C_TAG_PROXY)]
    c_tag_proxy: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 0.8)]
    mu: f64,
    #[arg(long, default_value_t = 0.2)]
    rho: f64,
    /// Sampled messages for the maximal error
    #[arg(long, default_value_t = 32)]
    messages: usize,
    #[arg(long = "strategy", value_enum, default_values_t = [CodeStrategy::Absent])]
    strategies: Vec<CodeStrategy>,
    /// Trials per message
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "code-sim-out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    #[arg(long, default_value = "examples-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    grid_delta: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Trials per cell of the decay sweep
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
}

#[derive(Args, Debug)]
struct CapacityArgs {
    /// Channel file; its no-adversary channel is used
    #[arg(long, conflicts_with = "bsc")]
    channel: Option<PathBuf>,
    /// Capacity of BSC(p) instead
    #[arg(long)]
    bsc: Option<f64>,
}

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn classify_options(g: &GridArgs, exec: Execution) -> ClassifyOptions {
    ClassifyOptions {
        class_grid_delta: g.class_grid_delta.unwrap_or(g.grid_delta),
        seed: g.seed,
        execution: exec,
        ..ClassifyOptions::new(g.grid_delta)
    }
}

fn channel(path: &Path) -> anyhow::Result<MyopicAvc> {
    Ok(load_channel(path)?)
}

fn run_and_report(cfg: &ExperimentConfig, base: &Path, out: &Path) -> anyhow::Result<()> {
    let result = run_experiment_config(cfg, base)?;
    let files = write_outputs(&result, out)?;
    println!("cell_id,quantity,estimate,ci_lo,ci_hi,trials,seed");
    for r in &result.rows {
        println!(
            "{},{},{},{},{},{},{}",
            r.cell_id, r.quantity, r.estimate, r.ci_lo, r.ci_hi, r.trials, r.seed
        );
    }
    for d in &result.decay {
        println!(
            "decay {}: gamma={:.6} r2={:.4}{}",
            d.strategy,
            d.gamma,
            d.r_squared,
            if d.degenerate { " (degenerate)" } else { "" }
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let exec = execution(&cli);
    match &cli.command {
        Command::Classify(a) => {
            let avc = channel(&a.channel)?;
            let report = classify_with(&avc, &classify_options(&a.grid, exec))?;
            println!("{}", report.summary_line());
            for (name, tier) in report.tiers() {
                println!(
                    "  {name}: worst {:.6} (margin {:.1e}, {} cases)",
                    tier.worst.value, tier.margin, tier.cases_checked
                );
            }
            let (lo, hi) = report
                .kappa_table
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e.kappa), hi.max(e.kappa)));
            println!("  kappa over {} grid points: min {lo:.6}, max {hi:.6}", report.kappa_table.len());
            println!("  nu lower bound: {:.6}", report.nu_estimate);
            for w in &report.warnings {
                println!("  warning: {w}");
            }
            if let Some(out) = &a.out {
                std::fs::write(out, report.to_json()?).with_context(|| format!("writing {}", out.display()))?;
                println!("wrote {}", out.display());
            }
        }
        Command::Kappa(a) => {
            let avc = channel(&a.channel)?;
            let p = match &a.p {
                Some(v) => Distribution::new(v.clone()).context("--p")?,
                None => Distribution::uniform(avc.x_size()),
            };
            let k = kappa(&p, a.x_prime, &avc)?;
            println!("kappa = {:.9}", k.value);
            println!("strategy = {}", serde_json::to_string(&k.strategy.to_nested())?);
        }
        Command::Nu(a) => {
            let avc = channel(&a.channel)?;
            let nu = nu_estimate_with(&avc, &classify_options(&a.grid, exec))?;
            println!("nu >= {:.9} over {} classes", nu.value, nu.classes);
            if let Some(w) = &nu.warning {
                println!("warning: {w}");
            }
        }
        Command::SetFamily(a) => {
            let mut fp = FamilyParams::new(a.n, a.alpha, a.beta, a.count, a.seed);
            fp.max_retries = a.max_retries;
            if a.size_only {
                fp.pairwise = PairwiseRule::SizeOnly;
            }
            let fam = build_set_family_with(&fp)?;
            let c = fam.check();
            println!(
                "{} sets over n={} after {} retries; properties 1-3: {}",
                fam.len(),
                fam.n,
                fam.retries,
                if c.passes_1_to_3() { "pass" } else { "fail" }
            );
            println!("{}", serde_json::to_string(&c)?);
            if let Some(out) = &a.out {
                std::fs::write(out, serde_json::to_string_pretty(&fam)?)
                    .with_context(|| format!("writing {}", out.display()))?;
                println!("wrote {}", out.display());
            }
        }
        Command::TagSim(a) => {
            if let Some(path) = &a.config {
                let mut cfg = load_config(path)?;
                if cli.sequential {
                    cfg.execution = Execution::Sequential;
                }
                let base = path.parent().unwrap_or(Path::new("."));
                return run_and_report(&cfg, base, &a.out);
            }
            let strategies = a
                .strategies
                .iter()
                .map(|s| match s {
                    TagStrategy::Absent => StrategyConfig::Absent,
                    TagStrategy::OverwriteWitness => StrategyConfig::OverwriteWitness,
                    TagStrategy::BestMemoryless => StrategyConfig::BestMemoryless {
                        search_trials: 300,
                        grid_steps: 4,
                        max_sweeps: 3,
                    },
                })
                .collect();
            let cfg = ExperimentConfig {
                name: "tag-sim".to_string(),
                seed: a.seed,
                trials: a.trials,
                execution: exec,
                channel: a.channel.source()?,
                tag: Some(TagConfig {
                    kind: TagKind::Simple,
                    n_values: a.n.clone(),
                    alpha: a.alpha,
                    beta: a.beta,
                    mu: a.mu,
                    rho: a.rho,
                    sets: a.sets,
                    x_prime: a.x_prime,
                    p_x: None,
                    family_seed: a.family_seed,
                    max_retries: 10,
                    m: a.m,
                    m_hat: a.m_hat,
                    worst_pair: a.worst_pair,
                    sub_blocks: None,
                    delta: None,
                }),
                code: None,
                strategies,
            };
            run_and_report(&cfg, Path::new("."), &a.out)?;
        }
        Command::CodeSim(a) => {
            let cfg = ExperimentConfig {
                name: "code-sim".to_string(),
                seed: a.seed,
                trials: a.trials,
                execution: exec,
                channel: a.channel.source()?,
                tag: None,
                code: Some(CodeConfig {
                    rate: a.rate,
                    block_len: a.block_len,
                    code_seed: a.seed,
                    c_tag_proxy: a.c_tag_proxy,
                    tag_len: a.tag_len,
                    alpha: a.alpha,
                    beta: a.beta,
                    mu: a.mu,
                    rho: a.rho,
                    x_prime: 0,
                    p_x: None,
                    family_seed: a.seed,
                    max_retries: 10,
                    messages: a.messages,
                }),
                strategies: a
                    .strategies
                    .iter()
                    .map(|s| match s {
                        CodeStrategy::Absent => StrategyConfig::Absent,
                        CodeStrategy::Forger => StrategyConfig::TwoPhaseForger {
                            target: ForgeryTarget::Adaptive,
                        },
                    })
                    .collect(),
            };
            run_and_report(&cfg, Path::new("."), &a.out)?;
        }
        Command::ReproduceExamples(a) => {
            let opts = ReproduceOptions {
                grid_delta: a.grid_delta,
                seed: a.seed,
                trials: a.trials,
                execution: exec,
            };
            let report = reproduce_examples(&a.out, &opts)?;
            for r in &report.reports {
                println!("{}: {}", r.channel, r.summary_line());
            }
            println!(
                "stated outcomes reproduced: {}",
                if report.all_match { "all" } else { "NOT all (see classification.csv)" }
            );
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Capacity(a) => {
            let w = match (&a.channel, a.bsc) {
                (Some(path), None) => channel(path)?.no_adversary().clone(),
                (None, Some(p)) => myopic_auth::channel::bsc(p)?,
                _ => bail!(Usage("give exactly one of --channel and --bsc".into())),
            };
            let c = blahut_arimoto(&w, 1e-9, 100_000);
            println!("capacity = {:.9} bits", c.bits);
            println!("input = {}", serde_json::to_string(c.input.probs())?);
            println!("gap = {:.2e} after {} iterations", c.gap, c.iterations);
        }
    }
    Ok(())
}

/// A usage problem detected after argument parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// 2 for input the user must fix, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::ChannelFile { .. }
                | Error::Config { .. }
                | Error::OutOfRange { .. }
                | Error::InvalidDistribution(_)
                | Error::NotStochastic { .. }
                | Error::DimensionMismatch { .. }
                | Error::IndexOutOfRange { .. }
                | Error::RateAboveCapacity { .. } => 2,
                Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => 2,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    match myopic_auth::exec::with_threads(threads, || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
