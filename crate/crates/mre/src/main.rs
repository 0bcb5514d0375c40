use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::LevelFilter;
use mre::campaign::{run_verify, CampaignConfig, CampaignKind};
use mre::compute::{self, Rule};
use mre::json::{read_decomposition, read_state};
use mre::{CliError, CliResult};

/// Minimum relative entropy updates of quantum states: randomized
/// verification campaigns and single computations.
///
/// Exit status: 0 success, 1 tolerance failure, 2 bad input, 3 numerical failure.
/// Set MRE_LOG=info or MRE_LOG=debug for diagnostics on stderr.
#[derive(Parser)]
#[command(name = "mre", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Block ranks, e.g. 2,2 (a random structure per trial when omitted)
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rank of the random prior state [default: dim]
    #[arg(long)]
    rank: Option<usize>,
    /// Trace-distance tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// JSON report path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a per-trial CSV table
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Use this prior state in every trial
    #[arg(long)]
    rho: Option<PathBuf>,
    /// Use this decomposition in every trial
    #[arg(long)]
    pvm: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Weak,
    Strong,
    Jeffrey,
}

#[derive(Subcommand)]
enum Command {
    /// Numerical minimizer over block-diagonal states against the pinching
    VerifyWeak(CampaignArgs),
    /// Numerical minimizer with fixed block weights against the Jeffrey rule
    VerifyJeffrey {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Block weights (random per trial when omitted)
        #[arg(long, value_delimiter = ',')]
        probs: Option<Vec<f64>>,
    },
    /// Jeffrey updates approaching the Lüders collapse onto one block
    VerifyStrongLimit {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Target block, counted from 1
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Weights put on the target block
        #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.99, 0.999, 1.0 - 1e-6])]
        p1: Vec<f64>,
    },
    /// Bayes and classical Jeffrey updates against their quantum counterparts
    BayesDemo {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Cell weights for the soft-evidence check (random when omitted)
        #[arg(long, value_delimiter = ',')]
        probs: Option<Vec<f64>>,
    },
    /// Relative entropy D(rho, sigma), or the von Neumann entropy without --sigma
    Entropy {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: Option<PathBuf>,
    },
    /// Apply a collapse rule and print the resulting state
    Collapse {
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        pvm: PathBuf,
        /// Outcome block for the strong rule, counted from 1
        #[arg(long)]
        k: Option<usize>,
        /// Block weights for the jeffrey rule
        #[arg(long, value_delimiter = ',')]
        probs: Option<Vec<f64>>,
    },
    /// Bayes update of a discrete prior
    Bayes {
        #[arg(long, value_delimiter = ',', required = true)]
        prior: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        likelihood: Vec<f64>,
    },
}

fn init_logging() -> CliResult<()> {
    let level = match std::env::var("MRE_LOG").as_deref() {
        Err(_) | Ok("") | Ok("off") => LevelFilter::Off,
        Ok("info") => LevelFilter::Info,
        Ok("debug") => LevelFilter::Debug,
        Ok(other) => return Err(CliError::Config(format!("MRE_LOG must be off, info or debug, not {other:?}"))),
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();
    Ok(())
}

fn campaign(args: CampaignArgs, kind: CampaignKind) -> CliResult<()> {
    let mut config = CampaignConfig::new(args.dim, kind);
    config.block_ranks = args.blocks;
    config.trials = args.trials;
    config.seed = args.seed;
    config.rank = args.rank.unwrap_or(args.dim);
    config.tol.trace_distance = args.tol;
    config.state = args.rho.as_deref().map(read_state).transpose()?;
    config.decomposition = args.pvm.as_deref().map(read_decomposition).transpose()?;
    let report = run_verify(&config)?;
    report.write(args.out.as_deref(), args.csv.as_deref())?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!("{} of {} trials outside tolerance", report.aggregate.failures, report.aggregate.trials)))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::VerifyWeak(args) => campaign(args, CampaignKind::Weak),
        Command::VerifyJeffrey { campaign: args, probs } => campaign(args, CampaignKind::Jeffrey(probs)),
        Command::VerifyStrongLimit { campaign: args, k, p1 } => {
            let k = k.checked_sub(1).ok_or_else(|| CliError::Config("--k counts blocks from 1".into()))?;
            campaign(args, CampaignKind::StrongLimit { k, p1_sequence: p1 })
        }
        Command::BayesDemo { campaign: args, probs } => campaign(args, CampaignKind::BayesDemo(probs)),
        Command::Entropy { rho, sigma } => {
            let rho = read_state(&rho)?;
            let sigma = sigma.as_deref().map(read_state).transpose()?;
            println!("{}", compute::entropy(&rho, sigma.as_ref())?);
            Ok(())
        }
        Command::Collapse { rule, rho, pvm, k, probs } => {
            let rule = match rule {
                RuleArg::Weak => Rule::Weak,
                RuleArg::Strong => Rule::Strong,
                RuleArg::Jeffrey => Rule::Jeffrey,
            };
            println!("{}", compute::collapse(&read_state(&rho)?, &read_decomposition(&pvm)?, rule, k, probs.as_deref())?);
            Ok(())
        }
        Command::Bayes { prior, likelihood } => {
            println!("{}", compute::bayes(&prior, &likelihood)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_logging().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mre: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
