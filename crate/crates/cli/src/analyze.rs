//! `sdzkp analyze`: runs one experiment and prints its report as JSON.

use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::ValueEnum;
use sdzkp::analysis::{
    completeness_experiment, distribution_experiment, simulator_experiment, soundness_experiment,
    CheatTarget,
};
use sdzkp::sdpinst::{plant_instance, Preset};

use crate::{emit, load_instance, load_witness, make_rng, SeedArg, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Completeness,
    Soundness,
    Simulator,
    Distribution,
}

#[derive(Debug, clap::Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    /// Use this instance instead of planting one.
    #[arg(long, requires = "witness")]
    instance: Option<PathBuf>,
    #[arg(long, requires = "instance")]
    witness: Option<PathBuf>,
    /// Degree of a planted instance [default: 5 for distribution, else 16].
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    gens: usize,
    /// Planted distance [default: max(2, n/4)].
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = Preset::General)]
    preset: Preset,
    /// Rounds for completeness and soundness.
    #[arg(long, default_value_t = 10_000)]
    rounds: u64,
    /// Cheating strategy for soundness.
    #[arg(long, default_value_t = CheatTarget::ZeroOne)]
    strategy: CheatTarget,
    /// Simulator attempt budget.
    #[arg(long = "M", default_value_t = 8)]
    max_attempts: usize,
    /// Single attempts for simulator, transcripts per side for distribution.
    #[arg(long, default_value_t = 30_000)]
    samples: u64,
    /// Full simulator runs for the abort rate.
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    /// Largest group the distribution experiment will enumerate.
    #[arg(long, default_value_t = 5040)]
    limit: usize,
    #[command(flatten)]
    seed: SeedArg,
}

/// Prints the report; the verdict follows its `pass` field.
pub fn run(args: AnalyzeArgs) -> Result<Verdict> {
    let mut rng = make_rng(&args.seed);
    let (inst, wit) = match (&args.instance, &args.witness) {
        (Some(i), Some(w)) => (load_instance(i)?, load_witness(w)?),
        _ => {
            let default_n = if args.experiment == Experiment::Distribution {
                5
            } else {
                16
            };
            let n = args.n.unwrap_or(default_n);
            let k = args.k.unwrap_or((n / 4).max(2));
            plant_instance(n, args.gens, k, args.preset, &mut rng)?
        }
    };
    let report = match args.experiment {
        Experiment::Completeness => completeness_experiment(&inst, &wit, args.rounds, &mut rng)?,
        Experiment::Soundness => soundness_experiment(&inst, args.strategy, args.rounds, &mut rng)?,
        Experiment::Simulator => {
            if args.max_attempts == 0 {
                return Err(anyhow!("--M must be at least 1"));
            }
            simulator_experiment(&inst, args.max_attempts, args.samples, args.runs, &mut rng)
        }
        Experiment::Distribution => {
            distribution_experiment(&inst, &wit, args.samples, args.limit, &mut rng)?
        }
    };
    emit(&serde_json::to_string_pretty(&report)?)?;
    Ok(Verdict::from_bool(report.pass))
}
