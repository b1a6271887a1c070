//! `sdzkp`: key generation, interactive prover and verifier over TCP,
//! Fiat–Shamir proofs on files, and the analysis experiments.
//!
//! Exit codes: 0 accept, 1 reject, 2 usage or parse error.

mod analyze;
mod net;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sdzkp::analysis::CheatTarget;
use sdzkp::protocol::{fs_prove, fs_verify, NizkProof};
use sdzkp::sdpinst::{plant_instance, Preset, SdpInstance, Witness};

#[derive(Debug, Parser)]
#[command(
    name = "sdzkp",
    version,
    about = "Subgroup distance zero-knowledge identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct SeedArg {
    /// Deterministic RNG seed. For reproducible tests only.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plant a random instance and write the instance and witness files.
    Keygen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        gens: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = Preset::General)]
        preset: Preset,
        #[arg(long, default_value = "instance.sdz")]
        instance: PathBuf,
        #[arg(long, default_value = "witness.sdw")]
        witness: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Run the interactive prover against a listening verifier.
    Prove {
        #[arg(long)]
        instance: PathBuf,
        /// Required unless --cheat is given.
        #[arg(long, required_unless_present = "cheat")]
        witness: Option<PathBuf>,
        #[arg(long)]
        connect: String,
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value_t = 30_000)]
        timeout_ms: u64,
        /// Play a witness-less cheating strategy instead (testing only).
        #[arg(long, conflicts_with = "witness")]
        cheat: Option<CheatTarget>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Listen for provers and print ACCEPT or REJECT per session.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        listen: String,
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value_t = 30_000)]
        timeout_ms: u64,
        /// Sessions to serve before exiting, concurrently; 0 serves forever.
        #[arg(long, default_value_t = 1)]
        sessions: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Write a non-interactive proof.
    FsProve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value = "")]
        context: String,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Check a non-interactive proof.
    FsVerify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value = "")]
        context: String,
    },
    /// Run a statistical experiment and print a JSON report.
    Analyze(analyze::AnalyzeArgs),
}

/// Result of a command that reaches a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }
}

fn make_rng(seed: &SeedArg) -> ChaCha20Rng {
    match seed.seed {
        Some(s) => {
            eprintln!(
                "WARNING: --seed {s} makes all randomness predictable; never use it outside tests"
            );
            ChaCha20Rng::seed_from_u64(s)
        }
        None => ChaCha20Rng::from_entropy(),
    }
}

/// Writes one line to stdout; a closed pipe is an error, not a panic.
fn emit(line: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}")?;
    out.flush()?;
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> Result<SdpInstance> {
    SdpInstance::from_bytes(&read_file(path)?)
        .with_context(|| format!("parsing instance {}", path.display()))
}

fn load_witness(path: &Path) -> Result<Witness> {
    Witness::from_bytes(&read_file(path)?)
        .with_context(|| format!("parsing witness {}", path.display()))
}

fn run(cli: Cli) -> Result<Option<Verdict>> {
    match cli.command {
        Command::Keygen {
            n,
            gens,
            k,
            preset,
            instance,
            witness,
            seed,
        } => {
            let mut rng = make_rng(&seed);
            let (inst, wit) = plant_instance(n, gens, k, preset, &mut rng)?;
            fs::write(&instance, inst.to_bytes())
                .with_context(|| format!("writing {}", instance.display()))?;
            fs::write(&witness, wit.to_bytes())
                .with_context(|| format!("writing {}", witness.display()))?;
            log::info!("|H| = {}", inst.bsgs().order());
            Ok(None)
        }
        Command::Prove {
            instance,
            witness,
            connect,
            rounds,
            timeout_ms,
            cheat,
            seed,
        } => {
            let inst = load_instance(&instance)?;
            let rng = make_rng(&seed);
            let prover = match (witness, cheat) {
                (Some(path), None) => net::ProverKind::Honest(load_witness(&path)?),
                (None, Some(target)) => net::ProverKind::Cheating(target),
                _ => return Err(anyhow!("exactly one of --witness and --cheat is required")),
            };
            let verdict = net::run_prover(&inst, prover, &connect, rounds, timeout_ms, rng)?;
            emit(if verdict == Verdict::Accept {
                "ACCEPT"
            } else {
                "REJECT"
            })?;
            Ok(Some(verdict))
        }
        Command::Verify {
            instance,
            listen,
            rounds,
            timeout_ms,
            sessions,
            seed,
        } => {
            let inst = load_instance(&instance)?;
            let seed = seed.seed;
            if let Some(s) = seed {
                eprintln!("WARNING: --seed {s} makes all challenges predictable; never use it outside tests");
            }
            net::serve_verifier(inst, &listen, rounds, timeout_ms, sessions, seed).map(Some)
        }
        Command::FsProve {
            instance,
            witness,
            proof,
            rounds,
            context,
            seed,
        } => {
            let inst = load_instance(&instance)?;
            let wit = load_witness(&witness)?;
            let mut rng = make_rng(&seed);
            let p = fs_prove(&inst, &wit, rounds, context.as_bytes(), &mut rng)?;
            fs::write(&proof, p.to_bytes())
                .with_context(|| format!("writing {}", proof.display()))?;
            Ok(None)
        }
        Command::FsVerify {
            instance,
            proof,
            rounds,
            context,
        } => {
            let inst = load_instance(&instance)?;
            let bytes = read_file(&proof)?;
            // A malformed proof is a rejection, not a usage error.
            let ok = match NizkProof::from_bytes(&bytes) {
                Ok(p) => fs_verify(&inst, &p, rounds, context.as_bytes()),
                Err(e) => {
                    eprintln!("error: parsing proof {}: {e}", proof.display());
                    false
                }
            };
            let verdict = Verdict::from_bool(ok);
            emit(if ok { "ACCEPT" } else { "REJECT" })?;
            Ok(Some(verdict))
        }
        Command::Analyze(args) => analyze::run(args).map(Some),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SDZKP_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(None | Some(Verdict::Accept)) => ExitCode::SUCCESS,
        Ok(Some(Verdict::Reject)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
