//! Executable counterparts of the security properties: a knowledge
//! extractor, cheating provers that meet the 2/3 soundness bound, the
//! rewinding simulator, and the statistical experiments built on them.

mod cheating;
mod experiments;
mod extractor;
mod simulator;
pub mod stats;

pub use cheating::{
    accepted_challenges, make_cheating_prover, CheatError, CheatTarget, CheatingProver,
};
pub use experiments::{
    completeness_experiment, distribution_experiment, simulator_experiment, soundness_experiment,
    ExperimentError, Report, ALPHA,
};
pub use extractor::{extract, ExtractError};
pub use simulator::{simulate, simulate_attempt, SimulationOutcome, StarDistance};

use rand::{CryptoRng, RngCore};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::protocol::{
    challenge_from_xof_bytes, prover_commit, Challenge, CommitmentMsg, ProtocolError, ProverState,
    Response, Transcript,
};
use crate::sdpinst::{SdpInstance, Witness};

/// A prover whose coins are frozen after committing, so it can be asked
/// every challenge against the same commitment.
#[derive(Debug, Clone)]
pub struct RewindableProver {
    state: ProverState,
}

impl RewindableProver {
    pub fn honest<R: RngCore + CryptoRng + ?Sized>(
        inst: &SdpInstance,
        wit: &Witness,
        rng: &mut R,
    ) -> Result<Self, ProtocolError> {
        let (state, _) = prover_commit(inst, wit, rng)?;
        Ok(RewindableProver { state })
    }

    pub fn from_state(state: ProverState) -> Self {
        RewindableProver { state }
    }

    pub fn commitment(&self) -> &CommitmentMsg {
        self.state.commitment()
    }

    pub fn query(&self, ch: Challenge) -> Response {
        self.state.respond(ch)
    }

    pub fn transcript(&self, ch: Challenge) -> Transcript {
        Transcript {
            commitment: *self.commitment(),
            challenge: ch,
            response: self.query(ch),
        }
    }
}

/// A (possibly malicious) verifier, seen as a function from the prover's
/// commitment to a challenge. Must be deterministic in its input, so that
/// rewinding it with the same commitment replays the same challenge.
pub trait VerifierOracle {
    fn challenge(&mut self, c: &CommitmentMsg) -> Challenge;
}

/// The honest verifier with a fixed random tape: the challenge is a keyed
/// hash of the commitment, uniform on `{0, 1, 2}` for fresh commitments.
#[derive(Debug, Clone)]
pub struct HonestVerifierOracle {
    tape: [u8; 32],
}

impl HonestVerifierOracle {
    pub fn new<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut tape = [0u8; 32];
        rng.fill_bytes(&mut tape);
        HonestVerifierOracle { tape }
    }
}

impl VerifierOracle for HonestVerifierOracle {
    fn challenge(&mut self, c: &CommitmentMsg) -> Challenge {
        let mut xof = Shake256::default();
        xof.update(b"SDZKP/honest-verifier");
        xof.update(&self.tape);
        xof.update(&c.to_bytes());
        let mut reader = xof.finalize_xof();
        let stream = std::iter::from_fn(|| {
            let mut b = [0u8; 1];
            reader.read(&mut b);
            Some(b[0])
        });
        challenge_from_xof_bytes(stream).expect("stream is unbounded")
    }
}

/// A biased verifier that always sends the same challenge.
#[derive(Debug, Clone, Copy)]
pub struct FixedVerifier(pub Challenge);

impl VerifierOracle for FixedVerifier {
    fn challenge(&mut self, _: &CommitmentMsg) -> Challenge {
        self.0
    }
}
