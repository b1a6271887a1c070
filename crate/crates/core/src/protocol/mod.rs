//! The three-move identification protocol.
//!
//! One round runs as follows:
//!
//! 1. The prover draws `u ∈ H` and a seed `s`, sets `U = u∘h`, `G = u∘g` (as
//!    one-line tuples), `R = expand_mask(s)`, and commits to
//!    `Z1 = U + R`, `Z2 = G + R` and `s` in slots C1, C2, C3.
//! 2. The verifier sends a challenge in `{0, 1, 2}`.
//! 3. The prover opens `(Z1, s)`, `(Z2, s)` or `(Z1, Z2)` respectively.
//! 4. The verifier checks the openings and then `u∘h ∈ H`, `u ∈ H`, or
//!    `|{i : (Z1 - Z2)_i != 0}| <= k`.
//!
//! A cheating prover survives a round with probability at most 2/3, so
//! rounds are repeated sequentially.

mod fiat_shamir;

pub use fiat_shamir::{
    challenge_from_xof_bytes, fs_prove, fs_verify, fs_verify_bytes, NizkProof, PROOF_MAGIC,
};

use rand::{CryptoRng, Rng, RngCore};
use thiserror::Error;

use crate::codec::{DecodeError, Reader};
use crate::crypto::{
    commit, expand_mask, verify_commitment, Commitment, IntTuple, Opening, Seed, Slot,
};
use crate::perm::Permutation;
use crate::sdpinst::{InstanceError, SdpInstance, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("witness does not satisfy the instance")]
    InvalidWitness,
    #[error("respond called without a pending commitment")]
    NotCommitted,
    #[error("prover could not produce a commitment: {0}")]
    ProverFailed(String),
    #[error("at least one round is required")]
    ZeroRounds,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Challenge {
    Zero = 0,
    One = 1,
    Two = 2,
}

impl Challenge {
    pub const ALL: [Challenge; 3] = [Challenge::Zero, Challenge::One, Challenge::Two];

    pub fn from_u8(v: u8) -> Option<Challenge> {
        Self::ALL.get(v as usize).copied()
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Step 2: a uniform challenge.
pub fn verifier_challenge<R: Rng + ?Sized>(rng: &mut R) -> Challenge {
    Challenge::ALL[rng.gen_range(0..3)]
}

/// `C = (C1, C2, C3)`; 96 bytes on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CommitmentMsg {
    pub c1: Commitment,
    pub c2: Commitment,
    pub c3: Commitment,
}

impl CommitmentMsg {
    pub const ENCODED_LEN: usize = 96;

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.c1.0);
        out.extend_from_slice(&self.c2.0);
        out.extend_from_slice(&self.c3.0);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::ENCODED_LEN);
        self.encode_into(&mut out);
        out
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(CommitmentMsg {
            c1: Commitment::decode(r)?,
            c2: Commitment::decode(r)?,
            c3: Commitment::decode(r)?,
        })
    }
}

/// Step 3 openings. Each variant also carries the commitment randomness
/// needed to check the slots it opens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Zero {
        z1: IntTuple,
        seed: Seed,
        o1: Opening,
        o3: Opening,
    },
    One {
        z2: IntTuple,
        seed: Seed,
        o2: Opening,
        o3: Opening,
    },
    Two {
        z1: IntTuple,
        z2: IntTuple,
        o1: Opening,
        o2: Opening,
    },
}

impl Response {
    pub fn challenge(&self) -> Challenge {
        match self {
            Response::Zero { .. } => Challenge::Zero,
            Response::One { .. } => Challenge::One,
            Response::Two { .. } => Challenge::Two,
        }
    }

    /// Variant byte (the challenge value) then the payload fields in order.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.push(self.challenge().as_u8());
        match self {
            Response::Zero { z1, seed, o1, o3 } => {
                z1.encode_into(out);
                out.extend_from_slice(&seed.0);
                out.extend_from_slice(&o1.0);
                out.extend_from_slice(&o3.0);
            }
            Response::One { z2, seed, o2, o3 } => {
                z2.encode_into(out);
                out.extend_from_slice(&seed.0);
                out.extend_from_slice(&o2.0);
                out.extend_from_slice(&o3.0);
            }
            Response::Two { z1, z2, o1, o2 } => {
                z1.encode_into(out);
                z2.encode_into(out);
                out.extend_from_slice(&o1.0);
                out.extend_from_slice(&o2.0);
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let tag = r.u8()?;
        Ok(
            match Challenge::from_u8(tag).ok_or(DecodeError::UnknownTag(tag))? {
                Challenge::Zero => Response::Zero {
                    z1: IntTuple::decode(r)?,
                    seed: Seed::decode(r)?,
                    o1: Opening::decode(r)?,
                    o3: Opening::decode(r)?,
                },
                Challenge::One => Response::One {
                    z2: IntTuple::decode(r)?,
                    seed: Seed::decode(r)?,
                    o2: Opening::decode(r)?,
                    o3: Opening::decode(r)?,
                },
                Challenge::Two => Response::Two {
                    z1: IntTuple::decode(r)?,
                    z2: IntTuple::decode(r)?,
                    o1: Opening::decode(r)?,
                    o2: Opening::decode(r)?,
                },
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub commitment: CommitmentMsg,
    pub challenge: Challenge,
    pub response: Response,
}

/// Everything the prover holds after Step 1 of a round.
#[derive(Debug, Clone)]
pub struct ProverState {
    z1: IntTuple,
    z2: IntTuple,
    seed: Seed,
    o1: Opening,
    o2: Opening,
    o3: Opening,
    commitment: CommitmentMsg,
}

impl ProverState {
    /// Masks the tuples `U` and `G` with a fresh seed and commits.
    pub fn from_tuples<R: RngCore + CryptoRng + ?Sized>(
        u: &IntTuple,
        g: &IntTuple,
        rng: &mut R,
    ) -> Self {
        let seed = Seed::random(rng);
        let mask = expand_mask(&seed, u.len());
        let z1 = u.add(&mask).expect("mask has the tuple's length");
        let z2 = g.add(&mask).expect("mask has the tuple's length");
        Self::from_masked(z1, z2, seed, rng)
    }

    /// Commits to already-masked tuples `Z1`, `Z2` and the seed.
    pub fn from_masked<R: RngCore + CryptoRng + ?Sized>(
        z1: IntTuple,
        z2: IntTuple,
        seed: Seed,
        rng: &mut R,
    ) -> Self {
        let (c1, o1) = commit(&z1.to_bytes(), Slot::C1, rng);
        let (c2, o2) = commit(&z2.to_bytes(), Slot::C2, rng);
        let (c3, o3) = commit(&seed.0, Slot::C3, rng);
        ProverState {
            z1,
            z2,
            seed,
            o1,
            o2,
            o3,
            commitment: CommitmentMsg { c1, c2, c3 },
        }
    }

    /// Honest commitment for `U = u∘h`, `G = u∘g` without checking `h`.
    pub(crate) fn for_secret<R: RngCore + CryptoRng + ?Sized>(
        inst: &SdpInstance,
        u: &Permutation,
        h: &Permutation,
        rng: &mut R,
    ) -> Self {
        let uh = u.compose(h).expect("degree checked by caller");
        let ug = u.compose(inst.g()).expect("degree checked by caller");
        Self::from_tuples(
            &IntTuple::from_permutation(&uh),
            &IntTuple::from_permutation(&ug),
            rng,
        )
    }

    pub fn commitment(&self) -> &CommitmentMsg {
        &self.commitment
    }

    pub fn z1(&self) -> &IntTuple {
        &self.z1
    }

    pub fn z2(&self) -> &IntTuple {
        &self.z2
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    /// Step 3. The state is not consumed so rewinding harnesses can query
    /// several challenges against one commitment.
    pub fn respond(&self, ch: Challenge) -> Response {
        match ch {
            Challenge::Zero => Response::Zero {
                z1: self.z1.clone(),
                seed: self.seed,
                o1: self.o1,
                o3: self.o3,
            },
            Challenge::One => Response::One {
                z2: self.z2.clone(),
                seed: self.seed,
                o2: self.o2,
                o3: self.o3,
            },
            Challenge::Two => Response::Two {
                z1: self.z1.clone(),
                z2: self.z2.clone(),
                o1: self.o1,
                o2: self.o2,
            },
        }
    }
}

/// Step 1 for an honest prover. Refuses to run on an invalid witness.
pub fn prover_commit<R: RngCore + CryptoRng + ?Sized>(
    inst: &SdpInstance,
    wit: &Witness,
    rng: &mut R,
) -> Result<(ProverState, CommitmentMsg), ProtocolError> {
    if !inst.validate_witness(&wit.h)? {
        return Err(ProtocolError::InvalidWitness);
    }
    let u = inst.bsgs().sample_uniform(rng);
    let state = ProverState::for_secret(inst, &u, &wit.h, rng);
    let c = state.commitment;
    Ok((state, c))
}

/// Undoes the mask and reads the tuple as a permutation of degree `n`.
fn unmask(z: &IntTuple, seed: &Seed, n: usize) -> Option<Permutation> {
    if z.len() != n {
        return None;
    }
    z.sub(&expand_mask(seed, n)).ok()?.to_permutation().ok()
}

/// Step 4. All inputs are untrusted; any malformed or mismatched piece is a
/// rejection.
pub fn verify_round(inst: &SdpInstance, c: &CommitmentMsg, ch: Challenge, rsp: &Response) -> bool {
    let n = inst.n();
    let in_h = |p: &Permutation| inst.bsgs().contains(p).unwrap_or(false);
    match (ch, rsp) {
        (Challenge::Zero, Response::Zero { z1, seed, o1, o3 }) => {
            verify_commitment(&c.c1, &z1.to_bytes(), Slot::C1, o1)
                && verify_commitment(&c.c3, &seed.0, Slot::C3, o3)
                && unmask(z1, seed, n).is_some_and(|uh| in_h(&uh))
        }
        (Challenge::One, Response::One { z2, seed, o2, o3 }) => {
            verify_commitment(&c.c2, &z2.to_bytes(), Slot::C2, o2)
                && verify_commitment(&c.c3, &seed.0, Slot::C3, o3)
                && unmask(z2, seed, n).is_some_and(|ug| {
                    let u = ug.compose(&inst.g().inverse()).expect("degree matches");
                    in_h(&u)
                })
        }
        (Challenge::Two, Response::Two { z1, z2, o1, o2 }) => {
            z1.len() == n
                && z2.len() == n
                && verify_commitment(&c.c1, &z1.to_bytes(), Slot::C1, o1)
                && verify_commitment(&c.c2, &z2.to_bytes(), Slot::C2, o2)
                && z1.sub(z2).is_ok_and(|d| d.nonzero_count() <= inst.k())
        }
        _ => false,
    }
}

pub fn verify_transcript(inst: &SdpInstance, t: &Transcript) -> bool {
    verify_round(inst, &t.commitment, t.challenge, &t.response)
}

/// A prover that can take part in sequential rounds. `respond` must follow
/// `commit`; the commitment is fixed before the challenge is seen.
pub trait RoundProver {
    fn commit(&mut self) -> Result<CommitmentMsg, ProtocolError>;
    fn respond(&mut self, ch: Challenge) -> Result<Response, ProtocolError>;
}

/// The honest prover holding a valid witness.
pub struct HonestProver<'a, R> {
    inst: &'a SdpInstance,
    wit: &'a Witness,
    rng: R,
    pending: Option<ProverState>,
}

impl<'a, R: RngCore + CryptoRng> HonestProver<'a, R> {
    pub fn new(inst: &'a SdpInstance, wit: &'a Witness, rng: R) -> Result<Self, ProtocolError> {
        if !inst.validate_witness(&wit.h)? {
            return Err(ProtocolError::InvalidWitness);
        }
        Ok(HonestProver {
            inst,
            wit,
            rng,
            pending: None,
        })
    }
}

impl<R: RngCore + CryptoRng> RoundProver for HonestProver<'_, R> {
    fn commit(&mut self) -> Result<CommitmentMsg, ProtocolError> {
        let u = self.inst.bsgs().sample_uniform(&mut self.rng);
        let state = ProverState::for_secret(self.inst, &u, &self.wit.h, &mut self.rng);
        let c = state.commitment;
        self.pending = Some(state);
        Ok(c)
    }

    fn respond(&mut self, ch: Challenge) -> Result<Response, ProtocolError> {
        let state = self.pending.take().ok_or(ProtocolError::NotCommitted)?;
        Ok(state.respond(ch))
    }
}

/// Runs `rounds` sequential rounds against an honest verifier. Accepts iff
/// every round verifies; stops at the first failure. Prover errors count as
/// rejection.
pub fn run_sequential<P: RoundProver + ?Sized, V: Rng + ?Sized>(
    inst: &SdpInstance,
    prover: &mut P,
    rounds: usize,
    verifier_rng: &mut V,
) -> bool {
    if rounds == 0 {
        return false;
    }
    (0..rounds).all(|_| {
        let Ok(c) = prover.commit() else { return false };
        let ch = verifier_challenge(verifier_rng);
        match prover.respond(ch) {
            Ok(rsp) => verify_round(inst, &c, ch, &rsp),
            Err(_) => false,
        }
    })
}

/// Honest prover against honest verifier for `rounds` rounds.
pub fn run_interactive<P, V>(
    inst: &SdpInstance,
    wit: &Witness,
    rounds: usize,
    prover_rng: P,
    verifier_rng: &mut V,
) -> bool
where
    P: RngCore + CryptoRng,
    V: Rng + ?Sized,
{
    match HonestProver::new(inst, wit, prover_rng) {
        Ok(mut prover) => run_sequential(inst, &mut prover, rounds, verifier_rng),
        Err(_) => false,
    }
}
