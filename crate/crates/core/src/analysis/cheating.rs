use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{CryptoRng, Rng, RngCore};
use thiserror::Error;

use super::RewindableProver;
use crate::crypto::{expand_mask, IntTuple, Seed};
use crate::protocol::{
    verify_round, Challenge, CommitmentMsg, ProtocolError, ProverState, Response, RoundProver,
};
use crate::sdpinst::SdpInstance;

const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error(
    "no {0} cheating commitment found after {MAX_RESAMPLES} attempts (instance too degenerate)"
)]
pub struct CheatError(pub CheatTarget);

/// The pair of challenges a witness-less prover prepares for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheatTarget {
    /// Honest commitment around a fake `h̃ ∈ H` that is too far from `g`.
    ZeroOne,
    /// `Z1` masks an element of `H`; `Z2 = Z1 + D` with `k` nonzero entries.
    ZeroTwo,
    /// `Z2` masks `b∘g` for `b ∈ H`; `Z1 = Z2 + D`.
    OneTwo,
}

impl CheatTarget {
    pub const ALL: [CheatTarget; 3] = [
        CheatTarget::ZeroOne,
        CheatTarget::ZeroTwo,
        CheatTarget::OneTwo,
    ];

    pub fn accepted(self) -> [Challenge; 2] {
        match self {
            CheatTarget::ZeroOne => [Challenge::Zero, Challenge::One],
            CheatTarget::ZeroTwo => [Challenge::Zero, Challenge::Two],
            CheatTarget::OneTwo => [Challenge::One, Challenge::Two],
        }
    }

    pub fn excluded(self) -> Challenge {
        match self {
            CheatTarget::ZeroOne => Challenge::Two,
            CheatTarget::ZeroTwo => Challenge::One,
            CheatTarget::OneTwo => Challenge::Zero,
        }
    }
}

impl fmt::Display for CheatTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheatTarget::ZeroOne => "01",
            CheatTarget::ZeroTwo => "02",
            CheatTarget::OneTwo => "12",
        })
    }
}

impl FromStr for CheatTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "01" | "10" => Ok(CheatTarget::ZeroOne),
            "02" | "20" => Ok(CheatTarget::ZeroTwo),
            "12" | "21" => Ok(CheatTarget::OneTwo),
            other => Err(format!("unknown strategy {other:?} (expected 01|02|12)")),
        }
    }
}

/// Challenges under which the frozen prover's answer verifies.
pub fn accepted_challenges(inst: &SdpInstance, prover: &RewindableProver) -> Vec<Challenge> {
    Challenge::ALL
        .into_iter()
        .filter(|&ch| verify_round(inst, prover.commitment(), ch, &prover.query(ch)))
        .collect()
}

/// `k` random positions holding random nonzero values.
fn sparse_difference<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> IntTuple {
    let mut d = IntTuple::zero(n);
    for i in index::sample(rng, n, k.min(n)) {
        d.entries_mut()[i] = rng.gen_range(1..=u32::MAX);
    }
    d
}

fn candidate<R: RngCore + CryptoRng + ?Sized>(
    inst: &SdpInstance,
    target: CheatTarget,
    rng: &mut R,
) -> Option<ProverState> {
    let n = inst.n();
    let bsgs = inst.bsgs();
    match target {
        CheatTarget::ZeroOne => {
            let fake = bsgs.sample_uniform(rng);
            if fake.hamming(inst.g()).expect("same degree") <= inst.k() {
                return None;
            }
            let u = bsgs.sample_uniform(rng);
            Some(ProverState::for_secret(inst, &u, &fake, rng))
        }
        CheatTarget::ZeroTwo | CheatTarget::OneTwo => {
            let seed = Seed::random(rng);
            let mask = expand_mask(&seed, n);
            let a = bsgs.sample_uniform(rng);
            let d = sparse_difference(n, inst.k(), rng);
            let (z1, z2) = if target == CheatTarget::ZeroTwo {
                let z1 = IntTuple::from_permutation(&a).add(&mask).expect("length n");
                let z2 = z1.add(&d).expect("length n");
                (z1, z2)
            } else {
                let ag = a.compose(inst.g()).expect("same degree");
                let z2 = IntTuple::from_permutation(&ag)
                    .add(&mask)
                    .expect("length n");
                let z1 = z2.add(&d).expect("length n");
                (z1, z2)
            };
            Some(ProverState::from_masked(z1, z2, seed, rng))
        }
    }
}

/// A witness-less prover whose commitment answers exactly the two
/// challenges in `target`. Candidates that happen to answer the third as
/// well (possible only for degenerate instances) are resampled.
pub fn make_cheating_prover<R: RngCore + CryptoRng + ?Sized>(
    inst: &SdpInstance,
    target: CheatTarget,
    rng: &mut R,
) -> Result<RewindableProver, CheatError> {
    for _ in 0..MAX_RESAMPLES {
        let Some(state) = candidate(inst, target, rng) else {
            continue;
        };
        let prover = RewindableProver::from_state(state);
        if accepted_challenges(inst, &prover) == target.accepted() {
            return Ok(prover);
        }
    }
    Err(CheatError(target))
}

/// Plays a fresh cheating commitment every round.
pub struct CheatingProver<'a, R> {
    inst: &'a SdpInstance,
    target: CheatTarget,
    rng: R,
    pending: Option<RewindableProver>,
}

impl<'a, R: RngCore + CryptoRng> CheatingProver<'a, R> {
    pub fn new(inst: &'a SdpInstance, target: CheatTarget, rng: R) -> Self {
        CheatingProver {
            inst,
            target,
            rng,
            pending: None,
        }
    }
}

impl<R: RngCore + CryptoRng> RoundProver for CheatingProver<'_, R> {
    fn commit(&mut self) -> Result<CommitmentMsg, ProtocolError> {
        let prover = make_cheating_prover(self.inst, self.target, &mut self.rng)
            .map_err(|e| ProtocolError::ProverFailed(e.to_string()))?;
        let c = *prover.commitment();
        self.pending = Some(prover);
        Ok(c)
    }

    fn respond(&mut self, ch: Challenge) -> Result<Response, ProtocolError> {
        let prover = self.pending.take().ok_or(ProtocolError::NotCommitted)?;
        Ok(prover.query(ch))
    }
}
