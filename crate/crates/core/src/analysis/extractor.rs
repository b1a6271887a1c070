use thiserror::Error;

use crate::crypto::{expand_mask, IntTuple, Seed};
use crate::perm::Permutation;
use crate::protocol::{verify_transcript, Challenge, Response, Transcript};
use crate::sdpinst::SdpInstance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("transcripts do not share one commitment")]
    CommitmentMismatch,
    #[error("no accepting transcript for challenge {0:?}")]
    MissingChallenge(Challenge),
    #[error("transcript for challenge {0:?} does not verify")]
    Rejected(Challenge),
    #[error("binding violation: {0} opened to two different values")]
    BindingViolation(&'static str),
    #[error("unmasked tuple is not a permutation")]
    Undecodable,
}

/// Recovers a witness from three accepting transcripts that share one
/// commitment and cover all three challenges (in any order):
/// `h = (ug ∘ g⁻¹)⁻¹ ∘ uh`.
pub fn extract(
    inst: &SdpInstance,
    t0: &Transcript,
    t1: &Transcript,
    t2: &Transcript,
) -> Result<Permutation, ExtractError> {
    let all = [t0, t1, t2];
    if all.iter().any(|t| t.commitment != t0.commitment) {
        return Err(ExtractError::CommitmentMismatch);
    }
    let by_challenge = |ch: Challenge| {
        let t = all
            .iter()
            .find(|t| t.challenge == ch)
            .ok_or(ExtractError::MissingChallenge(ch))?;
        if !verify_transcript(inst, t) {
            return Err(ExtractError::Rejected(ch));
        }
        Ok(&t.response)
    };
    let (r0, r1, r2) = (
        by_challenge(Challenge::Zero)?,
        by_challenge(Challenge::One)?,
        by_challenge(Challenge::Two)?,
    );
    let (
        Response::Zero { z1, seed: s0, .. },
        Response::One { z2, seed: s1, .. },
        Response::Two {
            z1: z1b, z2: z2b, ..
        },
    ) = (r0, r1, r2)
    else {
        unreachable!("verified responses match their challenge");
    };
    if s0 != s1 {
        return Err(ExtractError::BindingViolation("C3"));
    }
    if z1 != z1b {
        return Err(ExtractError::BindingViolation("C1"));
    }
    if z2 != z2b {
        return Err(ExtractError::BindingViolation("C2"));
    }
    let unmask = |z: &IntTuple, s: &Seed| {
        z.sub(&expand_mask(s, inst.n()))
            .ok()
            .and_then(|t| t.to_permutation().ok())
            .ok_or(ExtractError::Undecodable)
    };
    let uh = unmask(z1, s0)?;
    let ug = unmask(z2, s0)?;
    let u = ug
        .compose(&inst.g().inverse())
        .map_err(|_| ExtractError::Undecodable)?;
    u.inverse()
        .compose(&uh)
        .map_err(|_| ExtractError::Undecodable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{make_cheating_prover, CheatTarget, RewindableProver};
    use crate::sdpinst::{plant_instance, Preset};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn recovers_planted_witness_in_any_order() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (inst, wit) = plant_instance(12, 2, 4, Preset::General, &mut rng).unwrap();
            let p = RewindableProver::honest(&inst, &wit, &mut rng).unwrap();
            let [a, b, c] = Challenge::ALL.map(|ch| p.transcript(ch));
            let h = extract(&inst, &a, &b, &c).unwrap();
            assert_eq!(h, wit.h);
            assert!(inst.validate_witness(&h).unwrap());
            assert_eq!(extract(&inst, &c, &a, &b).unwrap(), wit.h);
        }
    }

    #[test]
    fn rejects_mixed_commitments_and_missing_challenges() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (inst, wit) = plant_instance(10, 2, 4, Preset::General, &mut rng).unwrap();
        let p = RewindableProver::honest(&inst, &wit, &mut rng).unwrap();
        let q = RewindableProver::honest(&inst, &wit, &mut rng).unwrap();
        let [a, b, _] = Challenge::ALL.map(|ch| p.transcript(ch));
        assert_eq!(
            extract(&inst, &a, &b, &q.transcript(Challenge::Two)),
            Err(ExtractError::CommitmentMismatch)
        );
        assert_eq!(
            extract(&inst, &a, &b, &b),
            Err(ExtractError::MissingChallenge(Challenge::Two))
        );
    }

    #[test]
    fn cheating_transcripts_never_yield_a_witness() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (inst, _) = plant_instance(10, 2, 4, Preset::General, &mut rng).unwrap();
        for target in CheatTarget::ALL {
            let p = make_cheating_prover(&inst, target, &mut rng).unwrap();
            let [a, b, c] = Challenge::ALL.map(|ch| p.transcript(ch));
            assert_eq!(
                extract(&inst, &a, &b, &c),
                Err(ExtractError::Rejected(target.excluded()))
            );
        }
    }
}
