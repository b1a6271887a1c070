use rand::{CryptoRng, Rng, RngCore};

use super::VerifierOracle;
use crate::crypto::IntTuple;
use crate::perm::Permutation;
use crate::protocol::{Challenge, ProverState, Transcript};
use crate::sdpinst::SdpInstance;

/// Distance from `g` of the fake secret drawn when the guessed challenge is 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StarDistance {
    /// Exactly `k`, matching a planted witness.
    #[default]
    Exact,
    /// Uniform over the reachable distances `{0, 2, 3, .., k}`.
    Uniform,
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    /// `None` is the abort symbol ⊥.
    pub transcript: Option<Transcript>,
    pub attempts: usize,
}

fn star_distance<R: Rng + ?Sized>(k: usize, mode: StarDistance, rng: &mut R) -> usize {
    match mode {
        StarDistance::Exact => k,
        StarDistance::Uniform => {
            if k < 2 {
                0
            } else {
                // {0} ∪ {2..=k}
                let pick = rng.gen_range(0..k);
                if pick == 0 {
                    0
                } else {
                    pick + 1
                }
            }
        }
    }
}

/// One pass of the simulator: guess a challenge, commit with a fake secret
/// prepared for the guess, and ask the verifier. Returns a transcript if the
/// guess is usable for the verifier's actual challenge.
pub fn simulate_attempt<V, R>(
    inst: &SdpInstance,
    verifier: &mut V,
    mode: StarDistance,
    rng: &mut R,
) -> Option<Transcript>
where
    V: VerifierOracle + ?Sized,
    R: RngCore + CryptoRng + ?Sized,
{
    let guess = Challenge::ALL[rng.gen_range(0..3)];
    let state = if guess == Challenge::Two {
        // h* = τ ∘ g is close to g; masked like an honest prover with u ∈ H
        // so that the distance check sees d(u h*, u g) = d(h*, g).
        let tau = Permutation::random_support(inst.n(), star_distance(inst.k(), mode, rng), rng)
            .expect("distance is 0 or in 2..=n");
        let h_star = tau.compose(inst.g()).expect("same degree");
        let u = inst.bsgs().sample_uniform(rng);
        ProverState::for_secret(inst, &u, &h_star, rng)
    } else {
        // U = h*, G = h* ∘ g with h* uniform in H.
        let h_star = inst.bsgs().sample_uniform(rng);
        let h_star_g = h_star.compose(inst.g()).expect("same degree");
        ProverState::from_tuples(
            &IntTuple::from_permutation(&h_star),
            &IntTuple::from_permutation(&h_star_g),
            rng,
        )
    };
    let ch = verifier.challenge(state.commitment());
    let usable = match guess {
        Challenge::Two => ch == Challenge::Two,
        _ => ch != Challenge::Two,
    };
    usable.then(|| Transcript {
        commitment: *state.commitment(),
        challenge: ch,
        response: state.respond(ch),
    })
}

/// Repeats [`simulate_attempt`] up to `max_attempts` times, rewinding the
/// verifier after each unusable guess, and aborts with ⊥ afterwards.
pub fn simulate<V, R>(
    inst: &SdpInstance,
    verifier: &mut V,
    max_attempts: usize,
    mode: StarDistance,
    rng: &mut R,
) -> SimulationOutcome
where
    V: VerifierOracle + ?Sized,
    R: RngCore + CryptoRng + ?Sized,
{
    for attempt in 1..=max_attempts {
        if let Some(t) = simulate_attempt(inst, verifier, mode, rng) {
            return SimulationOutcome {
                transcript: Some(t),
                attempts: attempt,
            };
        }
    }
    SimulationOutcome {
        transcript: None,
        attempts: max_attempts,
    }
}
