//! Monte-Carlo experiments producing JSON-serializable reports.

use std::collections::{BTreeMap, HashMap};

use rand::{CryptoRng, RngCore};
use serde::Serialize;
use thiserror::Error;

use super::stats::{binomial_z_test, chi_square_homogeneity};
use super::{
    accepted_challenges, make_cheating_prover, simulate, simulate_attempt, CheatError, CheatTarget,
    HonestVerifierOracle, RewindableProver, StarDistance, VerifierOracle,
};
use crate::crypto::expand_mask;
use crate::group::GroupError;
use crate::protocol::{
    verifier_challenge, verify_round, verify_transcript, Challenge, ProtocolError, Response,
    Transcript,
};
use crate::sdpinst::{SdpInstance, Witness};

/// Significance level for every pass/fail decision.
pub const ALPHA: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Cheat(#[from] CheatError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub samples: u64,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub pass: bool,
    pub details: BTreeMap<String, f64>,
}

impl Report {
    pub fn detail(&self, key: &str) -> f64 {
        self.details[key]
    }
}

/// Honest prover against uniform challenges, one round per sample.
/// Statistic: acceptance rate; passes only at exactly 1.
pub fn completeness_experiment<R: RngCore + CryptoRng + ?Sized>(
    inst: &SdpInstance,
    wit: &Witness,
    rounds: u64,
    rng: &mut R,
) -> Result<Report, ExperimentError> {
    let mut accepted = 0u64;
    let mut per_challenge = [0u64; 3];
    for _ in 0..rounds {
        let prover = RewindableProver::honest(inst, wit, rng)?;
        let ch = verifier_challenge(rng);
        per_challenge[ch.index()] += 1;
        if verify_round(inst, prover.commitment(), ch, &prover.query(ch)) {
            accepted += 1;
        }
    }
    let rate = accepted as f64 / rounds.max(1) as f64;
    let mut details = BTreeMap::new();
    details.insert("accepted".into(), accepted as f64);
    for ch in Challenge::ALL {
        details.insert(
            format!("challenge_{}", ch.as_u8()),
            per_challenge[ch.index()] as f64,
        );
    }
    Ok(Report {
        experiment: "completeness".into(),
        samples: rounds,
        statistic: rate,
        p_value: None,
        pass: rounds > 0 && accepted == rounds,
        details,
    })
}

/// A fresh cheating commitment per round against a uniform challenge.
/// Statistic: acceptance rate, tested against 2/3. Each committed state is
/// also checked on all three challenges.
pub fn soundness_experiment<R: RngCore + CryptoRng + ?Sized>(
    inst: &SdpInstance,
    target: CheatTarget,
    rounds: u64,
    rng: &mut R,
) -> Result<Report, ExperimentError> {
    let mut accepted = 0u64;
    let mut exact_two_of_three = 0u64;
    for _ in 0..rounds {
        let prover = make_cheating_prover(inst, target, rng)?;
        if accepted_challenges(inst, &prover) == target.accepted() {
            exact_two_of_three += 1;
        }
        let ch = verifier_challenge(rng);
        if verify_round(inst, prover.commitment(), ch, &prover.query(ch)) {
            accepted += 1;
        }
    }
    let expected = 2.0 / 3.0;
    let (z, p) = binomial_z_test(accepted, rounds, expected);
    let mut details = BTreeMap::new();
    details.insert("accepted".into(), accepted as f64);
    details.insert("expected_rate".into(), expected);
    details.insert("z".into(), z);
    details.insert("exact_two_of_three".into(), exact_two_of_three as f64);
    Ok(Report {
        experiment: format!("soundness-{target}"),
        samples: rounds,
        statistic: accepted as f64 / rounds.max(1) as f64,
        p_value: Some(p),
        pass: rounds > 0 && p > ALPHA && exact_two_of_three == rounds,
        details,
    })
}

/// Simulator against the honest verifier: `attempts` single guesses give
/// the per-attempt success rate (tested against 5/9), and `runs` full
/// simulations with budget `max_attempts` give the abort rate, compared to
/// `(4/9)^max_attempts` plus three standard deviations.
pub fn simulator_experiment<R: RngCore + CryptoRng + ?Sized>(
    inst: &SdpInstance,
    max_attempts: usize,
    attempts: u64,
    runs: u64,
    rng: &mut R,
) -> Report {
    let mut verifier = HonestVerifierOracle::new(rng);
    let mut successes = 0u64;
    let mut rejected = 0u64;
    for _ in 0..attempts {
        if let Some(t) = simulate_attempt(inst, &mut verifier, StarDistance::Exact, rng) {
            successes += 1;
            rejected += u64::from(!verify_transcript(inst, &t));
        }
    }
    let mut aborts = 0u64;
    for _ in 0..runs {
        match simulate(inst, &mut verifier, max_attempts, StarDistance::Exact, rng).transcript {
            Some(t) => rejected += u64::from(!verify_transcript(inst, &t)),
            None => aborts += 1,
        }
    }
    let expected = 5.0 / 9.0;
    let (z, p) = binomial_z_test(successes, attempts, expected);
    let bound = (4.0f64 / 9.0).powi(max_attempts as i32);
    let sigma = (bound * (1.0 - bound) / runs.max(1) as f64).sqrt();
    let abort_rate = aborts as f64 / runs.max(1) as f64;
    let abort_ok = abort_rate <= bound + 3.0 * sigma;
    let mut details = BTreeMap::new();
    details.insert("expected_rate".into(), expected);
    details.insert("z".into(), z);
    details.insert("max_attempts".into(), max_attempts as f64);
    details.insert("runs".into(), runs as f64);
    details.insert("abort_rate".into(), abort_rate);
    details.insert("abort_bound".into(), bound);
    details.insert("abort_sigma".into(), sigma);
    details.insert("rejected_transcripts".into(), rejected as f64);
    Report {
        experiment: "simulator".into(),
        samples: attempts,
        statistic: successes as f64 / attempts.max(1) as f64,
        p_value: Some(p),
        pass: attempts > 0 && p > ALPHA && abort_ok && rejected == 0,
        details,
    }
}

#[derive(Default)]
struct Features {
    u_counts: Vec<u64>,
    challenges: [u64; 3],
    /// histogram of the challenge-2 difference weight
    weights: Vec<u64>,
    u_samples: u64,
    transcripts: u64,
    accepted: u64,
}

impl Features {
    fn new(order: usize, n: usize) -> Self {
        Features {
            u_counts: vec![0; order],
            weights: vec![0; n + 1],
            ..Default::default()
        }
    }

    fn record(&mut self, inst: &SdpInstance, index: &HashMap<Vec<u32>, usize>, t: &Transcript) {
        self.transcripts += 1;
        self.challenges[t.challenge.index()] += 1;
        self.accepted += u64::from(verify_transcript(inst, t));
        match &t.response {
            Response::Zero { z1, seed, .. } => {
                let u = z1.sub(&expand_mask(seed, inst.n())).expect("length n");
                // an undecodable U would also have failed verification
                if let Some(&i) = index.get(u.entries()) {
                    self.u_counts[i] += 1;
                    self.u_samples += 1;
                }
            }
            Response::Two { z1, z2, .. } => {
                let w = z1.sub(z2).expect("length n").nonzero_count();
                self.weights[w] += 1;
            }
            Response::One { .. } => {}
        }
    }
}

/// Compares real transcripts with simulated ones on a group small enough to
/// enumerate (`|H| <= limit`). The asserted statistic is a two-sample
/// chi-square on the unmasked challenge-0 tuple `U` over the elements of
/// `H`; `samples` such transcripts are collected on each side. The
/// challenge marginals and the challenge-2 difference weights are compared
/// too, and only reported.
pub fn distribution_experiment<R: RngCore + CryptoRng + ?Sized>(
    inst: &SdpInstance,
    wit: &Witness,
    samples: u64,
    limit: usize,
    rng: &mut R,
) -> Result<Report, ExperimentError> {
    let elements = inst.bsgs().enumerate(limit)?;
    let index: HashMap<Vec<u32>, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, p)| (p.images().to_vec(), i))
        .collect();
    let mut verifier = HonestVerifierOracle::new(rng);

    let mut real = Features::new(elements.len(), inst.n());
    while real.u_samples < samples {
        let prover = RewindableProver::honest(inst, wit, rng)?;
        let ch = verifier.challenge(prover.commitment());
        real.record(inst, &index, &prover.transcript(ch));
    }

    let mut sim = Features::new(elements.len(), inst.n());
    while sim.u_samples < samples {
        if let Some(t) = simulate(inst, &mut verifier, 64, StarDistance::Exact, rng).transcript {
            sim.record(inst, &index, &t);
        }
    }

    let u_test = chi_square_homogeneity(&real.u_counts, &sim.u_counts);
    let ch_test = chi_square_homogeneity(&real.challenges, &sim.challenges);
    let w_test = chi_square_homogeneity(&real.weights, &sim.weights);
    let mut details = BTreeMap::new();
    details.insert("group_order".into(), elements.len() as f64);
    details.insert("u_dof".into(), u_test.dof as f64);
    details.insert("challenge_statistic".into(), ch_test.statistic);
    details.insert("challenge_p_value".into(), ch_test.p_value);
    details.insert("weight_statistic".into(), w_test.statistic);
    details.insert("weight_p_value".into(), w_test.p_value);
    for side in [("real", &real), ("sim", &sim)] {
        let (name, f) = side;
        details.insert(format!("{name}_transcripts"), f.transcripts as f64);
        details.insert(
            format!("{name}_accept_rate"),
            f.accepted as f64 / f.transcripts as f64,
        );
        for ch in Challenge::ALL {
            details.insert(
                format!("{name}_challenge_{}_rate", ch.as_u8()),
                f.challenges[ch.index()] as f64 / f.transcripts as f64,
            );
        }
    }
    Ok(Report {
        experiment: "distribution".into(),
        samples,
        statistic: u_test.statistic,
        p_value: Some(u_test.p_value),
        pass: u_test.p_value > ALPHA
            && real.accepted == real.transcripts
            && sim.accepted == sim.transcripts,
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GeneratorSet;
    use crate::perm::Permutation;
    use crate::sdpinst::{plant_instance, Preset};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn completeness_report() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (inst, wit) = plant_instance(10, 2, 4, Preset::General, &mut rng).unwrap();
        let r = completeness_experiment(&inst, &wit, 300, &mut rng).unwrap();
        assert!(r.pass);
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn soundness_report_near_two_thirds() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (inst, _) = plant_instance(10, 2, 4, Preset::General, &mut rng).unwrap();
        for target in CheatTarget::ALL {
            let r = soundness_experiment(&inst, target, 3000, &mut rng).unwrap();
            assert!(r.pass, "{r:?}");
            assert!((r.statistic - 2.0 / 3.0).abs() < 0.04);
        }
    }

    #[test]
    fn simulator_report() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (inst, _) = plant_instance(10, 2, 4, Preset::General, &mut rng).unwrap();
        let r = simulator_experiment(&inst, 4, 3000, 1000, &mut rng);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn trivial_group_distributions_coincide() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let n = 6;
        let gens = GeneratorSet::new(n, vec![Permutation::identity(n)]).unwrap();
        let g = Permutation::random_support(n, 3, &mut rng).unwrap();
        let inst = SdpInstance::new(3, g, gens).unwrap();
        let wit = Witness {
            h: Permutation::identity(n),
        };
        let r = distribution_experiment(&inst, &wit, 500, 10, &mut rng).unwrap();
        assert_eq!(r.detail("group_order"), 1.0);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, Some(1.0));
        assert!(r.pass);
    }

    #[test]
    fn klein_group_distributions_match() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let gens = [vec![1, 0, 3, 2], vec![2, 3, 0, 1]]
            .map(|im| Permutation::from_images(im).unwrap())
            .to_vec();
        let g = Permutation::from_images(vec![1, 0, 2, 3]).unwrap();
        let inst = SdpInstance::new(2, g, GeneratorSet::new(4, gens).unwrap()).unwrap();
        let wit = Witness {
            h: Permutation::identity(4),
        };
        let r = distribution_experiment(&inst, &wit, 100_000, 4, &mut rng).unwrap();
        assert_eq!(r.detail("group_order"), 4.0);
        assert_eq!(r.detail("real_accept_rate"), 1.0);
        assert_eq!(r.detail("sim_accept_rate"), 1.0);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn simulator_skews_challenge_marginals() {
        // Guesses in {0, 1} absorb both challenges 0 and 1, so accepted
        // transcripts carry challenges in proportion 2/5, 2/5, 1/5.
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (inst, wit) = plant_instance(6, 2, 3, Preset::Abelian2, &mut rng).unwrap();
        let r = distribution_experiment(&inst, &wit, 4000, 120, &mut rng).unwrap();
        assert!(
            (r.detail("sim_challenge_2_rate") - 0.2).abs() < 0.02,
            "{r:?}"
        );
        assert!(
            (r.detail("real_challenge_2_rate") - 1.0 / 3.0).abs() < 0.02,
            "{r:?}"
        );
    }

    #[test]
    fn distribution_rejects_large_groups() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let (inst, wit) = plant_instance(10, 2, 4, Preset::General, &mut rng).unwrap();
        assert!(matches!(
            distribution_experiment(&inst, &wit, 10, 120, &mut rng),
            Err(ExperimentError::Group(GroupError::Capacity { .. }))
        ));
    }
}
