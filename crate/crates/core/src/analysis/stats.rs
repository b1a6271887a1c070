//! Chi-square and binomial tests used by the experiments.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn upper_tail(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0)
}

/// Goodness of fit of `counts` to the distribution `probs`.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p <= 0.0 {
            continue;
        }
        let expected = total as f64 * p;
        statistic += (c as f64 - expected).powi(2) / expected;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    ChiSquare {
        statistic,
        dof,
        p_value: upper_tail(statistic, dof),
    }
}

/// Two-sample homogeneity test on a 2×K contingency table. Categories
/// empty in both samples are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquare {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let total = (na + nb) as f64;
    if na == 0 || nb == 0 {
        return ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        };
    }
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        let ea = col * na as f64 / total;
        let eb = col * nb as f64 / total;
        statistic += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let dof = cells.saturating_sub(1);
    ChiSquare {
        statistic,
        dof,
        p_value: upper_tail(statistic, dof),
    }
}

/// Two-sided normal-approximation test of `successes / trials` against `p`.
/// Returns `(z, p_value)`.
pub fn binomial_z_test(successes: u64, trials: u64, p: f64) -> (f64, f64) {
    let n = trials as f64;
    let sigma = (n * p * (1.0 - p)).sqrt();
    if sigma == 0.0 {
        let exact = (successes as f64 - n * p).abs() < 0.5;
        return (0.0, if exact { 1.0 } else { 0.0 });
    }
    let z = (successes as f64 - n * p) / sigma;
    let normal = Normal::standard();
    (z, (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0))
}
