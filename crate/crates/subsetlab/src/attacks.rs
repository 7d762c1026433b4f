//! The two distinguishers against subset-state ensembles, with exact
//! baselines on both sides.
//!
//! Birthday: measure `t` copies in the computational basis, accept on any
//! repeated outcome.  On a subset state the outcomes are i.i.d. uniform over
//! the subset, so the acceptance probability is `1 - m!/((m-t)! m^t)`
//! exactly.  For the Haar ensemble the outcome law is not i.i.d. uniform:
//! conditioned on the state, outcomes are i.i.d. from its squared
//! amplitudes, which are Dirichlet(1, .., 1)-distributed.  Integrating the
//! Dirichlet moments gives
//!
//! ```text
//! P[all t distinct] = prod_{i=0}^{t-1} (N - i) / (N + i)
//! ```
//!
//! and the sequential predictive law `P[next = x | counts c, k seen] =
//! (1 + c_x)/(N + k)`, a Polya urn, which samples exact Haar outcomes in
//! O(t) per trial with no state vector.
//!
//! Plus-overlap: threshold the squared overlap with the all-plus state.
//! Subset states give `m/N` exactly; for Haar states the overlap against
//! any fixed state is Beta(1, N-1), sampled by inverting its CDF.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ensembles::{sample_biased_phases, sample_subset_labels};
use crate::{Error, Result};

/// Accepts ("declares subset state") iff any outcome repeats.
pub fn birthday_accepts(outcomes: &[u64]) -> Result<bool> {
    if outcomes.len() < 2 {
        return Err(Error::InvalidParameter(
            "birthday test needs at least two outcomes".into(),
        ));
    }
    let mut sorted = outcomes.to_vec();
    sorted.sort_unstable();
    Ok(sorted.windows(2).any(|w| w[0] == w[1]))
}

/// Exact probability that `t` i.i.d. uniform draws from `m` outcomes
/// contain a repeat: `1 - m!/((m-t)! m^t)`.  Returns 1 when `t > m`.
pub fn collision_probability_exact(m: u64, t: u32) -> BigRational {
    if u64::from(t) > m {
        return BigRational::one();
    }
    let mut distinct = BigRational::one();
    for i in 0..u64::from(t) {
        distinct *= BigRational::new(BigInt::from(m - i), BigInt::from(m));
    }
    BigRational::one() - distinct
}

/// Exact probability of a repeated outcome among `t` computational-basis
/// measurements of a Haar-random `n_labels`-dimensional state:
/// `1 - prod_{i<t} (N - i)/(N + i)`.
pub fn haar_collision_probability_exact(n_labels: u64, t: u32) -> BigRational {
    if u64::from(t) > n_labels {
        return BigRational::one();
    }
    let mut distinct = BigRational::one();
    for i in 0..u64::from(t) {
        distinct *= BigRational::new(
            BigInt::from(n_labels - i),
            BigInt::from(n_labels + i),
        );
    }
    BigRational::one() - distinct
}

/// Computational-basis outcomes of a fresh Haar-random state, sampled
/// through the Polya-urn predictive law.
pub fn sample_haar_outcomes<R: Rng>(n_labels: u64, t: u32, rng: &mut R) -> Vec<u64> {
    let mut outcomes: Vec<u64> = Vec::with_capacity(t as usize);
    for k in 0..u64::from(t) {
        // With probability k/(N+k) repeat a uniformly chosen earlier
        // outcome, otherwise draw fresh: combined, P[x] = (1 + c_x)/(N + k).
        let r = rng.random_range(0..n_labels + k);
        let next = if r < k {
            outcomes[r as usize]
        } else {
            rng.random_range(0..n_labels)
        };
        outcomes.push(next);
    }
    outcomes
}

/// Squared overlap of a fresh Haar state with any fixed state: a
/// Beta(1, N-1) draw via inverse CDF.
pub fn sample_haar_plus_overlap<R: Rng>(n_labels: u64, rng: &mut R) -> f64 {
    if n_labels == 1 {
        return 1.0;
    }
    let u: f64 = rng.random();
    1.0 - u.powf(1.0 / (n_labels as f64 - 1.0))
}

/// An ensemble a distinguisher can be run against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EnsembleSpec {
    /// Uniform size-`m` subsets of `[n_labels]`; `bias` switches on random
    /// phases with mean sign `-bias`.
    UniformSubset {
        n_labels: u64,
        m: u64,
        bias: Option<f64>,
    },
    Haar { n_labels: u64 },
}

impl EnsembleSpec {
    pub fn label(&self) -> String {
        match self {
            EnsembleSpec::UniformSubset {
                n_labels,
                m,
                bias: None,
            } => format!("subset(N={n_labels},m={m})"),
            EnsembleSpec::UniformSubset {
                n_labels,
                m,
                bias: Some(b),
            } => format!("subset-phase(N={n_labels},m={m},b={b})"),
            EnsembleSpec::Haar { n_labels } => format!("haar(N={n_labels})"),
        }
    }

    pub fn n_labels(&self) -> u64 {
        match self {
            EnsembleSpec::UniformSubset { n_labels, .. } | EnsembleSpec::Haar { n_labels } => {
                *n_labels
            }
        }
    }

    /// Expected squared overlap with the all-plus state.
    pub fn expected_plus_overlap(&self) -> f64 {
        match self {
            EnsembleSpec::UniformSubset {
                n_labels,
                m,
                bias: None,
            } => *m as f64 / *n_labels as f64,
            // E (sum s)^2 = m + m(m-1) b^2.
            EnsembleSpec::UniformSubset {
                n_labels,
                m,
                bias: Some(b),
            } => (1.0 + (*m as f64 - 1.0) * b * b) / *n_labels as f64,
            EnsembleSpec::Haar { n_labels } => 1.0 / *n_labels as f64,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            EnsembleSpec::UniformSubset { n_labels, m, bias } => {
                if *m == 0 || m > n_labels {
                    return Err(Error::InvalidParameter(format!(
                        "subset ensemble requires 1 <= m <= {n_labels}, got {m}"
                    )));
                }
                if let Some(b) = bias {
                    if !(-1.0..=1.0).contains(b) {
                        return Err(Error::InvalidParameter(format!(
                            "bias must lie in [-1, 1], got {b}"
                        )));
                    }
                }
                Ok(())
            }
            EnsembleSpec::Haar { n_labels } => {
                if *n_labels == 0 {
                    Err(Error::InvalidParameter("need at least one label".into()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Distinguisher {
    /// Measure `copies` computational-basis outcomes, accept on a repeat.
    Birthday { copies: u32 },
    /// Threshold the squared overlap with the all-plus state; `sampled`
    /// replaces the exact comparison with one Bernoulli(overlap) shot.
    PlusOverlap { threshold: f64, sampled: bool },
}

impl Distinguisher {
    pub fn label(&self) -> String {
        match self {
            Distinguisher::Birthday { copies } => format!("birthday(t={copies})"),
            Distinguisher::PlusOverlap { threshold, sampled } => {
                let mode = if *sampled { "sampled" } else { "exact" };
                format!("plus-overlap(tau={threshold},{mode})")
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Distinguisher::Birthday { copies } => {
                if *copies < 2 {
                    return Err(Error::InvalidParameter(
                        "birthday test needs at least two copies".into(),
                    ));
                }
                Ok(())
            }
            Distinguisher::PlusOverlap { threshold, .. } => {
                if !(*threshold > 0.0 && *threshold < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "threshold must lie in (0, 1), got {threshold}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// One simulated trial: draw a state from the ensemble and run the test.
    fn accept_once<R: Rng>(&self, spec: &EnsembleSpec, rng: &mut R) -> Result<bool> {
        match self {
            Distinguisher::Birthday { copies } => {
                let outcomes = match spec {
                    EnsembleSpec::UniformSubset { n_labels, m, .. } => {
                        // Phases never change measurement probabilities.
                        let subset = sample_subset_labels(*n_labels, *m, rng)?;
                        (0..*copies)
                            .map(|_| subset[rng.random_range(0..subset.len())])
                            .collect::<Vec<_>>()
                    }
                    EnsembleSpec::Haar { n_labels } => {
                        sample_haar_outcomes(*n_labels, *copies, rng)
                    }
                };
                birthday_accepts(&outcomes)
            }
            Distinguisher::PlusOverlap { threshold, sampled } => {
                let overlap = match spec {
                    EnsembleSpec::UniformSubset {
                        n_labels,
                        m,
                        bias: None,
                    } => *m as f64 / *n_labels as f64,
                    EnsembleSpec::UniformSubset {
                        n_labels,
                        m,
                        bias: Some(b),
                    } => {
                        let signs = sample_biased_phases(*m as usize, *b, rng)?;
                        let total: f64 = signs.iter().map(|&s| f64::from(s)).sum();
                        total * total / (*m as f64 * *n_labels as f64)
                    }
                    EnsembleSpec::Haar { n_labels } => sample_haar_plus_overlap(*n_labels, rng),
                };
                if *sampled {
                    Ok(rng.random::<f64>() < overlap)
                } else {
                    Ok(overlap >= *threshold)
                }
            }
        }
    }

    /// Exact acceptance probability on an ensemble, where a closed form
    /// exists.
    pub fn expected_accept(&self, spec: &EnsembleSpec) -> Option<f64> {
        match self {
            Distinguisher::Birthday { copies } => match spec {
                EnsembleSpec::UniformSubset { m, .. } => {
                    collision_probability_exact(*m, *copies).to_f64()
                }
                EnsembleSpec::Haar { n_labels } => {
                    haar_collision_probability_exact(*n_labels, *copies).to_f64()
                }
            },
            Distinguisher::PlusOverlap { threshold, sampled } => {
                if *sampled {
                    return Some(spec.expected_plus_overlap());
                }
                match spec {
                    EnsembleSpec::UniformSubset { bias: Some(_), .. } => None,
                    EnsembleSpec::UniformSubset {
                        n_labels,
                        m,
                        bias: None,
                    } => Some(if *m as f64 / *n_labels as f64 >= *threshold {
                        1.0
                    } else {
                        0.0
                    }),
                    // P[Beta(1, N-1) >= tau] = (1 - tau)^(N-1).
                    EnsembleSpec::Haar { n_labels } => {
                        Some((1.0 - threshold).powf(*n_labels as f64 - 1.0))
                    }
                }
            }
        }
    }
}

/// Default overlap threshold between two hypotheses: the geometric mean of
/// their expected overlaps.
pub fn default_overlap_threshold(a: &EnsembleSpec, b: &EnsembleSpec) -> f64 {
    (a.expected_plus_overlap() * b.expected_plus_overlap()).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackReport {
    pub attack: String,
    pub ensemble_a: String,
    pub ensemble_b: String,
    pub trials: u64,
    pub seed: u64,
    pub accept_rate_a: f64,
    pub accept_rate_b: f64,
    /// |rate_a - rate_b|.
    pub advantage: f64,
    /// Binomial error of the advantage:
    /// sqrt(ra(1-ra)/T + rb(1-rb)/T).
    pub std_error: f64,
    /// |expected_a - expected_b| where both closed forms exist.
    pub predicted_advantage: Option<f64>,
}

impl AttackReport {
    /// Advantage in units of its standard error; infinite when the error
    /// vanishes but the advantage does not.
    pub fn significance(&self) -> f64 {
        if self.std_error > 0.0 {
            self.advantage / self.std_error
        } else if self.advantage > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_header() -> &'static str {
        "attack,ensemble_a,ensemble_b,trials,seed,accept_rate_a,accept_rate_b,advantage,std_error,predicted_advantage"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.attack,
            self.ensemble_a,
            self.ensemble_b,
            self.trials,
            self.seed,
            self.accept_rate_a,
            self.accept_rate_b,
            self.advantage,
            self.std_error,
            self.predicted_advantage
                .map(|p| p.to_string())
                .unwrap_or_default(),
        )
    }
}

/// Runs `trials` independent simulated trials of the distinguisher against
/// each ensemble and reports empirical rates.  Deterministic under `seed`.
pub fn estimate_advantage(
    distinguisher: &Distinguisher,
    ensemble_a: &EnsembleSpec,
    ensemble_b: &EnsembleSpec,
    trials: u64,
    seed: u64,
) -> Result<AttackReport> {
    distinguisher.validate()?;
    ensemble_a.validate()?;
    ensemble_b.validate()?;
    if trials < 100 {
        return Err(Error::InvalidParameter(format!(
            "need at least 100 trials, got {trials}"
        )));
    }

    let run = |spec: &EnsembleSpec, stream: u64| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream);
        let mut accepts = 0u64;
        for _ in 0..trials {
            if distinguisher.accept_once(spec, &mut rng)? {
                accepts += 1;
            }
        }
        Ok(accepts as f64 / trials as f64)
    };
    // Distinct, fixed stream tags keep the two ensembles independent while
    // staying reproducible.
    let rate_a = run(ensemble_a, 0x5555_5555_5555_5555)?;
    let rate_b = run(ensemble_b, 0xaaaa_aaaa_aaaa_aaaa)?;

    let t = trials as f64;
    let std_error = (rate_a * (1.0 - rate_a) / t + rate_b * (1.0 - rate_b) / t).sqrt();
    let predicted_advantage = match (
        distinguisher.expected_accept(ensemble_a),
        distinguisher.expected_accept(ensemble_b),
    ) {
        (Some(pa), Some(pb)) => Some((pa - pb).abs()),
        _ => None,
    };

    Ok(AttackReport {
        attack: distinguisher.label(),
        ensemble_a: ensemble_a.label(),
        ensemble_b: ensemble_b.label(),
        trials,
        seed,
        accept_rate_a: rate_a,
        accept_rate_b: rate_b,
        advantage: (rate_a - rate_b).abs(),
        std_error,
        predicted_advantage,
    })
}
