//! Samplers for the state families under study: uniform random subsets,
//! biased random phases, Haar-random vectors, and keyed pseudorandom
//! subsets generated by a Feistel permutation.
//!
//! Everything is deterministic given (seed, parameters); samplers take
//! either an explicit seed or a caller-owned RNG so trial loops can
//! partition seeds.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::density::{Basis, MomentMatrix};
use crate::{Budget, Error, Result};

/// A subset state on `n` qubits: the uniform superposition over `subset`,
/// with optional `±1` phases (one per element, aligned with `subset`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetState {
    pub n: u32,
    pub subset: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<i8>>,
}

impl SubsetState {
    pub fn new(n: u32, subset: Vec<u64>, phases: Option<Vec<i8>>) -> Result<Self> {
        let state = SubsetState { n, subset, phases };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 63 {
            return Err(Error::InvalidParameter(format!(
                "qubit count {} outside 1..=63",
                self.n
            )));
        }
        if self.subset.is_empty() {
            return Err(Error::InvalidParameter("subset must be nonempty".into()));
        }
        for w in self.subset.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidParameter(
                    "subset must be sorted and duplicate-free".into(),
                ));
            }
        }
        if *self.subset.last().unwrap() >= self.labels() {
            return Err(Error::InvalidParameter(format!(
                "subset label {} outside the {}-qubit domain",
                self.subset.last().unwrap(),
                self.n
            )));
        }
        if let Some(ph) = &self.phases {
            if ph.len() != self.subset.len() {
                return Err(Error::InvalidParameter(
                    "phases must cover exactly the subset".into(),
                ));
            }
            if ph.iter().any(|&s| s != 1 && s != -1) {
                return Err(Error::InvalidParameter("phases must be +1 or -1".into()));
            }
        }
        Ok(())
    }

    /// Number of computational basis labels, `2^n`.
    pub fn labels(&self) -> u64 {
        1u64 << self.n
    }

    pub fn size(&self) -> u64 {
        self.subset.len() as u64
    }

    /// Exact squared overlap with the all-plus state:
    /// `(sum of phases)^2 / (m * 2^n)`, which is `m / 2^n` without phases.
    pub fn plus_overlap_exact(&self) -> BigRational {
        let phase_sum: i64 = match &self.phases {
            Some(ph) => ph.iter().map(|&s| i64::from(s)).sum(),
            None => self.subset.len() as i64,
        };
        BigRational::new(
            BigInt::from(phase_sum) * BigInt::from(phase_sum),
            BigInt::from(self.size()) * BigInt::from(self.labels()),
        )
    }
}

/// Full amplitude vector of a subset state, length `2^n`.
pub fn state_vector(state: &SubsetState, budget: &Budget) -> Result<Vec<f64>> {
    state.validate()?;
    budget.admit_usize(state.labels() as usize, "state vector length")?;
    let mut amps = vec![0.0; state.labels() as usize];
    let norm = 1.0 / (state.subset.len() as f64).sqrt();
    for (i, &x) in state.subset.iter().enumerate() {
        let sign = state
            .phases
            .as_ref()
            .map(|ph| f64::from(ph[i]))
            .unwrap_or(1.0);
        amps[x as usize] = sign * norm;
    }
    Ok(amps)
}

/// Uniformly random size-`m` subset of `[n_labels]`, sorted.  A sparse
/// partial Fisher-Yates shuffle touches only `m` positions, so huge label
/// domains are fine.
pub fn sample_subset_labels<R: Rng>(n_labels: u64, m: u64, rng: &mut R) -> Result<Vec<u64>> {
    if m == 0 || m > n_labels {
        return Err(Error::InvalidParameter(format!(
            "subset size must satisfy 1 <= m <= {n_labels}, got {m}"
        )));
    }
    let mut displaced: HashMap<u64, u64> = HashMap::new();
    let mut out = Vec::with_capacity(m as usize);
    for i in 0..m {
        let j = rng.random_range(i..n_labels);
        let pick = *displaced.get(&j).unwrap_or(&j);
        let at_i = *displaced.get(&i).unwrap_or(&i);
        displaced.insert(j, at_i);
        out.push(pick);
    }
    out.sort_unstable();
    Ok(out)
}

/// Uniformly random subset state on `n` qubits with `m` elements.
pub fn sample_uniform_subset(n: u32, m: u64, seed: u64) -> Result<SubsetState> {
    if n == 0 || n > 63 {
        return Err(Error::InvalidParameter(format!(
            "qubit count {n} outside 1..=63"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subset = sample_subset_labels(1u64 << n, m, &mut rng)?;
    SubsetState::new(n, subset, None)
}

/// Independent `±1` phases: `-1` with probability `(1 + b)/2` (so the mean
/// sign is `-b`).
pub fn sample_biased_phases<R: Rng>(count: usize, bias: f64, rng: &mut R) -> Result<Vec<i8>> {
    if !(-1.0..=1.0).contains(&bias) {
        return Err(Error::InvalidParameter(format!(
            "bias must lie in [-1, 1], got {bias}"
        )));
    }
    let p_minus = (1.0 + bias) / 2.0;
    Ok((0..count)
        .map(|_| if rng.random::<f64>() < p_minus { -1 } else { 1 })
        .collect())
}

/// Haar-random state: i.i.d. standard complex Gaussian amplitudes,
/// normalized.  Unitary invariance of the Gaussian makes the output exactly
/// Haar-distributed on the sphere.
pub fn sample_haar_state<R: Rng>(n_labels: u64, rng: &mut R, budget: &Budget) -> Result<Vec<Complex64>> {
    if n_labels == 0 {
        return Err(Error::InvalidParameter("need at least one label".into()));
    }
    budget.admit_usize(n_labels as usize, "Haar state vector length")?;
    let mut amps: Vec<Complex64> = (0..n_labels)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Ok(amps)
}

/// Key material for the Feistel permutation on `bits`-bit strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrpKey {
    /// Key bytes (accepted as hex on the wire).
    #[serde(with = "hex")]
    pub key: Vec<u8>,
    pub rounds: u32,
    pub bits: u32,
}

impl PrpKey {
    /// Requires at least 4 rounds, and an even count so both halves receive
    /// the same number of mixing steps.
    pub fn new(key: Vec<u8>, rounds: u32, bits: u32) -> Result<Self> {
        if rounds < 4 || !rounds.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "round count must be even and >= 4, got {rounds}"
            )));
        }
        if bits == 0 || bits > 63 {
            return Err(Error::InvalidParameter(format!(
                "domain bits {bits} outside 1..=63"
            )));
        }
        if key.is_empty() {
            return Err(Error::InvalidParameter("key must be nonempty".into()));
        }
        Ok(PrpKey { key, rounds, bits })
    }

    pub fn from_hex(key_hex: &str, rounds: u32, bits: u32) -> Result<Self> {
        let key = hex::decode(key_hex)
            .map_err(|e| Error::InvalidParameter(format!("bad hex key: {e}")))?;
        Self::new(key, rounds, bits)
    }

    pub fn domain(&self) -> u64 {
        1u64 << self.bits
    }
}

fn round_output(key: &PrpKey, round: u32, half: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(&key.key);
    hasher.update(round.to_le_bytes());
    hasher.update(half.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Feistel walk shared by the forward and inverse directions.  The low
/// `bits/2` bits form the left half; even rounds XOR a keyed hash of the
/// right half into the left, odd rounds the reverse.  Each round alters only
/// one half, so running the schedule backwards inverts the permutation.
fn feistel_rounds<I: Iterator<Item = u32>>(key: &PrpKey, x: u64, schedule: I) -> u64 {
    let lo_bits = key.bits / 2;
    let hi_bits = key.bits - lo_bits;
    let lo_mask = (1u64 << lo_bits) - 1; // zero when lo_bits = 0
    let hi_mask = (1u64 << hi_bits) - 1;
    let mut lo = x & lo_mask;
    let mut hi = x >> lo_bits;
    for round in schedule {
        if round % 2 == 0 {
            lo = (lo ^ round_output(key, round, hi)) & lo_mask;
        } else {
            hi = (hi ^ round_output(key, round, lo)) & hi_mask;
        }
    }
    (hi << lo_bits) | lo
}

/// Keyed bijection on `[2^bits]`.
pub fn feistel_permute(key: &PrpKey, x: u64) -> Result<u64> {
    if x >= key.domain() {
        return Err(Error::InvalidParameter(format!(
            "input {x} outside the {}-bit domain",
            key.bits
        )));
    }
    Ok(feistel_rounds(key, x, 0..key.rounds))
}

pub fn feistel_inverse(key: &PrpKey, y: u64) -> Result<u64> {
    if y >= key.domain() {
        return Err(Error::InvalidParameter(format!(
            "input {y} outside the {}-bit domain",
            key.bits
        )));
    }
    Ok(feistel_rounds(key, y, (0..key.rounds).rev()))
}

/// Pseudorandom subset: the image of `{0, .., m-1}` under the keyed
/// permutation.  Distinctness is inherited from bijectivity.
pub fn pseudorandom_subset(key: &PrpKey, m: u64) -> Result<SubsetState> {
    if m == 0 || m > key.domain() {
        return Err(Error::InvalidParameter(format!(
            "subset size must satisfy 1 <= m <= {}, got {m}",
            key.domain()
        )));
    }
    let mut subset: Vec<u64> = (0..m)
        .map(|x| feistel_permute(key, x))
        .collect::<Result<_>>()?;
    subset.sort_unstable();
    SubsetState::new(key.bits, subset, None)
}

/// Sampled single-copy moment: the average of `|S><S|` over `trials` draws
/// of the ensemble, in the computational basis (dimension `n_labels`).
/// A statistical cross-check of the closed form at `t = 1`.
pub fn moment_monte_carlo_t1(
    n_labels: u64,
    m: u64,
    bias: Option<f64>,
    trials: u64,
    seed: u64,
    budget: &Budget,
) -> Result<MomentMatrix> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let dim = n_labels as usize;
    budget.admit_usize(dim * dim, "sampled moment matrix")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![0.0f64; dim * dim];
    let weight = 1.0 / (m as f64 * trials as f64);
    for _ in 0..trials {
        let subset = sample_subset_labels(n_labels, m, &mut rng)?;
        let signs = match bias {
            Some(b) => sample_biased_phases(subset.len(), b, &mut rng)?,
            None => vec![1; subset.len()],
        };
        for (i, &x) in subset.iter().enumerate() {
            for (j, &y) in subset.iter().enumerate() {
                acc[x as usize * dim + y as usize] +=
                    f64::from(signs[i]) * f64::from(signs[j]) * weight;
            }
        }
    }
    Ok(MomentMatrix::from_real(
        Basis::Computational { n: n_labels },
        Vec::new(),
        dim,
        acc,
    ))
}
