//! Spectral data of the unique-type block through the Johnson association
//! scheme.
//!
//! Pairs of `t`-subsets of `[N]` fall into `t + 1` orbits under label
//! permutations, indexed by the distance `p = |union| - t`.  A matrix whose
//! `(alpha, beta)` entry depends only on that distance ("circulant" below) is
//! simultaneously diagonalised by the scheme's `t + 1` eigenspaces; the
//! eigenvalue on the `q`-th eigenspace is
//!
//! ```text
//! mu(q) = sum_p  nu(p) * C(t,p) * C(N-t,p) * phi_q(p)
//! ```
//!
//! where `phi_q` is the spherical function
//!
//! ```text
//! phi_q(p) = sum_k (-1)^k C(q,k) C(p,k) C(N-q+1,k) / ( C(t,k) C(N-t,k) )
//! ```
//!
//! and the eigenspace dimension is `C(N,q) - C(N,q-1)`.  The rescaled
//! unique-type block of the ensemble-averaged moment matrix is exactly such a
//! circulant, with entry profile
//!
//! ```text
//! nu(p) = C(N+t-1,t) * (t!/m^t) * C(N-t-p, m-t-p) / C(N,m) * b^(2p)
//! ```
//!
//! All quantities here are exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinatorics::{binomial, factorial, orbit_size, two_row_irrep_dim};
use crate::{Error, Result};

/// Spherical function `phi_q(p)` of the Johnson scheme on `t`-subsets of
/// `[n]`.  Requires `q <= t <= n/2` and `p <= t`.
pub fn spherical_function(n: u64, t: u32, q: u32, p: u32) -> Result<BigRational> {
    if u64::from(2 * t) > n {
        return Err(Error::InvalidParameter(format!(
            "scheme requires t <= n/2, got t={t}, n={n}"
        )));
    }
    if q > t || p > t {
        return Err(Error::InvalidParameter(format!(
            "spherical function needs q, p <= t, got q={q}, p={p}, t={t}"
        )));
    }
    let mut acc = BigRational::zero();
    for k in 0..=q.min(p) {
        let num = binomial(u64::from(q), k as i64)
            * binomial(u64::from(p), k as i64)
            * binomial(n - u64::from(q) + 1, k as i64);
        let den = binomial(u64::from(t), k as i64) * binomial(n - u64::from(t), k as i64);
        let term = BigRational::new(num, den);
        if k % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Exact entry profile of the rescaled unique-type block: `values[p]` is the
/// matrix entry between subsets at distance `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantProfile {
    pub n: u64,
    pub m: u64,
    pub t: u32,
    pub bias: BigRational,
    pub values: Vec<BigRational>,
}

/// One entry of the profile:
/// `nu(p) = C(n+t-1,t) * (t!/m^t) * C(n-t-p, m-t-p) / C(n,m) * b^(2p)`.
///
/// Zero when `m < t + p`.  Requires `t <= m <= n` and `|b| <= 1`.
pub fn circulant_exact(n: u64, m: u64, t: u32, bias: &BigRational, p: u32) -> Result<BigRational> {
    validate_profile_params(n, m, t, bias)?;
    if p > t {
        return Err(Error::InvalidParameter(format!(
            "distance p={p} exceeds t={t}"
        )));
    }
    let tt = u64::from(t);
    let dim_sym = binomial(n + tt - 1, tt as i64);
    let m_pow_t = BigInt::from(m).pow(t);
    let scale = BigRational::new(dim_sym * factorial(tt), m_pow_t);
    let hyper = BigRational::new(
        binomial(n - tt - u64::from(p), m as i64 - tt as i64 - i64::from(p)),
        binomial(n, m as i64),
    );
    let mut bias_pow = BigRational::one();
    for _ in 0..2 * p {
        bias_pow *= bias;
    }
    Ok(scale * hyper * bias_pow)
}

fn validate_profile_params(n: u64, m: u64, t: u32, bias: &BigRational) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    if m < u64::from(t) || m > n {
        return Err(Error::InvalidParameter(format!(
            "profile requires t <= m <= n, got t={t}, m={m}, n={n}"
        )));
    }
    if bias.abs() > BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "bias must lie in [-1, 1], got {bias}"
        )));
    }
    Ok(())
}

impl CirculantProfile {
    pub fn new(n: u64, m: u64, t: u32, bias: BigRational) -> Result<Self> {
        validate_profile_params(n, m, t, &bias)?;
        if u64::from(2 * t) > n {
            return Err(Error::InvalidParameter(format!(
                "scheme requires t <= n/2, got t={t}, n={n}"
            )));
        }
        let values = (0..=t)
            .map(|p| circulant_exact(n, m, t, &bias, p))
            .collect::<Result<Vec<_>>>()?;
        debug_assert!(values[0].is_positive());
        Ok(CirculantProfile {
            n,
            m,
            t,
            bias,
            values,
        })
    }
}

/// Eigenvalue of the circulant on the `q`-th eigenspace.
pub fn eigenvalue(profile: &CirculantProfile, q: u32) -> Result<BigRational> {
    if q > profile.t {
        return Err(Error::InvalidParameter(format!(
            "eigenspace label q={q} exceeds t={}",
            profile.t
        )));
    }
    let mut acc = BigRational::zero();
    for p in 0..=profile.t {
        let orbit = BigRational::from(orbit_size(profile.n, profile.t, p));
        let phi = spherical_function(profile.n, profile.t, q, p)?;
        acc += &profile.values[p as usize] * orbit * phi;
    }
    Ok(acc)
}

/// Top-eigenspace (`q = t`) eigenvalue in closed form:
/// `sum_p (-1)^p nu(p) C(t, p)`.
///
/// Agrees with [`eigenvalue`] at `q = t` by the alternating identity.
pub fn top_eigenvalue_closed_form(profile: &CirculantProfile) -> BigRational {
    top_eigenvalue_terms(profile).iter().sum()
}

/// The individual `p`-terms `(-1)^p nu(p) C(t, p)` of the closed form, so
/// callers can isolate how each distance class scales with the bias.
pub fn top_eigenvalue_terms(profile: &CirculantProfile) -> Vec<BigRational> {
    (0..=profile.t)
        .map(|p| {
            let mut term = &profile.values[p as usize]
                * BigRational::from(binomial(u64::from(profile.t), p as i64));
            if p % 2 == 1 {
                term = -term;
            }
            term
        })
        .collect()
}

/// Full spectrum of the circulant: eigenvalue and multiplicity per
/// eigenspace `q = 0..=t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub n: u64,
    pub t: u32,
    /// Dimension of the ambient symmetric subspace, `C(n + t - 1, t)`.
    pub ambient_dim: BigInt,
    pub blocks: Vec<SpectralBlock>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBlock {
    pub q: u32,
    pub eigenvalue: BigRational,
    pub multiplicity: BigInt,
}

pub fn spectrum(profile: &CirculantProfile) -> Result<SpectralDecomposition> {
    let blocks = (0..=profile.t)
        .map(|q| {
            Ok(SpectralBlock {
                q,
                eigenvalue: eigenvalue(profile, q)?,
                multiplicity: two_row_irrep_dim(profile.n, q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralDecomposition {
        n: profile.n,
        t: profile.t,
        ambient_dim: binomial(profile.n + u64::from(profile.t) - 1, profile.t as i64),
        blocks,
    })
}

impl SpectralDecomposition {
    /// `sum_q d_q * mu(q)`, which must equal `C(n, t) * nu(0)`.
    pub fn trace(&self) -> BigRational {
        self.blocks
            .iter()
            .map(|b| &b.eigenvalue * BigRational::from(b.multiplicity.clone()))
            .sum()
    }

    pub fn total_multiplicity(&self) -> BigInt {
        self.blocks.iter().map(|b| b.multiplicity.clone()).sum()
    }

    /// Eigenvalues expanded by multiplicity, ascending, as doubles.  Errors
    /// when the total multiplicity does not fit in memory terms (caller
    /// guards dimension).
    pub fn expanded_eigenvalues_f64(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in &self.blocks {
            let mult = b.multiplicity.to_usize().expect("dimension fits usize");
            let val = b.eigenvalue.to_f64().expect("eigenvalue fits f64");
            out.extend(std::iter::repeat_n(val, mult));
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}
