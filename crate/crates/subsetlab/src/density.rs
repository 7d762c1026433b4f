//! Moment matrices of subset-state ensembles in the type basis.
//!
//! For a subset `S` of `[N]` with `|S| = m` and signs `s_x ∈ {±1}`, the
//! `t`-fold tensor power of the state lives in the symmetric subspace, whose
//! orthonormal basis is indexed by size-`t` types `θ` (multisets over `[N]`).
//! Writing `|θ!|` for the product of multiplicity factorials, the matrix
//! element between types `θ` and `φ` is
//!
//! ```text
//! (t! / m^t) * prod_x s_x^(θ_x + φ_x) / sqrt(|θ!| |φ!|)     if supp θ, φ ⊆ S
//! ```
//!
//! and zero otherwise.  Averaging over uniformly random `S` and independent
//! biased signs (`s_x = -1` with probability `(1+b)/2`, so `E s_x = -b`)
//! gives the closed form
//!
//! ```text
//! (t! / m^t) * C(N-u, m-u)/C(N,m) * b^w / sqrt(|θ!| |φ!|)
//! ```
//!
//! with `u = |supp θ ∪ supp φ|` and `w` the number of labels where
//! `θ_x + φ_x` is odd.  `w` is always even (the total multiplicity is `2t`),
//! so the sign `(-b)^w = b^w` never appears; on unique types `w = 2p` with
//! `p = |α ∪ β| - t`.  The brute-force constructor below averages explicit
//! rank-one matrices over every subset and every sign assignment with exact
//! mixture weights and must agree bit for bit.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinatorics::{binomial, enumerate_subsets, enumerate_types, factorial, TypeVector};
use crate::sqrt_rational::SqrtRational;
use crate::{Budget, Error, Result};

/// Which orthonormal basis the matrix is written in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Basis {
    /// All size-`t` types over `[n]`; dimension `C(n + t - 1, t)`.
    Type { n: u64, t: u32 },
    /// Types with all multiplicities 1, i.e. `t`-subsets of `[n]`;
    /// dimension `C(n, t)`.
    UniqueType { n: u64, t: u32 },
    /// Single-copy computational basis (used by sampled moments at `t = 1`);
    /// dimension `n`.
    Computational { n: u64 },
}

impl Basis {
    pub fn n(&self) -> u64 {
        match self {
            Basis::Type { n, .. } | Basis::UniqueType { n, .. } | Basis::Computational { n } => *n,
        }
    }

    pub fn copies(&self) -> u32 {
        match self {
            Basis::Type { t, .. } | Basis::UniqueType { t, .. } => *t,
            Basis::Computational { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Entries {
    Exact(Vec<SqrtRational>),
    Real(Vec<f64>),
}

/// A symmetric moment matrix tagged with its basis and index set.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    basis: Basis,
    /// Basis labels: types in canonical order (Type), subsets in
    /// lexicographic order (UniqueType), or empty (Computational, where the
    /// index is just `0..n`).
    types: Vec<TypeVector>,
    dim: usize,
    entries: Entries,
}

impl MomentMatrix {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn types(&self) -> &[TypeVector] {
        &self.types
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.entries, Entries::Exact(_))
    }

    pub fn entry_exact(&self, i: usize, j: usize) -> Option<&SqrtRational> {
        match &self.entries {
            Entries::Exact(v) => Some(&v[i * self.dim + j]),
            Entries::Real(_) => None,
        }
    }

    pub fn entry_f64(&self, i: usize, j: usize) -> f64 {
        match &self.entries {
            Entries::Exact(v) => v[i * self.dim + j].to_f64(),
            Entries::Real(v) => v[i * self.dim + j],
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry_f64(i, j))
    }

    /// Exact trace; `None` when entries are floating point.
    pub fn trace_exact(&self) -> Option<BigRational> {
        match &self.entries {
            Entries::Exact(v) => {
                let mut acc = BigRational::zero();
                for i in 0..self.dim {
                    acc += v[i * self.dim + i]
                        .to_rational()
                        .expect("diagonal entries have square radicands");
                }
                Some(acc)
            }
            Entries::Real(_) => None,
        }
    }

    pub fn trace_f64(&self) -> f64 {
        (0..self.dim).map(|i| self.entry_f64(i, i)).sum()
    }

    /// Nonzero entries as `row,col,numerator,denominator,radicand` CSV, with
    /// a header line; the encoded value is `(num/den) * sqrt(radicand)`.
    /// Requires exact entries.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let Entries::Exact(v) = &self.entries else {
            return Err(Error::InvalidParameter(
                "CSV export requires exact entries".into(),
            ));
        };
        let io = |e: std::io::Error| Error::InvalidParameter(format!("write failed: {e}"));
        writeln!(out, "row,col,numerator,denominator,radicand").map_err(io)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let e = &v[i * self.dim + j];
                if e.is_zero() {
                    continue;
                }
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    i,
                    j,
                    e.coeff().numer(),
                    e.coeff().denom(),
                    e.radicand()
                )
                .map_err(io)?;
            }
        }
        Ok(())
    }

    /// Little-endian binary dump: `dim` as u64 followed by `dim*dim`
    /// row-major f64 entries.
    pub fn write_f64_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidParameter(format!("write failed: {e}"));
        out.write_all(&(self.dim as u64).to_le_bytes()).map_err(io)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.write_all(&self.entry_f64(i, j).to_le_bytes()).map_err(io)?;
            }
        }
        Ok(())
    }

    /// Maximum entry asymmetry `|A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.entry_f64(i, j) - self.entry_f64(j, i)).abs());
            }
        }
        worst
    }

    fn from_exact(basis: Basis, types: Vec<TypeVector>, entries: Vec<SqrtRational>) -> Self {
        let dim = types.len();
        debug_assert_eq!(entries.len(), dim * dim);
        MomentMatrix {
            basis,
            types,
            dim,
            entries: Entries::Exact(entries),
        }
    }

    pub(crate) fn from_real(basis: Basis, types: Vec<TypeVector>, dim: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        MomentMatrix {
            basis,
            types,
            dim,
            entries: Entries::Real(entries),
        }
    }
}

/// Reads back the binary format written by [`MomentMatrix::write_f64_binary`].
pub fn read_f64_binary(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.len() < 8 {
        return Err(Error::InvalidParameter("truncated matrix file".into()));
    }
    let dim = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let need = 8 + dim * dim * 8;
    if bytes.len() != need {
        return Err(Error::InvalidParameter(format!(
            "matrix file has {} bytes, expected {need}",
            bytes.len()
        )));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        let off = 8 + (i * dim + j) * 8;
        f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap())
    }))
}

fn validate_bias(bias: &BigRational) -> Result<()> {
    if bias.abs() > BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "bias must lie in [-1, 1], got {bias}"
        )));
    }
    Ok(())
}

fn type_basis(n: u64, t: u32, budget: &Budget) -> Result<Vec<TypeVector>> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    let dim = binomial(n + u64::from(t) - 1, t as i64);
    budget.admit(&(&dim * &dim), "dense type-basis matrix")?;
    let labels: Vec<u64> = (0..n).collect();
    enumerate_types(&labels, t, budget)
}

fn validate_subset(n: u64, subset: &[u64]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("subset must be nonempty".into()));
    }
    for w in subset.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidParameter(
                "subset must be sorted and duplicate-free".into(),
            ));
        }
    }
    if *subset.last().unwrap() >= n {
        return Err(Error::InvalidParameter(format!(
            "subset label {} outside [0, {n})",
            subset.last().unwrap()
        )));
    }
    Ok(())
}

/// Moment matrix `|S⟩⟨S|^{⊗t}` of a single subset state (optionally with
/// explicit `±1` phases, one per subset element) in the type basis over `[n]`.
pub fn subset_moment(
    n: u64,
    subset: &[u64],
    phases: Option<&[i8]>,
    t: u32,
    budget: &Budget,
) -> Result<MomentMatrix> {
    validate_subset(n, subset)?;
    if let Some(ph) = phases {
        if ph.len() != subset.len() {
            return Err(Error::InvalidParameter(
                "phases must cover exactly the subset".into(),
            ));
        }
        if ph.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("phases must be +1 or -1".into()));
        }
    }
    let types = type_basis(n, t, budget)?;
    let dim = types.len();
    let m = subset.len() as u64;
    let scale = BigRational::new(factorial(u64::from(t)), BigInt::from(m).pow(t));

    // Coefficient vector of the t-fold state over the type basis:
    // <θ|ψ^{⊗t}> = sign(θ) * sqrt(t!/|θ!|) / m^{t/2}, so the (θ, φ) entry is
    // sign(θ)sign(φ) * scale / sqrt(|θ!||φ!|).  sign(θ) = prod_x s_x^{θ_x}.
    let sign_of = |tv: &TypeVector| -> Option<bool> {
        // None when unsupported on S; Some(parity of -1 exponents) otherwise.
        let mut neg_exp: u32 = 0;
        for (x, mult) in tv.support().iter().zip(tv.multiplicities()) {
            let pos = subset.binary_search(x).ok()?;
            if phases.map(|ph| ph[pos] == -1).unwrap_or(false) {
                neg_exp += mult;
            }
        }
        Some(neg_exp % 2 == 1)
    };

    let signs: Vec<Option<bool>> = types.iter().map(sign_of).collect();
    let mut entries = vec![SqrtRational::zero(); dim * dim];
    for i in 0..dim {
        let Some(si) = signs[i] else { continue };
        for j in 0..dim {
            let Some(sj) = signs[j] else { continue };
            let mut val = scale.clone();
            if si != sj {
                val = -val;
            }
            let radicand = types[i].norm_factor() * types[j].norm_factor();
            entries[i * dim + j] = SqrtRational::ratio_over_sqrt(val, radicand);
        }
    }
    Ok(MomentMatrix::from_exact(Basis::Type { n, t }, types, entries))
}

struct ClosedForm {
    n: u64,
    m: u64,
    bias: BigRational,
    scale: BigRational,
    inv_choose: BigRational,
    memo: HashMap<(u64, u32), BigRational>,
}

impl ClosedForm {
    fn new(n: u64, m: u64, t: u32, bias: BigRational) -> Self {
        ClosedForm {
            n,
            m,
            bias,
            scale: BigRational::new(factorial(u64::from(t)), BigInt::from(m).pow(t)),
            inv_choose: BigRational::new(BigInt::one(), binomial(n, m as i64)),
            memo: HashMap::new(),
        }
    }

    /// Rational part of the averaged entry for union-support size `u` and
    /// odd-difference count `w` (zero radical part handled by the caller).
    fn rational_part(&mut self, u: u64, w: u32) -> BigRational {
        if let Some(v) = self.memo.get(&(u, w)) {
            return v.clone();
        }
        let mut val = &self.scale
            * BigRational::from(binomial(self.n - u, self.m as i64 - u as i64))
            * &self.inv_choose;
        for _ in 0..w {
            val *= &self.bias;
        }
        self.memo.insert((u, w), val.clone());
        val
    }

    fn entry(&mut self, theta: &TypeVector, phi: &TypeVector) -> SqrtRational {
        let u = theta.union_support_size(phi);
        if u > self.m {
            return SqrtRational::zero();
        }
        let w = theta.odd_difference_sites(phi);
        debug_assert_eq!(w % 2, 0);
        let val = self.rational_part(u, w);
        if val.is_zero() {
            return SqrtRational::zero();
        }
        SqrtRational::ratio_over_sqrt(val, theta.norm_factor() * phi.norm_factor())
    }
}

fn validate_ensemble_params(n: u64, m: u64, t: u32, bias: &BigRational) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "ensemble requires 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    validate_bias(bias)
}

/// Ensemble-averaged moment matrix in closed form, exact entries.
///
/// `m < t` is allowed: types whose support exceeds `m` labels simply get
/// zero weight, while concentrated types survive.
pub fn average_density_closed_form(
    n: u64,
    m: u64,
    t: u32,
    bias: &BigRational,
    budget: &Budget,
) -> Result<MomentMatrix> {
    validate_ensemble_params(n, m, t, bias)?;
    let types = type_basis(n, t, budget)?;
    let dim = types.len();
    let mut cf = ClosedForm::new(n, m, t, bias.clone());
    let mut entries = vec![SqrtRational::zero(); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let e = cf.entry(&types[i], &types[j]);
            entries[j * dim + i] = e.clone();
            entries[i * dim + j] = e;
        }
    }
    Ok(MomentMatrix::from_exact(Basis::Type { n, t }, types, entries))
}

/// Same closed form with entries rounded to f64 once, for dimensions where
/// storing exact entries densely is wasteful.
pub fn average_density_closed_form_real(
    n: u64,
    m: u64,
    t: u32,
    bias: &BigRational,
    budget: &Budget,
) -> Result<MomentMatrix> {
    validate_ensemble_params(n, m, t, bias)?;
    let types = type_basis(n, t, budget)?;
    let dim = types.len();
    let mut cf = ClosedForm::new(n, m, t, bias.clone());
    let mut rational_f64: HashMap<(u64, u32), f64> = HashMap::new();
    let mut entries = vec![0.0f64; dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let u = types[i].union_support_size(&types[j]);
            if u > m {
                continue;
            }
            let w = types[i].odd_difference_sites(&types[j]);
            let base = *rational_f64
                .entry((u, w))
                .or_insert_with(|| cf.rational_part(u, w).to_f64().unwrap());
            let rad = (types[i].norm_factor() * types[j].norm_factor())
                .to_f64()
                .unwrap();
            let e = base / rad.sqrt();
            entries[j * dim + i] = e;
            entries[i * dim + j] = e;
        }
    }
    Ok(MomentMatrix::from_real(Basis::Type { n, t }, types, dim, entries))
}

/// Ensemble-averaged moment matrix by direct enumeration: every `m`-subset,
/// and for biased phases every sign assignment on the subset with its exact
/// mixture weight.  Independent of the closed form; must agree bit for bit.
pub fn average_density_bruteforce(
    n: u64,
    m: u64,
    t: u32,
    bias: &BigRational,
    budget: &Budget,
) -> Result<MomentMatrix> {
    validate_ensemble_params(n, m, t, bias)?;
    let types = type_basis(n, t, budget)?;
    let dim = types.len();

    // Sign assignments contribute a factor 2^m per subset unless the bias is
    // degenerate (|b| = 1 pins every sign).
    let degenerate = bias.abs() == BigRational::one();
    let phase_count = if degenerate {
        BigInt::one()
    } else {
        BigInt::from(2u32).pow(m as u32)
    };
    budget.admit(
        &(binomial(n, m as i64) * phase_count),
        "brute-force ensemble enumeration",
    )?;

    // With b = x/y the sign probabilities are (y+x)/2y and (y-x)/2y; work
    // over the common denominator (2y)^m with integer numerators so the hot
    // accumulation loop never normalizes fractions.
    let (num_minus, num_plus, weight_denom) = if degenerate {
        (BigInt::one(), BigInt::one(), BigInt::one())
    } else {
        let x = bias.numer().clone();
        let y = bias.denom().clone();
        (&y + &x, &y - &x, (BigInt::from(2) * y).pow(m as u32))
    };

    // Accumulate the integer coefficient of 1/sqrt(|θ!||φ!|) per entry.
    let mut acc = vec![BigInt::zero(); dim * dim];

    for subset in enumerate_subsets(n, m as u32, budget)? {
        // Types supported inside this subset, with their global indices.
        let local = enumerate_types(&subset, t, budget)?;
        let global_idx: Vec<usize> = local
            .iter()
            .map(|tv| types.binary_search(tv).expect("local type in global basis"))
            .collect();

        let mut add_assignment = |signs: &[i8], weight: &BigInt| {
            let neg_parity: Vec<bool> = local
                .iter()
                .map(|tv| {
                    let mut neg: u32 = 0;
                    for (x, mult) in tv.support().iter().zip(tv.multiplicities()) {
                        let pos = subset.binary_search(x).unwrap();
                        if signs[pos] == -1 {
                            neg += mult;
                        }
                    }
                    neg % 2 == 1
                })
                .collect();
            for (a, &gi) in global_idx.iter().enumerate() {
                for (b, &gj) in global_idx.iter().enumerate() {
                    if neg_parity[a] != neg_parity[b] {
                        acc[gi * dim + gj] -= weight;
                    } else {
                        acc[gi * dim + gj] += weight;
                    }
                }
            }
        };

        if degenerate {
            // |b| = 1 pins every sign; the lone assignment has weight 1.
            let target: i8 = if bias.is_positive() { -1 } else { 1 };
            add_assignment(&vec![target; m as usize], &BigInt::one());
        } else {
            let mut signs = vec![1i8; m as usize];
            loop {
                let mut weight = BigInt::one();
                for &s in &signs {
                    weight *= if s == -1 { &num_minus } else { &num_plus };
                }
                if !weight.is_zero() {
                    add_assignment(&signs, &weight);
                }
                // Next assignment: binary counter over {+1, -1}^m.
                let mut pos = 0;
                while pos < signs.len() && signs[pos] == -1 {
                    signs[pos] = 1;
                    pos += 1;
                }
                if pos == signs.len() {
                    break;
                }
                signs[pos] = -1;
            }
        }
    }

    let scale = BigRational::new(
        factorial(u64::from(t)),
        BigInt::from(m).pow(t) * binomial(n, m as i64) * weight_denom,
    );
    let mut entries = vec![SqrtRational::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let c = &acc[i * dim + j];
            if c.is_zero() {
                continue;
            }
            entries[i * dim + j] = SqrtRational::ratio_over_sqrt(
                BigRational::from(c.clone()) * &scale,
                types[i].norm_factor() * types[j].norm_factor(),
            );
        }
    }
    Ok(MomentMatrix::from_exact(Basis::Type { n, t }, types, entries))
}

/// The flat state on the symmetric subspace: `identity / C(n + t - 1, t)` in
/// the type basis.
pub fn haar_moment(n: u64, t: u32, budget: &Budget) -> Result<MomentMatrix> {
    let types = type_basis(n, t, budget)?;
    let dim = types.len();
    let diag = SqrtRational::from_rational(BigRational::new(
        BigInt::one(),
        BigInt::from(dim as u64),
    ));
    let mut entries = vec![SqrtRational::zero(); dim * dim];
    for i in 0..dim {
        entries[i * dim + i] = diag.clone();
    }
    Ok(MomentMatrix::from_exact(Basis::Type { n, t }, types, entries))
}

/// Restriction of a type-basis matrix to unique types, rescaled by
/// `C(n + t - 1, t)`.  Exact inputs produce exact rational entries (unique
/// types have trivial radicands).
pub fn restrict_unique_rescaled(rho: &MomentMatrix) -> Result<MomentMatrix> {
    let Basis::Type { n, t } = *rho.basis() else {
        return Err(Error::InvalidParameter(
            "unique restriction expects a type-basis matrix".into(),
        ));
    };
    let keep: Vec<usize> = rho
        .types()
        .iter()
        .enumerate()
        .filter(|(_, tv)| tv.is_unique())
        .map(|(i, _)| i)
        .collect();
    let sub_types: Vec<TypeVector> = keep.iter().map(|&i| rho.types()[i].clone()).collect();
    let dim = keep.len();
    let scale = BigRational::from(binomial(n + u64::from(t) - 1, t as i64));
    let basis = Basis::UniqueType { n, t };
    match &rho.entries {
        Entries::Exact(_) => {
            let mut entries = Vec::with_capacity(dim * dim);
            for &i in &keep {
                for &j in &keep {
                    let e = rho.entry_exact(i, j).unwrap();
                    let val = e
                        .to_rational()
                        .expect("unique-type entries are rational")
                        * &scale;
                    entries.push(SqrtRational::from_rational(val));
                }
            }
            Ok(MomentMatrix::from_exact(basis, sub_types, entries))
        }
        Entries::Real(_) => {
            let s = scale.to_f64().unwrap();
            let mut entries = Vec::with_capacity(dim * dim);
            for &i in &keep {
                for &j in &keep {
                    entries.push(rho.entry_f64(i, j) * s);
                }
            }
            Ok(MomentMatrix::from_real(basis, sub_types, dim, entries))
        }
    }
}
