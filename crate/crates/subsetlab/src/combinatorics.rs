//! Exact combinatorics on big integers: binomials, two-row irreducible
//! dimensions, orbit sizes of the Johnson scheme, subset and type
//! enumeration, and the alternating binomial identity.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Budget, Error, Result};

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Binomial coefficient `C(n, k)` with the convention that out-of-range `k`
/// (negative or `k > n`) yields 0.
pub fn binomial(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Dimension of the two-row irreducible labelled `[n - q, q]`:
/// `C(n, q) - C(n, q - 1)`, which is 1 at `q = 0`.
///
/// Rejects `q > n/2` (the label is not a partition there).
pub fn two_row_irrep_dim(n: u64, q: u32) -> Result<BigInt> {
    if u64::from(2 * q) > n {
        return Err(Error::InvalidParameter(format!(
            "two-row label requires q <= n/2, got q={q}, n={n}"
        )));
    }
    Ok(binomial(n, q as i64) - binomial(n, q as i64 - 1))
}

/// Number of ordered pairs of `t`-subsets of `[n]` at distance `p` from a
/// fixed one: `C(t, p) * C(n - t, p)`.
pub fn orbit_size(n: u64, t: u32, p: u32) -> BigInt {
    binomial(t as u64, p as i64) * binomial(n - t as u64, p as i64)
}

/// Lexicographic iterator over all sorted `k`-subsets of `{0, .., n-1}`.
///
/// Refuses to start when `C(n, k)` exceeds the budget.
pub fn enumerate_subsets(n: u64, k: u32, budget: &Budget) -> Result<Subsets> {
    if u64::from(k) > n {
        return Err(Error::InvalidParameter(format!(
            "cannot choose {k}-subsets of a {n}-element set"
        )));
    }
    budget.admit(&binomial(n, k as i64), "subset enumeration")?;
    Ok(Subsets {
        n,
        k,
        current: None,
        done: false,
    })
}

pub struct Subsets {
    n: u64,
    k: u32,
    current: Option<Vec<u64>>,
    done: bool,
}

impl Iterator for Subsets {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        match &mut self.current {
            None => {
                let first: Vec<u64> = (0..u64::from(self.k)).collect();
                self.current = Some(first.clone());
                Some(first)
            }
            Some(cur) => {
                let k = self.k as usize;
                // Rightmost position that can still advance.
                let mut i = k;
                loop {
                    if i == 0 {
                        self.done = true;
                        return None;
                    }
                    i -= 1;
                    if cur[i] < self.n - (k - i) as u64 {
                        break;
                    }
                }
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                Some(cur.clone())
            }
        }
    }
}

/// A size-`t` multiset over a label set, stored as a sorted support together
/// with positive multiplicities.  The derived ordering (support first, then
/// multiplicities, both lexicographic) is the canonical basis order used by
/// every type-basis matrix in this crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeVector {
    support: Vec<u64>,
    multiplicities: Vec<u32>,
}

impl TypeVector {
    /// Builds from `(label, multiplicity)` pairs; labels must be strictly
    /// increasing and multiplicities positive.
    pub fn new(pairs: &[(u64, u32)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("empty type".into()));
        }
        for w in pairs.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidParameter(
                    "type support must be strictly increasing".into(),
                ));
            }
        }
        if pairs.iter().any(|&(_, m)| m == 0) {
            return Err(Error::InvalidParameter(
                "type multiplicities must be positive".into(),
            ));
        }
        Ok(TypeVector {
            support: pairs.iter().map(|&(x, _)| x).collect(),
            multiplicities: pairs.iter().map(|&(_, m)| m).collect(),
        })
    }

    /// The unique type on `support` with all multiplicities 1.
    pub fn unique(support: &[u64]) -> Result<Self> {
        Self::new(&support.iter().map(|&x| (x, 1)).collect::<Vec<_>>())
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    /// Total multiplicity `t`.
    pub fn copies(&self) -> u32 {
        self.multiplicities.iter().sum()
    }

    /// Multiplicity of a given label (0 when absent).
    pub fn multiplicity_of(&self, label: u64) -> u32 {
        match self.support.binary_search(&label) {
            Ok(i) => self.multiplicities[i],
            Err(_) => 0,
        }
    }

    /// True when every multiplicity is 1, i.e. the type is a plain subset.
    pub fn is_unique(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    /// Product of factorials of the multiplicities (the squared norm factor
    /// of the symmetrised basis word).
    pub fn norm_factor(&self) -> BigInt {
        self.multiplicities
            .iter()
            .map(|&m| factorial(u64::from(m)))
            .fold(BigInt::one(), |a, b| a * b)
    }

    /// Number of labels where the multiplicities of `self` and `other`
    /// differ by an odd amount.
    pub fn odd_difference_sites(&self, other: &TypeVector) -> u32 {
        let mut count = 0;
        let mut labels: Vec<u64> = self.support.clone();
        labels.extend_from_slice(&other.support);
        labels.sort_unstable();
        labels.dedup();
        for x in labels {
            if (self.multiplicity_of(x) + other.multiplicity_of(x)) % 2 == 1 {
                count += 1;
            }
        }
        count
    }

    /// Size of the union of the two supports.
    pub fn union_support_size(&self, other: &TypeVector) -> u64 {
        let mut labels: Vec<u64> = self.support.clone();
        labels.extend_from_slice(&other.support);
        labels.sort_unstable();
        labels.dedup();
        labels.len() as u64
    }
}

/// All size-`t` types over the given sorted label set, in canonical order.
///
/// The count is `C(|labels| + t - 1, t)`; refuses when it exceeds the budget.
pub fn enumerate_types(labels: &[u64], t: u32, budget: &Budget) -> Result<Vec<TypeVector>> {
    if t == 0 {
        return Err(Error::InvalidParameter("type size must be positive".into()));
    }
    if labels.is_empty() {
        return Err(Error::InvalidParameter("empty label set".into()));
    }
    for w in labels.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidParameter(
                "label set must be strictly increasing".into(),
            ));
        }
    }
    let count = binomial(labels.len() as u64 + u64::from(t) - 1, t as i64);
    budget.admit(&count, "type enumeration")?;

    let mut out = Vec::new();
    let mut stack: Vec<(u64, u32)> = Vec::new();
    fill_types(labels, t, 0, &mut stack, &mut out);
    out.sort();
    Ok(out)
}

fn fill_types(
    labels: &[u64],
    remaining: u32,
    from: usize,
    stack: &mut Vec<(u64, u32)>,
    out: &mut Vec<TypeVector>,
) {
    if remaining == 0 {
        out.push(TypeVector {
            support: stack.iter().map(|&(x, _)| x).collect(),
            multiplicities: stack.iter().map(|&(_, m)| m).collect(),
        });
        return;
    }
    if from == labels.len() {
        return;
    }
    // Skip the label entirely, or use it with every positive multiplicity.
    fill_types(labels, remaining, from + 1, stack, out);
    for m in 1..=remaining {
        stack.push((labels[from], m));
        fill_types(labels, remaining - m, from + 1, stack, out);
        stack.pop();
    }
}

/// Both sides of the alternating identity
/// `sum_k (-1)^k C(p, k) / (1 - k/r)  ==  (-1)^p / C(r - 1, p)`,
/// valid for `r >= p + 1`, evaluated exactly.
///
/// Returns `(lhs, rhs)`; callers assert equality.
pub fn alternating_identity(p: u32, r: u32) -> Result<(BigRational, BigRational)> {
    if r <= p {
        return Err(Error::InvalidParameter(format!(
            "identity requires r >= p + 1, got p={p}, r={r}"
        )));
    }
    let r_big = BigRational::from(BigInt::from(r));
    let mut lhs = BigRational::zero();
    for k in 0..=p {
        let coeff = BigRational::from(binomial(u64::from(p), k as i64));
        let denom = BigRational::one() - BigRational::from(BigInt::from(k)) / r_big.clone();
        let term = coeff / denom;
        if k % 2 == 0 {
            lhs += term;
        } else {
            lhs -= term;
        }
    }
    let mut rhs = BigRational::one() / BigRational::from(binomial(u64::from(r) - 1, p as i64));
    if p % 2 == 1 {
        rhs = -rhs;
    }
    Ok((lhs, rhs))
}

/// `|a - b| <= tol * max(1, |a|)` helper used by spectral comparisons.
pub fn rational_close(a: &BigRational, b: &BigRational, tol: &BigRational) -> bool {
    let scale = a.abs().max(BigRational::one());
    (a - b).abs() <= tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(10, 3), big(120));
        assert_eq!(binomial(0, 0), big(1));
        assert_eq!(binomial(5, 0), big(1));
        assert_eq!(binomial(5, 5), big(1));
    }

    #[test]
    fn binomial_out_of_range_is_zero() {
        assert_eq!(binomial(10, -1), big(0));
        assert_eq!(binomial(10, 11), big(0));
    }

    #[test]
    fn binomial_pascal_rule() {
        for n in 1..=40u64 {
            for k in 0..=n as i64 {
                assert_eq!(
                    binomial(n, k),
                    binomial(n - 1, k - 1) + binomial(n - 1, k),
                    "Pascal fails at n={n}, k={k}"
                );
            }
        }
    }

    #[test]
    fn two_row_dims() {
        assert_eq!(two_row_irrep_dim(6, 2).unwrap(), big(9));
        assert_eq!(two_row_irrep_dim(6, 0).unwrap(), big(1));
        assert_eq!(two_row_irrep_dim(4, 2).unwrap(), big(2));
        assert!(two_row_irrep_dim(6, 4).is_err());
    }

    #[test]
    fn two_row_dims_sum_to_subset_count() {
        for n in 2..=40u64 {
            for t in 1..=(n / 2) as u32 {
                let total: BigInt = (0..=t).map(|q| two_row_irrep_dim(n, q).unwrap()).sum();
                assert_eq!(total, binomial(n, t as i64), "n={n}, t={t}");
            }
        }
    }

    #[test]
    fn orbit_sizes_partition_subset_pairs() {
        assert_eq!(orbit_size(6, 2, 1), big(8));
        for n in 2..=12u64 {
            for t in 1..=(n / 2) as u32 {
                let total: BigInt = (0..=t).map(|p| orbit_size(n, t, p)).sum();
                assert_eq!(total, binomial(n, t as i64), "n={n}, t={t}");
            }
        }
    }

    #[test]
    fn orbit_sizes_match_enumeration() {
        // Bin all pairs of t-subsets by |union| - t and compare counts.
        let budget = Budget::default();
        for (n, t) in [(6u64, 2u32), (7, 3), (8, 2), (9, 4), (10, 3)] {
            let subsets: Vec<Vec<u64>> = enumerate_subsets(n, t, &budget).unwrap().collect();
            let base = &subsets[0];
            let mut counts = vec![0u64; t as usize + 1];
            for other in &subsets {
                let mut union = base.clone();
                union.extend_from_slice(other);
                union.sort_unstable();
                union.dedup();
                counts[union.len() - t as usize] += 1;
            }
            for p in 0..=t {
                assert_eq!(
                    BigInt::from(counts[p as usize]),
                    orbit_size(n, t, p),
                    "n={n}, t={t}, p={p}"
                );
            }
        }
    }

    #[test]
    fn subsets_lexicographic() {
        let got: Vec<Vec<u64>> = enumerate_subsets(4, 2, &Budget::default()).unwrap().collect();
        assert_eq!(
            got,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn subsets_count_and_budget() {
        let got: Vec<_> = enumerate_subsets(10, 4, &Budget::default()).unwrap().collect();
        assert_eq!(got.len(), 210);
        assert!(matches!(
            enumerate_subsets(40, 20, &Budget(1000)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn types_canonical_order() {
        let got = enumerate_types(&[0, 1], 2, &Budget::default()).unwrap();
        let expect = vec![
            TypeVector::new(&[(0, 2)]).unwrap(),
            TypeVector::new(&[(0, 1), (1, 1)]).unwrap(),
            TypeVector::new(&[(1, 2)]).unwrap(),
        ];
        assert_eq!(got, expect);

        // Same support sorts by multiplicity vector.
        let got3 = enumerate_types(&[0, 1], 3, &Budget::default()).unwrap();
        let expect3 = vec![
            TypeVector::new(&[(0, 3)]).unwrap(),
            TypeVector::new(&[(0, 1), (1, 2)]).unwrap(),
            TypeVector::new(&[(0, 2), (1, 1)]).unwrap(),
            TypeVector::new(&[(1, 3)]).unwrap(),
        ];
        assert_eq!(got3, expect3);
    }

    #[test]
    fn types_count() {
        for (s, t) in [(3u64, 2u32), (4, 3), (5, 2), (2, 5)] {
            let labels: Vec<u64> = (0..s).collect();
            let got = enumerate_types(&labels, t, &Budget::default()).unwrap();
            let expect = binomial(s + u64::from(t) - 1, t as i64);
            assert_eq!(BigInt::from(got.len()), expect, "s={s}, t={t}");
        }
    }

    #[test]
    fn type_helpers() {
        let theta = TypeVector::new(&[(0, 2), (3, 1)]).unwrap();
        let phi = TypeVector::new(&[(0, 1), (2, 2)]).unwrap();
        assert_eq!(theta.copies(), 3);
        assert_eq!(theta.norm_factor(), big(2));
        assert!(!theta.is_unique());
        assert!(TypeVector::unique(&[1, 4, 5]).unwrap().is_unique());
        // Differences: label 0 differs by 1 (odd), 2 by 2 (even), 3 by 1 (odd).
        assert_eq!(theta.odd_difference_sites(&phi), 2);
        assert_eq!(theta.union_support_size(&phi), 3);
    }

    #[test]
    fn alternating_identity_examples() {
        let (lhs, rhs) = alternating_identity(1, 3).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, BigRational::new(big(-1), big(2)));

        let (lhs, rhs) = alternating_identity(2, 4).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, BigRational::new(big(1), big(3)));

        assert!(alternating_identity(3, 3).is_err());
    }

    #[test]
    fn alternating_identity_grid() {
        for p in 0..=10u32 {
            for r in (p + 1)..=20 {
                let (lhs, rhs) = alternating_identity(p, r).unwrap();
                assert_eq!(lhs, rhs, "p={p}, r={r}");
            }
        }
    }
}
