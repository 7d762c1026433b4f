//! Property tests: exact identities and structural invariants on randomized
//! inputs, with the combinatorial edge cases proptest likes to find.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

use subsetlab::attacks::{birthday_accepts, collision_probability_exact};
use subsetlab::combinatorics::{alternating_identity, binomial, TypeVector};
use subsetlab::density::average_density_closed_form;
use subsetlab::ensembles::{feistel_inverse, feistel_permute, PrpKey};
use subsetlab::johnson::{spectrum, top_eigenvalue_closed_form, CirculantProfile};
use subsetlab::sqrt_rational::SqrtRational;
use subsetlab::verify::parse_bias;
use subsetlab::Budget;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Multiset of size t over [n] as a TypeVector, from an arbitrary draw.
fn type_from_draw(n: u64, draw: &[u64]) -> TypeVector {
    let mut counts: BTreeMap<u64, u32> = BTreeMap::new();
    for &x in draw {
        *counts.entry(x % n).or_insert(0) += 1;
    }
    let pairs: Vec<(u64, u32)> = counts.into_iter().collect();
    TypeVector::new(&pairs).unwrap()
}

proptest! {
    /// The alternating binomial identity holds exactly everywhere in range.
    #[test]
    fn alternating_identity_exact(p in 0u32..=10, extra in 1u32..=10) {
        let r = p + extra;
        let (lhs, rhs) = alternating_identity(p, r).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// Sum of per-site exponent parities between two same-size types is even:
    /// both sides sum to t, so the odd sites pair up.
    #[test]
    fn odd_difference_site_count_is_even(
        n in 1u64..=9,
        a in proptest::collection::vec(0u64..64, 1..=5),
        b in proptest::collection::vec(0u64..64, 1..=5),
    ) {
        let t = a.len().min(b.len());
        let ta = type_from_draw(n, &a[..t]);
        let tb = type_from_draw(n, &b[..t]);
        prop_assert_eq!(ta.odd_difference_sites(&tb) % 2, 0);
    }

    /// Averaged moment matrices have unit trace and exact symmetry for any
    /// admissible parameters and bias.
    #[test]
    fn averaged_moment_has_unit_trace_and_symmetry(
        n in 1u64..=6,
        m_off in 0u64..=5,
        t in 1u32..=3,
        num in -4i64..=4,
        den in 1i64..=4,
    ) {
        prop_assume!(u64::from(t) <= n);
        let m = (u64::from(t) + m_off).min(n);
        prop_assume!(num.abs() <= den);
        let bias = rat(num, den);
        let budget = Budget::default();
        let rho = average_density_closed_form(n, m, t, &bias, &budget).unwrap();
        prop_assert_eq!(rho.trace_exact().unwrap(), BigRational::one());
        for i in 0..rho.dim() {
            for j in (i + 1)..rho.dim() {
                prop_assert_eq!(rho.entry_exact(i, j).unwrap(), rho.entry_exact(j, i).unwrap());
            }
        }
    }

    /// Block spectrum bookkeeping: multiplicities exhaust C(N,t) and the
    /// trace equals C(N,t) nu(0); the top closed form matches the summed
    /// eigenvalue exactly.
    #[test]
    fn spectrum_identities(
        n in 2u64..=14,
        t in 1u32..=4,
        m_off in 0u64..=6,
        num in 0i64..=4,
        den in 1i64..=4,
    ) {
        prop_assume!(u64::from(2 * t) <= n);
        let m = (u64::from(t) + m_off).min(n);
        prop_assume!(num <= den);
        let bias = rat(num, den);
        let profile = CirculantProfile::new(n, m, t, bias).unwrap();
        let spec = spectrum(&profile).unwrap();
        prop_assert_eq!(spec.total_multiplicity(), binomial(n, t as i64));
        let expected_trace = BigRational::from(binomial(n, t as i64)) * profile.values[0].clone();
        prop_assert_eq!(spec.trace(), expected_trace);
        let top = spec.blocks.iter().find(|b| b.q == t).unwrap();
        prop_assert_eq!(top_eigenvalue_closed_form(&profile), top.eigenvalue.clone());
    }

    /// Exhaustive outcome enumeration agrees with the closed-form collision
    /// probability for any small (m, t).
    #[test]
    fn collision_probability_matches_enumeration(m in 1u64..=5, t in 1u32..=4) {
        let mut collisions = 0u64;
        let total = m.pow(t);
        let mut outcomes = vec![0u64; t as usize];
        for idx in 0..total {
            let mut rest = idx;
            for slot in outcomes.iter_mut() {
                *slot = rest % m;
                rest /= m;
            }
            if birthday_accepts(&outcomes).unwrap_or(false) {
                collisions += 1;
            }
        }
        let expected = collision_probability_exact(m, t);
        let enumerated = rat(collisions as i64, total as i64);
        if t == 1 {
            // A single outcome never collides; the exact formula agrees.
            prop_assert_eq!(expected, BigRational::zero());
        } else {
            prop_assert_eq!(expected, enumerated);
        }
    }

    /// The keyed permutation is a bijection with a working inverse on any
    /// domain width, key, and even round count >= 4.
    #[test]
    fn feistel_is_a_bijection(
        key in proptest::collection::vec(any::<u8>(), 1..=24),
        bits in 1u32..=16,
        round_pairs in 2u32..=5,
        probes in proptest::collection::vec(any::<u64>(), 32),
    ) {
        let prp = PrpKey::new(key, 2 * round_pairs, bits).unwrap();
        let domain = prp.domain();
        if bits <= 10 {
            let mut seen = HashSet::new();
            for x in 0..domain {
                let y = feistel_permute(&prp, x).unwrap();
                prop_assert!(y < domain);
                prop_assert!(seen.insert(y), "collision at input {x}");
                prop_assert_eq!(feistel_inverse(&prp, y).unwrap(), x);
            }
        } else {
            for &probe in &probes {
                let x = probe % domain;
                let y = feistel_permute(&prp, x).unwrap();
                prop_assert!(y < domain);
                prop_assert_eq!(feistel_inverse(&prp, y).unwrap(), x);
            }
        }
    }

    /// Same-radicand arithmetic is exact: addition is linear in the
    /// coefficient, multiplication multiplies squares.
    #[test]
    fn sqrt_rational_algebra(
        n1 in -20i64..=20, d1 in 1i64..=9,
        n2 in -20i64..=20, d2 in 1i64..=9,
        r1 in 1i64..=30, r2 in 1i64..=30,
    ) {
        let a = SqrtRational::new(rat(n1, d1), BigInt::from(r1));
        let b = SqrtRational::new(rat(n2, d2), BigInt::from(r1));
        let sum = &a + &b;
        let expected = SqrtRational::new(rat(n1, d1) + rat(n2, d2), BigInt::from(r1));
        prop_assert_eq!(sum, expected);

        let c = SqrtRational::new(rat(n2, d2), BigInt::from(r2));
        let prod = &a * &c;
        // Compare squares: (q1 q2)^2 r1 r2 with no radical left implicit.
        let square = prod.coeff() * prod.coeff()
            * BigRational::from(prod.radicand().clone());
        let expected_square = rat(n1, d1) * rat(n1, d1) * rat(n2, d2) * rat(n2, d2)
            * rat(r1, 1) * rat(r2, 1);
        prop_assert_eq!(square, expected_square);
        let drift = (prod.to_f64()
            - (n1 as f64 / d1 as f64) * (r1 as f64).sqrt()
              * (n2 as f64 / d2 as f64) * (r2 as f64).sqrt()).abs();
        prop_assert!(drift <= 1e-9 * (1.0 + prod.to_f64().abs()));
    }

    /// Biases b and -b generate identical averaged matrices (global sign
    /// flip on the phase function).
    #[test]
    fn bias_sign_flip_is_invisible(
        n in 2u64..=5,
        t in 1u32..=2,
        num in 1i64..=3,
    ) {
        prop_assume!(u64::from(t) <= n);
        let budget = Budget::default();
        let plus = average_density_closed_form(n, n.min(3), t, &rat(num, 3), &budget).unwrap();
        let minus = average_density_closed_form(n, n.min(3), t, &rat(-num, 3), &budget).unwrap();
        prop_assert_eq!(plus, minus);
    }
}

/// The documented monotone range of the top-block deviation: nondecreasing
/// in m on [t+1, N/2] at b = 1, with the m = t edge explicitly excluded
/// because the deviation dips from m = t to m = t + 1 once N is large
/// (N = 11, t = 2 is the smallest exact counterexample).
#[test]
fn top_deviation_monotone_on_documented_range_with_edge_dip() {
    for (n, t) in [(11u64, 2u32), (12, 2), (12, 3), (14, 3)] {
        let bias = parse_bias("1").unwrap();
        let dev = |m: u64| -> BigRational {
            let profile = CirculantProfile::new(n, m, t, bias.clone()).unwrap();
            (top_eigenvalue_closed_form(&profile) - BigRational::one()).abs()
        };
        let mut previous = dev(u64::from(t) + 1);
        for m in (u64::from(t) + 2)..=(n / 2) {
            let current = dev(m);
            assert!(
                current >= previous,
                "deviation decreased from m={} to m={m} at N={n} t={t}",
                m - 1
            );
            previous = current;
        }
    }
    // The pinned dip: N=11, t=2 has dev(2) = 2/5 > dev(3) = 17/45.
    let bias = parse_bias("1").unwrap();
    let at = |m: u64| {
        let profile = CirculantProfile::new(11, m, 2, bias.clone()).unwrap();
        (top_eigenvalue_closed_form(&profile) - BigRational::one()).abs()
    };
    assert_eq!(at(2), rat(2, 5));
    assert_eq!(at(3), rat(17, 45));
    assert!(at(2) > at(3));
}

/// Type-vector accounting identities used throughout the closed form.
#[test]
fn type_vector_union_and_norm_edge_cases() {
    let unique = TypeVector::unique(&[2, 5, 7, 8]).unwrap();
    assert!(unique.is_unique());
    assert_eq!(unique.norm_factor(), BigInt::one());

    let heavy = TypeVector::new(&[(3, 4)]).unwrap();
    assert!(!heavy.is_unique());
    assert_eq!(heavy.norm_factor(), BigInt::from(24));
    assert_eq!(heavy.union_support_size(&unique), 5);
    assert_eq!(heavy.odd_difference_sites(&unique), 4);
    assert_eq!(unique.copies(), 4);
    assert_eq!(heavy.copies(), 4);
    assert_eq!(
        heavy.multiplicity_of(3),
        4,
        "multiplicity lookup on the only site"
    );
    assert_eq!(heavy.multiplicity_of(2), 0);
    assert!(
        binomial(6, -1).to_f64().unwrap().abs() < 1e-15,
        "negative lower index vanishes"
    );
}
