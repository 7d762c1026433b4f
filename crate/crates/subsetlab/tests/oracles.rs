//! Cross-module oracle tests: independent computation paths must agree on
//! grids wider (signed and non-dyadic biases) than the per-module unit tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use subsetlab::combinatorics::binomial;
use subsetlab::density::{
    average_density_bruteforce, average_density_closed_form, average_density_closed_form_real,
    haar_moment, restrict_unique_rescaled, subset_moment,
};
use subsetlab::ensembles::{state_vector, SubsetState};
use subsetlab::johnson::{spectrum, CirculantProfile};
use subsetlab::spectral::{
    block_trace_distance_exact, circulant_check, trace_distance, trace_distance_dense,
};
use subsetlab::verify::{circulant_matrix_f64, parse_bias};
use subsetlab::Budget;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Signed and non-dyadic biases exercise the sign bookkeeping and the common
/// denominator (2y)^m of the enumeration; the closed form must still match
/// bit for bit.
#[test]
fn enumeration_matches_closed_form_for_signed_and_thirds_biases() {
    let budget = Budget::default();
    for b in ["-1", "-1/2", "1/3", "2/3", "-2/3"] {
        let bias = parse_bias(b).unwrap();
        for n in 2..=6u64 {
            for t in 1..=3u32.min(n as u32) {
                for m in u64::from(t)..=n {
                    let closed = average_density_closed_form(n, m, t, &bias, &budget).unwrap();
                    let brute = average_density_bruteforce(n, m, t, &bias, &budget).unwrap();
                    assert_eq!(
                        closed, brute,
                        "closed form vs enumeration at N={n} m={m} t={t} b={b}"
                    );
                }
            }
        }
    }
}

/// Negative bias gives the same ensemble as positive (global sign flip), so
/// the averaged moments must be identical.
#[test]
fn bias_sign_is_irrelevant() {
    let budget = Budget::default();
    for (n, m, t) in [(6u64, 3u64, 2u32), (5, 4, 3), (8, 2, 1)] {
        let plus = average_density_closed_form(n, m, t, &rat(3, 5), &budget).unwrap();
        let minus = average_density_closed_form(n, m, t, &rat(-3, 5), &budget).unwrap();
        assert_eq!(plus, minus);
    }
}

/// The unique-type restriction of the averaged matrix, rescaled by the
/// symmetric dimension, must reproduce the circulant profile entry for the
/// corresponding subset distance, exactly.
#[test]
fn unique_restriction_reproduces_circulant_values() {
    let budget = Budget::default();
    for (n, m, t, b) in [
        (6u64, 3u64, 2u32, "1"),
        (7, 4, 2, "1/2"),
        (8, 4, 3, "1/3"),
        (6, 4, 2, "0"),
    ] {
        let bias = parse_bias(b).unwrap();
        let rho = average_density_closed_form(n, m, t, &bias, &budget).unwrap();
        let restricted = restrict_unique_rescaled(&rho).unwrap();
        let profile = CirculantProfile::new(n, m, t, bias).unwrap();
        let types = restricted.types();
        for i in 0..restricted.dim() {
            for j in 0..restricted.dim() {
                let a = types[i].support();
                let c = types[j].support();
                let shared = a.iter().filter(|x| c.contains(x)).count() as u32;
                let p = t - shared;
                let entry = restricted
                    .entry_exact(i, j)
                    .expect("restriction stays exact")
                    .to_rational()
                    .expect("unique types have rational entries");
                assert_eq!(
                    entry, profile.values[p as usize],
                    "entry ({i},{j}) at distance {p}, N={n} m={m} t={t} b={b}"
                );
            }
        }
    }
}

/// Restricted trace distance: block formula vs dense eigensolve of the
/// explicitly assembled circulant matrix.
#[test]
fn block_distance_matches_dense_restricted_distance() {
    let budget = Budget::default();
    for (n, m, t, b) in [
        (8u64, 4u64, 2u32, "1"),
        (10, 5, 2, "1/2"),
        (9, 6, 3, "1"),
        (10, 4, 3, "2/3"),
        (12, 6, 2, "0"),
    ] {
        let bias = parse_bias(b).unwrap();
        let profile = CirculantProfile::new(n, m, t, bias).unwrap();
        let spec = spectrum(&profile).unwrap();
        let exact = block_trace_distance_exact(&spec).to_f64().unwrap();
        let dense = circulant_matrix_f64(&profile, &budget).unwrap();
        let ambient = spec.ambient_dim.to_f64().unwrap();
        let numeric = dense
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|l| (l - 1.0).abs())
            .sum::<f64>()
            / (2.0 * ambient);
        assert!(
            (exact - numeric).abs() < 1e-10,
            "N={n} m={m} t={t} b={b}: block {exact} vs dense {numeric}"
        );
    }
}

/// At t = 1 every type is unique, so the restricted block formula and the
/// full-state trace distance to the Haar moment coincide.
#[test]
fn single_copy_distance_equals_block_formula() {
    let budget = Budget::default();
    for (n, m, b) in [(8u64, 4u64, "1"), (12, 3, "1/2"), (6, 6, "1"), (9, 2, "1/3")] {
        let bias = parse_bias(b).unwrap();
        let rho = average_density_closed_form(n, m, 1, &bias, &budget).unwrap();
        let haar = haar_moment(n, 1, &budget).unwrap();
        let full = trace_distance(&rho, &haar).unwrap();
        let profile = CirculantProfile::new(n, m, 1, bias).unwrap();
        let block = block_trace_distance_exact(&spectrum(&profile).unwrap())
            .to_f64()
            .unwrap();
        assert!(
            (full - block).abs() < 1e-12,
            "N={n} m={m} b={b}: full {full} vs block {block}"
        );
    }
}

/// Averaged matrices are invariant under relabeling, hence pass the
/// transposition-action circulant test; a single-subset moment is not.
#[test]
fn averaged_matrices_are_circulant_single_subsets_are_not() {
    let budget = Budget::default();
    let bias = rat(1, 2);
    let rho = average_density_closed_form(6, 3, 2, &bias, &budget).unwrap();
    let unique = restrict_unique_rescaled(&rho).unwrap();
    assert!(circulant_check(&unique, 1e-12).unwrap());

    let skewed = subset_moment(6, &[0, 1, 4], None, 2, &budget).unwrap();
    let skewed_unique = restrict_unique_rescaled(&skewed).unwrap();
    assert!(!circulant_check(&skewed_unique, 1e-12).unwrap());
}

/// A single subset-phase state's moment matrix is a pure-state projector
/// slice: unit trace, and its squared overlap with the flat state matches
/// the exact plus-overlap of the state vector.
#[test]
fn subset_moment_traces_and_overlap_agree_with_state_vector() {
    let budget = Budget::default();
    let state = SubsetState::new(3, vec![1, 3, 6], Some(vec![1, -1, 1])).unwrap();
    let moment = subset_moment(8, &[1, 3, 6], Some(&[1, -1, 1]), 2, &budget).unwrap();
    assert_eq!(moment.trace_exact().unwrap(), BigRational::one());

    let vector = state_vector(&state, &budget).unwrap();
    let n = vector.len() as f64;
    let amp: f64 = vector.iter().sum::<f64>() / n.sqrt();
    let overlap = state.plus_overlap_exact().to_f64().unwrap();
    assert!((amp * amp - overlap).abs() < 1e-12);
}

/// Full-matrix distance agreement between the exact and floating entry
/// constructions of the same averaged state.
#[test]
fn exact_and_real_closed_forms_agree_in_distance() {
    let budget = Budget::default();
    for (n, m, t, b) in [(8u64, 4u64, 2u32, "1"), (6, 3, 3, "1/2")] {
        let bias = parse_bias(b).unwrap();
        let exact = average_density_closed_form(n, m, t, &bias, &budget).unwrap();
        let real = average_density_closed_form_real(n, m, t, &bias, &budget).unwrap();
        let d = trace_distance_dense(&exact.to_dmatrix(), &real.to_dmatrix()).unwrap();
        assert!(d < 1e-13, "N={n} m={m} t={t} b={b}: drift {d}");
    }
}

/// The spectrum's total multiplicity must exhaust the restricted dimension
/// C(N,t) and its trace must equal C(N,t) nu(0).
#[test]
fn spectrum_trace_and_multiplicity_identities() {
    for (n, m, t, b) in [
        (9u64, 4u64, 2u32, "1"),
        (11, 5, 3, "1/2"),
        (13, 6, 4, "1/3"),
        (10, 7, 5, "1"),
    ] {
        let bias = parse_bias(b).unwrap();
        let profile = CirculantProfile::new(n, m, t, bias).unwrap();
        let spec = spectrum(&profile).unwrap();
        assert_eq!(spec.total_multiplicity(), binomial(n, t as i64));
        let expected_trace =
            BigRational::from(binomial(n, t as i64)) * profile.values[0].clone();
        assert_eq!(spec.trace(), expected_trace);
    }
}
