//! Cross-checks between every independent route to the same quantity, with
//! machine-readable reports.
//!
//! Per grid point the suite compares: the closed-form ensemble average
//! against brute-force enumeration (bit-exact), the block spectrum against
//! a dense eigen-decomposition, the circulant invariance of the restricted
//! matrix, the Johnson eigen-oracle against the spherical-function
//! formulas, and the two-block closeness bound end to end on the rotated
//! moment matrix.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::combinatorics::{binomial, enumerate_subsets, two_row_irrep_dim};
use crate::density::{
    average_density_bruteforce, average_density_closed_form, restrict_unique_rescaled,
};
use crate::johnson::{spectrum, CirculantProfile, SpectralDecomposition};
use crate::spectral::{
    block_trace_distance_exact, circulant_check, embed_top_block_rotation, johnson_graph_oracle,
    min_eigenvalue, nearby_matrices_bound, JohnsonOracle,
};
use crate::{Budget, Error, Result};

/// Parses an exact rational from "num/den" or a bare integer.
pub fn parse_bias(s: &str) -> Result<BigRational> {
    let parse_int = |part: &str| -> Result<BigInt> {
        part.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::InvalidParameter(format!("bad rational component {part:?}")))
    };
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let den = parse_int(den)?;
            if den.is_zero() {
                return Err(Error::InvalidParameter("zero denominator".into()));
            }
            BigRational::new(parse_int(num)?, den)
        }
        None => BigRational::from_integer(parse_int(s)?),
    };
    Ok(value)
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parameter grid plus run controls, used by the verification and sweep
/// front-ends.  Deserializes from JSON with every field optional except the
/// grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_values: Vec<u64>,
    pub m_values: Vec<u64>,
    pub t_values: Vec<u32>,
    /// Exact biases, e.g. "0", "1/2", "1".
    pub b_values: Vec<String>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_tolerance() -> f64 {
    1e-9
}

/// A valid grid point; combinations violating `t <= m <= n` or `2t <= n`
/// are skipped with a warning rather than failing the run.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub n: u64,
    pub m: u64,
    pub t: u32,
    pub bias: BigRational,
    pub bias_label: String,
}

impl SweepConfig {
    pub fn small_default() -> Self {
        SweepConfig {
            n_values: vec![4, 6, 8],
            m_values: vec![2, 3, 4],
            t_values: vec![1, 2],
            b_values: vec!["0".into(), "1/2".into(), "1".into()],
            tolerance: default_tolerance(),
            budget: None,
            seed: 0,
        }
    }

    pub fn budget(&self) -> Budget {
        self.budget.map(Budget).unwrap_or_default()
    }

    /// Expands the product grid, returning valid points in grid order plus
    /// a warning per skipped combination.
    pub fn grid(&self) -> Result<(Vec<GridPoint>, Vec<String>)> {
        if self.n_values.is_empty()
            || self.m_values.is_empty()
            || self.t_values.is_empty()
            || self.b_values.is_empty()
        {
            return Err(Error::InvalidParameter("empty parameter grid".into()));
        }
        let biases: Vec<(String, BigRational)> = self
            .b_values
            .iter()
            .map(|s| Ok((s.clone(), parse_bias(s)?)))
            .collect::<Result<_>>()?;
        let mut points = Vec::new();
        let mut warnings = Vec::new();
        for &n in &self.n_values {
            for &t in &self.t_values {
                for &m in &self.m_values {
                    if m < u64::from(t) || m > n || u64::from(2 * t) > n {
                        warnings.push(format!(
                            "skipping N={n} m={m} t={t}: needs t <= m <= N and 2t <= N"
                        ));
                        continue;
                    }
                    for (label, bias) in &biases {
                        points.push(GridPoint {
                            n,
                            m,
                            t,
                            bias: bias.clone(),
                            bias_label: label.clone(),
                        });
                    }
                }
            }
        }
        Ok((points, warnings))
    }
}

/// One comparison's outcome.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: serde_json::Value,
    pub quantities: serde_json::Value,
    pub bound: Option<f64>,
    pub pass: bool,
}

fn point_params(p: &GridPoint) -> serde_json::Value {
    json!({"N": p.n, "m": p.m, "t": p.t, "b": p.bias_label})
}

/// Brute-force enumeration cost `C(n,m) * 2^m` (or one assignment at
/// degenerate bias); the oracle-equality check only runs when this fits.
fn brute_force_cost(n: u64, m: u64, bias: &BigRational) -> BigInt {
    let assignments = if bias.abs() == BigRational::one() {
        BigInt::one()
    } else {
        BigInt::from(2u32).pow(m as u32)
    };
    binomial(n, m as i64) * assignments
}

const BRUTE_COST_CAP: u64 = 2_000_000;

fn density_oracle_check(p: &GridPoint, budget: &Budget) -> Result<CheckReport> {
    let closed = average_density_closed_form(p.n, p.m, p.t, &p.bias, budget)?;
    let brute = average_density_bruteforce(p.n, p.m, p.t, &p.bias, budget)?;
    let matches = closed == brute;
    let trace = closed.trace_exact().unwrap();
    let unit_trace = trace == BigRational::one();
    let min_eig = min_eigenvalue(&closed.to_dmatrix())?;
    let psd = min_eig >= -1e-10;
    Ok(CheckReport {
        check: "density-oracle-equality".into(),
        params: point_params(p),
        quantities: json!({
            "dim": closed.dim(),
            "bit_exact_match": matches,
            "trace": format_rational(&trace),
            "min_eigenvalue": min_eig,
        }),
        bound: None,
        pass: matches && unit_trace && psd,
    })
}

/// Dense unique-type matrix built straight from the entry profile.
pub fn circulant_matrix_f64(profile: &CirculantProfile, budget: &Budget) -> Result<DMatrix<f64>> {
    let subsets: Vec<Vec<u64>> =
        enumerate_subsets(profile.n, profile.t, budget)?.collect();
    let dim = subsets.len();
    budget.admit_usize(dim * dim, "dense circulant matrix")?;
    let values: Vec<f64> = profile
        .values
        .iter()
        .map(|v| v.to_f64().unwrap())
        .collect();
    let t = profile.t as usize;
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        let mut inter = 0usize;
        let (mut a, mut b) = (0usize, 0usize);
        while a < t && b < t {
            match subsets[i][a].cmp(&subsets[j][b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    inter += 1;
                    a += 1;
                    b += 1;
                }
            }
        }
        values[t - inter]
    }))
}

fn spectrum_agreement_check(
    p: &GridPoint,
    spec: &SpectralDecomposition,
    budget: &Budget,
    tol: f64,
) -> Result<CheckReport> {
    let profile = CirculantProfile::new(p.n, p.m, p.t, p.bias.clone())?;
    let dense = circulant_matrix_f64(&profile, budget)?;
    let mut numeric: Vec<f64> = dense.symmetric_eigen().eigenvalues.iter().copied().collect();
    numeric.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let formula = spec.expanded_eigenvalues_f64();
    let mut max_rel = 0.0f64;
    for (a, b) in numeric.iter().zip(&formula) {
        max_rel = max_rel.max((a - b).abs() / b.abs().max(1.0));
    }
    Ok(CheckReport {
        check: "spectrum-agreement".into(),
        params: point_params(p),
        quantities: json!({
            "dim": formula.len(),
            "max_relative_error": max_rel,
        }),
        bound: Some(tol),
        pass: numeric.len() == formula.len() && max_rel <= tol,
    })
}

fn circulant_invariance_check(
    p: &GridPoint,
    budget: &Budget,
    negative_control: bool,
) -> Result<CheckReport> {
    let rho = average_density_closed_form(p.n, p.m, p.t, &p.bias, budget)?;
    let unique = restrict_unique_rescaled(&rho)?;
    let target = if negative_control {
        // Bump one symmetric entry pair; the invariance must now fail.
        let dim = unique.dim();
        let mut entries: Vec<f64> = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(unique.entry_f64(i, j));
            }
        }
        entries[1] += 1e-3;
        entries[dim] += 1e-3;
        crate::density::MomentMatrix::from_real(
            unique.basis().clone(),
            unique.types().to_vec(),
            dim,
            entries,
        )
    } else {
        unique
    };
    let invariant = circulant_check(&target, 1e-12)?;
    Ok(CheckReport {
        check: "circulant-invariance".into(),
        params: point_params(p),
        quantities: json!({
            "invariant_under_generators": invariant,
            "negative_control": negative_control,
        }),
        bound: None,
        pass: invariant,
    })
}

fn johnson_oracle_check(n: u64, t: u32, oracle: &JohnsonOracle, tol: f64) -> Result<CheckReport> {
    let mut max_err = 0.0f64;
    let mut dims_ok = true;
    for space in &oracle.eigenspaces {
        let want = two_row_irrep_dim(n, space.q)?.to_usize().unwrap();
        if space.dimension != want {
            dims_ok = false;
        }
        for p in 0..=t {
            let expected = BigRational::from(crate::combinatorics::orbit_size(n, t, p))
                * crate::johnson::spherical_function(n, t, space.q, p)?;
            let got = space.distance_eigenvalues[p as usize];
            max_err = max_err.max((got - expected.to_f64().unwrap()).abs());
        }
    }
    let count_ok = oracle.eigenspaces.len() == (t + 1) as usize;
    Ok(CheckReport {
        check: "johnson-oracle".into(),
        params: json!({"N": n, "t": t}),
        quantities: json!({
            "eigenspaces": oracle.eigenspaces.len(),
            "dimensions_match": dims_ok,
            "max_eigenvalue_error": max_err,
            "max_commutator": oracle.max_commutator,
        }),
        bound: Some(tol),
        pass: count_ok && dims_ok && max_err <= tol && oracle.max_commutator <= tol,
    })
}

fn closeness_checks(
    p: &GridPoint,
    spec: &SpectralDecomposition,
    oracle: &JohnsonOracle,
    budget: &Budget,
    tol: f64,
) -> Result<Vec<CheckReport>> {
    let rho = average_density_closed_form(p.n, p.m, p.t, &p.bias, budget)?;
    let rotation = embed_top_block_rotation(&rho, oracle)?;
    let rotated = rotation.transpose() * rho.to_dmatrix() * &rotation;
    // Symmetrize away rotation roundoff; the asymmetry is ~1e-16.
    let rotated = (&rotated + rotated.transpose()) / 2.0;
    let d_top = two_row_irrep_dim(p.n, p.t)?.to_usize().unwrap();
    let nb = nearby_matrices_bound(&rotated, d_top)?;

    let ambient = binomial(p.n + u64::from(p.t) - 1, p.t as i64);
    let epsilon_exact = BigRational::one()
        - BigRational::new(two_row_irrep_dim(p.n, p.t)?, ambient.clone());
    let eps_consistent = (nb.epsilon - epsilon_exact.to_f64().unwrap()).abs() <= 1e-12;

    let two_block = CheckReport {
        check: "two-block-bound".into(),
        params: point_params(p),
        quantities: json!({
            "d1": d_top,
            "delta": nb.delta,
            "epsilon": nb.epsilon,
            "actual_distance_to_flat": nb.actual,
        }),
        bound: Some(nb.bound),
        pass: nb.holds(tol) && eps_consistent,
    };

    // Scaling form of the main bound on the restricted distance.
    let block_td = block_trace_distance_exact(spec);
    let term_overlap = BigRational::new(
        BigInt::from(u64::from(p.t)) * BigInt::from(p.m),
        BigInt::from(p.n),
    );
    let term_collision = BigRational::new(
        BigInt::from(u64::from(p.t) * u64::from(p.t)),
        BigInt::from(p.m),
    );
    let scaling_bound = BigRational::from_integer(10.into()) * (&term_overlap + &term_collision);
    let scaling = CheckReport {
        check: "restricted-distance-scaling".into(),
        params: point_params(p),
        quantities: json!({
            "block_trace_distance": format_rational(&block_td),
            "block_trace_distance_f64": block_td.to_f64().unwrap(),
            "tm_over_n": term_overlap.to_f64().unwrap(),
            "t2_over_m": term_collision.to_f64().unwrap(),
        }),
        bound: Some(scaling_bound.to_f64().unwrap()),
        pass: block_td <= scaling_bound,
    };
    Ok(vec![two_block, scaling])
}

/// Runs the full cross-check suite over the config grid.  With
/// `negative_control` a deliberate perturbation is injected into the
/// circulant-invariance check, which must then report failure.
pub fn run_verification(
    config: &SweepConfig,
    negative_control: bool,
) -> Result<(Vec<CheckReport>, Vec<String>)> {
    let budget = config.budget();
    let tol = config.tolerance;
    let (points, warnings) = config.grid()?;
    let mut reports = Vec::new();
    let mut oracle_cache: Vec<((u64, u32), JohnsonOracle)> = Vec::new();

    for p in &points {
        let key = (p.n, p.t);
        if !oracle_cache.iter().any(|(k, _)| *k == key) {
            let oracle = johnson_graph_oracle(p.n, p.t, &budget)?;
            reports.push(johnson_oracle_check(p.n, p.t, &oracle, tol)?);
            oracle_cache.push((key, oracle));
        }
        let oracle = &oracle_cache.iter().find(|(k, _)| *k == key).unwrap().1;

        if brute_force_cost(p.n, p.m, &p.bias) <= BigInt::from(BRUTE_COST_CAP) {
            reports.push(density_oracle_check(p, &budget)?);
        }
        let profile = CirculantProfile::new(p.n, p.m, p.t, p.bias.clone())?;
        let spec = spectrum(&profile)?;
        reports.push(spectrum_agreement_check(p, &spec, &budget, tol)?);
        reports.push(circulant_invariance_check(p, &budget, negative_control)?);
        reports.extend(closeness_checks(p, &spec, oracle, &budget, tol)?);
    }
    Ok((reports, warnings))
}

/// One scaling-sweep row: the exact restricted distance next to the two
/// bound terms.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub m: u64,
    pub t: u32,
    pub bias: String,
    pub td_exact: String,
    pub td: f64,
    pub tm_over_n: f64,
    pub t2_over_m: f64,
    pub ratio: f64,
}

impl SweepRow {
    pub fn csv_header() -> &'static str {
        "N,m,t,b,td_exact,td,tm_over_n,t2_over_m,ratio"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            self.t,
            self.bias,
            self.td_exact,
            self.td,
            self.tm_over_n,
            self.t2_over_m,
            self.ratio
        )
    }
}

/// Block-formula distance and bound terms at one parameter point.
pub fn sweep_point(n: u64, m: u64, t: u32, bias: &BigRational, bias_label: &str) -> Result<SweepRow> {
    let profile = CirculantProfile::new(n, m, t, bias.clone())?;
    let spec = spectrum(&profile)?;
    let td_exact = block_trace_distance_exact(&spec);
    let td = td_exact.to_f64().unwrap();
    let tm_over_n = u64::from(t) as f64 * m as f64 / n as f64;
    let t2_over_m = (u64::from(t) * u64::from(t)) as f64 / m as f64;
    Ok(SweepRow {
        n,
        m,
        t,
        bias: bias_label.to_string(),
        td_exact: format_rational(&td_exact),
        td,
        tm_over_n,
        t2_over_m,
        ratio: td / (tm_over_n + t2_over_m),
    })
}
