//! Trace distances, the two-block closeness bound, the circulant symmetry
//! check, and an eigen-oracle for the Johnson scheme.
//!
//! The oracle diagonalizes the distance matrices of t-subsets of [n]
//! numerically and reads off the joint eigenspaces, their dimensions, and
//! the eigenvalue of every distance matrix on each eigenspace.  It shares
//! no code with the combinatorial formulas in [`crate::johnson`], which is
//! the point: agreement between the two is evidence for both.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::combinatorics::TypeVector;
use crate::density::MomentMatrix;
use crate::johnson::SpectralDecomposition;
use crate::{Budget, Error, Result};

pub const SYMMETRY_LIMIT: f64 = 1e-12;

fn check_square_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: a.ncols(),
        });
    }
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_LIMIT {
        return Err(Error::NotSymmetric {
            asymmetry: worst,
            limit: SYMMETRY_LIMIT,
        });
    }
    Ok(())
}

fn eigenvalues_symmetric(a: DMatrix<f64>) -> Vec<f64> {
    a.symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Half the sum of absolute eigenvalues of `a - b`.
pub fn trace_distance_dense(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    check_square_symmetric(a)?;
    check_square_symmetric(b)?;
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    let diff = a - b;
    Ok(eigenvalues_symmetric(diff).iter().map(|l| l.abs()).sum::<f64>() / 2.0)
}

/// Trace distance between two moment matrices in the same basis.
pub fn trace_distance(a: &MomentMatrix, b: &MomentMatrix) -> Result<f64> {
    if a.basis() != b.basis() || a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    for m in [a, b] {
        let asym = m.max_asymmetry();
        if asym > SYMMETRY_LIMIT {
            return Err(Error::NotSymmetric {
                asymmetry: asym,
                limit: SYMMETRY_LIMIT,
            });
        }
    }
    trace_distance_dense(&a.to_dmatrix(), &b.to_dmatrix())
}

/// Smallest eigenvalue; used for positive-semidefiniteness checks.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> Result<f64> {
    check_square_symmetric(a)?;
    Ok(eigenvalues_symmetric(a.clone())
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Exact trace distance to the flat state implied by a block spectrum:
/// `(1/(2 C(n+t-1, t))) * sum_q d_q |mu_q - 1|`.
pub fn block_trace_distance_exact(spectrum: &SpectralDecomposition) -> BigRational {
    let mut acc = BigRational::zero();
    let one = BigRational::from_integer(1.into());
    for block in &spectrum.blocks {
        acc += (&block.eigenvalue - &one).abs() * BigRational::from_integer(block.multiplicity.clone());
    }
    acc / (BigRational::from_integer(2.into()) * BigRational::from_integer(spectrum.ambient_dim.clone()))
}

pub fn block_trace_distance(spectrum: &SpectralDecomposition) -> f64 {
    block_trace_distance_exact(spectrum).to_f64().unwrap()
}

/// Outcome of the two-block closeness bound.
///
/// For a density matrix on dimension `D = d1 + d2`, with the first `d1`
/// coordinates spanning block 1: `delta` is the trace distance between the
/// block-1 compression and `d1`-dimensional slice of `I/D`, `epsilon = d2/D`,
/// and the full distance to `I/D` obeys `actual <= 2 delta + 2 epsilon`.
#[derive(Debug, Clone, Copy)]
pub struct NearbyBound {
    pub delta: f64,
    pub epsilon: f64,
    pub bound: f64,
    pub actual: f64,
}

impl NearbyBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.actual <= self.bound + tol
    }
}

/// Evaluates the two-block bound for `rho` with block 1 being the first `d1`
/// canonical coordinates (rotate `rho` first if block 1 lives elsewhere).
pub fn nearby_matrices_bound(rho: &DMatrix<f64>, d1: usize) -> Result<NearbyBound> {
    check_square_symmetric(rho)?;
    let dim = rho.nrows();
    if d1 == 0 || d1 > dim {
        return Err(Error::InvalidParameter(format!(
            "block dimension {d1} outside 1..={dim}"
        )));
    }
    let trace: f64 = (0..dim).map(|i| rho[(i, i)]).sum();
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::NotDensity(format!("trace {trace} != 1")));
    }
    let min_eig = min_eigenvalue(rho)?;
    if min_eig < -1e-10 {
        return Err(Error::NotDensity(format!(
            "negative eigenvalue {min_eig}"
        )));
    }

    let inv_d = 1.0 / dim as f64;
    let block = rho.view((0, 0), (d1, d1)).into_owned();
    let flat_block = DMatrix::from_diagonal_element(d1, d1, inv_d);
    let delta = trace_distance_dense(&block, &flat_block)?;
    let epsilon = (dim - d1) as f64 * inv_d;
    let flat = DMatrix::from_diagonal_element(dim, dim, inv_d);
    let actual = trace_distance_dense(rho, &flat)?;
    Ok(NearbyBound {
        delta,
        epsilon,
        bound: 2.0 * delta + 2.0 * epsilon,
        actual,
    })
}

/// Permutation of unique types induced by swapping labels `i` and `i+1`.
fn transposition_action(types: &[TypeVector], i: u64) -> Vec<usize> {
    types
        .iter()
        .map(|tv| {
            let mut mapped: Vec<(u64, u32)> = tv
                .support()
                .iter()
                .zip(tv.multiplicities())
                .map(|(&x, &mult)| {
                    let y = if x == i {
                        i + 1
                    } else if x == i + 1 {
                        i
                    } else {
                        x
                    };
                    (y, mult)
                })
                .collect();
            mapped.sort_unstable();
            let image = TypeVector::new(&mapped).expect("transposition preserves validity");
            types.binary_search(&image).expect("image type in basis")
        })
        .collect()
}

/// True iff a unique-type matrix commutes with the label-permutation action
/// of every adjacent transposition of `[n]` (the generators of the full
/// symmetric group).  Exact entries are compared exactly, floating entries
/// within `tol`.
pub fn circulant_check(m: &MomentMatrix, tol: f64) -> Result<bool> {
    let crate::density::Basis::UniqueType { n, .. } = *m.basis() else {
        return Err(Error::InvalidParameter(
            "circulant check expects a unique-type matrix".into(),
        ));
    };
    let dim = m.dim();
    for i in 0..n.saturating_sub(1) {
        let perm = transposition_action(m.types(), i);
        for x in 0..dim {
            for y in 0..dim {
                let agree = if m.is_exact() {
                    m.entry_exact(perm[x], perm[y]).unwrap() == m.entry_exact(x, y).unwrap()
                } else {
                    (m.entry_f64(perm[x], perm[y]) - m.entry_f64(x, y)).abs() <= tol
                };
                if !agree {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// One joint eigenspace of the distance matrices.
pub struct OracleEigenspace {
    /// Block label, assigned by sorting distance-1 eigenvalues descending.
    pub q: u32,
    pub dimension: usize,
    /// Orthonormal basis, one column per dimension, in subset order.
    pub basis: DMatrix<f64>,
    /// Eigenvalue of the distance-p matrix on this space, indexed by p.
    pub distance_eigenvalues: Vec<f64>,
}

pub struct JohnsonOracle {
    pub n: u64,
    pub t: u32,
    /// Subsets indexing the matrices, lexicographically ordered.
    pub subsets: Vec<Vec<u64>>,
    pub eigenspaces: Vec<OracleEigenspace>,
    /// Largest entry of any pairwise commutator of distance matrices.
    pub max_commutator: f64,
}

const ORACLE_DIM_CAP: usize = 5000;
/// Distance-1 eigenvalues are integers separated by at least 2, so clusters
/// split cleanly at half-integer gaps.
const CLUSTER_GAP: f64 = 0.5;

fn distance_matrix(subsets: &[Vec<u64>], p: u32) -> DMatrix<f64> {
    let dim = subsets.len();
    let t = subsets[0].len();
    DMatrix::from_fn(dim, dim, |i, j| {
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
        if t - inter == p as usize {
            1.0
        } else {
            0.0
        }
    })
}

/// Splits the columns of `basis` into refined clusters along the spectrum of
/// `a` compressed to the cluster.
fn refine_cluster(a: &DMatrix<f64>, basis: DMatrix<f64>) -> Vec<(f64, DMatrix<f64>)> {
    let compressed = basis.transpose() * a * &basis;
    let eig = compressed.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| {
        eig.eigenvalues[y]
            .partial_cmp(&eig.eigenvalues[x])
            .unwrap()
    });
    let rotated = &basis * &eig.eigenvectors;

    let mut out: Vec<(f64, DMatrix<f64>)> = Vec::new();
    let mut group: Vec<usize> = Vec::new();
    for (rank, &idx) in order.iter().enumerate() {
        if rank > 0 {
            let prev = eig.eigenvalues[order[rank - 1]];
            if (prev - eig.eigenvalues[idx]).abs() > CLUSTER_GAP {
                out.push(collect_group(&rotated, &eig.eigenvalues, &group));
                group.clear();
            }
        }
        group.push(idx);
    }
    if !group.is_empty() {
        out.push(collect_group(&rotated, &eig.eigenvalues, &group));
    }
    out
}

fn collect_group(
    rotated: &DMatrix<f64>,
    eigenvalues: &nalgebra::DVector<f64>,
    group: &[usize],
) -> (f64, DMatrix<f64>) {
    let dim = rotated.nrows();
    let mut basis = DMatrix::zeros(dim, group.len());
    let mut mean = 0.0;
    for (c, &idx) in group.iter().enumerate() {
        basis.set_column(c, &rotated.column(idx));
        mean += eigenvalues[idx];
    }
    (mean / group.len() as f64, basis)
}

/// Joint eigen-decomposition of the Johnson distance matrices, built purely
/// from dense numerics.
pub fn johnson_graph_oracle(n: u64, t: u32, budget: &Budget) -> Result<JohnsonOracle> {
    if t == 0 || u64::from(2 * t) > n {
        return Err(Error::InvalidParameter(format!(
            "oracle requires 1 <= t <= n/2, got t={t}, n={n}"
        )));
    }
    let subsets: Vec<Vec<u64>> = crate::combinatorics::enumerate_subsets(n, t, budget)?.collect();
    let dim = subsets.len();
    if dim > ORACLE_DIM_CAP {
        return Err(Error::BudgetExceeded {
            what: "Johnson oracle dimension".into(),
            required: dim.to_string(),
            budget: ORACLE_DIM_CAP as u64,
        });
    }
    budget.admit_usize(dim * dim, "Johnson oracle matrices")?;

    let matrices: Vec<DMatrix<f64>> = (0..=t).map(|p| distance_matrix(&subsets, p)).collect();

    // Cluster refinement: start from the whole space and split along each
    // distance matrix in turn.  The distance-1 spectrum already separates
    // all blocks, but later matrices would resolve any tie.
    let mut clusters: Vec<DMatrix<f64>> = vec![DMatrix::identity(dim, dim)];
    for a in matrices.iter().skip(1) {
        let mut next = Vec::new();
        for basis in clusters {
            if basis.ncols() == 1 {
                next.push(basis);
                continue;
            }
            for (_, refined) in refine_cluster(a, basis) {
                next.push(refined);
            }
        }
        clusters = next;
    }

    // Label clusters by distance-1 eigenvalue, descending.
    let mut labeled: Vec<(f64, DMatrix<f64>)> = clusters
        .into_iter()
        .map(|basis| {
            let compressed = basis.transpose() * &matrices[1] * &basis;
            let dim_c = basis.ncols();
            let rayleigh = (0..dim_c).map(|i| compressed[(i, i)]).sum::<f64>() / dim_c as f64;
            (rayleigh, basis)
        })
        .collect();
    labeled.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let eigenspaces: Vec<OracleEigenspace> = labeled
        .into_iter()
        .enumerate()
        .map(|(q, (_, basis))| {
            let distance_eigenvalues = matrices
                .iter()
                .map(|a| {
                    let compressed = basis.transpose() * a * &basis;
                    let d = basis.ncols();
                    (0..d).map(|i| compressed[(i, i)]).sum::<f64>() / d as f64
                })
                .collect();
            OracleEigenspace {
                q: q as u32,
                dimension: basis.ncols(),
                basis,
                distance_eigenvalues,
            }
        })
        .collect();

    let mut max_commutator = 0.0f64;
    for p in 1..matrices.len() {
        for r in (p + 1)..matrices.len() {
            let comm = &matrices[p] * &matrices[r] - &matrices[r] * &matrices[p];
            max_commutator = max_commutator.max(comm.amax());
        }
    }

    Ok(JohnsonOracle {
        n,
        t,
        subsets,
        eigenspaces,
        max_commutator,
    })
}

/// Orthogonal matrix whose first columns are the oracle's block-`q_top`
/// eigenbasis embedded into the type basis of `rho` (unique types carry the
/// subset coordinates, all other coordinates extend the basis).  Conjugating
/// `rho` by the result places that block on the leading coordinates, as
/// [`nearby_matrices_bound`] expects.
pub fn embed_top_block_rotation(rho: &MomentMatrix, oracle: &JohnsonOracle) -> Result<DMatrix<f64>> {
    let crate::density::Basis::Type { n, t } = *rho.basis() else {
        return Err(Error::InvalidParameter(
            "rotation expects a type-basis matrix".into(),
        ));
    };
    if n != oracle.n || t != oracle.t {
        return Err(Error::InvalidParameter(
            "oracle parameters do not match the matrix".into(),
        ));
    }
    let dim = rho.dim();
    // Position of each subset's unique type in the type basis.
    let positions: Vec<usize> = oracle
        .subsets
        .iter()
        .map(|s| {
            let pairs: Vec<(u64, u32)> = s.iter().map(|&x| (x, 1)).collect();
            let tv = TypeVector::new(&pairs).unwrap();
            rho.types().binary_search(&tv).expect("unique type present")
        })
        .collect();

    let top = oracle
        .eigenspaces
        .iter()
        .max_by_key(|e| e.q)
        .ok_or_else(|| Error::InvalidParameter("oracle has no eigenspaces".into()))?;

    let mut columns: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(dim);
    for c in 0..top.dimension {
        let mut v = nalgebra::DVector::zeros(dim);
        for (row, &pos) in positions.iter().enumerate() {
            v[pos] = top.basis[(row, c)];
        }
        columns.push(v);
    }
    // Complete with Gram-Schmidt over the canonical vectors.
    for i in 0..dim {
        if columns.len() == dim {
            break;
        }
        let mut v = nalgebra::DVector::zeros(dim);
        v[i] = 1.0;
        for u in &columns {
            let proj = u.dot(&v);
            v -= u * proj;
        }
        // Re-orthogonalize once; plain Gram-Schmidt drifts.
        for u in &columns {
            let proj = u.dot(&v);
            v -= u * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            columns.push(v / norm);
        }
    }
    if columns.len() != dim {
        return Err(Error::InvalidParameter(
            "failed to complete orthonormal basis".into(),
        ));
    }
    Ok(DMatrix::from_columns(&columns))
}
