//! Adjacency recovery from a learned eigenbasis.
//!
//! Given orthonormal columns `v_q`, the matrix `A(Λ) = Σ_q λ_q v_q v_qᵀ` is
//! linear in `Λ`, so the requirements of a valid adjacency matrix — zero
//! diagonal, nonnegative entries, row sums at least one — form a linear
//! program in `Λ`. Solving it for feasibility yields candidate eigenvalues;
//! reassembly and thresholding turn them into a graph.

use nalgebra::{DMatrix, DVector};

use crate::eig::Eigenbasis;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::simplex::{self, DenseLp, LpOutcome, LpRow, Relation};

pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-8;
pub const DEFAULT_BINARIZE_TAU: f64 = 1e-3;
/// Entries this close to zero are clamped during assembly.
const ASSEMBLY_CLAMP: f64 = 1e-9;
/// Assembly refuses entries below this floor.
const VALIDITY_FLOOR: f64 = -1e-6;

/// Feasibility program for eigenvalues `Λ`: N zero-diagonal equalities,
/// N(N-1)/2 nonnegativity inequalities, N row-sum inequalities.
#[derive(Debug, Clone)]
pub struct AdjacencyLp {
    pub n: usize,
    pub lp: DenseLp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryStatus {
    Feasible,
    Infeasible,
    NumericalFailure,
}

/// Result of the eigenvalue feasibility solve. On `Infeasible`, the
/// eigenvalues are the least-violation vertex rather than a certified
/// feasible point.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub eigenvalues: DVector<f64>,
    pub status: RecoveryStatus,
    /// Max constraint violation, re-verified by direct substitution.
    pub residual: f64,
    pub pivots: usize,
}

/// Builds the constraint system of the feasibility program. With
/// `sparse_objective` the otherwise constant objective becomes the total
/// off-diagonal weight, favoring sparser adjacency matrices.
pub fn build_adjacency_lp(basis: &Eigenbasis, sparse_objective: bool) -> AdjacencyLp {
    let n = basis.n();
    let v = basis.matrix();
    let col_sums: Vec<f64> = (0..n).map(|q| v.column(q).sum()).collect();

    let mut rows = Vec::with_capacity(n + n * (n - 1) / 2 + n);
    // A(Λ)_ii = 0
    for i in 0..n {
        let coeffs: Vec<f64> = (0..n).map(|q| v[(i, q)] * v[(i, q)]).collect();
        rows.push(LpRow { coeffs, relation: Relation::Eq, rhs: 0.0 });
    }
    // A(Λ)_ij >= 0 for i < j
    for i in 0..n {
        for j in (i + 1)..n {
            let coeffs: Vec<f64> = (0..n).map(|q| v[(i, q)] * v[(j, q)]).collect();
            rows.push(LpRow { coeffs, relation: Relation::Ge, rhs: 0.0 });
        }
    }
    // Σ_j A(Λ)_ij >= 1
    for i in 0..n {
        let coeffs: Vec<f64> = (0..n).map(|q| v[(i, q)] * col_sums[q]).collect();
        rows.push(LpRow { coeffs, relation: Relation::Ge, rhs: 1.0 });
    }

    let objective = if sparse_objective {
        // Σ_{i<j} A(Λ)_ij has coefficient (s_q² - 1)/2 on λ_q since the
        // columns are unit vectors.
        (0..n).map(|q| (col_sums[q] * col_sums[q] - 1.0) / 2.0).collect()
    } else {
        vec![0.0; n]
    };

    AdjacencyLp { n, lp: DenseLp { num_vars: n, objective, rows } }
}

/// Max violation of the three constraint families at `Λ`, computed by
/// direct substitution, independent of any solver state.
pub fn constraint_residual(basis: &Eigenbasis, eigenvalues: &DVector<f64>) -> f64 {
    let a = raw_assembly(basis, eigenvalues);
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst.max(a[(i, i)].abs());
        worst = worst.max(1.0 - (a.row(i).sum() - a[(i, i)]));
        for j in (i + 1)..n {
            worst = worst.max(-a[(i, j)]);
        }
    }
    worst
}

/// Solves the feasibility program. Returns `Feasible` when the re-verified
/// constraint violation is within `tol`; otherwise `Infeasible` with the
/// least-violation eigenvalues attached.
pub fn solve_feasibility(lp: &AdjacencyLp, basis: &Eigenbasis, tol: f64) -> Result<Recovery> {
    if basis.n() != lp.n {
        return Err(Error::DimensionMismatch(format!(
            "LP built for n={}, basis has n={}",
            lp.n,
            basis.n()
        )));
    }
    let outcome = simplex::solve(&lp.lp, tol)?;
    let (solution, lp_feasible) = match outcome {
        LpOutcome::Optimal(s) => (s, true),
        LpOutcome::Infeasible(s) => (s, false),
    };
    let eigenvalues = DVector::from_vec(solution.x);
    let residual = constraint_residual(basis, &eigenvalues);
    let status = if lp_feasible && residual <= tol {
        RecoveryStatus::Feasible
    } else {
        RecoveryStatus::Infeasible
    };
    Ok(Recovery { eigenvalues, status, residual, pivots: solution.pivots })
}

/// Polishes eigenvalues against the validity constraints by minimizing the
/// smooth penalty `‖diag‖² + Σ max(0, -A_ij)² + Σ max(0, 1 - rowsum_i)²`
/// with Armijo-backtracked gradient descent. The program is convex, so the
/// result does not depend on luck in the starting point, but a good `start`
/// (the LP vertex) saves iterations.
pub fn refine_eigenvalues(
    basis: &Eigenbasis,
    start: &DVector<f64>,
    max_iters: usize,
) -> Result<DVector<f64>> {
    let n = basis.n();
    if start.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "basis is {n}x{n}, start vector has length {}",
            start.len()
        )));
    }
    let v = basis.matrix();

    let penalty = |lam: &DVector<f64>| -> f64 {
        let a = raw_assembly(basis, lam);
        let mut f = 0.0;
        for i in 0..n {
            f += a[(i, i)] * a[(i, i)];
            let short = 1.0 - (a.row(i).sum() - a[(i, i)]);
            if short > 0.0 {
                f += short * short;
            }
            for j in (i + 1)..n {
                if a[(i, j)] < 0.0 {
                    f += a[(i, j)] * a[(i, j)];
                }
            }
        }
        f
    };

    let gradient = |lam: &DVector<f64>| -> DVector<f64> {
        let a = raw_assembly(basis, lam);
        // c collects dF/dA over the pair parameterization: diagonal terms on
        // the diagonal, and per-pair hinge derivatives halved because the
        // quadratic form below counts each unordered pair twice.
        let mut c = DMatrix::zeros(n, n);
        let shorts: Vec<f64> = (0..n)
            .map(|i| (1.0 - (a.row(i).sum() - a[(i, i)])).max(0.0))
            .collect();
        for i in 0..n {
            c[(i, i)] = 2.0 * a[(i, i)];
            for j in (i + 1)..n {
                let mut df = -2.0 * (shorts[i] + shorts[j]);
                if a[(i, j)] < 0.0 {
                    df += 2.0 * a[(i, j)];
                }
                c[(i, j)] = 0.5 * df;
                c[(j, i)] = 0.5 * df;
            }
        }
        let cv = &c * v;
        DVector::from_fn(n, |q, _| v.column(q).dot(&cv.column(q)))
    };

    let mut lam = start.clone();
    let mut f = penalty(&lam);
    let mut step = 1.0f64;
    for _ in 0..max_iters {
        let g = gradient(&lam);
        let gnorm2 = g.norm_squared();
        if gnorm2 <= 1e-20 {
            break;
        }
        // Armijo backtracking, reusing the last accepted step as the guess.
        step = (step * 2.0).min(1e3);
        let mut accepted = false;
        while step > 1e-14 {
            let cand = &lam - step * &g;
            let fc = penalty(&cand);
            if fc <= f - 0.5 * step * gnorm2 {
                lam = cand;
                f = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if lam.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("eigenvalue refinement diverged".into()));
    }
    Ok(lam)
}

fn raw_assembly(basis: &Eigenbasis, eigenvalues: &DVector<f64>) -> DMatrix<f64> {
    let m = basis.matrix() * DMatrix::from_diagonal(eigenvalues) * basis.matrix().transpose();
    (&m + m.transpose()) * 0.5
}

/// Reassembles `V diag(Λ) Vᵀ`, symmetrizes, zeroes the diagonal and entries
/// within the clamp window, and clamps tiny negatives to zero. Fails if any
/// entry sits below the validity floor before clamping.
pub fn assemble_adjacency(basis: &Eigenbasis, eigenvalues: &DVector<f64>) -> Result<DMatrix<f64>> {
    if basis.n() != eigenvalues.len() {
        return Err(Error::DimensionMismatch(format!(
            "basis is {0}x{0}, eigenvalue vector has length {1}",
            basis.n(),
            eigenvalues.len()
        )));
    }
    let mut a = raw_assembly(basis, eigenvalues);
    if let Some(bad) = a.iter().copied().filter(|x| *x < VALIDITY_FLOOR).reduce(f64::min) {
        return Err(Error::ValidityViolation { value: bad });
    }
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)] = 0.0;
    }
    for x in a.iter_mut() {
        if x.abs() < ASSEMBLY_CLAMP || *x < 0.0 {
            *x = 0.0;
        }
    }
    Ok(a)
}

/// Lenient assembly for pipelines working off a least-violation `Λ`: all
/// negative entries and the diagonal are clamped to zero, no validity check.
pub fn assemble_adjacency_lenient(basis: &Eigenbasis, eigenvalues: &DVector<f64>) -> DMatrix<f64> {
    let mut a = raw_assembly(basis, eigenvalues);
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)] = 0.0;
    }
    for x in a.iter_mut() {
        if *x < ASSEMBLY_CLAMP {
            *x = 0.0;
        }
    }
    a
}

/// Thresholds a nonnegative weight matrix into a unit-weight graph: an edge
/// is kept when its weight strictly exceeds `tau` times the largest entry.
pub fn binarize(a: &DMatrix<f64>, tau: f64) -> Result<Graph> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "adjacency must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if tau < 0.0 {
        return Err(Error::InvalidInput("tau must be nonnegative".into()));
    }
    let n = a.nrows();
    let max_entry = a.iter().fold(0.0f64, |acc, x| acc.max(*x));
    let mut edges = Vec::new();
    if max_entry > 0.0 {
        let cut = tau * max_entry;
        for i in 0..n {
            for j in (i + 1)..n {
                let w = 0.5 * (a[(i, j)] + a[(j, i)]);
                if w > cut {
                    edges.push((i, j, 1.0));
                }
            }
        }
    }
    Graph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::eig_sym;
    use crate::synth::gen_er_graph;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn path3_basis() -> (Eigenbasis, DVector<f64>) {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        eig_sym(&a).unwrap()
    }

    #[test]
    fn lp_dimensions() {
        let (v, _) = path3_basis();
        let lp = build_adjacency_lp(&v, false);
        assert_eq!(lp.lp.rows.len(), 3 + 3 + 3);
        let g = gen_er_graph(20, 0.3, 0).unwrap();
        let (v, _) = eig_sym(&g.adjacency()).unwrap();
        let lp = build_adjacency_lp(&v, false);
        assert_eq!(lp.lp.rows.len(), 20 + 190 + 20);
        assert_eq!(lp.lp.num_vars, 20);
    }

    #[test]
    fn identity_basis_is_infeasible() {
        // Diagonal bases only produce diagonal matrices; row sums cannot
        // reach one with a zero diagonal.
        let v = Eigenbasis::new(DMatrix::identity(4, 4)).unwrap();
        let lp = build_adjacency_lp(&v, false);
        let rec = solve_feasibility(&lp, &v, 1e-8).unwrap();
        assert_eq!(rec.status, RecoveryStatus::Infeasible);
        assert!(rec.residual > 1e-8);
    }

    #[test]
    fn path3_true_spectrum_is_a_witness() {
        let (v, vals) = path3_basis();
        assert!(constraint_residual(&v, &vals) <= 1e-8);
        let lp = build_adjacency_lp(&v, false);
        let rec = solve_feasibility(&lp, &v, 1e-8).unwrap();
        assert_eq!(rec.status, RecoveryStatus::Feasible);
        assert!(rec.residual <= 1e-8);
    }

    #[test]
    fn path3_round_trip() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let (v, vals) = eig_sym(&a).unwrap();
        let back = assemble_adjacency(&v, &vals).unwrap();
        assert!((&back - &a).iter().all(|x| x.abs() <= 1e-8));
        let g = binarize(&back, 0.5).unwrap();
        assert_eq!(g.edge_pairs().into_iter().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn zero_eigenvalues_assemble_to_zero() {
        let (v, _) = path3_basis();
        let a = assemble_adjacency(&v, &DVector::zeros(3)).unwrap();
        assert_eq!(a, DMatrix::zeros(3, 3));
    }

    #[test]
    fn sign_flipped_columns_assemble_identically() {
        let (v, vals) = path3_basis();
        let mut flipped = v.matrix().clone();
        flipped.column_mut(1).neg_mut();
        let v2 = Eigenbasis::new(flipped).unwrap();
        let a1 = assemble_adjacency(&v, &vals).unwrap();
        let a2 = assemble_adjacency(&v2, &vals).unwrap();
        assert!((&a1 - &a2).iter().all(|x| x.abs() <= 1e-12));
    }

    #[test]
    fn assembly_rejects_negative_entries() {
        let (v, vals) = path3_basis();
        // Negated spectrum flips the sign of every off-diagonal entry.
        let neg = -vals;
        assert!(matches!(
            assemble_adjacency(&v, &neg),
            Err(Error::ValidityViolation { .. })
        ));
        let a = assemble_adjacency_lenient(&v, &neg);
        assert!(a.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn binarize_thresholds() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.4, 1.0, 0.0, 0.2, 0.4, 0.2, 0.0]);
        assert_eq!(binarize(&a, 0.0).unwrap().edge_count(), 3);
        let g = binarize(&a, 0.5).unwrap();
        assert_eq!(g.edge_pairs().into_iter().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(binarize(&a, 1.0).unwrap().edge_count(), 0);
        assert_eq!(binarize(&DMatrix::zeros(3, 3), 0.0).unwrap().edge_count(), 0);
        assert!(binarize(&a, -0.1).is_err());
    }

    #[test]
    fn connected_unit_graphs_round_trip_feasibly() {
        let mut done = 0;
        let mut seed = 0u64;
        while done < 10 {
            let g = gen_er_graph(8, 0.35, seed).unwrap();
            seed += 1;
            if !g.is_connected() {
                continue;
            }
            done += 1;
            let (v, vals) = eig_sym(&g.adjacency()).unwrap();
            // True spectrum is a witness: every degree >= 1.
            assert!(constraint_residual(&v, &vals) <= 1e-8);
            let lp = build_adjacency_lp(&v, false);
            let rec = solve_feasibility(&lp, &v, 1e-8).unwrap();
            assert_eq!(rec.status, RecoveryStatus::Feasible, "seed {seed}");
            let a = assemble_adjacency(&v, &rec.eigenvalues).unwrap();
            for i in 0..8 {
                assert!(a[(i, i)].abs() <= 1e-6);
                assert!(a.row(i).sum() >= 1.0 - 1e-6);
            }
            assert!(a.iter().all(|x| *x >= -1e-6));
        }
    }

    #[test]
    fn sparse_objective_stays_feasible() {
        let g = gen_er_graph(6, 0.5, 3).unwrap();
        let (v, _) = eig_sym(&g.adjacency()).unwrap();
        let lp = build_adjacency_lp(&v, true);
        let rec = solve_feasibility(&lp, &v, 1e-8).unwrap();
        assert_eq!(rec.status, RecoveryStatus::Feasible);
    }

    #[test]
    fn permuted_and_flipped_basis_yields_same_assembly() {
        let g = gen_er_graph(6, 0.5, 5).unwrap();
        let (v, vals) = eig_sym(&g.adjacency()).unwrap();
        // Swap columns 0 and 3, flip column 2; permute Λ to match.
        let mut pm = v.matrix().clone();
        pm.swap_columns(0, 3);
        pm.column_mut(2).neg_mut();
        let mut pvals = vals.clone();
        pvals.swap_rows(0, 3);
        let v2 = Eigenbasis::new(pm).unwrap();
        let a1 = assemble_adjacency_lenient(&v, &vals);
        let a2 = assemble_adjacency_lenient(&v2, &pvals);
        assert!((&a1 - &a2).iter().all(|x| x.abs() <= 1e-10));
    }
}
