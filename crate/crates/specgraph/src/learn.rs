//! Eigenbasis learning by alternating minimization.
//!
//! The objective `min ‖X - V Y‖_F` over orthonormal `V` and column-wise
//! k-sparse `Y` is non-convex, but both coordinate sub-problems have exact
//! closed-form solutions: for fixed `V` the best `Y` keeps the top-k
//! magnitudes of each column of `VᵀX`, and for fixed `Y` the best `V` is the
//! orthogonal Procrustes solution from the SVD of `XYᵀ`. Alternating the two
//! gives a monotonically non-increasing objective.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::eig::Eigenbasis;
use crate::error::{Error, Result};
use crate::seed;

/// Target sparsity for the coefficient columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sparsity {
    Fixed(usize),
    /// Estimate k from the pseudo-error curve.
    Auto,
}

#[derive(Debug, Clone)]
pub struct LearnConfig {
    pub k: Sparsity,
    /// Absolute convergence tolerance on the Frobenius objective change.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Random restarts; the lowest-objective run wins.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig { k: Sparsity::Auto, epsilon: 1e-6, max_iters: 500, restarts: 5, seed: 0 }
    }
}

impl LearnConfig {
    pub fn with_k(k: usize) -> Self {
        LearnConfig { k: Sparsity::Fixed(k), ..LearnConfig::default() }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Sparsity::Fixed(k) = self.k {
            if k < 1 || k > n {
                return Err(Error::SparsityOutOfRange { k, n });
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        if self.max_iters < 1 || self.restarts < 1 {
            return Err(Error::InvalidInput("max_iters and restarts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LearnResult {
    pub basis: Eigenbasis,
    pub coefficients: DMatrix<f64>,
    /// `‖X - V Y‖_F` after each full (Y, V) update.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LearnResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("at least one iteration runs")
    }
}

/// Zeroes all but the k largest-magnitude entries; equal magnitudes keep the
/// lower index. This is the closest k-sparse vector in the 2-norm.
pub fn topk_project(v: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
    let n = v.len();
    if k < 1 || k > n {
        return Err(Error::SparsityOutOfRange { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        v[b].abs().partial_cmp(&v[a].abs()).expect("finite entries").then(a.cmp(&b))
    });
    let mut out = DVector::zeros(n);
    for &i in &order[..k] {
        out[i] = v[i];
    }
    Ok(out)
}

/// Exact minimizer of `‖X - V Y‖_F` over column-wise k-sparse `Y` for a
/// fixed orthonormal basis: top-k projection of each column of `VᵀX`.
pub fn sparse_code(basis: &Eigenbasis, x_obs: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let n = basis.n();
    if x_obs.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "basis is {n}x{n}, observations have {} rows",
            x_obs.nrows()
        )));
    }
    let full = basis.matrix().transpose() * x_obs;
    let mut y = DMatrix::zeros(n, x_obs.ncols());
    for c in 0..x_obs.ncols() {
        let col = topk_project(&DVector::from_column_slice(full.column(c).as_slice()), k)?;
        y.column_mut(c).copy_from(&col);
    }
    Ok(y)
}

/// Orthogonal Procrustes update: the orthonormal `V` maximizing
/// `tr(YᵀVᵀX)`, namely `U₁U₂ᵀ` from the SVD `XYᵀ = U₁ Σ U₂ᵀ`. The achieved
/// trace equals the nuclear norm of `XYᵀ`.
pub fn procrustes_update(x_obs: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<Eigenbasis> {
    if x_obs.nrows() != y.nrows() || x_obs.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "observations are {}x{}, coefficients are {}x{}",
            x_obs.nrows(),
            x_obs.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    let product = x_obs * y.transpose();
    let svd = product
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or(Error::SvdFailure)?;
    let u = svd.u.ok_or(Error::SvdFailure)?;
    let v_t = svd.v_t.ok_or(Error::SvdFailure)?;
    Eigenbasis::new(u * v_t)
}

/// Relative reconstruction error `‖X - V Y‖_F² / ‖X‖_F²`.
pub fn pseudo_error(x_obs: &DMatrix<f64>, basis: &Eigenbasis, y: &DMatrix<f64>) -> Result<f64> {
    let denom = x_obs.norm_squared();
    if denom == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let residual = x_obs - basis.matrix() * y;
    Ok(residual.norm_squared() / denom)
}

/// Haar-distributed random orthogonal matrix: QR of a seeded standard
/// Gaussian matrix, sign-normalized so R has positive diagonal.
pub fn random_orthogonal(n: usize, seed_val: u64) -> Eigenbasis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_val);
    let gaussian = DMatrix::from_fn(n, n, |_, _| {
        rng.sample::<f64, _>(rand_distr::StandardNormal)
    });
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Eigenbasis::new(q).expect("Q factor is orthonormal")
}

fn learn_single(
    x_obs: &DMatrix<f64>,
    k: usize,
    epsilon: f64,
    max_iters: usize,
    seed_val: u64,
) -> Result<LearnResult> {
    let mut basis = random_orthogonal(x_obs.nrows(), seed_val);
    let mut coefficients = DMatrix::zeros(x_obs.nrows(), x_obs.ncols());
    let mut trace = Vec::new();
    let mut previous = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iters {
        coefficients = sparse_code(&basis, x_obs, k)?;
        basis = procrustes_update(x_obs, &coefficients)?;
        let current = (x_obs - basis.matrix() * &coefficients).norm();
        trace.push(current);
        iterations += 1;
        if (previous - current).abs() <= epsilon {
            converged = true;
            break;
        }
        previous = current;
    }
    Ok(LearnResult { basis, coefficients, objective_trace: trace, iterations, converged })
}

/// Runs the alternating minimization with restarts and keeps the best run.
/// Restart results merge deterministically by (objective, restart index), so
/// the answer does not depend on execution order.
pub fn learn_eigenbasis(x_obs: &DMatrix<f64>, cfg: &LearnConfig) -> Result<LearnResult> {
    cfg.validate(x_obs.nrows())?;
    let k = match cfg.k {
        Sparsity::Fixed(k) => k,
        Sparsity::Auto => {
            return Err(Error::InvalidInput(
                "learn_eigenbasis needs a fixed k; use estimate_sparsity for auto".into(),
            ))
        }
    };
    if x_obs.ncols() < 1 {
        return Err(Error::InvalidInput("need at least one observation column".into()));
    }
    if x_obs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("observations contain NaN/inf".into()));
    }
    let runs: Vec<(usize, Result<LearnResult>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            (r, learn_single(x_obs, k, cfg.epsilon, cfg.max_iters, seed::mix(cfg.seed, r as u64)))
        })
        .collect();
    let mut best: Option<(f64, usize, LearnResult)> = None;
    for (r, run) in runs {
        let run = run?;
        let obj = run.objective();
        let better = match &best {
            None => true,
            Some((bobj, br, _)) => obj < *bobj || (obj == *bobj && r < *br),
        };
        if better {
            best = Some((obj, r, run));
        }
    }
    Ok(best.expect("restarts >= 1").2)
}

/// Sweeps k = 1..N, learning a basis per k, and picks the elbow of the
/// pseudo-error curve: the smallest k whose marginal improvement
/// `e(k+1) - e(k)` no longer beats `delta_knee` (default `0.01·e(1)`).
/// Returns the chosen k and the full error curve.
pub fn estimate_sparsity(x_obs: &DMatrix<f64>, cfg: &LearnConfig) -> Result<(usize, Vec<f64>)> {
    cfg.validate(x_obs.nrows())?;
    let n = x_obs.nrows();
    let errors: Vec<Result<f64>> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let sub = LearnConfig { k: Sparsity::Fixed(k), ..cfg.clone() };
            let run = learn_eigenbasis(x_obs, &sub)?;
            pseudo_error(x_obs, &run.basis, &run.coefficients)
        })
        .collect();
    let errors = errors.into_iter().collect::<Result<Vec<f64>>>()?;
    let delta_knee = 0.01 * errors[0];
    for k in 1..n {
        if errors[k] - errors[k - 1] > -delta_knee {
            return Ok((k, errors));
        }
    }
    Ok((n, errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_er_graph, make_ground_truth, SignalGenConfig, SparsityMode};
    use approx::assert_relative_eq;

    fn random_matrix(nr: usize, nc: usize, seed_val: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed_val);
        DMatrix::from_fn(nr, nc, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn topk_examples() {
        let v = DVector::from_vec(vec![1.0, -5.0, 2.0]);
        assert_eq!(topk_project(&v, 1).unwrap(), DVector::from_vec(vec![0.0, -5.0, 0.0]));
        let v = DVector::from_vec(vec![3.0, -1.0, 0.5, 2.0]);
        assert_eq!(
            topk_project(&v, 2).unwrap(),
            DVector::from_vec(vec![3.0, 0.0, 0.0, 2.0])
        );
        assert_eq!(topk_project(&v, 4).unwrap(), v);
        assert!(topk_project(&v, 0).is_err());
        assert!(topk_project(&v, 5).is_err());
    }

    #[test]
    fn topk_ties_prefer_lower_index() {
        let v = DVector::from_vec(vec![1.0, -1.0, 1.0]);
        assert_eq!(topk_project(&v, 2).unwrap(), DVector::from_vec(vec![1.0, -1.0, 0.0]));
    }

    #[test]
    fn sparse_code_identity_basis() {
        let basis = Eigenbasis::new(DMatrix::identity(3, 3)).unwrap();
        let x = DMatrix::from_column_slice(3, 1, &[1.0, -5.0, 2.0]);
        let y = sparse_code(&basis, &x, 1).unwrap();
        assert_eq!(y, DMatrix::from_column_slice(3, 1, &[0.0, -5.0, 0.0]));
    }

    #[test]
    fn sparse_code_full_support_is_exact() {
        let basis = random_orthogonal(5, 1);
        let x = random_matrix(5, 7, 2);
        let y = sparse_code(&basis, &x, 5).unwrap();
        let residual = (&x - basis.matrix() * &y).norm();
        assert!(residual <= 1e-10);
    }

    // Independent oracle: enumerate every support of size k; for orthonormal
    // V the best coefficients on a support are the selected entries of Vᵀx.
    fn brute_force_residual(basis: &Eigenbasis, x: &DVector<f64>, k: usize) -> f64 {
        let n = basis.n();
        let full = basis.matrix().transpose() * x;
        let mut best = f64::INFINITY;
        let mut support = Vec::new();
        enumerate_supports(n, k, 0, &mut support, &mut |s: &[usize]| {
            let mut y = DVector::zeros(n);
            for &i in s {
                y[i] = full[i];
            }
            let r = (x - basis.matrix() * y).norm();
            if r < best {
                best = r;
            }
        });
        best
    }

    fn enumerate_supports(
        n: usize,
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            enumerate_supports(n, k, i + 1, cur, f);
            cur.pop();
        }
    }

    #[test]
    fn sparse_code_matches_exhaustive_oracle() {
        for trial in 0..20 {
            let basis = random_orthogonal(6, 100 + trial);
            let x = random_matrix(6, 1, 200 + trial);
            let xv = DVector::from_column_slice(x.column(0).as_slice());
            for k in 1..=3 {
                let y = sparse_code(&basis, &x, k).unwrap();
                let got = (&x - basis.matrix() * &y).norm();
                let oracle = brute_force_residual(&basis, &xv, k);
                assert!((got - oracle).abs() <= 1e-10, "k={k} got={got} oracle={oracle}");
            }
        }
    }

    #[test]
    fn procrustes_identity() {
        let i = DMatrix::identity(4, 4);
        let v = procrustes_update(&i, &i).unwrap();
        assert!((v.matrix() - &i).norm() <= 1e-12);
    }

    #[test]
    fn procrustes_recovers_orthogonal_factor() {
        for trial in 0..5 {
            let q = random_orthogonal(6, 300 + trial);
            let y = random_matrix(6, 10, 400 + trial); // full rank w.p. 1
            let x = q.matrix() * &y;
            let v = procrustes_update(&x, &y).unwrap();
            assert!((v.matrix() - q.matrix()).norm() <= 1e-8);
        }
    }

    #[test]
    fn procrustes_trace_equals_nuclear_norm() {
        for trial in 0..5 {
            let x = random_matrix(5, 8, 500 + trial);
            let y = random_matrix(5, 8, 600 + trial);
            let v = procrustes_update(&x, &y).unwrap();
            let achieved = (y.transpose() * v.matrix().transpose() * &x).trace();
            let nuclear: f64 =
                (&x * y.transpose()).singular_values().iter().sum();
            assert_relative_eq!(achieved, nuclear, epsilon = 1e-8);
        }
    }

    #[test]
    fn pseudo_error_bounds() {
        let basis = random_orthogonal(5, 7);
        let x = random_matrix(5, 6, 8);
        let full = sparse_code(&basis, &x, 5).unwrap();
        assert!(pseudo_error(&x, &basis, &full).unwrap() <= 1e-12);
        let zero = DMatrix::zeros(5, 6);
        assert_relative_eq!(pseudo_error(&x, &basis, &zero).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(pseudo_error(&zero, &basis, &zero), Err(Error::ZeroSignal)));
        // Monotone in k for a fixed basis.
        let mut prev = f64::INFINITY;
        for k in 1..=5 {
            let y = sparse_code(&basis, &x, k).unwrap();
            let e = pseudo_error(&x, &basis, &y).unwrap();
            assert!(e <= prev + 1e-12);
            prev = e;
        }
    }

    #[test]
    fn recovers_basis_from_one_sparse_noiseless_data() {
        let g = gen_er_graph(8, 0.4, 21).unwrap();
        let mut cfg = SignalGenConfig::new(80, 1, 0.0, 22);
        cfg.coeff_hi = 1.0;
        let gt = make_ground_truth(g, &cfg).unwrap();
        let lc = LearnConfig { seed: 23, ..LearnConfig::with_k(1) };
        let run = learn_eigenbasis(&gt.signals.clean, &lc).unwrap();
        assert!(run.objective() <= 1e-6 * gt.signals.clean.norm());
    }

    #[test]
    fn objective_trace_never_increases() {
        for trial in 0..100 {
            let n = 3 + (trial as usize % 10);
            let x = random_matrix(n, 2 * n, 700 + trial);
            let lc = LearnConfig {
                seed: trial,
                restarts: 1,
                max_iters: 60,
                ..LearnConfig::with_k(1 + trial as usize % n)
            };
            let run = learn_eigenbasis(&x, &lc).unwrap();
            for w in run.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "trace increased: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn max_iters_one_runs_one_update() {
        let x = random_matrix(5, 10, 9);
        let lc = LearnConfig { max_iters: 1, restarts: 1, ..LearnConfig::with_k(2) };
        let run = learn_eigenbasis(&x, &lc).unwrap();
        assert_eq!(run.iterations, 1);
        assert_eq!(run.objective_trace.len(), 1);
        assert!(!run.converged);
    }

    #[test]
    fn signed_permutation_of_data_does_not_change_objective() {
        // The model cannot distinguish signed column permutations of V, so
        // runs started from different random bases land at comparable
        // objectives on clean data.
        let g = gen_er_graph(6, 0.5, 31).unwrap();
        let gt = make_ground_truth(g, &SignalGenConfig::new(60, 2, 0.0, 32)).unwrap();
        let a = learn_eigenbasis(
            &gt.signals.clean,
            &LearnConfig { seed: 1, ..LearnConfig::with_k(2) },
        )
        .unwrap();
        let b = learn_eigenbasis(
            &gt.signals.clean,
            &LearnConfig { seed: 2, ..LearnConfig::with_k(2) },
        )
        .unwrap();
        assert!((a.objective() - b.objective()).abs() <= 1e-6 * gt.signals.clean.norm().max(1.0));
    }

    #[test]
    fn estimate_sparsity_finds_exact_support_size() {
        let g = gen_er_graph(8, 0.4, 41).unwrap();
        let mut cfg = SignalGenConfig::new(120, 3, 0.0, 42);
        cfg.mode = SparsityMode::Exact;
        let gt = make_ground_truth(g, &cfg).unwrap();
        let lc = LearnConfig { seed: 43, ..LearnConfig::default() };
        let (k, curve) = estimate_sparsity(&gt.signals.clean, &lc).unwrap();
        assert_eq!(k, 3, "curve: {curve:?}");
        assert!(curve[2] <= 1e-6);
        // Each k is optimized independently, so the curve is only roughly
        // monotone; the drop from under- to exactly-specified must be sharp.
        assert!(curve[0] > curve[2] + 1e-3, "curve: {curve:?}");
    }

    #[test]
    fn learn_rejects_bad_inputs() {
        let x = random_matrix(4, 4, 0);
        assert!(learn_eigenbasis(&x, &LearnConfig::default()).is_err()); // Auto
        assert!(learn_eigenbasis(&x, &LearnConfig::with_k(9)).is_err());
        let mut bad = x.clone();
        bad[(0, 0)] = f64::NAN;
        assert!(learn_eigenbasis(&bad, &LearnConfig::with_k(2)).is_err());
    }
}
