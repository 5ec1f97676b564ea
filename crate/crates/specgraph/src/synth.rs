//! Ground-truth graph generators and the sparse-spectrum signal generator.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::eig::{eig_sym, Eigenbasis};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

pub const DEFAULT_RBF_SIGMA: f64 = 0.5;
pub const DEFAULT_RBF_THRESHOLD: f64 = 0.75;
pub const DEFAULT_ER_P: f64 = 0.2;
/// Regenerations allowed before giving up on an isolated-vertex-free draw.
pub const ISOLATED_RETRY_BUDGET: usize = 100;

/// How the per-column sparsity of generated coefficients is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsityMode {
    /// Uniform over `{1..k_max}`.
    UpToMax,
    /// Every column has exactly `k_max` nonzeros.
    Exact,
}

#[derive(Debug, Clone)]
pub struct SignalGenConfig {
    pub m: usize,
    pub k_max: usize,
    pub coeff_lo: f64,
    pub coeff_hi: f64,
    /// Variance of each additive Gaussian noise entry.
    pub noise_level: f64,
    pub seed: u64,
    pub mode: SparsityMode,
}

impl SignalGenConfig {
    pub fn new(m: usize, k_max: usize, noise_level: f64, seed: u64) -> Self {
        SignalGenConfig {
            m,
            k_max,
            coeff_lo: 1.0,
            coeff_hi: 2.0,
            noise_level,
            seed,
            mode: SparsityMode::UpToMax,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidInput("need at least one signal".into()));
        }
        if self.k_max < 1 || self.k_max > n {
            return Err(Error::SparsityOutOfRange { k: self.k_max, n });
        }
        if !(self.coeff_lo > 0.0 && self.coeff_lo <= self.coeff_hi) {
            return Err(Error::InvalidInput(format!(
                "bad coefficient interval [{}, {}]",
                self.coeff_lo, self.coeff_hi
            )));
        }
        if self.noise_level < 0.0 {
            return Err(Error::InvalidInput("noise level must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Coefficients and the clean/noisy observations they produce.
#[derive(Debug, Clone)]
pub struct SignalSet {
    pub coefficients: DMatrix<f64>,
    pub clean: DMatrix<f64>,
    pub noisy: DMatrix<f64>,
}

/// Everything a synthetic trial needs for scoring and replay.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub graph: Graph,
    pub basis: Eigenbasis,
    pub spectrum: DVector<f64>,
    pub signals: SignalSet,
}

/// Random geometric graph: points uniform in the unit square, Gaussian
/// kernel weights `exp(-d²/2σ²)`, edges kept when the weight exceeds the
/// threshold. Redraws (up to the retry budget) when a vertex ends up
/// isolated.
pub fn gen_rbf_graph(n: usize, sigma: f64, keep_threshold: f64, seed_val: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least two vertices".into()));
    }
    if !(sigma > 0.0) || !(0.0..1.0).contains(&keep_threshold) {
        return Err(Error::InvalidInput(format!(
            "bad RBF parameters sigma={sigma}, keep_threshold={keep_threshold}"
        )));
    }
    retry_non_isolated(seed_val, |sub| {
        let mut rng = ChaCha8Rng::seed_from_u64(sub);
        let points: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = points[i].0 - points[j].0;
                let dy = points[i].1 - points[j].1;
                let w = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
                if w > keep_threshold {
                    edges.push((i, j, w));
                }
            }
        }
        Graph::new(n, edges)
    })
}

/// Erdős–Rényi graph: each pair is independently an edge with probability
/// `p`, unit weight.
pub fn gen_er_graph(n: usize, p: f64, seed_val: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least two vertices".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidInput(format!("bad edge probability {p}")));
    }
    retry_non_isolated(seed_val, |sub| {
        let mut rng = ChaCha8Rng::seed_from_u64(sub);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_range(0.0..1.0) < p {
                    edges.push((i, j, 1.0));
                }
            }
        }
        Graph::new(n, edges)
    })
}

/// Barabási–Albert preferential attachment: starts from the edge (0, 1);
/// each arriving vertex attaches to one existing vertex sampled with
/// probability proportional to its degree. Unit weights, connected tree by
/// construction.
pub fn gen_ba_graph(n: usize, seed_val: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least two vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_val);
    let mut degrees: Vec<u64> = vec![1, 1];
    let mut edges = vec![(0usize, 1usize, 1.0)];
    for v in 2..n {
        let total: u64 = degrees.iter().sum();
        let mut ticket = rng.random_range(0..total);
        let mut target = 0usize;
        for (u, &d) in degrees.iter().enumerate() {
            if ticket < d {
                target = u;
                break;
            }
            ticket -= d;
        }
        edges.push((target, v, 1.0));
        degrees[target] += 1;
        degrees.push(1);
    }
    Graph::new(n, edges)
}

fn retry_non_isolated(seed_val: u64, gen: impl Fn(u64) -> Result<Graph>) -> Result<Graph> {
    for attempt in 0..ISOLATED_RETRY_BUDGET {
        let g = gen(seed::mix(seed_val, attempt as u64))?;
        if !g.has_isolated_vertex() {
            return Ok(g);
        }
    }
    Err(Error::DegenerateGraph { attempts: ISOLATED_RETRY_BUDGET })
}

/// Draws M sparse spectral coefficient columns and the corresponding clean
/// and noisy observations. Per column: sparsity per `cfg.mode`, a uniform
/// random support of that size, nonzeros uniform in `[coeff_lo, coeff_hi]`,
/// then `x = V y` plus i.i.d. zero-mean Gaussian noise with the configured
/// per-entry variance.
pub fn gen_signals(basis: &Eigenbasis, cfg: &SignalGenConfig) -> Result<SignalSet> {
    let n = basis.n();
    cfg.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut coefficients = DMatrix::zeros(n, cfg.m);
    for c in 0..cfg.m {
        let k = match cfg.mode {
            SparsityMode::UpToMax => rng.random_range(1..=cfg.k_max),
            SparsityMode::Exact => cfg.k_max,
        };
        let support = rand::seq::index::sample(&mut rng, n, k);
        for idx in support {
            coefficients[(idx, c)] = rng.random_range(cfg.coeff_lo..=cfg.coeff_hi);
        }
    }
    let clean = basis.matrix() * &coefficients;
    let noise_sd = cfg.noise_level.sqrt();
    let mut noisy = clean.clone();
    if noise_sd > 0.0 {
        // Column-major draw order, fixed by the storage layout.
        for x in noisy.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *x += noise_sd * z;
        }
    }
    Ok(SignalSet { coefficients, clean, noisy })
}

/// Decomposes the graph's adjacency and generates signals on its eigenbasis.
pub fn make_ground_truth(graph: Graph, cfg: &SignalGenConfig) -> Result<GroundTruth> {
    let (basis, spectrum) = eig_sym(&graph.adjacency())?;
    let signals = gen_signals(&basis, cfg)?;
    Ok(GroundTruth { graph, basis, spectrum, signals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rbf_coincident_points_weight_one() {
        // w = exp(0) = 1 > threshold, so coincident points always connect.
        let d: f64 = 0.0;
        let w = (-(d * d) / (2.0 * 0.5f64 * 0.5)).exp();
        assert_eq!(w, 1.0);
    }

    #[test]
    fn rbf_keep_distance_threshold() {
        // exp(-2 d²) = 0.75 at d = sqrt(ln(4/3)/2) ≈ 0.3792.
        let cutoff = ((4.0f64 / 3.0).ln() / 2.0).sqrt();
        assert_relative_eq!(cutoff, 0.37926, epsilon = 5e-5);
        let w_in = (-2.0 * (cutoff - 1e-6f64).powi(2)).exp();
        let w_out = (-2.0 * (cutoff + 1e-6f64).powi(2)).exp();
        assert!(w_in > DEFAULT_RBF_THRESHOLD && w_out <= DEFAULT_RBF_THRESHOLD);
    }

    #[test]
    fn rbf_deterministic() {
        let a = gen_rbf_graph(20, 0.5, 0.75, 99).unwrap();
        let b = gen_rbf_graph(20, 0.5, 0.75, 99).unwrap();
        assert_eq!(a, b);
        assert!(!a.has_isolated_vertex());
    }

    #[test]
    fn er_complete_at_p_one() {
        let g = gen_er_graph(4, 1.0, 0).unwrap();
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn er_expected_edge_count() {
        // p·C(20,2) = 38; mean over seeds within ±5.
        let mut total = 0usize;
        let trials = 200;
        for s in 0..trials {
            total += gen_er_graph(20, 0.2, s).unwrap().edge_count();
        }
        let mean = total as f64 / trials as f64;
        assert!((mean - 38.0).abs() <= 5.0, "mean edge count {mean}");
    }

    #[test]
    fn er_deterministic() {
        assert_eq!(gen_er_graph(20, 0.2, 5).unwrap(), gen_er_graph(20, 0.2, 5).unwrap());
    }

    #[test]
    fn ba_is_a_tree() {
        let g = gen_ba_graph(2, 0).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 1.0)]);
        for s in 0..5 {
            let g = gen_ba_graph(20, s).unwrap();
            assert_eq!(g.edge_count(), 19);
            assert!(g.is_connected());
        }
        assert_eq!(gen_ba_graph(20, 3).unwrap(), gen_ba_graph(20, 3).unwrap());
    }

    #[test]
    fn zero_noise_means_equal_signals() {
        let g = gen_er_graph(8, 0.5, 1).unwrap();
        let gt = make_ground_truth(g, &SignalGenConfig::new(10, 3, 0.0, 2)).unwrap();
        assert_eq!(gt.signals.clean, gt.signals.noisy);
        let residual = gt.basis.matrix() * &gt.signals.coefficients - &gt.signals.clean;
        assert!(residual.iter().all(|x| x.abs() <= 1e-12));
    }

    #[test]
    fn unit_single_coefficient_columns_are_basis_columns() {
        let g = gen_er_graph(6, 0.5, 3).unwrap();
        let mut cfg = SignalGenConfig::new(12, 1, 0.0, 4);
        cfg.coeff_hi = 1.0;
        let gt = make_ground_truth(g, &cfg).unwrap();
        for c in 0..12 {
            let col = gt.signals.clean.column(c);
            let hit = (0..6).any(|q| (col - gt.basis.matrix().column(q)).norm() <= 1e-12);
            assert!(hit, "column {c} is not a basis column");
        }
    }

    #[test]
    fn sparsity_bound_and_frobenius_preserved() {
        let g = gen_er_graph(10, 0.4, 7).unwrap();
        let cfg = SignalGenConfig::new(50, 4, 0.2, 8);
        let gt = make_ground_truth(g, &cfg).unwrap();
        for c in 0..50 {
            let nnz = gt.signals.coefficients.column(c).iter().filter(|x| **x != 0.0).count();
            assert!((1..=4).contains(&nnz));
        }
        assert_relative_eq!(
            gt.signals.clean.norm(),
            gt.signals.coefficients.norm(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn exact_mode_fixes_column_sparsity() {
        let g = gen_er_graph(10, 0.4, 7).unwrap();
        let mut cfg = SignalGenConfig::new(30, 3, 0.0, 9);
        cfg.mode = SparsityMode::Exact;
        let gt = make_ground_truth(g, &cfg).unwrap();
        for c in 0..30 {
            let nnz = gt.signals.coefficients.column(c).iter().filter(|x| **x != 0.0).count();
            assert_eq!(nnz, 3);
        }
    }

    #[test]
    fn noise_sample_variance_matches_level() {
        let g = gen_er_graph(20, 0.3, 11).unwrap();
        let cfg = SignalGenConfig::new(6000, 5, 0.3, 12); // 120k entries
        let gt = make_ground_truth(g, &cfg).unwrap();
        let diff = &gt.signals.noisy - &gt.signals.clean;
        let count = diff.len() as f64;
        let mean = diff.iter().sum::<f64>() / count;
        let var = diff.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / count;
        assert!((var - 0.3).abs() <= 0.03, "sample variance {var}");
    }

    #[test]
    fn config_validation() {
        let g = gen_er_graph(5, 0.9, 0).unwrap();
        let gt = make_ground_truth(g, &SignalGenConfig::new(3, 2, 0.0, 0)).unwrap();
        assert!(gen_signals(&gt.basis, &SignalGenConfig::new(0, 2, 0.0, 0)).is_err());
        assert!(gen_signals(&gt.basis, &SignalGenConfig::new(3, 9, 0.0, 0)).is_err());
        assert!(gen_signals(&gt.basis, &SignalGenConfig::new(3, 2, -1.0, 0)).is_err());
    }
}
