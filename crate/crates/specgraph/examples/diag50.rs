//! Scratch: soft-EM (spike-slab posterior) refinement of the eigenbasis.

use nalgebra::DMatrix;
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::GraphModel;
use specgraph::synth::{make_ground_truth, SignalGenConfig};
use std::time::Instant;

fn align(a: &DMatrix<f64>, b: &Eigenbasis) -> f64 {
    let m = a.transpose() * b.matrix();
    (0..m.ncols())
        .map(|q| (0..m.nrows()).map(|p| m[(p, q)].abs()).fold(0.0f64, f64::max))
        .sum::<f64>()
        / m.ncols() as f64
}

fn map_code(v: &DMatrix<f64>, x: &DMatrix<f64>, lo: f64, hi: f64, cap: usize) -> DMatrix<f64> {
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    for col in 0..full.ncols() {
        let mut gains: Vec<(f64, usize, f64)> = (0..n)
            .map(|i| {
                let val = full[(i, col)];
                let cl = val.clamp(lo, hi);
                (val * val - (val - cl) * (val - cl), i, cl)
            })
            .collect();
        gains.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (rank, &(g, i, cl)) in gains.iter().take(cap).enumerate() {
            if g > 0.0 || rank == 0 {
                y[(i, col)] = cl;
            }
        }
    }
    y
}

fn soft_code(v: &DMatrix<f64>, x: &DMatrix<f64>, t: f64, cap: usize) -> DMatrix<f64> {
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    for col in 0..full.ncols() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| full[(b, col)].total_cmp(&full[(a, col)]).then(a.cmp(&b)));
        for &i in idx.iter().take(cap) {
            if full[(i, col)] > t {
                y[(i, col)] = full[(i, col)] - t;
            }
        }
    }
    y
}

fn l3_signed(x: &DMatrix<f64>, v0: &DMatrix<f64>, iters: usize) -> DMatrix<f64> {
    let mut v = v0.clone();
    for _ in 0..iters {
        let z = (v.transpose() * x).map(|t| t * t);
        v = procrustes_update(x, &z).unwrap().matrix().clone();
    }
    let proj = v.transpose() * x;
    for q in 0..v.ncols() {
        if proj.row(q).sum() < 0.0 {
            v.column_mut(q).neg_mut();
        }
    }
    v
}

fn learn_base(x: &DMatrix<f64>, seed: u64) -> DMatrix<f64> {
    let v0 = random_orthogonal(20, seed).matrix().clone();
    let mut v = l3_signed(x, &v0, 30);
    let mut obj = f64::INFINITY;
    for _ in 0..300 {
        let y = soft_code(&v, x, 0.5, 8);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            break;
        }
        obj = cur;
    }
    obj = f64::INFINITY;
    for _ in 0..300 {
        let y = map_code(&v, x, 1.0, 2.0, 5);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            break;
        }
        obj = cur;
    }
    v
}

// Abramowitz & Stegun 7.1.26 erf approximation
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// posterior mean coefficients under spike-slab prior: slab U[lo,hi], rate pi
fn posterior_code(
    v: &DMatrix<f64>,
    x: &DMatrix<f64>,
    lo: f64,
    hi: f64,
    pi: f64,
    sigma: f64,
) -> DMatrix<f64> {
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    let range = hi - lo;
    for col in 0..full.ncols() {
        for i in 0..n {
            let val = full[(i, col)];
            let a = (lo - val) / sigma;
            let b = (hi - val) / sigma;
            let mass = (cdf(b) - cdf(a)).max(1e-300);
            let p_slab = mass / range;
            let p_spike = phi(val / sigma) / sigma;
            let w = pi * p_slab / (pi * p_slab + (1.0 - pi) * p_spike);
            let e_c = val + sigma * (phi(a) - phi(b)) / mass;
            y[(i, col)] = w * e_c.clamp(lo, hi);
        }
    }
    y
}

fn em_refine(
    x: &DMatrix<f64>,
    v0: &DMatrix<f64>,
    pi: f64,
    sigma: f64,
    iters: usize,
) -> DMatrix<f64> {
    let mut v = v0.clone();
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = posterior_code(&v, x, 1.0, 2.0, pi, sigma);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-8 {
            break;
        }
        obj = cur;
    }
    v
}

/// exact posterior mean coefficients under the generative prior: support of
/// size k ~ U{1..k_max} chosen uniformly, coefficients U[lo,hi]
fn joint_code(
    v: &DMatrix<f64>,
    x: &DMatrix<f64>,
    lo: f64,
    hi: f64,
    k_max: usize,
    sigma: f64,
) -> DMatrix<f64> {
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    let range = hi - lo;
    // binomial coefficients C(n, k)
    let mut binom = vec![1.0f64; k_max + 1];
    for k in 1..=k_max {
        binom[k] = binom[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    let mut w = vec![0.0f64; n];
    let mut ec = vec![0.0f64; n];
    let mut e = vec![0.0f64; k_max + 1];
    let mut f = vec![0.0f64; k_max + 1];
    for col in 0..full.ncols() {
        for i in 0..n {
            let val = full[(i, col)];
            let a = (lo - val) / sigma;
            let b = (hi - val) / sigma;
            let mass = (cdf(b) - cdf(a)).max(1e-300);
            let slab = mass / range;
            let spike = (phi(val / sigma) / sigma).max(1e-300);
            w[i] = (slab / spike).min(1e30);
            ec[i] = (val + sigma * (phi(a) - phi(b)) / mass).clamp(lo, hi);
        }
        // elementary symmetric polynomials e_k(w)
        e.iter_mut().for_each(|t| *t = 0.0);
        e[0] = 1.0;
        for i in 0..n {
            for j in (1..=k_max).rev() {
                e[j] += w[i] * e[j - 1];
            }
        }
        // posterior over k: P(k) ∝ e_k(w) / C(n, k)
        let mut pk = [0.0f64; 8];
        let mut z = 0.0;
        for k in 1..=k_max {
            pk[k] = e[k] / binom[k];
            z += pk[k];
        }
        for k in 1..=k_max {
            pk[k] /= z;
        }
        for i in 0..n {
            // e_j of w without entry i
            f[0] = 1.0;
            for j in 1..=k_max {
                f[j] = e[j] - w[i] * f[j - 1];
            }
            let mut p_in = 0.0;
            for k in 1..=k_max {
                if e[k] > 0.0 {
                    p_in += pk[k] * (w[i] * f[k - 1] / e[k]).clamp(0.0, 1.0);
                }
            }
            y[(i, col)] = p_in * ec[i];
        }
    }
    y
}

fn em_joint(x: &DMatrix<f64>, v0: &DMatrix<f64>, k_max: usize, sigma: f64, iters: usize) -> DMatrix<f64> {
    let mut v = v0.clone();
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = joint_code(&v, x, 1.0, 2.0, k_max, sigma);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-8 {
            break;
        }
        obj = cur;
    }
    v
}

fn em_anneal(x: &DMatrix<f64>, v0: &DMatrix<f64>, pi: f64, sigma: f64) -> DMatrix<f64> {
    let mut v = v0.clone();
    for stage in 0..6 {
        let s = sigma * (2.0 - stage as f64 * 0.2); // 2.0x down to 1.0x
        v = em_refine(x, &v, pi, s, 40);
    }
    em_refine(x, &v, pi, sigma, 200)
}

fn main() {
    let cfg = ExperimentConfig::default();
    for (model, seed) in [
        (GraphModel::Rbf, 11u64),
        (GraphModel::Rbf, 12),
        (GraphModel::Rbf, 13),
        (GraphModel::Rbf, 14),
        (GraphModel::Rbf, 15),
        (GraphModel::Rbf, 16),
        (GraphModel::Ba, 13),
        (GraphModel::Ba, 15),
        (GraphModel::Er, 12),
        (GraphModel::Er, 13),
    ] {
        let t0 = Instant::now();
        let graph = cfg.generate_graph(model, seed).unwrap();
        let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
        let gt = make_ground_truth(graph, &scfg).unwrap();
        let x = &gt.signals.noisy;

        let mean_p = x.norm_squared() / x.ncols() as f64;
        let sigma = ((mean_p - 7.0) / 20.0).max(0.01).sqrt();
        let pi = 0.15;

        let v = learn_base(x, seed * 100 + 7);
        let al_plain = align(&em_refine(x, &v, pi, sigma, 200), &gt.basis);
        let al_joint = align(&em_joint(x, &v, 5, sigma, 200), &gt.basis);
        let al_joint_ceil = align(&em_joint(x, gt.basis.matrix(), 5, sigma, 200), &gt.basis);
        let _ = pi;
        println!(
            "{model} s={seed}: plain {al_plain:.3} joint {al_joint:.3} joint-from-truth {al_joint_ceil:.3} [{}ms]",
            t0.elapsed().as_millis()
        );
    }
}
