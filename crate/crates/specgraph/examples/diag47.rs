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

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 12, 13, 14, 15, 16] {
            let t0 = Instant::now();
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;

            // sigma estimated from total power: E||x||^2 = 7 + n sigma^2 per column
            let mean_p = x.norm_squared() / x.ncols() as f64;
            let sigma = ((mean_p - 7.0) / 20.0).max(0.01).sqrt();
            let pi = 0.15;

            let v = learn_base(x, seed * 100 + 7);
            let al0 = align(&v, &gt.basis);
            let v_em = em_refine(x, &v, pi, sigma, 200);
            let al1 = align(&v_em, &gt.basis);
            let v_ceil = em_refine(x, gt.basis.matrix(), pi, sigma, 200);
            let al2 = align(&v_ceil, &gt.basis);

            println!(
                "{model} s={seed}: base {al0:.3} -> em {al1:.3} | em-from-truth {al2:.3} (sigma {sigma:.3}) [{}ms]",
                t0.elapsed().as_millis()
            );
        }
    }
}
