//! Scratch: alignment boosters — anneal, consensus, longer warm start.

use nalgebra::DMatrix;
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::GraphModel;
use specgraph::synth::{make_ground_truth, SignalGenConfig};

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

fn soft_alt(x: &DMatrix<f64>, v0: &DMatrix<f64>, th: f64, cap: usize, iters: usize) -> DMatrix<f64> {
    let mut v = v0.clone();
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = soft_code(&v, x, th, cap);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            break;
        }
        obj = cur;
    }
    v
}

fn map_alt(x: &DMatrix<f64>, v0: &DMatrix<f64>, iters: usize) -> (DMatrix<f64>, f64) {
    let mut v = v0.clone();
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = map_code(&v, x, 1.0, 2.0, 5);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            return (v, cur);
        }
        obj = cur;
    }
    (v, obj)
}

fn baseline(x: &DMatrix<f64>, seed: u64) -> (DMatrix<f64>, f64) {
    let v0 = random_orthogonal(20, seed).matrix().clone();
    let vw = l3_signed(x, &v0, 30);
    let vs = soft_alt(x, &vw, 0.5, 8, 300);
    map_alt(x, &vs, 300)
}

/// anneal the soft threshold from low to high before MAP polish
fn annealed(x: &DMatrix<f64>, seed: u64) -> (DMatrix<f64>, f64) {
    let v0 = random_orthogonal(20, seed).matrix().clone();
    let mut v = l3_signed(x, &v0, 30);
    for &(th, cap) in &[(0.3f64, 10usize), (0.45, 9), (0.6, 8), (0.75, 7)] {
        v = soft_alt(x, &v, th, cap, 80);
    }
    map_alt(x, &v, 300)
}

/// greedy match columns of b onto a; returns perm and signs
fn match_columns(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<(usize, f64)> {
    let n = a.ncols();
    let g = a.transpose() * b;
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            pairs.push((i, j, g[(i, j)]));
        }
    }
    pairs.sort_by(|x, y| y.2.abs().total_cmp(&x.2.abs()));
    let mut out = vec![(usize::MAX, 0.0); n];
    let mut ub = vec![false; n];
    let mut ua = vec![false; n];
    for (i, j, c) in pairs {
        if !ua[i] && !ub[j] {
            ua[i] = true;
            ub[j] = true;
            out[i] = (j, c);
        }
    }
    out
}

/// consensus of R restarts: polar of the sign-matched average, then MAP polish
fn consensus(x: &DMatrix<f64>, seed: u64, r: usize) -> (DMatrix<f64>, f64) {
    let mut runs: Vec<(DMatrix<f64>, f64)> = Vec::new();
    for k in 0..r {
        runs.push(baseline(x, seed + 1000 * k as u64));
    }
    let best = (0..r).min_by(|&a, &b| runs[a].1.total_cmp(&runs[b].1)).unwrap();
    let vref = runs[best].0.clone();
    let n = vref.nrows();
    let mut acc = vref.clone();
    for (k, (vb, _)) in runs.iter().enumerate() {
        if k == best {
            continue;
        }
        let matched = match_columns(&vref, vb);
        for q in 0..n {
            let (j, c) = matched[q];
            let sgn = if c < 0.0 { -1.0 } else { 1.0 };
            for i in 0..n {
                acc[(i, q)] += sgn * vb[(i, j)];
            }
        }
    }
    let svd = acc.svd(true, true);
    let vbar = svd.u.unwrap() * svd.v_t.unwrap();
    map_alt(x, &vbar, 300)
}

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 12, 13, 14, 15, 16] {
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;

            let (v1, o1) = baseline(x, seed * 100 + 7);
            let (v2, o2) = annealed(x, seed * 100 + 7);
            let (v3, o3) = consensus(x, seed * 100 + 7, 4);
            // longer warm start variant
            let v0 = random_orthogonal(20, seed * 100 + 7).matrix().clone();
            let vw = l3_signed(x, &v0, 80);
            let (v4, o4) = map_alt(x, &soft_alt(x, &vw, 0.5, 8, 300), 300);

            println!(
                "{model} s={seed}: base={:.3}({o1:.1}) anneal={:.3}({o2:.1}) cons4={:.3}({o3:.1}) l3x80={:.3}({o4:.1})",
                align(&v1, &gt.basis),
                align(&v2, &gt.basis),
                align(&v3, &gt.basis),
                align(&v4, &gt.basis),
            );
        }
    }
}
