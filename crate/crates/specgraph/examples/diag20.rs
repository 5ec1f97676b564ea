//! Scratch: simulated annealing on the eigenvector-match score.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specgraph::eig::Eigenbasis;
use specgraph::graph::Graph;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{build_adjacency_lp, refine_eigenvalues, solve_feasibility};
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

fn learn_one(x: &DMatrix<f64>, seed: u64) -> DMatrix<f64> {
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

fn match_eig(b: &DMatrix<f64>, v: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = b.clone().symmetric_eigen();
    let m = (eig.eigenvectors.transpose() * v).abs();
    let n = m.nrows();
    let mut used_r = vec![false; n];
    let mut used_c = vec![false; n];
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push((m[(i, j)], i, j));
        }
    }
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut s = 0.0;
    let mut lam = DVector::zeros(n);
    for (val, i, j) in entries {
        if !used_r[i] && !used_c[j] {
            used_r[i] = true;
            used_c[j] = true;
            s += val;
            lam[j] = eig.eigenvalues[i];
        }
    }
    (s, lam)
}

fn assemble(v: &DMatrix<f64>, lam: &DVector<f64>) -> DMatrix<f64> {
    let m = v * DMatrix::from_diagonal(lam) * v.transpose();
    (&m + m.transpose()) * 0.5
}

fn threshold(a: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let mut max = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] > max {
                max = a[(i, j)];
            }
        }
    }
    let cut = tau * max;
    DMatrix::from_fn(n, n, |i, j| if i != j && a[(i, j)] > cut { 1.0 } else { 0.0 })
}

fn graph_of(b: &DMatrix<f64>) -> Graph {
    let n = b.nrows();
    let mut es = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if b[(i, j)] > 0.5 {
                es.push((i, j, 1.0));
            }
        }
    }
    Graph::new(n, es).unwrap()
}

fn anneal(
    b0: &DMatrix<f64>,
    v: &DMatrix<f64>,
    iters: usize,
    t_hi: f64,
    t_lo: f64,
    seed: u64,
) -> (DMatrix<f64>, f64) {
    let n = v.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = b0.clone();
    let mut cur = match_eig(&b, v).0;
    let mut best = (cur, b.clone());
    for it in 0..iters {
        let t = t_hi * (t_lo / t_hi).powf(it as f64 / (iters - 1) as f64);
        let i = rng.random_range(0..n - 1);
        let j = rng.random_range(i + 1..n);
        let old = b[(i, j)];
        let new = 1.0 - old;
        b[(i, j)] = new;
        b[(j, i)] = new;
        let s = match_eig(&b, v).0;
        let accept = s >= cur || rng.random::<f64>() < ((s - cur) / t).exp();
        if accept {
            cur = s;
            if s > best.0 {
                best = (s, b.clone());
            }
        } else {
            b[(i, j)] = old;
            b[(j, i)] = old;
        }
    }
    (best.1, best.0)
}

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 12, 13, 14] {
            let t0 = Instant::now();
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;
            let v = learn_one(x, seed * 100 + 7);
            let vb = Eigenbasis::new(v.clone()).unwrap();
            let adj_true = gt.graph.adjacency();
            let s_true = match_eig(&adj_true, &v).0;

            let lp = build_adjacency_lp(&vb, false);
            let rec = solve_feasibility(&lp, &vb, 1e-8).unwrap();
            let lam_ref = refine_eigenvalues(&vb, &rec.eigenvalues, 2000).unwrap();

            // pool best as anneal start
            let mut pool: Option<(f64, DMatrix<f64>)> = None;
            for lam0 in [&lam_ref, &rec.eigenvalues] {
                for tau in [0.2, 0.25, 0.3, 0.35, 0.4] {
                    let mut b = threshold(&assemble(&v, lam0), tau);
                    for _ in 0..10 {
                        let (s, lam) = match_eig(&b, &v);
                        if pool.as_ref().is_none_or(|(ps, _)| s > *ps) {
                            pool = Some((s, b.clone()));
                        }
                        let nb = threshold(&assemble(&v, &lam), tau);
                        if nb == b {
                            break;
                        }
                        b = nb;
                    }
                }
            }
            let (s_pool, b_pool) = pool.unwrap();
            let f_pool = f_measure(&graph_of(&b_pool), &gt.graph).unwrap().f_measure;

            let (b_sa, s_sa) = anneal(&b_pool, &v, 4000, 0.35, 0.02, seed * 17 + 5);
            let f_sa = f_measure(&graph_of(&b_sa), &gt.graph).unwrap().f_measure;

            println!(
                "{model} s={seed} al={:.3}: sTrue={s_true:.2} | pool F={f_pool:.2} s={s_pool:.2} | SA F={f_sa:.2} s={s_sa:.2} [{}ms]",
                align(&v, &gt.basis),
                t0.elapsed().as_millis()
            );
        }
    }
}
