//! Scratch: edge-toggle hill climb scoring eigenvector match with learned V.

use nalgebra::{DMatrix, DVector};
use specgraph::eig::Eigenbasis;
use specgraph::graph::Graph;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{
    assemble_adjacency_lenient, binarize, build_adjacency_lp, refine_eigenvalues,
    solve_feasibility,
};
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
        gains.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
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
        idx.sort_by(|&a, &b| full[(b, col)].partial_cmp(&full[(a, col)]).unwrap().then(a.cmp(&b)));
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

/// greedy-matched sum of |U^T V| over column pairs
fn match_score(b: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
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
    entries.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut s = 0.0;
    for (val, i, j) in entries {
        if !used_r[i] && !used_c[j] {
            used_r[i] = true;
            used_c[j] = true;
            s += val;
        }
    }
    s
}

fn hill_climb(b0: &DMatrix<f64>, v: &DMatrix<f64>, max_moves: usize) -> (DMatrix<f64>, f64) {
    let n = v.nrows();
    let mut b = b0.clone();
    let mut cur = match_score(&b, v);
    for _ in 0..max_moves {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let old = b[(i, j)];
                let new = 1.0 - old;
                b[(i, j)] = new;
                b[(j, i)] = new;
                let s = match_score(&b, v);
                b[(i, j)] = old;
                b[(j, i)] = old;
                if s > cur + 1e-9 && best.is_none_or(|(_, _, bs)| s > bs) {
                    best = Some((i, j, s));
                }
            }
        }
        match best {
            Some((i, j, s)) => {
                let new = 1.0 - b[(i, j)];
                b[(i, j)] = new;
                b[(j, i)] = new;
                cur = s;
            }
            None => break,
        }
    }
    (b, cur)
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
            let s_true = match_score(&adj_true, &v);

            // init: binarized refine output
            let lp = build_adjacency_lp(&vb, false);
            let rec = solve_feasibility(&lp, &vb, 1e-8).unwrap();
            let lam_r = refine_eigenvalues(&vb, &rec.eigenvalues, 2000).unwrap();
            let a0 = assemble_adjacency_lenient(&vb, &lam_r);
            let g0 = binarize(&a0, 0.3).unwrap();
            let b0 = g0.adjacency();
            let f0 = f_measure(&g0, &gt.graph).unwrap().f_measure;

            let (b1, s1) = hill_climb(&b0, &v, 120);
            let f1 = f_measure(&graph_of(&b1), &gt.graph).unwrap().f_measure;

            // does the climb stay at truth?
            let (bt, st) = hill_climb(&adj_true, &v, 120);
            let ft = f_measure(&graph_of(&bt), &gt.graph).unwrap().f_measure;

            // from empty
            let (be, se) = hill_climb(&DMatrix::zeros(20, 20), &v, 200);
            let fe = f_measure(&graph_of(&be), &gt.graph).unwrap().f_measure;

            println!(
                "{model} s={seed} al={:.3}: sTrue={s_true:.2} | init F={f0:.2} -> climb F={f1:.2} s={s1:.2} | fromTruth F={ft:.2} s={st:.2} | empty F={fe:.2} s={se:.2} [{}ms]",
                align(&v, &gt.basis),
                t0.elapsed().as_millis()
            );
        }
    }
}
