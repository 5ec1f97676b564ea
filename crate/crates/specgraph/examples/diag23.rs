//! Scratch: dissect the RBF recovery failure.

use nalgebra::{DMatrix, DVector};
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::GraphModel;
use specgraph::recover::{build_adjacency_lp, refine_eigenvalues, solve_feasibility};
use specgraph::synth::{make_ground_truth, SignalGenConfig};

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

fn main() {
    let cfg = ExperimentConfig::default();
    for seed in [11u64, 12] {
        let graph = cfg.generate_graph(GraphModel::Rbf, seed).unwrap();
        let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
        let gt = make_ground_truth(graph, &scfg).unwrap();
        let x = &gt.signals.noisy;
        let v = learn_one(x, seed * 100 + 7);
        let vb = Eigenbasis::new(v.clone()).unwrap();
        let n = 20usize;

        // per-column best |corr| with true basis + matched true eigenvalue
        let m = (v.transpose() * gt.basis.matrix()).abs();
        println!("RBF s={seed}: edges={}", gt.graph.edge_count());
        let adj_true = gt.graph.adjacency();
        let proj = v.transpose() * &adj_true * &v;
        let lp = build_adjacency_lp(&vb, false);
        let rec = solve_feasibility(&lp, &vb, 1e-8).unwrap();
        let lam_ref = refine_eigenvalues(&vb, &rec.eigenvalues, 2000).unwrap();
        println!("  q | corr  trueLam  lamC(=vAv)  lamRef   colSum");
        for q in 0..n {
            let p = (0..n).max_by(|&a, &b| m[(q, a)].total_cmp(&m[(q, b)])).unwrap();
            println!(
                "  {q:2} | {:.3} {:7.3} {:9.3} {:8.3} {:7.3}",
                m[(q, p)],
                gt.spectrum[p],
                proj[(q, q)],
                lam_ref[q],
                v.column(q).sum()
            );
        }
        // true spectrum sorted
        let mut sp: Vec<f64> = gt.spectrum.iter().cloned().collect();
        sp.sort_by(|a, b| a.total_cmp(b));
        println!("  true spectrum: {:?}", sp.iter().map(|t| (t * 100.0).round() / 100.0).collect::<Vec<_>>());
    }
}
