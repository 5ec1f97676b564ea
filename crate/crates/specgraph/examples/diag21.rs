//! Scratch: convex relaxation min ||offdiag(V' W V)||^2 over box W + DC rounding.

use nalgebra::{DMatrix, DVector};
use specgraph::eig::Eigenbasis;
use specgraph::graph::Graph;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::{f_measure, GraphModel};
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

/// f(W) = ||offdiag(V^T W V)||^2 + beta * sum_i max(0, 1 - rowsum_i)^2
///        + mu * sum_{i<j} 2 * (w_t-dependent linear DC term handled by caller)
fn objective_grad(
    v: &DMatrix<f64>,
    w: &DMatrix<f64>,
    beta: f64,
    lin: &DMatrix<f64>,
) -> (f64, DMatrix<f64>) {
    let n = v.nrows();
    let m = v.transpose() * w * v;
    let mut off = m.clone();
    for q in 0..n {
        off[(q, q)] = 0.0;
    }
    let mut val = off.norm_squared();
    let mut g = v * &off * v.transpose() * 2.0;
    // symmetrize and hollow
    g = (&g + g.transpose()) * 0.5;
    for i in 0..n {
        let rs: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        let short = (1.0 - rs).max(0.0);
        val += beta * short * short;
        for j in 0..n {
            if j != i {
                g[(i, j)] += -beta * short; // d/dw_ij, each unordered pair hit twice
            }
        }
    }
    // linear DC term
    for i in 0..n {
        for j in 0..n {
            if i != j {
                val += 0.5 * lin[(i, j)] * w[(i, j)];
                g[(i, j)] += 0.5 * lin[(i, j)];
            }
        }
    }
    for q in 0..n {
        g[(q, q)] = 0.0;
    }
    (val, g)
}

fn project_box(w: &mut DMatrix<f64>) {
    let n = w.nrows();
    for i in 0..n {
        w[(i, i)] = 0.0;
        for j in 0..n {
            if i != j {
                w[(i, j)] = w[(i, j)].clamp(0.0, 1.0);
            }
        }
    }
}

fn solve_qp(
    v: &DMatrix<f64>,
    w0: &DMatrix<f64>,
    beta: f64,
    lin: &DMatrix<f64>,
    iters: usize,
) -> DMatrix<f64> {
    let mut w = w0.clone();
    let mut step = 0.05f64;
    let (mut f, mut g) = objective_grad(v, &w, beta, lin);
    for _ in 0..iters {
        let mut cand = &w - &g * step;
        project_box(&mut cand);
        let (fc, gc) = objective_grad(v, &cand, beta, lin);
        if fc <= f {
            w = cand;
            f = fc;
            g = gc;
            step *= 1.3;
        } else {
            step *= 0.5;
            if step < 1e-8 {
                break;
            }
        }
    }
    w
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
            let n = 20usize;

            let zeros = DMatrix::zeros(n, n);
            // stage 1: pure convex
            let w0 = DMatrix::from_element(n, n, 0.2);
            let mut w = solve_qp(&v, &w0, 5.0, &zeros, 600);
            let f_relax_obj = objective_grad(&v, &w, 5.0, &zeros).0;
            let adj_true = gt.graph.adjacency();
            let f_true_obj = objective_grad(&v, &adj_true, 5.0, &zeros).0;
            let g_relax = graph_of(&w);
            let f_relax = f_measure(&g_relax, &gt.graph).unwrap().f_measure;

            // stage 2: DC rounds pushing to binary
            let mut fs = String::new();
            for round in 0..6 {
                let mu = 0.05 * (round + 1) as f64;
                let lin = DMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        0.0
                    } else {
                        mu * (1.0 - 2.0 * w[(i, j)])
                    }
                });
                w = solve_qp(&v, &w, 5.0, &lin, 400);
                let f = f_measure(&graph_of(&w), &gt.graph).unwrap().f_measure;
                fs.push_str(&format!(" {f:.2}"));
            }

            println!(
                "{model} s={seed} al={:.3}: obj(W*)={f_relax_obj:.3} obj(truth)={f_true_obj:.3} relaxF={f_relax:.2} | DC:{fs} [{}ms]",
                align(&v, &gt.basis),
                t0.elapsed().as_millis()
            );
        }
    }
}
