//! Scratch: data-fit score (MAP-coding residual in the candidate's eigenbasis).

use nalgebra::{DMatrix, DVector};
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

fn map_code_sgn(v: &DMatrix<f64>, x: &DMatrix<f64>, lo: f64, hi: f64, cap: usize) -> DMatrix<f64> {
    // sign-agnostic MAP coding: allow -[lo,hi] as well (eigenvectors of B have
    // arbitrary sign)
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    for col in 0..full.ncols() {
        let mut gains: Vec<(f64, usize, f64)> = (0..n)
            .map(|i| {
                let val = full[(i, col)];
                let mag = val.abs().clamp(lo, hi);
                let cl = if val >= 0.0 { mag } else { -mag };
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

/// data-fit energy: MAP-coding residual of X in B's eigenbasis (lower better)
fn data_energy(b: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    let eig = b.clone().symmetric_eigen();
    let u = &eig.eigenvectors;
    let y = map_code_sgn(u, x, 1.0, 2.0, 5);
    (x - u * &y).norm_squared()
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

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 13, 14, 16] {
            let t0 = Instant::now();
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;
            let v = learn_one(x, seed * 100 + 7);
            let vb = Eigenbasis::new(v.clone()).unwrap();
            let adj_true = gt.graph.adjacency();

            let lp = build_adjacency_lp(&vb, false);
            let rec = solve_feasibility(&lp, &vb, 1e-8).unwrap();
            let lam_ref = refine_eigenvalues(&vb, &rec.eigenvalues, 2000).unwrap();

            // a few candidates of varying quality
            let b30 = threshold(&assemble(&v, &lam_ref), 0.3);
            let b40 = threshold(&assemble(&v, &lam_ref), 0.4);
            let (s_t, _) = match_eig(&adj_true, &v);
            let (s_30, _) = match_eig(&b30, &v);
            let (s_40, _) = match_eig(&b40, &v);
            let e_t = data_energy(&adj_true, x);
            let e_30 = data_energy(&b30, x);
            let e_40 = data_energy(&b40, x);
            let f30 = f_measure(&graph_of(&b30), &gt.graph).unwrap().f_measure;
            let f40 = f_measure(&graph_of(&b40), &gt.graph).unwrap().f_measure;

            // perturbed truth: remove 3 edges, add 3 wrong ones (deterministic)
            let mut bp = adj_true.clone();
            let mut removed = 0;
            'outer: for i in 0..20 {
                for j in (i + 1)..20 {
                    if bp[(i, j)] > 0.5 {
                        bp[(i, j)] = 0.0;
                        bp[(j, i)] = 0.0;
                        removed += 1;
                        if removed == 3 {
                            break 'outer;
                        }
                    }
                }
            }
            let mut added = 0;
            'outer2: for i in (0..20).rev() {
                for j in ((i + 1)..20).rev() {
                    if bp[(i, j)] < 0.5 {
                        bp[(i, j)] = 1.0;
                        bp[(j, i)] = 1.0;
                        added += 1;
                        if added == 3 {
                            break 'outer2;
                        }
                    }
                }
            }
            let e_p = data_energy(&bp, x);
            let (s_p, _) = match_eig(&bp, &v);

            println!(
                "{model} s={seed} al={:.3}: E(truth)={e_t:.0} E(pert6)={e_p:.0} E(b30)={e_30:.0}[F{f30:.2}] E(b40)={e_40:.0}[F{f40:.2}] | s: T={s_t:.1} p={s_p:.1} b30={s_30:.1} b40={s_40:.1} [{}ms]",
                align(&v, &gt.basis),
                t0.elapsed().as_millis()
            );
        }
    }
}
