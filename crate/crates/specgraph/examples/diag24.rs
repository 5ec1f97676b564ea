//! Scratch: double-well descent constrained to the sphere ||lam||^2 = 2E, sum lam = 0.

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

/// project lam onto {sum = 0, ||lam||^2 = r2}
fn project_sphere(lam: &DVector<f64>, r2: f64) -> DVector<f64> {
    let n = lam.len();
    let mean = lam.sum() / n as f64;
    let mut c = lam.map(|t| t - mean);
    let norm = c.norm();
    if norm > 1e-12 {
        c *= (r2.sqrt()) / norm;
    }
    c
}

/// P(lam) = sum A_ii^2 + sum_{i<j} w(A_ij) + beta hinge(1-rowsum)^2
fn well_obj(v: &DMatrix<f64>, lam: &DVector<f64>, beta: f64) -> (f64, DVector<f64>) {
    let n = v.nrows();
    let a = assemble(v, lam);
    let mut val = 0.0;
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        val += a[(i, i)] * a[(i, i)];
        g[(i, i)] = 2.0 * a[(i, i)];
        let rs: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)]).sum();
        let short = (1.0 - rs).max(0.0);
        val += beta * short * short;
        for j in 0..n {
            if j != i {
                let t = a[(i, j)];
                val += 0.5 * t * t * (t - 1.0) * (t - 1.0);
                g[(i, j)] += t * (t - 1.0) * (2.0 * t - 1.0);
                g[(i, j)] += -2.0 * beta * short;
            }
        }
    }
    let gs = (&g + g.transpose()) * 0.5;
    let gv = &gs * v;
    let grad = DVector::from_fn(n, |q, _| v.column(q).dot(&gv.column(q)));
    (val, grad)
}

fn sphere_descend(
    v: &DMatrix<f64>,
    lam0: &DVector<f64>,
    r2: f64,
    beta: f64,
    iters: usize,
) -> (DVector<f64>, f64) {
    let mut lam = project_sphere(lam0, r2);
    let (mut f, mut grad) = well_obj(v, &lam, beta);
    let mut step = 0.01f64;
    for _ in 0..iters {
        let mut ok = false;
        for _ in 0..30 {
            let cand = project_sphere(&(&lam - &grad * step), r2);
            let (fc, gc) = well_obj(v, &cand, beta);
            if fc < f - 1e-12 {
                lam = cand;
                f = fc;
                grad = gc;
                step *= 1.5;
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if !ok {
            break;
        }
    }
    (lam, f)
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
            let e_true = gt.graph.edge_count();

            let lp = build_adjacency_lp(&vb, false);
            let rec = solve_feasibility(&lp, &vb, 1e-8).unwrap();
            let lam_ref = refine_eigenvalues(&vb, &rec.eigenvalues, 2000).unwrap();

            // oracle C for reference
            let proj = v.transpose() * &adj_true * &v;
            let lam_c = DVector::from_fn(20, |q, _| proj[(q, q)]);

            // descend at true E from refine init and from C init
            let r2 = 2.0 * e_true as f64;
            let (l1, p1) = sphere_descend(&v, &lam_ref, r2, 1.0, 800);
            let (l2, p2) = sphere_descend(&v, &lam_c, r2, 1.0, 800);
            let (pc, _) = well_obj(&v, &lam_c, 1.0);

            let fb = |l: &DVector<f64>| {
                let b = threshold(&assemble(&v, l), 0.5);
                f_measure(&graph_of(&b), &gt.graph).unwrap().f_measure
            };
            // E sweep from refine init, pick by penalty then match score
            let mut sweep = String::new();
            for e in [30usize, 40, 50, 60, 70] {
                let (l, p) = sphere_descend(&v, &lam_ref, 2.0 * e as f64, 1.0, 800);
                let b = threshold(&assemble(&v, &l), 0.5);
                let (s, _) = match_eig(&b, &v);
                sweep.push_str(&format!(" E{e}:F{:.2}/P{p:.1}/s{s:.1}", fb(&l)));
            }

            println!(
                "{model} s={seed} al={:.3} E={e_true} sTrue={s_true:.1}: C F={:.2} P={pc:.1} | sphRef F={:.2} P={p1:.1} | sphC F={:.2} P={p2:.1} |{sweep} [{}ms]",
                align(&v, &gt.basis),
                fb(&lam_c),
                fb(&l1),
                fb(&l2),
                t0.elapsed().as_millis()
            );
        }
    }
}
