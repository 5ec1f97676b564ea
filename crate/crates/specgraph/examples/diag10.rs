//! Scratch: restart consensus — column reliability and weighted recovery.

use nalgebra::{DMatrix, DVector};
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{assemble_adjacency_lenient, binarize};
use specgraph::synth::{make_ground_truth, GroundTruth, SignalGenConfig};
use std::time::Instant;

fn align(a: &Eigenbasis, b: &Eigenbasis) -> f64 {
    let m = a.matrix().transpose() * b.matrix();
    (0..m.ncols())
        .map(|q| (0..m.nrows()).map(|p| m[(p, q)].abs()).fold(0.0f64, f64::max))
        .sum::<f64>()
        / m.ncols() as f64
}

fn code_nonneg(v: &DMatrix<f64>, x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    for c in 0..full.ncols() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| full[(b, c)].partial_cmp(&full[(a, c)]).unwrap().then(a.cmp(&b)));
        for &i in idx.iter().take(k) {
            if full[(i, c)] > 0.0 {
                y[(i, c)] = full[(i, c)];
            }
        }
    }
    y
}

fn alternate_nn(x: &DMatrix<f64>, v0: &Eigenbasis, k: usize, iters: usize) -> (Eigenbasis, f64) {
    let mut v = v0.clone();
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = code_nonneg(v.matrix(), x, k);
        v = procrustes_update(x, &y).unwrap();
        let cur = (x - v.matrix() * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            return (v, cur);
        }
        obj = cur;
    }
    (v, obj)
}

fn l3_signed(x: &DMatrix<f64>, mut v: Eigenbasis, iters: usize) -> Eigenbasis {
    for _ in 0..iters {
        let z = (v.matrix().transpose() * x).map(|t| t * t);
        v = procrustes_update(x, &z).unwrap();
    }
    let mut m = v.matrix().clone();
    let proj = v.matrix().transpose() * x;
    for q in 0..m.ncols() {
        if proj.row(q).sum() < 0.0 {
            m.column_mut(q).neg_mut();
        }
    }
    Eigenbasis::new(m).unwrap()
}

/// Greedy match of `b` columns onto `a` columns by |corr|; returns perm and
/// signed corr per a-column.
fn match_columns(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<(usize, f64)> {
    let n = a.ncols();
    let g = a.transpose() * b;
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            pairs.push((i, j, g[(i, j)]));
        }
    }
    pairs.sort_by(|x, y| y.2.abs().partial_cmp(&x.2.abs()).unwrap());
    let mut out = vec![(usize::MAX, 0.0); n];
    let mut used_b = vec![false; n];
    let mut used_a = vec![false; n];
    for (i, j, c) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out[i] = (j, c);
        }
    }
    out
}

fn closed_form_weighted(v: &DMatrix<f64>, conf: &[f64], rho: f64) -> DVector<f64> {
    let n = v.nrows();
    let w = DMatrix::from_fn(n, n, |i, q| v[(i, q)] * v[(i, q)]);
    let s: Vec<f64> = (0..n).map(|q| v.column(q).sum()).collect();
    let c = DVector::from_fn(n, |q, _| (s[q] * s[q] - 1.0) / 2.0);
    let mut m = w.transpose() * &w;
    for q in 0..n {
        m[(q, q)] += 1e-9 + rho * (1.0 - conf[q]).max(0.0);
    }
    let sol = m.lu().solve(&c).expect("spd");
    let scale = n as f64 / c.dot(&sol);
    sol * scale
}

fn best_f(gt: &GroundTruth, v: &DMatrix<f64>, lam: &DVector<f64>) -> (f64, f64) {
    let vb = Eigenbasis::new(v.clone()).unwrap();
    let a = assemble_adjacency_lenient(&vb, lam);
    let mut best = (0.0, 0.0);
    for tau in [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5] {
        let g = binarize(&a, tau).unwrap();
        let f = f_measure(&g, &gt.graph).unwrap().f_measure;
        if f > best.1 {
            best = (tau, f);
        }
    }
    best
}

fn main() {
    let cfg = ExperimentConfig::default();
    const R: usize = 6;
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 12, 13, 14] {
            let t0 = Instant::now();
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;

            let mut runs = Vec::new();
            for r in 0..R {
                let v0 = l3_signed(x, random_orthogonal(20, seed * 100 + r as u64), 30);
                runs.push(alternate_nn(x, &v0, cfg.k_max, 150));
            }
            let best =
                (0..R).min_by(|&a, &b| runs[a].1.partial_cmp(&runs[b].1).unwrap()).unwrap();
            let vref = runs[best].0.matrix().clone();

            // consensus average + confidence
            let n = 20;
            let mut acc = vref.clone();
            let mut conf = vec![0.0f64; n];
            let mut cnt = vec![1.0f64; n];
            for (r, (vb, _)) in runs.iter().enumerate() {
                if r == best {
                    continue;
                }
                let matched = match_columns(&vref, vb.matrix());
                for q in 0..n {
                    let (j, c) = matched[q];
                    conf[q] += c.abs();
                    cnt[q] += 1.0;
                    let sgn = if c < 0.0 { -1.0 } else { 1.0 };
                    for i in 0..n {
                        acc[(i, q)] += sgn * vb.matrix()[(i, j)];
                    }
                }
            }
            for q in 0..n {
                conf[q] /= cnt[q] - 1.0;
            }
            // polar orthonormalization of the average
            let svd = acc.clone().svd(true, true);
            let vbar = svd.u.unwrap() * svd.v_t.unwrap();

            let lam_ref = closed_form_weighted(&vref, &vec![1.0; n], 0.0);
            let lam_w0 = closed_form_weighted(&vbar, &conf, 0.0);
            let lam_w1 = closed_form_weighted(&vbar, &conf, 1.0);
            let lam_w5 = closed_form_weighted(&vbar, &conf, 5.0);

            let a_best = align(&Eigenbasis::new(vref.clone()).unwrap(), &gt.basis);
            let a_bar = align(&Eigenbasis::new(vbar.clone()).unwrap(), &gt.basis);
            let (t_, f_) = best_f(&gt, &vref, &lam_ref);
            let (ta, fa) = best_f(&gt, &vbar, &lam_w0);
            let (tb, fb) = best_f(&gt, &vbar, &lam_w1);
            let (tc, fc) = best_f(&gt, &vbar, &lam_w5);
            let mc = conf.iter().cloned().fold(f64::INFINITY, f64::min);
            println!(
                "{model} s={seed}: alBest={a_best:.3} alBar={a_bar:.3} minConf={mc:.2} | ref={f_:.2}@{t_} bar0={fa:.2}@{ta} bar1={fb:.2}@{tb} bar5={fc:.2}@{tc} [{}ms]",
                t0.elapsed().as_millis()
            );
        }
    }
}
