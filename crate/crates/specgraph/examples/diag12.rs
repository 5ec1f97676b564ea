//! Scratch: coding variants and SVD shrinkage vs basis alignment.

use nalgebra::{DMatrix, DVector};
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

#[derive(Clone, Copy)]
enum Code {
    TopKPos(usize),
    Thresh(f64),
    Soft(f64, usize),
}

fn code(v: &DMatrix<f64>, x: &DMatrix<f64>, c: Code) -> DMatrix<f64> {
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    for col in 0..full.ncols() {
        match c {
            Code::TopKPos(k) => {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| {
                    full[(b, col)].partial_cmp(&full[(a, col)]).unwrap().then(a.cmp(&b))
                });
                for &i in idx.iter().take(k) {
                    if full[(i, col)] > 0.0 {
                        y[(i, col)] = full[(i, col)];
                    }
                }
            }
            Code::Thresh(t) => {
                for i in 0..n {
                    if full[(i, col)] > t {
                        y[(i, col)] = full[(i, col)];
                    }
                }
            }
            Code::Soft(t, k) => {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| {
                    full[(b, col)].partial_cmp(&full[(a, col)]).unwrap().then(a.cmp(&b))
                });
                for &i in idx.iter().take(k) {
                    if full[(i, col)] > t {
                        y[(i, col)] = full[(i, col)] - t;
                    }
                }
            }
        }
    }
    y
}

fn alternate(x: &DMatrix<f64>, v0: &DMatrix<f64>, c: Code, iters: usize) -> DMatrix<f64> {
    let mut v = v0.clone();
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = code(&v, x, c);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            return v;
        }
        obj = cur;
    }
    v
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

fn shrink(x: &DMatrix<f64>, sigma2: f64) -> DMatrix<f64> {
    let svd = x.clone().svd(true, true);
    let m = x.ncols() as f64;
    let mut s = svd.singular_values.clone();
    for v in s.iter_mut() {
        let clean = (*v * *v - m * sigma2).max(0.0);
        *v = clean.sqrt();
    }
    svd.u.unwrap() * DMatrix::from_diagonal(&DVector::from_column_slice(s.as_slice()))
        * svd.v_t.unwrap()
}

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 12, 13, 14] {
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;
            let xs = shrink(x, 0.3);

            let variants: Vec<(&str, Code, &DMatrix<f64>)> = vec![
                ("topk", Code::TopKPos(5), x),
                ("th.5", Code::Thresh(0.5), x),
                ("th.7", Code::Thresh(0.7), x),
                ("soft", Code::Soft(0.5, 8), x),
                ("topkS", Code::TopKPos(5), &xs),
                ("th.5S", Code::Thresh(0.5), &xs),
            ];
            let mut line = format!("{model} s={seed}:");
            for (name, c, data) in &variants {
                // drift from truth
                let vt = alternate(data, gt.basis.matrix(), *c, 500);
                // attainable from data
                let v0 = random_orthogonal(20, seed * 100 + 7).matrix().clone();
                let vw = l3_signed(data, &v0, 30);
                let vd = alternate(data, &vw, *c, 500);
                line.push_str(&format!(
                    " {name}:{:.3}/{:.3}",
                    align(&vt, &gt.basis),
                    align(&vd, &gt.basis)
                ));
            }
            println!("{line}");
        }
    }
}
