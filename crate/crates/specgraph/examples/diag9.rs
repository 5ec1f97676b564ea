//! Scratch: recovery-variant battery on fixed learned bases.

use nalgebra::{DMatrix, DVector};
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{assemble_adjacency_lenient, binarize};
use specgraph::synth::{make_ground_truth, GroundTruth, SignalGenConfig};

fn align(a: &Eigenbasis, b: &Eigenbasis) -> f64 {
    let m = a.matrix().transpose() * b.matrix();
    (0..m.ncols())
        .map(|q| (0..m.nrows()).map(|p| m[(p, q)].abs()).fold(0.0f64, f64::max))
        .sum::<f64>()
        / m.ncols() as f64
}

fn code_nonneg(v: &Eigenbasis, x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let full = v.matrix().transpose() * x;
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

fn alternate_nn(x: &DMatrix<f64>, mut v: Eigenbasis, k: usize, iters: usize) -> Eigenbasis {
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = code_nonneg(&v, x, k);
        v = procrustes_update(x, &y).unwrap();
        let cur = (x - v.matrix() * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            return v;
        }
        obj = cur;
    }
    v
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

fn raw(v: &Eigenbasis, lam: &DVector<f64>) -> DMatrix<f64> {
    let m = v.matrix() * DMatrix::from_diagonal(lam) * v.matrix().transpose();
    (&m + m.transpose()) * 0.5
}

/// closed form: min ||W lam||^2 + eps||lam||^2 s.t. total off-diag weight = n
fn closed_form(v: &Eigenbasis, ridge: f64) -> DVector<f64> {
    let n = v.n();
    let vm = v.matrix();
    let w = DMatrix::from_fn(n, n, |i, q| vm[(i, q)] * vm[(i, q)]);
    let s: Vec<f64> = (0..n).map(|q| vm.column(q).sum()).collect();
    let c = DVector::from_fn(n, |q, _| (s[q] * s[q] - 1.0) / 2.0);
    let mut m = w.transpose() * &w;
    for q in 0..n {
        m[(q, q)] += ridge;
    }
    let sol = m.lu().solve(&c).expect("spd system");
    let scale = n as f64 / c.dot(&sol);
    sol * scale
}

fn spectral_round(v: &Eigenbasis, lam0: &DVector<f64>, tau: f64, rounds: usize) -> DVector<f64> {
    let n = v.n();
    let mut lam = lam0.clone();
    for _ in 0..rounds {
        let a = raw(v, &lam);
        let max = a.iter().cloned().fold(0.0f64, f64::max);
        if max <= 0.0 {
            break;
        }
        let cut = tau * max;
        let mut b = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j && a[(i, j)] > cut {
                    b[(i, j)] = 1.0;
                }
            }
        }
        let vt_bv = v.matrix().transpose() * &b * v.matrix();
        lam = DVector::from_fn(n, |q, _| vt_bv[(q, q)]);
    }
    lam
}

fn lam_true_aligned(gt: &GroundTruth, v: &Eigenbasis) -> DVector<f64> {
    let m = v.matrix().transpose() * gt.basis.matrix();
    let mut lam: DVector<f64> = DVector::zeros(v.n());
    for q in 0..v.n() {
        let p = (0..v.n())
            .max_by(|&a, &b| m[(a, q)].abs().partial_cmp(&m[(b, q)].abs()).unwrap())
            .unwrap();
        if gt.spectrum[q].abs() > lam[p].abs() {
            lam[p] = gt.spectrum[q];
        }
    }
    lam
}

fn best_f(gt: &GroundTruth, v: &Eigenbasis, lam: &DVector<f64>) -> (f64, f64) {
    let a = assemble_adjacency_lenient(v, lam);
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
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 12, 13, 14] {
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;
            let v0 = l3_signed(x, random_orthogonal(20, seed + 2000), 30);
            let v = alternate_nn(x, v0, cfg.k_max, 500);

            let lam_c = lam_true_aligned(&gt, &v);
            let lam_cf = closed_form(&v, 1e-8);
            let lam_cf2 = closed_form(&v, 1e-4);
            let lam_sr = spectral_round(&v, &lam_cf, 0.3, 30);

            let (ct, cf) = best_f(&gt, &v, &lam_c);
            let (t1, f1) = best_f(&gt, &v, &lam_cf);
            let (t2, f2) = best_f(&gt, &v, &lam_cf2);
            let (t3, f3) = best_f(&gt, &v, &lam_sr);
            println!(
                "{model} s={seed} al={:.3}: C={cf:.2}@{ct} cf={f1:.2}@{t1} cfR={f2:.2}@{t2} cf+sr={f3:.2}@{t3}",
                align(&v, &gt.basis)
            );
        }
    }
}
