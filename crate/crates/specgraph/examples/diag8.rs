//! Scratch: nonnegative top-k coding for alignment, plus recovery stack.

use nalgebra::{DMatrix, DVector};
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{
    assemble_adjacency_lenient, binarize, build_adjacency_lp, refine_eigenvalues,
    solve_feasibility,
};
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
    // fix signs so that coefficients come out positive on average
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

fn f_of(gt: &GroundTruth, v: &Eigenbasis, lam: &DVector<f64>, tau: f64) -> f64 {
    let a = assemble_adjacency_lenient(v, lam);
    let g = binarize(&a, tau).unwrap();
    f_measure(&g, &gt.graph).unwrap().f_measure
}

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 12, 13, 14] {
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;

            let v_t = alternate_nn(x, gt.basis.clone(), cfg.k_max, 500);
            let v0 = l3_signed(x, random_orthogonal(20, seed + 2000), 30);
            let v_d = alternate_nn(x, v0, cfg.k_max, 500);

            for (label, v) in [("truNN", v_t), ("l3NN", v_d)] {
                let lp = build_adjacency_lp(&v, false);
                let rec = solve_feasibility(&lp, &v, 1e-8).unwrap();
                let lam_r = refine_eigenvalues(&v, &rec.eigenvalues, 2000).unwrap();
                let mut line = format!(
                    "{model} s={seed} {label:5} al={:.3}: ref={:.2}",
                    align(&v, &gt.basis),
                    f_of(&gt, &v, &lam_r, 0.35)
                );
                for tau in [0.25, 0.3, 0.35] {
                    let lam = spectral_round(&v, &lam_r, tau, 30);
                    line.push_str(&format!(" sr{tau}={:.2}", f_of(&gt, &v, &lam, tau)));
                }
                println!("{line}");
            }
        }
    }
}
