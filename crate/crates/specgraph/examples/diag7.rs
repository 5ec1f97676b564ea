//! Scratch: alternating projection between the spectral span and binary
//! adjacency matrices ("spectral rounding").

use nalgebra::{DMatrix, DVector};
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal, sparse_code};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{
    assemble_adjacency_lenient, binarize, build_adjacency_lp, refine_eigenvalues,
    solve_feasibility,
};
use specgraph::synth::{make_ground_truth, GroundTruth, SignalGenConfig};

fn alternate(x: &DMatrix<f64>, mut v: Eigenbasis, k: usize, iters: usize) -> Eigenbasis {
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = sparse_code(&v, x, k).unwrap();
        v = procrustes_update(x, &y).unwrap();
        let cur = (x - v.matrix() * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            return v;
        }
        obj = cur;
    }
    v
}

fn l3_iters(x: &DMatrix<f64>, mut v: Eigenbasis, iters: usize) -> Eigenbasis {
    for _ in 0..iters {
        let z = (v.matrix().transpose() * x).map(|t| t * t);
        v = procrustes_update(x, &z).unwrap();
    }
    v
}

fn raw(v: &Eigenbasis, lam: &DVector<f64>) -> DMatrix<f64> {
    let m = v.matrix() * DMatrix::from_diagonal(lam) * v.matrix().transpose();
    (&m + m.transpose()) * 0.5
}

/// Round A to a unit-weight adjacency at cut tau*max, reproject onto the
/// span, repeat.
fn spectral_round(
    v: &Eigenbasis,
    lam0: &DVector<f64>,
    tau: f64,
    rounds: usize,
) -> DVector<f64> {
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

            for (label, v) in [
                ("true", alternate(x, gt.basis.clone(), cfg.k_max, 500)),
                ("l3", alternate(x, l3_iters(x, random_orthogonal(20, seed + 2000), 30), cfg.k_max, 500)),
            ] {
                let lp = build_adjacency_lp(&v, false);
                let rec = solve_feasibility(&lp, &v, 1e-8).unwrap();
                let lam_r = refine_eigenvalues(&v, &rec.eigenvalues, 2000).unwrap();
                let mut line =
                    format!("{model} s={seed} {label:4}: ref={:.2}", f_of(&gt, &v, &lam_r, 0.35));
                for tau in [0.2, 0.3, 0.4] {
                    let lam = spectral_round(&v, &lam_r, tau, 30);
                    line.push_str(&format!(" sr{tau}={:.2}", f_of(&gt, &v, &lam, tau)));
                }
                println!("{line}");
            }
        }
    }
}
