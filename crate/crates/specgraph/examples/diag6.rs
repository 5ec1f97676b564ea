//! Scratch: penalty-variant x init grid for eigenvalue recovery.

use nalgebra::{DMatrix, DVector};
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, sparse_code};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{
    assemble_adjacency_lenient, binarize, build_adjacency_lp, solve_feasibility,
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

fn raw(v: &Eigenbasis, lam: &DVector<f64>) -> DMatrix<f64> {
    let m = v.matrix() * DMatrix::from_diagonal(lam) * v.matrix().transpose();
    (&m + m.transpose()) * 0.5
}

fn refine(v: &Eigenbasis, start: &DVector<f64>, gamma: f64, iters: usize) -> DVector<f64> {
    let n = v.n();
    let vm = v.matrix();
    let penalty = |lam: &DVector<f64>| -> f64 {
        let a = raw(v, lam);
        let mut f = 0.0;
        for i in 0..n {
            f += a[(i, i)] * a[(i, i)];
            let short = 1.0 - (a.row(i).sum() - a[(i, i)]);
            if short > 0.0 {
                f += short * short;
            }
            for j in (i + 1)..n {
                if a[(i, j)] < 0.0 {
                    f += a[(i, j)] * a[(i, j)];
                } else {
                    f += gamma * a[(i, j)];
                }
            }
        }
        f
    };
    let gradient = |lam: &DVector<f64>| -> DVector<f64> {
        let a = raw(v, lam);
        let mut c = DMatrix::zeros(n, n);
        let shorts: Vec<f64> =
            (0..n).map(|i| (1.0 - (a.row(i).sum() - a[(i, i)])).max(0.0)).collect();
        for i in 0..n {
            c[(i, i)] = 2.0 * a[(i, i)];
            for j in (i + 1)..n {
                let mut df = -2.0 * (shorts[i] + shorts[j]);
                if a[(i, j)] < 0.0 {
                    df += 2.0 * a[(i, j)];
                } else {
                    df += gamma;
                }
                c[(i, j)] = 0.5 * df;
                c[(j, i)] = 0.5 * df;
            }
        }
        let cv = &c * vm;
        DVector::from_fn(n, |q, _| vm.column(q).dot(&cv.column(q)))
    };
    let mut lam = start.clone();
    let mut f = penalty(&lam);
    let mut step = 1.0f64;
    for _ in 0..iters {
        let g = gradient(&lam);
        let gn2 = g.norm_squared();
        if gn2 <= 1e-20 {
            break;
        }
        step = (step * 2.0).min(1e3);
        let mut ok = false;
        while step > 1e-14 {
            let cand = &lam - step * &g;
            let fc = penalty(&cand);
            if fc <= f - 0.5 * step * gn2 {
                lam = cand;
                f = fc;
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if !ok {
            break;
        }
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
    for tau in [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5] {
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
            let v = alternate(&gt.signals.noisy, gt.basis.clone(), cfg.k_max, 500);

            let lp = build_adjacency_lp(&v, false);
            let rec = solve_feasibility(&lp, &v, 1e-8).unwrap();
            let lam_c = lam_true_aligned(&gt, &v);

            let mut line = format!("{model} s={seed}: C={:.2}", best_f(&gt, &v, &lam_c).1);
            for (iname, init) in [("lp", &rec.eigenvalues), ("tru", &lam_c)] {
                for gamma in [0.0, 0.1, 0.5, 1.0] {
                    let lam = refine(&v, init, gamma, 2000);
                    let (bt, bf) = best_f(&gt, &v, &lam);
                    line.push_str(&format!(" {iname}/g{gamma}:{bf:.2}@{bt}"));
                }
            }
            println!("{line}");
        }
    }
}
