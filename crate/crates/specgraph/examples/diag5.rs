//! Scratch: does penalty refinement close the gap to the true spectrum?

use nalgebra::{DMatrix, DVector};
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal, sparse_code};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{
    assemble_adjacency_lenient, binarize, build_adjacency_lp, constraint_residual,
    refine_eigenvalues, solve_feasibility,
};
use specgraph::synth::{make_ground_truth, GroundTruth, SignalGenConfig};
use std::time::Instant;

fn align(a: &Eigenbasis, b: &Eigenbasis) -> f64 {
    let m = a.matrix().transpose() * b.matrix();
    (0..m.ncols())
        .map(|q| (0..m.nrows()).map(|p| m[(p, q)].abs()).fold(0.0f64, f64::max))
        .sum::<f64>()
        / m.ncols() as f64
}

fn alternate(x: &DMatrix<f64>, mut v: Eigenbasis, k: usize, iters: usize) -> (Eigenbasis, f64) {
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = sparse_code(&v, x, k).unwrap();
        v = procrustes_update(x, &y).unwrap();
        let cur = (x - v.matrix() * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            return (v, cur);
        }
        obj = cur;
    }
    (v, obj)
}

fn l3_iters(x: &DMatrix<f64>, mut v: Eigenbasis, iters: usize) -> Eigenbasis {
    for _ in 0..iters {
        let z = (v.matrix().transpose() * x).map(|t| t * t);
        v = procrustes_update(x, &z).unwrap();
    }
    v
}

fn f_at(gt: &GroundTruth, v: &Eigenbasis, lam: &DVector<f64>, tau: f64) -> f64 {
    let a = assemble_adjacency_lenient(v, lam);
    let g = binarize(&a, tau).unwrap();
    f_measure(&g, &gt.graph).unwrap().f_measure
}

fn report(label: &str, gt: &GroundTruth, v: &Eigenbasis) {
    let t0 = Instant::now();
    let lp = build_adjacency_lp(v, false);
    let rec = solve_feasibility(&lp, v, 1e-8).unwrap();
    let t_lp = t0.elapsed().as_millis();

    let t1 = Instant::now();
    let lam_r = refine_eigenvalues(v, &rec.eigenvalues, 2000).unwrap();
    let t_r = t1.elapsed().as_millis();
    let lam_z = refine_eigenvalues(v, &DVector::zeros(v.n()), 2000).unwrap();

    let taus = [0.1, 0.2, 0.3, 0.35, 0.4, 0.5];
    let mut line = format!(
        "  {label:5} al={:.3} lp[res={:.3} piv={} {t_lp}ms] ref[res={:.3} {t_r}ms]",
        align(v, &gt.basis),
        rec.residual,
        rec.pivots,
        constraint_residual(v, &lam_r),
    );
    for (name, lam) in [("lp", &rec.eigenvalues), ("ref", &lam_r), ("ref0", &lam_z)] {
        let fs: Vec<String> =
            taus.iter().map(|&t| format!("{:.2}", f_at(gt, v, lam, t))).collect();
        line.push_str(&format!(" {name}:{}", fs.join("/")));
    }
    println!("{line}");
}

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 12, 13, 14] {
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;
            println!("{model} seed={seed} (taus 0.1/0.2/0.3/0.35/0.4/0.5):");

            let (v, _) = alternate(x, gt.basis.clone(), cfg.k_max, 500);
            report("true", &gt, &v);

            let v0 = random_orthogonal(20, seed + 2000);
            let vw = l3_iters(x, v0, 30);
            let (v, _) = alternate(x, vw, cfg.k_max, 500);
            report("l3", &gt, &v);
        }
    }
}
