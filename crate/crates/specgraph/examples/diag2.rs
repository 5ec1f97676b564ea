//! Scratch: does an l4 warm start rescue the noisy-basis basin?

use nalgebra::DMatrix;
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal, sparse_code};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{assemble_adjacency_lenient, binarize, build_adjacency_lp, solve_feasibility};
use specgraph::synth::{make_ground_truth, SignalGenConfig};

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
            obj = cur;
            break;
        }
        obj = cur;
    }
    (v, obj)
}

fn l4_iters(x: &DMatrix<f64>, mut v: Eigenbasis, iters: usize) -> Eigenbasis {
    for _ in 0..iters {
        let z = (v.matrix().transpose() * x).map(|t| t * t * t);
        v = procrustes_update(x, &z).unwrap();
    }
    v
}

fn score(gt: &specgraph::synth::GroundTruth, v: &Eigenbasis, tau: f64) -> f64 {
    let lp = build_adjacency_lp(v, false);
    match solve_feasibility(&lp, v, 1e-8) {
        Ok(rec) => {
            let a = assemble_adjacency_lenient(v, &rec.eigenvalues);
            let g = binarize(&a, tau).unwrap();
            f_measure(&g, &gt.graph).unwrap().f_measure
        }
        Err(e) => {
            println!("    LP err: {e}");
            f64::NAN
        }
    }
}

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 12, 13, 14] {
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;

            // true-basis-initialized alternation: is the good basin stable?
            let (v_true, obj_true) = alternate(x, gt.basis.clone(), cfg.k_max, 500);
            // random init
            let v0 = random_orthogonal(20, seed + 2000);
            let (v_rand, obj_rand) = alternate(x, v0.clone(), cfg.k_max, 500);
            // l4 warm start then alternation
            let v_l4 = l4_iters(x, v0, 30);
            let a_l4pre = align(&v_l4, &gt.basis);
            let (v_warm, obj_warm) = alternate(x, v_l4, cfg.k_max, 500);

            println!(
                "{model} seed={seed}: trueinit obj={obj_true:.2} al={:.3} F={:.2} | rand obj={obj_rand:.2} al={:.3} F={:.2} | l4 pre-al={a_l4pre:.3} obj={obj_warm:.2} al={:.3} F={:.2}",
                align(&v_true, &gt.basis),
                score(&gt, &v_true, cfg.tau),
                align(&v_rand, &gt.basis),
                score(&gt, &v_rand, cfg.tau),
                align(&v_warm, &gt.basis),
                score(&gt, &v_warm, cfg.tau),
            );
        }
    }
}
