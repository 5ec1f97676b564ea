//! Scratch diagnostic: stage-by-stage quality breakdown for one trial.

use std::time::Instant;

use nalgebra::DVector;
use specgraph::eig::eig_sym;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{learn_eigenbasis, LearnConfig, Sparsity};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{
    assemble_adjacency_lenient, binarize, build_adjacency_lp, solve_feasibility,
};
use specgraph::synth::{make_ground_truth, SignalGenConfig};

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for noise in [0.0, 0.3] {
            for seed in [11u64, 12, 13] {
                one(&cfg, model, noise, seed);
            }
        }
    }
}

fn one(cfg: &ExperimentConfig, model: GraphModel, noise: f64, seed: u64) {
    let graph = cfg.generate_graph(model, seed).unwrap();
    let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, noise, seed + 1000);
    let gt = make_ground_truth(graph, &scfg).unwrap();

    let lcfg = LearnConfig { k: Sparsity::Fixed(cfg.k_max), seed: seed + 2000, ..cfg.learner.clone() };
    let t0 = Instant::now();
    let run = match learn_eigenbasis(&gt.signals.noisy, &lcfg) {
        Ok(r) => r,
        Err(e) => {
            println!("{model} noise={noise} seed={seed}: LEARN ERR {e}");
            return;
        }
    };
    let t_learn = t0.elapsed().as_millis();

    // alignment: for each true eigenvector, best |corr| against learned columns
    let m = run.basis.matrix().transpose() * gt.basis.matrix();
    let mut align = Vec::new();
    for q in 0..m.ncols() {
        let best = (0..m.nrows()).map(|p| m[(p, q)].abs()).fold(0.0f64, f64::max);
        align.push(best);
    }
    let mean_align = align.iter().sum::<f64>() / align.len() as f64;

    let t1 = Instant::now();
    let lp = build_adjacency_lp(&run.basis, false);
    let rec = match solve_feasibility(&lp, &run.basis, cfg.feasibility_tol) {
        Ok(r) => r,
        Err(e) => {
            println!("{model} noise={noise} seed={seed}: LP ERR {e}");
            return;
        }
    };
    let t_lp = t1.elapsed().as_millis();

    let a = assemble_adjacency_lenient(&run.basis, &rec.eigenvalues);
    let mut line = format!(
        "{model} noise={noise} seed={seed}: obj={:.3} it={} conv={} align={mean_align:.3} \
         lp[{:?} res={:.3} piv={}] t_learn={t_learn}ms t_lp={t_lp}ms F(tau)=",
        run.objective(),
        run.iterations,
        run.converged,
        rec.status,
        rec.residual,
        rec.pivots
    );
    for tau in [0.05, 0.1, 0.2, 0.35, 0.5] {
        let g = binarize(&a, tau).unwrap();
        let s = f_measure(&g, &gt.graph).unwrap();
        line.push_str(&format!(" {tau}:{:.2}", s.f_measure));
    }

    // oracle: true basis through the same LP path
    let (tb, _) = eig_sym(&gt.graph.adjacency()).unwrap();
    let olp = build_adjacency_lp(&tb, false);
    match solve_feasibility(&olp, &tb, cfg.feasibility_tol) {
        Ok(orec) => {
            let oa = assemble_adjacency_lenient(&tb, &orec.eigenvalues);
            let og = binarize(&oa, cfg.tau).unwrap();
            let os = f_measure(&og, &gt.graph).unwrap();
            line.push_str(&format!(
                " | oracle[{:?} res={:.2e} F={:.2}]",
                orec.status, orec.residual, os.f_measure
            ));
        }
        Err(e) => line.push_str(&format!(" | oracle ERR {e}")),
    }
    let _ = DVector::<f64>::zeros(1);
    println!("{line}");
}
