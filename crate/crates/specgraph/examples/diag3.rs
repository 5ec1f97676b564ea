//! Scratch: learning-strategy x recovery-variant grid at noise 0.3.

use nalgebra::{DMatrix, DVector};
use specgraph::eig::Eigenbasis;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal, sparse_code};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{assemble_adjacency_lenient, binarize, build_adjacency_lp, solve_feasibility};
use specgraph::simplex::{solve, DenseLp, LpOutcome, LpRow, Relation};
use specgraph::synth::{make_ground_truth, GroundTruth, SignalGenConfig};

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

/// min sum |diag| with hard nonneg + row sums; lambda then aux t.
fn recover_soft_diag(v: &Eigenbasis) -> Option<DVector<f64>> {
    let n = v.n();
    let vm = v.matrix();
    let s: Vec<f64> = (0..n).map(|q| vm.column(q).sum()).collect();
    let mut rows = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut c = vec![0.0; 2 * n];
            for q in 0..n {
                c[q] = vm[(i, q)] * vm[(j, q)];
            }
            rows.push(LpRow { coeffs: c, relation: Relation::Ge, rhs: 0.0 });
        }
    }
    for i in 0..n {
        let mut c = vec![0.0; 2 * n];
        for q in 0..n {
            c[q] = vm[(i, q)] * s[q];
        }
        rows.push(LpRow { coeffs: c, relation: Relation::Ge, rhs: 1.0 });
    }
    for i in 0..n {
        let mut c1 = vec![0.0; 2 * n];
        let mut c2 = vec![0.0; 2 * n];
        for q in 0..n {
            c1[q] = -vm[(i, q)] * vm[(i, q)];
            c2[q] = vm[(i, q)] * vm[(i, q)];
        }
        c1[n + i] = 1.0;
        c2[n + i] = 1.0;
        rows.push(LpRow { coeffs: c1, relation: Relation::Ge, rhs: 0.0 });
        rows.push(LpRow { coeffs: c2, relation: Relation::Ge, rhs: 0.0 });
    }
    let mut objective = vec![0.0; 2 * n];
    for i in 0..n {
        objective[n + i] = 1.0;
    }
    let lp = DenseLp { num_vars: 2 * n, objective, rows };
    match solve(&lp, 1e-8) {
        Ok(LpOutcome::Optimal(sol)) | Ok(LpOutcome::Infeasible(sol)) => {
            Some(DVector::from_vec(sol.x[..n].to_vec()))
        }
        Err(e) => {
            println!("    soft-diag LP err: {e}");
            None
        }
    }
}

fn f_at(gt: &GroundTruth, v: &Eigenbasis, lam: &DVector<f64>, tau: f64) -> f64 {
    let a = assemble_adjacency_lenient(v, lam);
    let g = binarize(&a, tau).unwrap();
    f_measure(&g, &gt.graph).unwrap().f_measure
}

fn report(label: &str, gt: &GroundTruth, v: &Eigenbasis, obj: f64) {
    let lp = build_adjacency_lp(v, false);
    let lam_a = solve_feasibility(&lp, v, 1e-8).ok().map(|r| r.eigenvalues);
    let lam_b = recover_soft_diag(v);
    // ceiling: true spectrum, aligned to the learned basis by best |corr|
    let m = v.matrix().transpose() * gt.basis.matrix();
    let mut lam_c: DVector<f64> = DVector::zeros(v.n());
    for q in 0..v.n() {
        let p = (0..v.n()).max_by(|&a, &b| m[(a, q)].abs().partial_cmp(&m[(b, q)].abs()).unwrap()).unwrap();
        if gt.spectrum[q].abs() > lam_c[p].abs() {
            lam_c[p] = gt.spectrum[q];
        }
    }
    let mut line = format!("  {label:7} obj={obj:6.2} al={:.3} |", align(v, &gt.basis));
    for (name, lam) in [("A", lam_a), ("B", lam_b), ("C", Some(lam_c))] {
        match lam {
            Some(lam) => {
                let taus = [0.1, 0.2, 0.35, 0.5];
                let fs: Vec<f64> = taus.iter().map(|&t| f_at(gt, v, &lam, t)).collect();
                line.push_str(&format!(
                    " {name}: {}",
                    fs.iter().map(|f| format!("{f:.2}")).collect::<Vec<_>>().join("/")
                ));
            }
            None => line.push_str(&format!(" {name}: ----")),
        }
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
            println!("{model} seed={seed} (taus 0.1/0.2/0.35/0.5):");

            let (v, obj) = alternate(x, gt.basis.clone(), cfg.k_max, 500);
            report("true", &gt, &v, obj);

            let v0 = random_orthogonal(20, seed + 2000);
            let vw = l3_iters(x, v0.clone(), 30);
            let (v, obj) = alternate(x, vw, cfg.k_max, 500);
            report("l3", &gt, &v, obj);

            let vw = l3_iters(x, v0.clone(), 100);
            let (v, obj) = alternate(x, vw, cfg.k_max, 500);
            report("l3x100", &gt, &v, obj);
        }
    }
}
