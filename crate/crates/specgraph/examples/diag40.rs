//! Scratch: timing/pivot profile of capped random-objective LP solves.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::GraphModel;
use specgraph::simplex::{self, DenseLp, LpOutcome, LpRow, Relation};
use specgraph::synth::{make_ground_truth, SignalGenConfig};
use std::time::Instant;

fn soft_code(v: &DMatrix<f64>, x: &DMatrix<f64>, t: f64, cap: usize) -> DMatrix<f64> {
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    for col in 0..full.ncols() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| full[(b, col)].total_cmp(&full[(a, col)]).then(a.cmp(&b)));
        for &i in idx.iter().take(cap) {
            if full[(i, col)] > t {
                y[(i, col)] = full[(i, col)] - t;
            }
        }
    }
    y
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

fn main() {
    let cfg = ExperimentConfig::default();
    let model = GraphModel::Rbf;
    let seed = 13u64;
    let graph = cfg.generate_graph(model, seed).unwrap();
    let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
    let gt = make_ground_truth(graph, &scfg).unwrap();
    let x = &gt.signals.noisy;
    let v0 = random_orthogonal(20, seed * 100 + 7).matrix().clone();
    let mut v = l3_signed(x, &v0, 30);
    for _ in 0..100 {
        let y = soft_code(&v, x, 0.5, 8);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
    }
    let n = 20usize;
    let col_sums: Vec<f64> = (0..n).map(|q| v.column(q).sum()).collect();
    let delta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.08);
    let mut rows = Vec::new();
    for i in 0..n {
        let coeffs: Vec<f64> = (0..n).map(|q| v[(i, q)] * v[(i, q)]).collect();
        rows.push(LpRow { coeffs: coeffs.clone(), relation: Relation::Le, rhs: delta });
        rows.push(LpRow { coeffs, relation: Relation::Ge, rhs: -delta });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let coeffs: Vec<f64> = (0..n).map(|q| v[(i, q)] * v[(j, q)]).collect();
            rows.push(LpRow { coeffs, relation: Relation::Ge, rhs: -delta });
        }
    }
    for i in 0..n {
        let coeffs: Vec<f64> = (0..n).map(|q| v[(i, q)] * col_sums[q]).collect();
        rows.push(LpRow { coeffs, relation: Relation::Ge, rhs: 1.0 });
    }
    let weight: Vec<f64> = (0..n).map(|q| (col_sums[q] * col_sums[q] - 1.0) / 2.0).collect();
    rows.push(LpRow { coeffs: weight, relation: Relation::Le, rhs: 60.0 });

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut sols: Vec<Vec<f64>> = Vec::new();
    for r in 0..6 {
        let objective: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lp = DenseLp { num_vars: n, objective, rows: rows.clone() };
        let t0 = Instant::now();
        match simplex::solve(&lp, 1e-8) {
            Ok(LpOutcome::Optimal(s)) => {
                println!("r={r}: optimal, pivots={} [{}ms]", s.pivots, t0.elapsed().as_millis());
                sols.push(s.x);
            }
            Ok(LpOutcome::Infeasible(s)) => {
                println!("r={r}: infeasible, pivots={} [{}ms]", s.pivots, t0.elapsed().as_millis());
                sols.push(s.x);
            }
            Err(e) => println!("r={r}: err {e} [{}ms]", t0.elapsed().as_millis()),
        }
    }
    for a in 0..sols.len() {
        for b in (a + 1)..sols.len() {
            let d: f64 = sols[a]
                .iter()
                .zip(&sols[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            print!(" d{a}{b}={d:.2}");
        }
    }
    println!();
}
