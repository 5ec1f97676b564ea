//! Scratch: simulated annealing on the data-fit energy.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specgraph::eig::Eigenbasis;
use specgraph::graph::Graph;
use specgraph::harness::ExperimentConfig;
use specgraph::learn::{procrustes_update, random_orthogonal};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{build_adjacency_lp, refine_eigenvalues, solve_feasibility};
use specgraph::synth::{make_ground_truth, SignalGenConfig};
use std::time::Instant;

fn align(a: &DMatrix<f64>, b: &Eigenbasis) -> f64 {
    let m = a.transpose() * b.matrix();
    (0..m.ncols())
        .map(|q| (0..m.nrows()).map(|p| m[(p, q)].abs()).fold(0.0f64, f64::max))
        .sum::<f64>()
        / m.ncols() as f64
}

fn map_code(v: &DMatrix<f64>, x: &DMatrix<f64>, lo: f64, hi: f64, cap: usize) -> DMatrix<f64> {
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    for col in 0..full.ncols() {
        let mut gains: Vec<(f64, usize, f64)> = (0..n)
            .map(|i| {
                let val = full[(i, col)];
                let cl = val.clamp(lo, hi);
                (val * val - (val - cl) * (val - cl), i, cl)
            })
            .collect();
        gains.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (rank, &(g, i, cl)) in gains.iter().take(cap).enumerate() {
            if g > 0.0 || rank == 0 {
                y[(i, col)] = cl;
            }
        }
    }
    y
}

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

fn learn_one(x: &DMatrix<f64>, seed: u64) -> DMatrix<f64> {
    let v0 = random_orthogonal(20, seed).matrix().clone();
    let mut v = l3_signed(x, &v0, 30);
    let mut obj = f64::INFINITY;
    for _ in 0..300 {
        let y = soft_code(&v, x, 0.5, 8);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            break;
        }
        obj = cur;
    }
    obj = f64::INFINITY;
    for _ in 0..300 {
        let y = map_code(&v, x, 1.0, 2.0, 5);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-6 {
            break;
        }
        obj = cur;
    }
    v
}

fn data_energy(b: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    let eig = b.clone().symmetric_eigen();
    let full = eig.eigenvectors.transpose() * x;
    let n = full.nrows();
    let mut total = 0.0;
    let mut gains = [0.0f64; 32];
    for col in 0..full.ncols() {
        for i in 0..n {
            let val = full[(i, col)];
            let mag = val.abs().clamp(1.0, 2.0);
            let cl = if val >= 0.0 { mag } else { -mag };
            gains[i] = (2.0 * val - cl) * cl;
        }
        let mut g = gains[..n].to_vec();
        g.sort_by(|a, b| b.total_cmp(a));
        let mut best = 0.0;
        for (rank, &gv) in g.iter().take(5).enumerate() {
            if gv > 0.0 || rank == 0 {
                best += gv;
            }
        }
        total += best;
    }
    -total
}

fn match_eig(b: &DMatrix<f64>, v: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = b.clone().symmetric_eigen();
    let m = (eig.eigenvectors.transpose() * v).abs();
    let n = m.nrows();
    let mut used_r = vec![false; n];
    let mut used_c = vec![false; n];
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push((m[(i, j)], i, j));
        }
    }
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut s = 0.0;
    let mut lam = DVector::zeros(n);
    for (val, i, j) in entries {
        if !used_r[i] && !used_c[j] {
            used_r[i] = true;
            used_c[j] = true;
            s += val;
            lam[j] = eig.eigenvalues[i];
        }
    }
    (s, lam)
}

fn assemble(v: &DMatrix<f64>, lam: &DVector<f64>) -> DMatrix<f64> {
    let m = v * DMatrix::from_diagonal(lam) * v.transpose();
    (&m + m.transpose()) * 0.5
}

fn threshold(a: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let mut max = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] > max {
                max = a[(i, j)];
            }
        }
    }
    let cut = tau * max;
    DMatrix::from_fn(n, n, |i, j| if i != j && a[(i, j)] > cut { 1.0 } else { 0.0 })
}

fn graph_of(b: &DMatrix<f64>) -> Graph {
    let n = b.nrows();
    let mut es = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if b[(i, j)] > 0.5 {
                es.push((i, j, 1.0));
            }
        }
    }
    Graph::new(n, es).unwrap()
}

fn descend(b: &mut DMatrix<f64>, x: &DMatrix<f64>, cur: &mut f64, budget: usize) -> usize {
    let n = b.nrows();
    let mut moves = 0;
    for _ in 0..budget {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let old = b[(i, j)];
                b[(i, j)] = 1.0 - old;
                b[(j, i)] = 1.0 - old;
                let e = data_energy(b, x);
                b[(i, j)] = old;
                b[(j, i)] = old;
                if e < *cur - 1e-9 && best.is_none_or(|(_, _, be)| e < be) {
                    best = Some((i, j, e));
                }
            }
        }
        match best {
            Some((i, j, e)) => {
                let new = 1.0 - b[(i, j)];
                b[(i, j)] = new;
                b[(j, i)] = new;
                *cur = e;
                moves += 1;
            }
            None => break,
        }
    }
    moves
}

fn toggle(b: &mut DMatrix<f64>, i: usize, j: usize) {
    let new = 1.0 - b[(i, j)];
    b[(i, j)] = new;
    b[(j, i)] = new;
}

fn anneal(
    b: &mut DMatrix<f64>,
    x: &DMatrix<f64>,
    iters: usize,
    t_hi: f64,
    t_lo: f64,
    seed: u64,
) -> (DMatrix<f64>, f64) {
    let n = b.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = data_energy(b, x);
    let mut best = cur;
    let mut best_b = b.clone();
    let cool = (t_lo / t_hi).powf(1.0 / iters as f64);
    let mut t = t_hi;
    for _ in 0..iters {
        let pair = rng.random::<f64>() < 0.4;
        let i1 = rng.random_range(0..n);
        let mut j1 = rng.random_range(0..n - 1);
        if j1 >= i1 {
            j1 += 1;
        }
        toggle(b, i1, j1);
        let mut second: Option<(usize, usize)> = None;
        if pair {
            let i2 = rng.random_range(0..n);
            let mut j2 = rng.random_range(0..n - 1);
            if j2 >= i2 {
                j2 += 1;
            }
            if (i2.min(j2), i2.max(j2)) != (i1.min(j1), i1.max(j1)) {
                toggle(b, i2, j2);
                second = Some((i2, j2));
            }
        }
        let e = data_energy(b, x);
        let accept = e <= cur || rng.random::<f64>() < ((cur - e) / t).exp();
        if accept {
            cur = e;
            if e < best {
                best = e;
                best_b = b.clone();
            }
        } else {
            if let Some((i2, j2)) = second {
                toggle(b, i2, j2);
            }
            toggle(b, i1, j1);
        }
        t *= cool;
    }
    (best_b, best)
}

fn main() {
    let cfg = ExperimentConfig::default();
    let mut sums = [0.0f64; 3];
    let mut cnts = [0usize; 3];
    for (mi, model) in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba].iter().enumerate() {
        for seed in [11u64, 12, 13, 14, 15, 16] {
            let t0 = Instant::now();
            let graph = cfg.generate_graph(*model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;
            let v = learn_one(x, seed * 100 + 7);
            let vb = Eigenbasis::new(v.clone()).unwrap();

            let lp = build_adjacency_lp(&vb, false);
            let rec = solve_feasibility(&lp, &vb, 1e-8).unwrap();
            let lam_ref = refine_eigenvalues(&vb, &rec.eigenvalues, 2000).unwrap();

            // init: best threshold candidate by energy (with one matched-eig reproject)
            let mut init: Option<(f64, DMatrix<f64>)> = None;
            for lam in [&lam_ref, &rec.eigenvalues] {
                for tau in [0.25, 0.3, 0.35, 0.4] {
                    let mut b = threshold(&assemble(&v, lam), tau);
                    for _ in 0..2 {
                        let e = data_energy(&b, x);
                        if init.as_ref().is_none_or(|(be, _)| e < *be) {
                            init = Some((e, b.clone()));
                        }
                        let (_, l) = match_eig(&b, &v);
                        let nb = threshold(&assemble(&v, &l), tau);
                        if nb == b {
                            break;
                        }
                        b = nb;
                    }
                }
            }
            let (_, mut b) = init.unwrap();
            let f0 = f_measure(&graph_of(&b), &gt.graph).unwrap().f_measure;

            let (mut bb, mut e) = anneal(&mut b, x, 6000, 50.0, 3.0, seed * 77 + 5);
            descend(&mut bb, x, &mut e, 30);
            let f1 = f_measure(&graph_of(&bb), &gt.graph).unwrap().f_measure;
            let e_true = data_energy(&gt.graph.adjacency(), x);
            sums[mi] += f1;
            cnts[mi] += 1;

            println!(
                "{model} s={seed} al={:.3}: F {f0:.2} -> {f1:.2} (E {e:.0} vs truth {e_true:.0}) [{}ms]",
                align(&v, &gt.basis),
                t0.elapsed().as_millis()
            );
        }
    }
    println!(
        "MEANS: RBF={:.3} ER={:.3} BA={:.3}",
        sums[0] / cnts[0] as f64,
        sums[1] / cnts[1] as f64,
        sums[2] / cnts[2] as f64
    );
}
