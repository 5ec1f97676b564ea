//! Scratch: fixed-point retrieval + pooled restarts + sweep descent on energy.

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

/// one application of the retrieval map
fn fp_step(b: &DMatrix<f64>, v: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let p = v.transpose() * b * v;
    let lam = DVector::from_fn(v.nrows(), |q, _| p[(q, q)]);
    threshold(&assemble(v, &lam), tau)
}

/// iterate to a fixed point or short cycle; return the best-energy state visited
fn fp_run(
    b0: DMatrix<f64>,
    v: &DMatrix<f64>,
    x: &DMatrix<f64>,
    tau: f64,
    iters: usize,
) -> (f64, DMatrix<f64>) {
    let mut b = b0;
    let mut prev: Option<DMatrix<f64>> = None;
    for _ in 0..iters {
        let nb = fp_step(&b, v, tau);
        if nb == b {
            break;
        }
        if prev.as_ref() == Some(&nb) {
            break; // 2-cycle
        }
        prev = Some(std::mem::replace(&mut b, nb));
    }
    (data_energy(&b, x), b)
}

/// randomized first-improvement sweeps on the data energy
fn sweep_descend(
    b: &mut DMatrix<f64>,
    x: &DMatrix<f64>,
    cur: &mut f64,
    sweeps: usize,
    rng: &mut ChaCha8Rng,
) {
    let n = b.nrows();
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    for _ in 0..sweeps {
        let mut improved = false;
        for k in (1..pairs.len()).rev() {
            let r = rng.random_range(0..=k);
            pairs.swap(k, r);
        }
        for &(i, j) in &pairs {
            toggle(b, i, j);
            let e = data_energy(b, x);
            if e < *cur - 1e-9 {
                *cur = e;
                improved = true;
            } else {
                toggle(b, i, j);
            }
        }
        if !improved {
            break;
        }
    }
}

fn toggle(b: &mut DMatrix<f64>, i: usize, j: usize) {
    let new = 1.0 - b[(i, j)];
    b[(i, j)] = new;
    b[(j, i)] = new;
}

struct Pool {
    items: Vec<(f64, DMatrix<f64>)>,
    cap: usize,
}

impl Pool {
    fn new(cap: usize) -> Self {
        Pool { items: Vec::new(), cap }
    }
    fn offer(&mut self, e: f64, b: DMatrix<f64>) {
        if self.items.iter().any(|(_, c)| c == &b) {
            return;
        }
        self.items.push((e, b));
        self.items.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.items.truncate(self.cap);
    }
    fn best(&self) -> &(f64, DMatrix<f64>) {
        &self.items[0]
    }
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
            let n = 20usize;

            let lp = build_adjacency_lp(&vb, false);
            let rec = solve_feasibility(&lp, &vb, 1e-8).unwrap();
            let lam_ref = refine_eigenvalues(&vb, &rec.eigenvalues, 2000).unwrap();

            let mut rng = ChaCha8Rng::seed_from_u64(seed * 91 + 17);
            let mut pool = Pool::new(6);

            // seeded starts from LP/refined eigenvalues
            for lam in [&lam_ref, &rec.eigenvalues] {
                for tau in [0.25, 0.3, 0.35, 0.4] {
                    let b0 = threshold(&assemble(&v, lam), tau);
                    let (e, b) = fp_run(b0, &v, x, tau, 12);
                    pool.offer(e, b);
                }
            }

            // random restarts: random graphs + perturbations of pool members
            for r in 0..1200 {
                let tau = [0.3, 0.35, 0.4][r % 3];
                let b0 = if r % 2 == 0 {
                    let p = rng.random_range(0.12..0.25);
                    let mut b = DMatrix::zeros(n, n);
                    for i in 0..n {
                        for j in (i + 1)..n {
                            if rng.random::<f64>() < p {
                                b[(i, j)] = 1.0;
                                b[(j, i)] = 1.0;
                            }
                        }
                    }
                    b
                } else {
                    let k = rng.random_range(0..pool.items.len());
                    let mut b = pool.items[k].1.clone();
                    for _ in 0..rng.random_range(6..16) {
                        let i = rng.random_range(0..n);
                        let mut j = rng.random_range(0..n - 1);
                        if j >= i {
                            j += 1;
                        }
                        toggle(&mut b, i, j);
                    }
                    b
                };
                let (e, b) = fp_run(b0, &v, x, tau, 10);
                pool.offer(e, b);
            }

            // polish top candidates: sweep descent alternated with retrieval
            let top: Vec<DMatrix<f64>> =
                pool.items.iter().take(3).map(|(_, b)| b.clone()).collect();
            for b0 in top {
                let mut b = b0;
                let mut e = data_energy(&b, x);
                for _ in 0..2 {
                    sweep_descend(&mut b, x, &mut e, 2, &mut rng);
                    pool.offer(e, b.clone());
                    let tau = 0.35;
                    let (e2, b2) = fp_run(b.clone(), &v, x, tau, 8);
                    if e2 < e {
                        b = b2;
                        e = e2;
                        pool.offer(e, b.clone());
                    } else {
                        break;
                    }
                }
            }

            let (e, b) = pool.best().clone();
            let f1 = f_measure(&graph_of(&b), &gt.graph).unwrap().f_measure;
            let e_true = data_energy(&gt.graph.adjacency(), x);
            sums[mi] += f1;
            cnts[mi] += 1;

            println!(
                "{model} s={seed} al={:.3}: F={f1:.2} (E {e:.0} truth {e_true:.0}) [{}ms]",
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
