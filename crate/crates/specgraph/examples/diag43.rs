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

/// concentration search state: maximize N(A) = sum_q (v_q' A v_q)^2 at fixed
/// edge count, with O(n) incremental swap evaluation via the field y.
struct Conc {
    pairs: Vec<(usize, usize)>,
    c: Vec<Vec<f64>>, // c[e][q] = 2 v_iq v_jq
    cnorm: Vec<f64>,
}

impl Conc {
    fn new(v: &DMatrix<f64>) -> Self {
        let n = v.nrows();
        let mut pairs = Vec::new();
        let mut c = Vec::new();
        let mut cnorm = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let ce: Vec<f64> = (0..n).map(|q| 2.0 * v[(i, q)] * v[(j, q)]).collect();
                cnorm.push(ce.iter().map(|t| t * t).sum());
                pairs.push((i, j));
                c.push(ce);
            }
        }
        Conc { pairs, c, cnorm }
    }

    fn field(&self, edges: &[usize]) -> Vec<f64> {
        let nq = self.c[0].len();
        let mut y = vec![0.0; nq];
        for &e in edges {
            for q in 0..nq {
                y[q] += self.c[e][q];
            }
        }
        y
    }

    /// greedy construction of an L-edge set maximizing N
    fn greedy(&self, l: usize) -> Vec<usize> {
        let nq = self.c[0].len();
        let ne = self.c.len();
        let mut y = vec![0.0; nq];
        let mut used = vec![false; ne];
        let mut edges = Vec::with_capacity(l);
        for _ in 0..l {
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            for g in 0..ne {
                if used[g] {
                    continue;
                }
                let dot: f64 = (0..nq).map(|q| y[q] * self.c[g][q]).sum();
                let gain = 2.0 * dot + self.cnorm[g];
                if gain > best.0 {
                    best = (gain, g);
                }
            }
            let g = best.1;
            used[g] = true;
            edges.push(g);
            for q in 0..nq {
                y[q] += self.c[g][q];
            }
        }
        edges
    }

    /// best-swap local search at fixed cardinality; returns final N
    fn swap_descent(&self, edges: &mut Vec<usize>, sweeps: usize) -> f64 {
        let nq = self.c[0].len();
        let ne = self.c.len();
        let mut y = self.field(edges);
        let mut used = vec![false; ne];
        for &e in edges.iter() {
            used[e] = true;
        }
        let mut n_cur: f64 = y.iter().map(|t| t * t).sum();
        for _ in 0..sweeps {
            let mut best: Option<(f64, usize, usize)> = None;
            for (slot, &f) in edges.iter().enumerate() {
                let yf: Vec<f64> = (0..nq).map(|q| y[q] - self.c[f][q]).collect();
                let nf: f64 = yf.iter().map(|t| t * t).sum();
                for g in 0..ne {
                    if used[g] {
                        continue;
                    }
                    let dot: f64 = (0..nq).map(|q| yf[q] * self.c[g][q]).sum();
                    let cand = nf + 2.0 * dot + self.cnorm[g];
                    if cand > n_cur + 1e-9 && best.is_none_or(|(b, _, _)| cand > b) {
                        best = Some((cand, slot, g));
                    }
                }
            }
            match best {
                Some((cand, slot, g)) => {
                    let f = edges[slot];
                    used[f] = false;
                    used[g] = true;
                    edges[slot] = g;
                    for q in 0..nq {
                        y[q] += self.c[g][q] - self.c[f][q];
                    }
                    n_cur = cand;
                }
                None => break,
            }
        }
        n_cur
    }

    fn to_matrix(&self, edges: &[usize], n: usize) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(n, n);
        for &e in edges {
            let (i, j) = self.pairs[e];
            b[(i, j)] = 1.0;
            b[(j, i)] = 1.0;
        }
        b
    }

    fn score(&self, b: &DMatrix<f64>) -> f64 {
        let edges: Vec<usize> = self
            .pairs
            .iter()
            .enumerate()
            .filter(|&(_, &(i, j))| b[(i, j)] > 0.5)
            .map(|(e, _)| e)
            .collect();
        self.field(&edges).iter().map(|t| t * t).sum()
    }
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
        // keep the pool diverse: drop near-duplicates, keeping the better one
        for k in 0..self.items.len() {
            let (ke, kb) = &self.items[k];
            let ham: f64 = (kb - &b).abs().sum() / 2.0;
            if ham < 4.0 {
                if e < *ke {
                    self.items[k] = (e, b);
                    self.items.sort_by(|a, b| a.0.total_cmp(&b.0));
                }
                return;
            }
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

            // fixed-cardinality concentration search across an edge-count grid
            let conc = Conc::new(&v);
            let ne = conc.c.len();
            let n_true = conc.score(&gt.graph.adjacency());
            let l_true = gt.graph.edges().len();
            let mut near_line = String::new();
            for l in (12..=90).step_by(6) {
                let mut best_n = f64::NEG_INFINITY;
                let mut best_edges: Vec<usize> = Vec::new();
                for start in 0..8 {
                    let mut edges = if start == 0 {
                        conc.greedy(l)
                    } else {
                        let mut idx: Vec<usize> = (0..ne).collect();
                        for k in (1..ne).rev() {
                            let r = rng.random_range(0..=k);
                            idx.swap(k, r);
                        }
                        idx.truncate(l);
                        idx
                    };
                    let score = conc.swap_descent(&mut edges, 60);
                    if score > best_n {
                        best_n = score;
                        best_edges = edges;
                    }
                }
                let b = conc.to_matrix(&best_edges, n);
                let e = data_energy(&b, x);
                pool.offer(e, b.clone());
                let (e2, b2) = fp_run(b, &v, x, 0.35, 8);
                pool.offer(e2, b2);
                if (l as i64 - l_true as i64).unsigned_abs() as usize <= 3 {
                    let fl = f_measure(&graph_of(&conc.to_matrix(&best_edges, n)), &gt.graph)
                        .unwrap()
                        .f_measure;
                    near_line = format!(
                        "L={l} (true {l_true}): N {best_n:.1} vs N_true {n_true:.1}, F_L={fl:.2}"
                    );
                }
            }
            println!("    {near_line}");

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
            let s_true = match_eig(&gt.graph.adjacency(), &v).0;
            sums[mi] += f1;
            cnts[mi] += 1;

            println!(
                "{model} s={seed} al={:.3}: F={f1:.2} (E {e:.0} truth {e_true:.0} s_true {s_true:.2}) [{}ms]",
                align(&v, &gt.basis),
                t0.elapsed().as_millis()
            );
            for (pe, pb) in &pool.items {
                let pf = f_measure(&graph_of(pb), &gt.graph).unwrap().f_measure;
                let ps = match_eig(pb, &v).0;
                let edges: f64 = pb.sum() / 2.0;
                println!("    pool E={pe:.0} s={ps:.2} F={pf:.2} |E|={edges:.0}");
            }
        }
    }
    println!(
        "MEANS: RBF={:.3} ER={:.3} BA={:.3}",
        sums[0] / cnts[0] as f64,
        sums[1] / cnts[1] as f64,
        sums[2] / cnts[2] as f64
    );
}
