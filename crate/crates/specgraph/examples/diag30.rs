//! Scratch: recovery v3 — pooled candidates + interleaved match/energy polish.

use nalgebra::{DMatrix, DVector};
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

/// negative total coding gain of X in B's eigenbasis (plus const ||X||^2)
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
            gains[i] = (2.0 * val - cl) * cl; // val^2 - (val-cl)^2
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

/// greedy best-improvement toggle descent on data energy
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

fn project_sphere(lam: &DVector<f64>, r2: f64) -> DVector<f64> {
    let n = lam.len();
    let mean = lam.sum() / n as f64;
    let mut c = lam.map(|t| t - mean);
    let norm = c.norm();
    if norm > 1e-12 {
        c *= r2.sqrt() / norm;
    }
    c
}

fn well_obj(v: &DMatrix<f64>, lam: &DVector<f64>, beta: f64) -> (f64, DVector<f64>) {
    let n = v.nrows();
    let a = assemble(v, lam);
    let mut val = 0.0;
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        val += a[(i, i)] * a[(i, i)];
        g[(i, i)] = 2.0 * a[(i, i)];
        let rs: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)]).sum();
        let short = (1.0 - rs).max(0.0);
        val += beta * short * short;
        for j in 0..n {
            if j != i {
                let t = a[(i, j)];
                val += 0.5 * t * t * (t - 1.0) * (t - 1.0);
                g[(i, j)] += t * (t - 1.0) * (2.0 * t - 1.0);
                g[(i, j)] += -2.0 * beta * short;
            }
        }
    }
    let gs = (&g + g.transpose()) * 0.5;
    let gv = &gs * v;
    let grad = DVector::from_fn(n, |q, _| v.column(q).dot(&gv.column(q)));
    (val, grad)
}

fn sphere_descend(
    v: &DMatrix<f64>,
    lam0: &DVector<f64>,
    r2: f64,
    beta: f64,
    iters: usize,
) -> DVector<f64> {
    let mut lam = project_sphere(lam0, r2);
    let (mut f, mut grad) = well_obj(v, &lam, beta);
    let mut step = 0.01f64;
    for _ in 0..iters {
        let mut ok = false;
        for _ in 0..30 {
            let cand = project_sphere(&(&lam - &grad * step), r2);
            let (fc, gc) = well_obj(v, &cand, beta);
            if fc < f - 1e-12 {
                lam = cand;
                f = fc;
                grad = gc;
                step *= 1.5;
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

/// greedy single-toggle climb on the match score
fn climb(b: &mut DMatrix<f64>, v: &DMatrix<f64>, cur: &mut f64, budget: usize) {
    let n = v.nrows();
    for _ in 0..budget {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let old = b[(i, j)];
                b[(i, j)] = 1.0 - old;
                b[(j, i)] = 1.0 - old;
                let s = match_eig(b, v).0;
                b[(i, j)] = old;
                b[(j, i)] = old;
                if s > *cur + 1e-9 && best.is_none_or(|(_, _, bs)| s > bs) {
                    best = Some((i, j, s));
                }
            }
        }
        match best {
            Some((i, j, s)) => {
                let new = 1.0 - b[(i, j)];
                b[(i, j)] = new;
                b[(j, i)] = new;
                *cur = s;
            }
            None => return,
        }
    }
}

/// eigenvalue-swap jump moves, scored by match score
fn jump(b: &DMatrix<f64>, v: &DMatrix<f64>, cur: f64) -> Option<(DMatrix<f64>, f64)> {
    let n = v.nrows();
    let (_, lam) = match_eig(b, v);
    let taus = [0.3, 0.4, 0.5];
    let mut best: Option<(DMatrix<f64>, f64)> = None;
    let mut try_lam = |l: &DVector<f64>, best: &mut Option<(DMatrix<f64>, f64)>| {
        let a = assemble(v, l);
        for &tau in &taus {
            let nb = threshold(&a, tau);
            let (s, _) = match_eig(&nb, v);
            if s > cur + 1e-9 && best.as_ref().is_none_or(|(_, bs)| s > *bs) {
                *best = Some((nb, s));
            }
        }
    };
    try_lam(&lam, &mut best);
    for p in 0..n {
        for q in (p + 1)..n {
            if (lam[p] - lam[q]).abs() < 1e-12 {
                continue;
            }
            let mut l = lam.clone();
            l.swap_rows(p, q);
            try_lam(&l, &mut best);
        }
    }
    for p in 0..n {
        let mut l = lam.clone();
        l[p] = -l[p];
        try_lam(&l, &mut best);
    }
    best
}

/// full recovery: pooled candidates, interleaved polish, energy selection
fn recover_v3(
    v: &DMatrix<f64>,
    x: &DMatrix<f64>,
    lam_lp: &DVector<f64>,
    lam_ref: &DVector<f64>,
) -> DMatrix<f64> {
    let mut cands: Vec<(f64, DMatrix<f64>)> = Vec::new();
    let mut lams: Vec<DVector<f64>> = vec![lam_ref.clone(), lam_lp.clone()];
    for e in [25usize, 35, 45, 55, 65] {
        lams.push(sphere_descend(v, lam_ref, 2.0 * e as f64, 1.0, 250));
    }
    for lam in &lams {
        for tau in [0.25, 0.3, 0.35, 0.4, 0.45] {
            let mut b = threshold(&assemble(v, lam), tau);
            for _ in 0..3 {
                let e = data_energy(&b, x);
                if !cands.iter().any(|(_, c)| c == &b) {
                    cands.push((e, b.clone()));
                }
                let (_, l) = match_eig(&b, v);
                let nb = threshold(&assemble(v, &l), tau);
                if nb == b {
                    break;
                }
                b = nb;
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    cands.truncate(2);

    let mut best_e = f64::INFINITY;
    let mut best_b: Option<DMatrix<f64>> = None;
    for (e0, b0) in cands {
        let mut b = b0.clone();
        let mut e = e0;
        for _ in 0..3 {
            // match-score phase
            let mut s = match_eig(&b, v).0;
            climb(&mut b, v, &mut s, 15);
            if let Some((nb, ns)) = jump(&b, v, s) {
                b = nb;
                s = ns;
                climb(&mut b, v, &mut s, 10);
            }
            // energy phase
            e = data_energy(&b, x);
            if descend(&mut b, x, &mut e, 15) == 0 {
                break;
            }
        }
        e = data_energy(&b, x);
        descend(&mut b, x, &mut e, 20);
        if e < best_e {
            best_e = e;
            best_b = Some(b);
        }
    }
    best_b.unwrap()
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

            let b = recover_v3(&v, x, &rec.eigenvalues, &lam_ref);
            let e_fin = data_energy(&b, x);
            let e_true = data_energy(&gt.graph.adjacency(), x);
            let f1 = f_measure(&graph_of(&b), &gt.graph).unwrap().f_measure;
            sums[mi] += f1;
            cnts[mi] += 1;

            println!(
                "{model} s={seed} al={:.3}: F={f1:.2} (E {e_fin:.0} vs truth {e_true:.0}) [{}ms]",
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
