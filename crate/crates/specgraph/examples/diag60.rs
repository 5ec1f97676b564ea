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

// Abramowitz & Stegun 7.1.26 erf approximation
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn posterior_code(
    v: &DMatrix<f64>,
    x: &DMatrix<f64>,
    lo: f64,
    hi: f64,
    pi: f64,
    sigma: f64,
) -> DMatrix<f64> {
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    let range = hi - lo;
    for col in 0..full.ncols() {
        for i in 0..n {
            let val = full[(i, col)];
            let a = (lo - val) / sigma;
            let b = (hi - val) / sigma;
            let mass = (cdf(b) - cdf(a)).max(1e-300);
            let p_slab = mass / range;
            let p_spike = phi(val / sigma) / sigma;
            let w = pi * p_slab / (pi * p_slab + (1.0 - pi) * p_spike);
            let e_c = val + sigma * (phi(a) - phi(b)) / mass;
            y[(i, col)] = w * e_c.clamp(lo, hi);
        }
    }
    y
}

fn em_refine(
    x: &DMatrix<f64>,
    v0: &DMatrix<f64>,
    pi: f64,
    sigma: f64,
    iters: usize,
) -> DMatrix<f64> {
    let mut v = v0.clone();
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = posterior_code(&v, x, 1.0, 2.0, pi, sigma);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-8 {
            break;
        }
        obj = cur;
    }
    v
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

/// exact posterior mean coefficients under the generative prior: support of
/// size k ~ U{1..k_max} chosen uniformly, coefficients U[lo,hi]
fn joint_code(
    v: &DMatrix<f64>,
    x: &DMatrix<f64>,
    lo: f64,
    hi: f64,
    k_max: usize,
    sigma: f64,
) -> DMatrix<f64> {
    let full = v.transpose() * x;
    let n = full.nrows();
    let mut y = DMatrix::zeros(n, full.ncols());
    let range = hi - lo;
    // binomial coefficients C(n, k)
    let mut binom = vec![1.0f64; k_max + 1];
    for k in 1..=k_max {
        binom[k] = binom[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    let mut w = vec![0.0f64; n];
    let mut ec = vec![0.0f64; n];
    let mut e = vec![0.0f64; k_max + 1];
    let mut f = vec![0.0f64; k_max + 1];
    for col in 0..full.ncols() {
        for i in 0..n {
            let val = full[(i, col)];
            let a = (lo - val) / sigma;
            let b = (hi - val) / sigma;
            let mass = (cdf(b) - cdf(a)).max(1e-300);
            let slab = mass / range;
            let spike = (phi(val / sigma) / sigma).max(1e-300);
            w[i] = (slab / spike).min(1e30);
            ec[i] = (val + sigma * (phi(a) - phi(b)) / mass).clamp(lo, hi);
        }
        // elementary symmetric polynomials e_k(w)
        e.iter_mut().for_each(|t| *t = 0.0);
        e[0] = 1.0;
        for i in 0..n {
            for j in (1..=k_max).rev() {
                e[j] += w[i] * e[j - 1];
            }
        }
        // posterior over k: P(k) ∝ e_k(w) / C(n, k)
        let mut pk = [0.0f64; 8];
        let mut z = 0.0;
        for k in 1..=k_max {
            pk[k] = e[k] / binom[k];
            z += pk[k];
        }
        for k in 1..=k_max {
            pk[k] /= z;
        }
        for i in 0..n {
            // e_j of w without entry i
            f[0] = 1.0;
            for j in 1..=k_max {
                f[j] = e[j] - w[i] * f[j - 1];
            }
            let mut p_in = 0.0;
            for k in 1..=k_max {
                if e[k] > 0.0 {
                    p_in += pk[k] * (w[i] * f[k - 1] / e[k]).clamp(0.0, 1.0);
                }
            }
            y[(i, col)] = p_in * ec[i];
        }
    }
    y
}

fn em_joint(x: &DMatrix<f64>, v0: &DMatrix<f64>, k_max: usize, sigma: f64, iters: usize) -> DMatrix<f64> {
    let mut v = v0.clone();
    let mut obj = f64::INFINITY;
    for _ in 0..iters {
        let y = joint_code(&v, x, 1.0, 2.0, k_max, sigma);
        v = procrustes_update(x, &y).unwrap().matrix().clone();
        let cur = (x - &v * &y).norm();
        if (obj - cur).abs() <= 1e-8 {
            break;
        }
        obj = cur;
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
    let cut = if tau >= 0.0 {
        tau
    } else {
        let mut max = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j && a[(i, j)] > max {
                    max = a[(i, j)];
                }
            }
        }
        -tau * max
    };
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

fn num_components(b: &DMatrix<f64>) -> usize {
    let n = b.nrows();
    let mut seen = vec![false; n];
    let mut comps = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        comps += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && b[(i, j)] > 0.5 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    comps
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
        // degenerate spectra of disconnected graphs game the match score
        let e = e + 60.0 * (num_components(&b) - 1) as f64;
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


fn weighted(b: &DMatrix<f64>, raw: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| {
        if i != j && b[(i, j)] > 0.5 { raw[(i, j)].clamp(0.75, 1.0) } else { 0.0 }
    })
}

fn fp_step_w(b: &DMatrix<f64>, v: &DMatrix<f64>, raw: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let w = weighted(b, raw);
    let p = v.transpose() * &w * v;
    let lam = DVector::from_fn(v.nrows(), |q, _| p[(q, q)]);
    threshold(&assemble(v, &lam), tau)
}

fn fp_run_w(
    b0: DMatrix<f64>,
    v: &DMatrix<f64>,
    raw: &DMatrix<f64>,
    tau: f64,
    iters: usize,
) -> DMatrix<f64> {
    let mut b = b0;
    let mut prev: Option<DMatrix<f64>> = None;
    for _ in 0..iters {
        let nb = fp_step_w(&b, v, raw, tau);
        if nb == b { break; }
        if prev.as_ref() == Some(&nb) { break; }
        prev = Some(std::mem::replace(&mut b, nb));
    }
    b
}




fn main() {
    let cfg = ExperimentConfig::default();
    // (graph seed, noise seed): good-alignment selection failures
    for (gseed, nseed) in [(2u64, 2001u64), (8, 8008), (3, 3004), (5, 5004), (2, 2004), (2, 2006)] {
        let graph = cfg.generate_graph(GraphModel::Rbf, gseed).unwrap();
        let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, nseed);
        let gt = make_ground_truth(graph, &scfg).unwrap();
        let x = &gt.signals.noisy;
        let mean_p = x.norm_squared() / x.ncols() as f64;
        let sigma = ((mean_p - 7.0) / 20.0).max(0.0001).sqrt();
        let mut v = em_refine(x, &learn_one(x, nseed * 100 + 7), 0.15, sigma, 200);
        let mut vobj = { let y = map_code(&v, x, 1.0, 2.0, 5); (x - &v * &y).norm() };
        for rs in 1..6u64 {
            let vc = em_refine(x, &learn_one(x, nseed * 100 + 7 + rs * 13), 0.15, sigma, 200);
            let y = map_code(&vc, x, 1.0, 2.0, 5);
            let obj = (x - &vc * &y).norm();
            if obj < vobj { vobj = obj; v = vc; }
        }
        let vb = Eigenbasis::new(v.clone()).unwrap();
        let lp = build_adjacency_lp(&vb, false);
        let rec = solve_feasibility(&lp, &vb, 1e-8).unwrap();
        let lam_ref = refine_eigenvalues(&vb, &rec.eigenvalues, 2000).unwrap();
        let fme = |b: &DMatrix<f64>| f_measure(&graph_of(b), &gt.graph).unwrap().f_measure;
        let sc = |b: &DMatrix<f64>| {
            data_energy(b, x) - 60.0 * match_eig(b, &v).0
                + 60.0 * (num_components(b) - 1) as f64
        };
        let descend = |b0: &DMatrix<f64>| -> (f64, DMatrix<f64>) {
            let mut b = b0.clone();
            let mut cur = sc(&b);
            for _ in 0..8 {
                let mut improved = false;
                'outer: for i in 0..20 {
                    for j in (i + 1)..20 {
                        toggle(&mut b, i, j);
                        let e = sc(&b);
                        if e < cur - 1e-9 { cur = e; improved = true; continue 'outer; }
                        toggle(&mut b, i, j);
                    }
                }
                if !improved { break; }
            }
            (cur, b)
        };
        let al = align(&v, &gt.basis);
        // bijective alignment via greedy 1-1 matching
        let bij = match_eig(&DMatrix::<f64>::zeros(20, 20), &v).0; // dummy warm
        let _ = bij;
        let m = (gt.basis.matrix().transpose() * &v).abs();
        let mut used_r = vec![false; 20];
        let mut used_c = vec![false; 20];
        let mut ent: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..20 { for b in 0..20 { ent.push((m[(a, b)], a, b)); } }
        ent.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut albj = 0.0;
        for (val, a, b) in ent {
            if !used_r[a] && !used_c[b] { used_r[a] = true; used_c[b] = true; albj += val; }
        }
        albj /= 20.0;
        // oracle splits: learned V + true spectrum; true V + refined lambda
        let mut f_vlamtrue = 0.0f64;
        let mut f_vtrue = 0.0f64;
        // align true spectrum entries to v columns via match on truth adjacency
        let lam_oracle = match_eig(&gt.graph.adjacency(), &v).1;
        for tau in [0.3f64, 0.4, 0.5, -0.25, -0.3, -0.35] {
            let b1 = threshold(&assemble(&v, &lam_oracle), tau);
            f_vlamtrue = f_vlamtrue.max(fme(&b1));
            let b2 = threshold(&assemble(gt.basis.matrix(), &lam_ref), tau);
            f_vtrue = f_vtrue.max(fme(&b2));
        }
        let mut line = format!(
            "RBF g={gseed} n={nseed} al={al:.3} albij={albj:.3} F(v,lam*)={f_vlamtrue:.2} F(v*,lam)={f_vtrue:.2}:"
        );

        let mut cands: Vec<(f64, f64, DMatrix<f64>)> = Vec::new();
        for lam in [&lam_ref, &rec.eigenvalues] {
            for tau in [0.35f64, 0.45, 0.55, -0.25, -0.3, -0.35, -0.4] {
                let b0 = threshold(&assemble(&v, lam), tau);
                cands.push((sc(&b0), fme(&b0), b0));
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        let fmax = cands.iter().map(|c| c.1).fold(0.0f64, f64::max);
        line += &format!(" seeded Fmax={fmax:.2} top3 pre-fp F=[");
        for c in cands.iter().take(3) { line += &format!("{:.2} ", c.1); }
        line += "] desc-> [";
        for c in cands.iter().take(3) {
            let (s2, b2) = descend(&c.2);
            line += &format!("{:.2}/{:.0} ", fme(&b2), s2);
        }
        let truth_b = gt.graph.adjacency().map(|w| if w > 0.0 { 1.0 } else { 0.0 });
        line += &format!("] sc_truth={:.0}", sc(&truth_b));
        println!("{line}");
    }
}
