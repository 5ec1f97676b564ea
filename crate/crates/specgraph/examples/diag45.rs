//! Scratch: energy of binary-support truth vs weighted truth (RBF weighting).

use nalgebra::DMatrix;
use specgraph::harness::ExperimentConfig;
use specgraph::metrics::GraphModel;
use specgraph::synth::{make_ground_truth, SignalGenConfig};

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

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        for seed in [11u64, 13, 15] {
            let graph = cfg.generate_graph(model, seed).unwrap();
            let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.3, seed + 1000);
            let gt = make_ground_truth(graph, &scfg).unwrap();
            let x = &gt.signals.noisy;
            let a = gt.graph.adjacency();
            let bin = a.map(|t| if t > 0.0 { 1.0 } else { 0.0 });
            println!(
                "{model} s={seed}: E_weighted={:.0} E_binary={:.0} (min w {:.3})",
                data_energy(&a, x),
                data_energy(&bin, x),
                gt.graph
                    .edges()
                    .iter()
                    .map(|e| e.2)
                    .fold(f64::INFINITY, f64::min),
            );
        }
    }
}
