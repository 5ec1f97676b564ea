//! Scratch: true edge counts and energy-vs-density tradeoff per instance.

use specgraph::harness::ExperimentConfig;
use specgraph::metrics::GraphModel;

fn main() {
    let cfg = ExperimentConfig::default();
    for model in [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba] {
        let mut line = format!("{model}: |E| =");
        for seed in [11u64, 12, 13, 14, 15, 16] {
            let graph = cfg.generate_graph(model, seed).unwrap();
            line.push_str(&format!(" {}", graph.edges().len()));
        }
        println!("{line}");
    }
}
