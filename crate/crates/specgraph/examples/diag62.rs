use specgraph::harness::ExperimentConfig;
use specgraph::metrics::GraphModel;
fn main() {
    let cfg = ExperimentConfig::default();
    for s in 1u64..=10 {
        let g = cfg.generate_graph(GraphModel::Rbf, s).unwrap();
        let a = g.adjacency();
        let mut deg = vec![0; 20];
        let mut e = 0;
        for i in 0..20 { for j in (i+1)..20 { if a[(i,j)] > 0.0 { e += 1; deg[i]+=1; deg[j]+=1; } } }
        let maxd = deg.iter().max().unwrap();
        println!("graph {s}: |E|={e} maxdeg={maxd}");
    }
}
