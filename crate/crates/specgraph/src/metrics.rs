//! Edge-set precision/recall/F-measure and per-cell aggregation.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeScore {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Both edge sets were empty; scores are vacuously perfect.
    pub vacuous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphModel {
    Rbf,
    Er,
    Ba,
}

impl GraphModel {
    pub const ALL: [GraphModel; 3] = [GraphModel::Rbf, GraphModel::Er, GraphModel::Ba];
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GraphModel::Rbf => "RBF",
            GraphModel::Er => "ER",
            GraphModel::Ba => "BA",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for GraphModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RBF" => Ok(GraphModel::Rbf),
            "ER" => Ok(GraphModel::Er),
            "BA" => Ok(GraphModel::Ba),
            other => Err(Error::Config(format!("unknown graph model: {other}"))),
        }
    }
}

/// One scored pipeline run, with everything needed for replay.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub graph_model: GraphModel,
    pub noise_level: f64,
    pub k_estimate: usize,
    pub score: EdgeScore,
    pub seed: u64,
    pub runtime_ms: u64,
}

/// Compares edge sets as unordered vertex pairs, ignoring weights.
pub fn f_measure(learned: &Graph, truth: &Graph) -> Result<EdgeScore> {
    if learned.n() != truth.n() {
        return Err(Error::DimensionMismatch(format!(
            "learned graph has {} vertices, truth has {}",
            learned.n(),
            truth.n()
        )));
    }
    let lset = learned.edge_pairs();
    let tset = truth.edge_pairs();
    if lset.is_empty() && tset.is_empty() {
        return Ok(EdgeScore {
            precision: 1.0,
            recall: 1.0,
            f_measure: 1.0,
            true_positives: 0,
            false_positives: 0,
            false_negatives: 0,
            vacuous: true,
        });
    }
    let tp = lset.intersection(&tset).count();
    let fp = lset.len() - tp;
    let fn_ = tset.len() - tp;
    let precision = if lset.is_empty() { 0.0 } else { tp as f64 / lset.len() as f64 };
    let recall = if tset.is_empty() { 0.0 } else { tp as f64 / tset.len() as f64 };
    let f = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(EdgeScore {
        precision,
        recall,
        f_measure: f,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        vacuous: false,
    })
}

/// Mean/stddev/count of F-measure per (model, noise level) cell, ordered by
/// (model, noise). Standard deviation is the population form, so a single
/// record reports zero spread.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub model: GraphModel,
    pub noise_level: f64,
    pub mean_f: f64,
    pub stddev_f: f64,
    pub count: usize,
}

pub fn aggregate(records: &[TrialRecord]) -> Result<Vec<CellSummary>> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no trial records to aggregate".into()));
    }
    let mut cells: Vec<(GraphModel, f64, Vec<f64>)> = Vec::new();
    for rec in records {
        match cells
            .iter_mut()
            .find(|(m, nl, _)| *m == rec.graph_model && *nl == rec.noise_level)
        {
            Some((_, _, fs)) => fs.push(rec.score.f_measure),
            None => cells.push((rec.graph_model, rec.noise_level, vec![rec.score.f_measure])),
        }
    }
    cells.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite noise levels"));
    Ok(cells
        .into_iter()
        .map(|(model, noise_level, fs)| {
            let count = fs.len();
            let mean = fs.iter().sum::<f64>() / count as f64;
            let var = fs.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / count as f64;
            CellSummary { model, noise_level, mean_f: mean, stddev_f: var.sqrt(), count }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rec(model: GraphModel, noise: f64, f: f64) -> TrialRecord {
        TrialRecord {
            graph_model: model,
            noise_level: noise,
            k_estimate: 5,
            score: EdgeScore {
                precision: f,
                recall: f,
                f_measure: f,
                true_positives: 0,
                false_positives: 0,
                false_negatives: 0,
                vacuous: false,
            },
            seed: 0,
            runtime_ms: 0,
        }
    }

    #[test]
    fn identical_graphs_score_one() {
        let g = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = f_measure(&g, &g).unwrap();
        assert_eq!((s.precision, s.recall, s.f_measure), (1.0, 1.0, 1.0));
        assert!(!s.vacuous);
    }

    #[test]
    fn half_overlap() {
        let learned = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let truth = Graph::new(3, [(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
        let s = f_measure(&learned, &truth).unwrap();
        assert_relative_eq!(s.precision, 0.5);
        assert_relative_eq!(s.recall, 0.5);
        assert_relative_eq!(s.f_measure, 0.5);
        assert_eq!((s.true_positives, s.false_positives, s.false_negatives), (1, 1, 1));
    }

    #[test]
    fn empty_learned_scores_zero() {
        let learned = Graph::new(3, []).unwrap();
        let truth = Graph::new(3, [(0, 1, 1.0)]).unwrap();
        let s = f_measure(&learned, &truth).unwrap();
        assert_eq!(s.f_measure, 0.0);
    }

    #[test]
    fn both_empty_is_vacuously_perfect() {
        let g = Graph::new(3, []).unwrap();
        let s = f_measure(&g, &g).unwrap();
        assert_eq!(s.f_measure, 1.0);
        assert!(s.vacuous);
    }

    #[test]
    fn vertex_count_mismatch_errors() {
        let a = Graph::new(3, []).unwrap();
        let b = Graph::new(4, []).unwrap();
        assert!(f_measure(&a, &b).is_err());
    }

    #[test]
    fn swapping_sides_swaps_precision_and_recall() {
        let a = Graph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let b = Graph::new(4, [(0, 1, 1.0), (0, 3, 1.0)]).unwrap();
        let ab = f_measure(&a, &b).unwrap();
        let ba = f_measure(&b, &a).unwrap();
        assert_relative_eq!(ab.precision, ba.recall);
        assert_relative_eq!(ab.recall, ba.precision);
        assert_relative_eq!(ab.f_measure, ba.f_measure);
    }

    #[test]
    fn relabeling_is_invariant() {
        // Apply the permutation (0 1 2 3) -> (2 0 3 1) to both graphs.
        let perm = [2usize, 0, 3, 1];
        let a = Graph::new(4, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let b = Graph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let relabel = |g: &Graph| {
            Graph::new(4, g.edges().iter().map(|&(i, j, w)| (perm[i], perm[j], w))).unwrap()
        };
        let before = f_measure(&a, &b).unwrap();
        let after = f_measure(&relabel(&a), &relabel(&b)).unwrap();
        assert_eq!(before.f_measure, after.f_measure);
    }

    #[test]
    fn aggregate_cells() {
        assert!(aggregate(&[]).is_err());
        let single = aggregate(&[rec(GraphModel::Rbf, 0.3, 0.9)]).unwrap();
        assert_eq!(single.len(), 1);
        assert_relative_eq!(single[0].mean_f, 0.9);
        assert_eq!(single[0].stddev_f, 0.0);

        let cells = aggregate(&[
            rec(GraphModel::Er, 0.3, 0.0),
            rec(GraphModel::Er, 0.3, 1.0),
            rec(GraphModel::Rbf, 0.1, 0.5),
        ])
        .unwrap();
        assert_eq!(cells.len(), 2);
        // Ordered by (model, noise): RBF < ER in enum order.
        assert_eq!(cells[0].model, GraphModel::Rbf);
        assert_relative_eq!(cells[1].mean_f, 0.5);
        assert_relative_eq!(cells[1].stddev_f, 0.5);
        assert_eq!(cells[1].count, 2);
    }
}
