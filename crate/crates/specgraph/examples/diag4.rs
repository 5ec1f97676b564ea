//! Scratch: minimal repro for phase-2 unbounded misreport.

use specgraph::simplex::{solve, DenseLp, LpOutcome, LpRow, Relation};

fn row(coeffs: &[f64], relation: Relation, rhs: f64) -> LpRow {
    LpRow { coeffs: coeffs.to_vec(), relation, rhs }
}

fn main() {
    // min t s.t. t - x >= 0, t + x >= 0, x >= 1. Expect x=1, t=1.
    let lp = DenseLp {
        num_vars: 2,
        objective: vec![0.0, 1.0],
        rows: vec![
            row(&[-1.0, 1.0], Relation::Ge, 0.0),
            row(&[1.0, 1.0], Relation::Ge, 0.0),
            row(&[1.0, 0.0], Relation::Ge, 1.0),
        ],
    };
    match solve(&lp, 1e-8) {
        Ok(LpOutcome::Optimal(s)) => println!("optimal x={:?} obj={}", s.x, s.objective),
        Ok(LpOutcome::Infeasible(s)) => println!("infeasible {:?}", s.infeasibility),
        Err(e) => println!("err {e}"),
    }

    // same but with several abs pairs
    let lp = DenseLp {
        num_vars: 4, // x, y, t1, t2
        objective: vec![0.0, 0.0, 1.0, 1.0],
        rows: vec![
            row(&[-1.0, 0.0, 1.0, 0.0], Relation::Ge, 0.0),
            row(&[1.0, 0.0, 1.0, 0.0], Relation::Ge, 0.0),
            row(&[0.0, -1.0, 0.0, 1.0], Relation::Ge, 0.0),
            row(&[0.0, 1.0, 0.0, 1.0], Relation::Ge, 0.0),
            row(&[1.0, 1.0, 0.0, 0.0], Relation::Ge, 2.0),
            row(&[1.0, -1.0, 0.0, 0.0], Relation::Ge, 1.0),
        ],
    };
    match solve(&lp, 1e-8) {
        Ok(LpOutcome::Optimal(s)) => println!("optimal x={:?} obj={}", s.x, s.objective),
        Ok(LpOutcome::Infeasible(s)) => println!("infeasible {:?}", s.infeasibility),
        Err(e) => println!("err {e}"),
    }
}
