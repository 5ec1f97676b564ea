//! Dense two-phase primal simplex over free variables.
//!
//! Free variables are split into positive and negative parts internally.
//! Phase 1 minimizes the sum of artificial variables, which doubles as an
//! elastic least-violation solve: when the program is infeasible the phase-1
//! minimizer is still returned together with its total violation. Pricing is
//! Dantzig (most negative reduced cost) until the objective stalls, then
//! Bland's rule takes over permanently, so the method cannot cycle.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Minimize `objective · x` subject to the rows; all variables are free.
#[derive(Debug, Clone)]
pub struct DenseLp {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Phase-1 optimum: total L1 constraint violation at `x`.
    pub infeasibility: f64,
    pub pivots: usize,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// No feasible point exists; carries the least-violation vertex.
    Infeasible(LpSolution),
}

const PIVOT_EPS: f64 = 1e-9;
/// Degenerate pivots tolerated before pricing falls back to Bland's rule.
const STALL_LIMIT: usize = 64;
/// Columns with reduced cost above this are rounding noise, not proof of
/// unboundedness.
const UNBOUNDED_EPS: f64 = 1e-6;

pub fn solve(lp: &DenseLp, tol: f64) -> Result<LpOutcome> {
    if lp.objective.len() != lp.num_vars {
        return Err(Error::DimensionMismatch(format!(
            "objective has {} coefficients for {} variables",
            lp.objective.len(),
            lp.num_vars
        )));
    }
    for row in &lp.rows {
        if row.coeffs.len() != lp.num_vars {
            return Err(Error::DimensionMismatch(format!(
                "constraint row has {} coefficients for {} variables",
                row.coeffs.len(),
                lp.num_vars
            )));
        }
    }
    Tableau::build(lp)?.run(tol)
}

struct Tableau {
    m: usize,
    ncols: usize,
    nsplit: usize,
    art_start: usize,
    rows: Vec<Vec<f64>>, // m rows of ncols coefficients
    rhs: Vec<f64>,
    basis: Vec<usize>,
    phase2_cost: Vec<f64>,
    pivots: usize,
    budget: usize,
}

impl Tableau {
    fn build(lp: &DenseLp) -> Result<Tableau> {
        let m = lp.rows.len();
        let nsplit = 2 * lp.num_vars;

        // Normalize every row to nonnegative rhs.
        let mut normalized: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
        for row in &lp.rows {
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(Error::NumericalFailure("non-finite constraint coefficient".into()));
            }
            if row.rhs < 0.0 {
                let coeffs: Vec<f64> = row.coeffs.iter().map(|c| -c).collect();
                let rel = match row.relation {
                    Relation::Eq => Relation::Eq,
                    Relation::Ge => Relation::Le,
                    Relation::Le => Relation::Ge,
                };
                normalized.push((coeffs, rel, -row.rhs));
            } else {
                normalized.push((row.coeffs.clone(), row.relation, row.rhs));
            }
        }

        let n_slack = normalized
            .iter()
            .filter(|(_, rel, _)| matches!(rel, Relation::Ge | Relation::Le))
            .count();
        let n_art = normalized
            .iter()
            .filter(|(_, rel, _)| matches!(rel, Relation::Ge | Relation::Eq))
            .count();
        let art_start = nsplit + n_slack;
        let ncols = art_start + n_art;

        let mut rows = vec![vec![0.0; ncols]; m];
        let mut rhs = vec![0.0; m];
        let mut basis = vec![0usize; m];
        let mut slack_at = nsplit;
        let mut art_at = art_start;
        for (i, (coeffs, rel, b)) in normalized.iter().enumerate() {
            for (q, &c) in coeffs.iter().enumerate() {
                rows[i][2 * q] = c;
                rows[i][2 * q + 1] = -c;
            }
            rhs[i] = *b;
            match rel {
                Relation::Le => {
                    rows[i][slack_at] = 1.0;
                    basis[i] = slack_at;
                    slack_at += 1;
                }
                Relation::Ge => {
                    rows[i][slack_at] = -1.0;
                    slack_at += 1;
                    rows[i][art_at] = 1.0;
                    basis[i] = art_at;
                    art_at += 1;
                }
                Relation::Eq => {
                    rows[i][art_at] = 1.0;
                    basis[i] = art_at;
                    art_at += 1;
                }
            }
        }

        let mut phase2_cost = vec![0.0; ncols];
        for (q, &c) in lp.objective.iter().enumerate() {
            phase2_cost[2 * q] = c;
            phase2_cost[2 * q + 1] = -c;
        }

        let budget = 400 * (m + ncols).max(64);
        Ok(Tableau { m, ncols, nsplit, art_start, rows, rhs, basis, phase2_cost, pivots: 0, budget })
    }

    fn run(mut self, tol: f64) -> Result<LpOutcome> {
        // Phase 1: minimize the sum of artificials.
        let mut cost = vec![0.0; self.ncols];
        for j in self.art_start..self.ncols {
            cost[j] = 1.0;
        }
        let mut value = self.canonical_objective(&mut cost);
        self.optimize(&mut cost, &mut value, self.ncols)?;
        let infeasibility = value.max(0.0);

        if infeasibility > tol {
            return Ok(LpOutcome::Infeasible(self.solution(infeasibility)));
        }

        // A zero objective is a pure feasibility problem; phase 2 would only
        // chase rounding noise in the reduced costs.
        if self.phase2_cost.iter().any(|c| *c != 0.0) {
            self.evict_artificials();
            let mut cost = self.phase2_cost.clone();
            let mut value = self.canonical_objective(&mut cost);
            self.optimize(&mut cost, &mut value, self.art_start)?;
        }
        Ok(LpOutcome::Optimal(self.solution(infeasibility)))
    }

    /// Reduces `cost` against the current basis; returns the objective value
    /// at the current basic solution.
    fn canonical_objective(&self, cost: &mut Vec<f64>) -> f64 {
        let mut value = 0.0;
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                value += cb * self.rhs[i];
                let row = self.rows[i].clone();
                for j in 0..self.ncols {
                    cost[j] -= cb * row[j];
                }
            }
        }
        value
    }

    fn optimize(&mut self, cost: &mut [f64], value: &mut f64, col_limit: usize) -> Result<()> {
        let mut bland = false;
        let mut stalled = 0usize;
        let mut last_value = *value;
        loop {
            let entering = if bland {
                // Bland: lowest-index improving column.
                (0..col_limit).find(|&j| cost[j] < -PIVOT_EPS)
            } else {
                // Dantzig: most negative reduced cost, lowest index on ties.
                let mut best: Option<usize> = None;
                for j in 0..col_limit {
                    if cost[j] < -PIVOT_EPS && best.is_none_or(|b| cost[j] < cost[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(entering) = entering else { return Ok(()) };

            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.rows[i][entering];
                if a > PIVOT_EPS {
                    let ratio = self.rhs[i] / a;
                    let better = match leaving {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - PIVOT_EPS
                                || (ratio < lr + PIVOT_EPS && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((pivot_row, _)) = leaving else {
                if cost[entering] >= -UNBOUNDED_EPS {
                    // No blocking row but the reduced cost is within rounding
                    // noise of zero: drop the column from consideration.
                    cost[entering] = 0.0;
                    continue;
                }
                return Err(Error::NumericalFailure("linear program is unbounded".into()));
            };

            self.pivot(pivot_row, entering, cost, value);
            self.pivots += 1;
            if *value < last_value - PIVOT_EPS {
                last_value = *value;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > STALL_LIMIT {
                    bland = true;
                }
            }
            if self.pivots > self.budget {
                return Err(Error::NumericalFailure(format!(
                    "pivot budget {} exhausted",
                    self.budget
                )));
            }
        }
    }

    fn pivot(&mut self, prow: usize, pcol: usize, cost: &mut [f64], value: &mut f64) {
        let p = self.rows[prow][pcol];
        for j in 0..self.ncols {
            self.rows[prow][j] /= p;
        }
        self.rhs[prow] /= p;
        self.rows[prow][pcol] = 1.0; // exact

        for i in 0..self.m {
            if i == prow {
                continue;
            }
            let f = self.rows[i][pcol];
            if f != 0.0 {
                for j in 0..self.ncols {
                    self.rows[i][j] -= f * self.rows[prow][j];
                }
                self.rhs[i] -= f * self.rhs[prow];
                self.rows[i][pcol] = 0.0;
                if self.rhs[i] < 0.0 && self.rhs[i] > -PIVOT_EPS {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = cost[pcol];
        if f != 0.0 {
            for j in 0..self.ncols {
                cost[j] -= f * self.rows[prow][j];
            }
            *value += f * self.rhs[prow];
            cost[pcol] = 0.0;
        }
        self.basis[prow] = pcol;
    }

    /// Pivots zero-valued basic artificials out of the basis where a
    /// non-artificial column is available; redundant rows keep their
    /// artificial at level zero and are blocked from re-entering.
    fn evict_artificials(&mut self) {
        for i in 0..self.m {
            if self.basis[i] < self.art_start {
                continue;
            }
            if let Some(j) = (0..self.art_start).find(|&j| self.rows[i][j].abs() > PIVOT_EPS) {
                let mut dummy_cost = vec![0.0; self.ncols];
                let mut dummy_value = 0.0;
                self.pivot(i, j, &mut dummy_cost, &mut dummy_value);
            }
        }
    }

    fn solution(&self, infeasibility: f64) -> LpSolution {
        let mut col_value = vec![0.0; self.ncols];
        for i in 0..self.m {
            col_value[self.basis[i]] = self.rhs[i];
        }
        let num_vars = self.nsplit / 2;
        let x: Vec<f64> = (0..num_vars).map(|q| col_value[2 * q] - col_value[2 * q + 1]).collect();
        let objective = (0..num_vars).map(|q| self.phase2_cost[2 * q] * x[q]).sum();
        LpSolution { x, objective, infeasibility, pivots: self.pivots }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn row(coeffs: &[f64], relation: Relation, rhs: f64) -> LpRow {
        LpRow { coeffs: coeffs.to_vec(), relation, rhs }
    }

    fn optimal(lp: &DenseLp) -> LpSolution {
        match solve(lp, 1e-8).unwrap() {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible(s) => panic!("unexpected infeasible, violation {}", s.infeasibility),
        }
    }

    #[test]
    fn bounded_maximization() {
        // max x + y s.t. x <= 2, y <= 3, x + y <= 4, x, y >= 0.
        let lp = DenseLp {
            num_vars: 2,
            objective: vec![-1.0, -1.0],
            rows: vec![
                row(&[1.0, 0.0], Relation::Le, 2.0),
                row(&[0.0, 1.0], Relation::Le, 3.0),
                row(&[1.0, 1.0], Relation::Le, 4.0),
                row(&[1.0, 0.0], Relation::Ge, 0.0),
                row(&[0.0, 1.0], Relation::Ge, 0.0),
            ],
        };
        let s = optimal(&lp);
        assert_relative_eq!(s.objective, -4.0, epsilon = 1e-9);
    }

    #[test]
    fn equality_system() {
        // x + y = 2, x - y = 0 -> x = y = 1.
        let lp = DenseLp {
            num_vars: 2,
            objective: vec![1.0, 0.0],
            rows: vec![
                row(&[1.0, 1.0], Relation::Eq, 2.0),
                row(&[1.0, -1.0], Relation::Eq, 0.0),
            ],
        };
        let s = optimal(&lp);
        assert_relative_eq!(s.x[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.x[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn free_variable_goes_negative() {
        // min x s.t. x >= -5.
        let lp = DenseLp {
            num_vars: 1,
            objective: vec![1.0],
            rows: vec![row(&[1.0], Relation::Ge, -5.0)],
        };
        let s = optimal(&lp);
        assert_relative_eq!(s.x[0], -5.0, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_returns_least_violation() {
        // x >= 1 and x <= 0 cannot both hold; violation 1 at the best vertex.
        let lp = DenseLp {
            num_vars: 1,
            objective: vec![0.0],
            rows: vec![row(&[1.0], Relation::Ge, 1.0), row(&[1.0], Relation::Le, 0.0)],
        };
        match solve(&lp, 1e-8).unwrap() {
            LpOutcome::Infeasible(s) => assert_relative_eq!(s.infeasibility, 1.0, epsilon = 1e-9),
            LpOutcome::Optimal(_) => panic!("should be infeasible"),
        }
    }

    #[test]
    fn unbounded_is_an_error() {
        let lp = DenseLp {
            num_vars: 1,
            objective: vec![-1.0],
            rows: vec![row(&[1.0], Relation::Ge, 0.0)],
        };
        assert!(matches!(solve(&lp, 1e-8), Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn degenerate_constraints_do_not_cycle() {
        // Redundant equalities around a single vertex.
        let lp = DenseLp {
            num_vars: 2,
            objective: vec![1.0, 1.0],
            rows: vec![
                row(&[1.0, 0.0], Relation::Eq, 1.0),
                row(&[2.0, 0.0], Relation::Eq, 2.0),
                row(&[0.0, 1.0], Relation::Ge, 1.0),
                row(&[1.0, 1.0], Relation::Ge, 2.0),
            ],
        };
        let s = optimal(&lp);
        assert_relative_eq!(s.objective, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn pure_feasibility_zero_objective() {
        let lp = DenseLp {
            num_vars: 2,
            objective: vec![0.0, 0.0],
            rows: vec![
                row(&[1.0, 1.0], Relation::Ge, 1.0),
                row(&[1.0, -1.0], Relation::Le, 3.0),
            ],
        };
        let s = optimal(&lp);
        assert!(s.x[0] + s.x[1] >= 1.0 - 1e-9);
        assert!(s.x[0] - s.x[1] <= 3.0 + 1e-9);
    }
}
