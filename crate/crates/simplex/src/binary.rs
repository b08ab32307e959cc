//! Exact 0/1 branch-and-bound for pricing problems.
//!
//! The pricing problems are small implication-heavy binary programs (at-most-one
//! groups, variable implications, a handful of linking rows). Depth-first search
//! with bound propagation solves them exactly without any floating point.

use num_traits::Zero;

use crate::{Rat, Relation, Row};

/// A minimization problem over 0/1 variables with linear constraint rows.
#[derive(Debug, Clone, Default)]
pub struct BinaryProgram {
    pub objective: Vec<Rat>,
    pub rows: Vec<Row>,
}

impl BinaryProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, cost: Rat) -> usize {
        self.objective.push(cost);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rat)>, relation: Relation, rhs: Rat) {
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Fixes a variable by adding an equality row.
    pub fn fix_var(&mut self, var: usize, value: bool) {
        let rhs = if value { crate::rat(1) } else { Rat::zero() };
        self.add_row(vec![(var, crate::rat(1))], Relation::Eq, rhs);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct BinOutcome {
    pub status: BinStatus,
    pub objective: Rat,
    pub assignment: Vec<bool>,
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeBudgetExceeded;

/// One ≤-row in normalized form.
struct LeRow {
    coeffs: Vec<(usize, Rat)>,
    rhs: Rat,
}

struct Search<'a> {
    objective: &'a [Rat],
    rows: Vec<LeRow>,
    best: Option<(Rat, Vec<bool>)>,
    nodes: usize,
    budget: usize,
}

/// Solves the binary program exactly by DFS with implication propagation.
///
/// Returns the first-found witness of the optimal value; callers needing a
/// canonical witness re-solve with fixing rows.
pub fn solve_binary(bp: &BinaryProgram, node_budget: usize) -> Result<BinOutcome, NodeBudgetExceeded> {
    let n = bp.num_vars();
    let mut rows = Vec::new();
    for row in &bp.rows {
        match row.relation {
            Relation::Le => rows.push(LeRow {
                coeffs: row.coeffs.clone(),
                rhs: row.rhs.clone(),
            }),
            Relation::Ge => rows.push(LeRow {
                coeffs: row.coeffs.iter().map(|(v, c)| (*v, -c.clone())).collect(),
                rhs: -row.rhs.clone(),
            }),
            Relation::Eq => {
                rows.push(LeRow {
                    coeffs: row.coeffs.clone(),
                    rhs: row.rhs.clone(),
                });
                rows.push(LeRow {
                    coeffs: row.coeffs.iter().map(|(v, c)| (*v, -c.clone())).collect(),
                    rhs: -row.rhs.clone(),
                });
            }
        }
    }
    let mut search = Search {
        objective: &bp.objective,
        rows,
        best: None,
        nodes: 0,
        budget: node_budget,
    };
    let mut assignment = vec![None; n];
    search.dfs(&mut assignment)?;
    Ok(match search.best {
        Some((objective, assignment)) => BinOutcome {
            status: BinStatus::Optimal,
            objective,
            assignment,
            nodes: search.nodes,
        },
        None => BinOutcome {
            status: BinStatus::Infeasible,
            objective: Rat::zero(),
            assignment: vec![false; n],
            nodes: search.nodes,
        },
    })
}

impl Search<'_> {
    /// Minimum achievable activity of a row under the partial assignment.
    fn row_min(&self, row: &LeRow, assignment: &[Option<bool>]) -> Rat {
        let mut min = Rat::zero();
        for (v, c) in &row.coeffs {
            match assignment[*v] {
                Some(true) => min += c,
                Some(false) => {}
                None => {
                    if *c < Rat::zero() {
                        min += c;
                    }
                }
            }
        }
        min
    }

    /// Propagates forced values. Returns the trail of forced vars, or None on conflict.
    fn propagate(&self, assignment: &mut [Option<bool>]) -> Option<Vec<usize>> {
        let mut trail = Vec::new();
        loop {
            let mut changed = false;
            for row in &self.rows {
                let min = self.row_min(row, assignment);
                if min > row.rhs {
                    for v in trail {
                        assignment[v] = None;
                    }
                    return None;
                }
                for (v, c) in &row.coeffs {
                    if assignment[*v].is_some() {
                        continue;
                    }
                    if *c > Rat::zero() {
                        if &min + c > row.rhs {
                            assignment[*v] = Some(false);
                            trail.push(*v);
                            changed = true;
                        }
                    } else if *c < Rat::zero() && &min - c > row.rhs {
                        assignment[*v] = Some(true);
                        trail.push(*v);
                        changed = true;
                    }
                }
            }
            if !changed {
                return Some(trail);
            }
        }
    }

    /// Admissible lower bound: assigned costs plus every still-available discount.
    fn bound(&self, assignment: &[Option<bool>]) -> Rat {
        let mut lb = Rat::zero();
        for (v, cost) in self.objective.iter().enumerate() {
            match assignment[v] {
                Some(true) => lb += cost,
                Some(false) => {}
                None => {
                    if *cost < Rat::zero() {
                        lb += cost;
                    }
                }
            }
        }
        lb
    }

    fn pick_branch_var(&self, assignment: &[Option<bool>]) -> Option<usize> {
        let mut pick: Option<(usize, &Rat)> = None;
        for (v, cost) in self.objective.iter().enumerate() {
            if assignment[v].is_some() {
                continue;
            }
            match pick {
                Some((_, best)) if best <= cost => {}
                _ => pick = Some((v, cost)),
            }
        }
        pick.map(|(v, _)| v)
    }

    fn dfs(&mut self, assignment: &mut [Option<bool>]) -> Result<(), NodeBudgetExceeded> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(NodeBudgetExceeded);
        }
        let Some(trail) = self.propagate(assignment) else {
            return Ok(());
        };
        let lb = self.bound(assignment);
        if let Some((best, _)) = &self.best {
            if lb >= *best {
                for v in trail {
                    assignment[v] = None;
                }
                return Ok(());
            }
        }
        match self.pick_branch_var(assignment) {
            None => {
                let value = self.bound(assignment);
                let complete: Vec<bool> =
                    assignment.iter().map(|a| a.unwrap_or(false)).collect();
                let better = match &self.best {
                    None => true,
                    Some((best, _)) => value < *best,
                };
                if better {
                    self.best = Some((value, complete));
                }
            }
            Some(var) => {
                let order = if self.objective[var] < Rat::zero() {
                    [true, false]
                } else {
                    [false, true]
                };
                for value in order {
                    assignment[var] = Some(value);
                    self.dfs(assignment)?;
                    assignment[var] = None;
                }
            }
        }
        for v in trail {
            assignment[v] = None;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn brute_force(bp: &BinaryProgram) -> Option<Rat> {
        let n = bp.num_vars();
        let mut best: Option<Rat> = None;
        for mask in 0u32..(1 << n) {
            let x: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            let feasible = bp.rows.iter().all(|row| {
                let lhs: Rat = row
                    .coeffs
                    .iter()
                    .map(|(v, c)| if x[*v] { c.clone() } else { Rat::zero() })
                    .sum();
                match row.relation {
                    Relation::Le => lhs <= row.rhs,
                    Relation::Ge => lhs >= row.rhs,
                    Relation::Eq => lhs == row.rhs,
                }
            });
            if !feasible {
                continue;
            }
            let obj: Rat = bp
                .objective
                .iter()
                .enumerate()
                .map(|(v, c)| if x[v] { c.clone() } else { Rat::zero() })
                .sum();
            best = match best {
                None => Some(obj),
                Some(b) if obj < b => Some(obj),
                keep => keep,
            };
        }
        best
    }

    #[test]
    fn zero_vector_optimal_when_costs_nonnegative() {
        let mut bp = BinaryProgram::default();
        for _ in 0..4 {
            bp.add_var(rat(1));
        }
        bp.add_row(vec![(0, rat(1)), (1, rat(1))], Relation::Le, rat(1));
        let out = solve_binary(&bp, 10_000).unwrap();
        assert_eq!(out.status, BinStatus::Optimal);
        assert_eq!(out.objective, rat(0));
        assert!(out.assignment.iter().all(|b| !b));
    }

    #[test]
    fn equality_fixing_forces_assignment() {
        let mut bp = BinaryProgram::default();
        bp.add_var(rat(5));
        bp.add_var(rat(-3));
        bp.fix_var(0, true);
        let out = solve_binary(&bp, 10_000).unwrap();
        assert_eq!(out.objective, rat(2));
        assert!(out.assignment[0] && out.assignment[1]);
    }

    #[test]
    fn infeasible_when_rows_conflict() {
        let mut bp = BinaryProgram::default();
        bp.add_var(rat(1));
        bp.fix_var(0, true);
        bp.fix_var(0, false);
        let out = solve_binary(&bp, 10_000).unwrap();
        assert_eq!(out.status, BinStatus::Infeasible);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=9);
            let mut bp = BinaryProgram::default();
            for _ in 0..n {
                bp.add_var(rat(rng.gen_range(-10..=10)));
            }
            for _ in 0..rng.gen_range(0..=6) {
                let width = rng.gen_range(1..=3.min(n));
                let mut vars: Vec<usize> = (0..n).collect();
                let coeffs: Vec<(usize, Rat)> = (0..width)
                    .map(|_| {
                        let idx = rng.gen_range(0..vars.len());
                        let v = vars.swap_remove(idx);
                        (v, rat(rng.gen_range(-3..=3)))
                    })
                    .collect();
                let relation = match rng.gen_range(0..3) {
                    0 => Relation::Le,
                    1 => Relation::Ge,
                    _ => Relation::Eq,
                };
                bp.add_row(coeffs, relation, rat(rng.gen_range(-2..=3)));
            }
            let out = solve_binary(&bp, 1_000_000).unwrap();
            match brute_force(&bp) {
                None => assert_eq!(out.status, BinStatus::Infeasible),
                Some(best) => {
                    assert_eq!(out.status, BinStatus::Optimal);
                    assert_eq!(out.objective, best);
                }
            }
        }
    }
}
