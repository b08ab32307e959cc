//! Primal simplex over exact rationals with Bland's anti-cycling rule.

use std::collections::HashSet;

use num_traits::Zero;

use crate::{LinearProgram, LpOutcome, LpStatus, Rat, Relation};

/// Revised-simplex working state: explicit dense basis inverse.
///
/// Sizes here are small (tens of rows), so a dense inverse beats any
/// factorization bookkeeping and keeps every pivot exact.
pub(crate) struct RevisedState {
    pub m: usize,
    pub binv: Vec<Vec<Rat>>,
    pub basis: Vec<usize>,
    pub xb: Vec<Rat>,
    seen_bases: HashSet<Vec<usize>>,
    pub pivots: usize,
}

impl RevisedState {
    pub fn identity(m: usize, basis: Vec<usize>, rhs: Vec<Rat>) -> Self {
        let mut binv = vec![vec![Rat::zero(); m]; m];
        for (i, row) in binv.iter_mut().enumerate() {
            row[i] = crate::rat(1);
        }
        let mut state = RevisedState {
            m,
            binv,
            basis,
            xb: rhs,
            seen_bases: HashSet::new(),
            pivots: 0,
        };
        state.record_basis();
        state
    }

    fn record_basis(&mut self) {
        let mut sig = self.basis.clone();
        sig.sort_unstable();
        // Bland's rule guarantees no basis repeats; a repeat is a solver bug.
        assert!(
            self.seen_bases.insert(sig),
            "simplex revisited a basis; anti-cycling rule violated"
        );
    }

    /// Clears the visited-basis set. Called between phases and after
    /// structural edits (new columns/rows), where revisiting is legitimate.
    pub fn reset_cycle_guard(&mut self) {
        self.seen_bases.clear();
        self.seen_bases.insert({
            let mut sig = self.basis.clone();
            sig.sort_unstable();
            sig
        });
    }

    /// y = B⁻¹ a for a sparse column.
    pub fn ftran(&self, col: &[(usize, Rat)]) -> Vec<Rat> {
        let mut y = vec![Rat::zero(); self.m];
        for (r, coef) in col {
            if coef.is_zero() {
                continue;
            }
            for i in 0..self.m {
                if !self.binv[i][*r].is_zero() {
                    y[i] += &self.binv[i][*r] * coef;
                }
            }
        }
        y
    }

    /// π = c_Bᵀ B⁻¹.
    pub fn duals(&self, cost_of: &dyn Fn(usize) -> Rat) -> Vec<Rat> {
        let mut pi = vec![Rat::zero(); self.m];
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost_of(b);
            if cb.is_zero() {
                continue;
            }
            for (j, pj) in pi.iter_mut().enumerate() {
                if !self.binv[i][j].is_zero() {
                    *pj += &cb * &self.binv[i][j];
                }
            }
        }
        pi
    }

    pub fn pivot(&mut self, row: usize, entering: usize, y: &[Rat]) {
        let pivot_val = y[row].clone();
        debug_assert!(!pivot_val.is_zero());
        for j in 0..self.m {
            self.binv[row][j] = &self.binv[row][j] / &pivot_val;
        }
        let theta = &self.xb[row] / &pivot_val;
        self.xb[row] = theta.clone();
        for i in 0..self.m {
            if i == row || y[i].is_zero() {
                continue;
            }
            let factor = y[i].clone();
            for j in 0..self.m {
                if !self.binv[row][j].is_zero() {
                    let delta = &factor * &self.binv[row][j];
                    self.binv[i][j] -= delta;
                }
            }
            let delta = &factor * &theta;
            self.xb[i] -= delta;
        }
        self.basis[row] = entering;
        self.pivots += 1;
        self.record_basis();
    }
}

/// Column view of the standardized LP handed to the pivot loop.
pub(crate) struct StdColumn {
    pub coeffs: Vec<(usize, Rat)>,
    pub cost: Rat,
    pub phase1_cost: Rat,
    pub priority: (u8, u64),
    pub artificial: bool,
}

pub(crate) enum LoopResult {
    Optimal,
    Unbounded,
}

/// Runs Bland-rule pivots to optimality for the given cost selector.
pub(crate) fn pivot_loop(
    state: &mut RevisedState,
    cols: &[StdColumn],
    cost_of: &dyn Fn(&StdColumn) -> Rat,
    allow_enter: &dyn Fn(usize, &StdColumn) -> bool,
) -> LoopResult {
    loop {
        let get_cost = |v: usize| cost_of(&cols[v]);
        let pi = state.duals(&get_cost);
        let mut entering: Option<(usize, (u8, u64))> = None;
        let in_basis: HashSet<usize> = state.basis.iter().copied().collect();
        for (j, col) in cols.iter().enumerate() {
            if in_basis.contains(&j) || !allow_enter(j, col) {
                continue;
            }
            let mut rc = cost_of(col);
            for (r, coef) in &col.coeffs {
                rc -= &pi[*r] * coef;
            }
            if rc < Rat::zero() {
                match entering {
                    Some((_, p)) if p <= col.priority => {}
                    _ => entering = Some((j, col.priority)),
                }
            }
        }
        let Some((j, _)) = entering else {
            return LoopResult::Optimal;
        };
        let y = state.ftran(&cols[j].coeffs);
        let mut leave: Option<(usize, Rat, (u8, u64))> = None;
        for i in 0..state.m {
            if y[i] <= Rat::zero() {
                continue;
            }
            let ratio = &state.xb[i] / &y[i];
            let prio = cols[state.basis[i]].priority;
            let better = match &leave {
                None => true,
                Some((_, best, best_prio)) => ratio < *best || (ratio == *best && prio < *best_prio),
            };
            if better {
                leave = Some((i, ratio, prio));
            }
        }
        let Some((row, _, _)) = leave else {
            return LoopResult::Unbounded;
        };
        state.pivot(row, j, &y);
    }
}

pub(crate) struct StdForm {
    pub cols: Vec<StdColumn>,
    pub rhs: Vec<Rat>,
    pub basis: Vec<usize>,
    pub m: usize,
    /// Rows whose sign was flipped during rhs normalization.
    pub flipped: Vec<bool>,
}

/// Standardizes `lp` (slack/surplus/artificial columns, rhs sign
/// normalization, upper bounds as rows) for the pivot loop.
pub(crate) fn standardize(lp: &LinearProgram) -> StdForm {
    let n = lp.num_vars();
    let mut rows: Vec<(Vec<(usize, Rat)>, Relation, Rat)> = lp
        .rows
        .iter()
        .map(|r| (r.coeffs.clone(), r.relation, r.rhs.clone()))
        .collect();
    for (var, ub) in lp.upper_bounds.iter().enumerate() {
        if let Some(u) = ub {
            rows.push((vec![(var, crate::rat(1))], Relation::Le, u.clone()));
        }
    }
    let mut flipped = vec![false; rows.len()];
    for (i, (coeffs, relation, rhs)) in rows.iter_mut().enumerate() {
        if *rhs < Rat::zero() {
            flipped[i] = true;
            for (_, c) in coeffs.iter_mut() {
                *c = -c.clone();
            }
            *rhs = -rhs.clone();
            *relation = match *relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let m = rows.len();

    let mut cols: Vec<StdColumn> = (0..n)
        .map(|j| StdColumn {
            coeffs: Vec::new(),
            cost: lp.objective[j].clone(),
            phase1_cost: Rat::zero(),
            priority: (0, lp.bland_priority(j)),
            artificial: false,
        })
        .collect();
    for (i, (coeffs, _, _)) in rows.iter().enumerate() {
        for (var, coef) in coeffs {
            if !coef.is_zero() {
                cols[*var].coeffs.push((i, coef.clone()));
            }
        }
    }

    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, (_, relation, b)) in rows.iter().enumerate() {
        rhs.push(b.clone());
        match relation {
            Relation::Le => {
                let id = cols.len();
                cols.push(StdColumn {
                    coeffs: vec![(i, crate::rat(1))],
                    cost: Rat::zero(),
                    phase1_cost: Rat::zero(),
                    priority: (1, i as u64),
                    artificial: false,
                });
                basis.push(id);
            }
            Relation::Ge => {
                cols.push(StdColumn {
                    coeffs: vec![(i, crate::rat(-1))],
                    cost: Rat::zero(),
                    phase1_cost: Rat::zero(),
                    priority: (1, i as u64),
                    artificial: false,
                });
                let id = cols.len();
                cols.push(StdColumn {
                    coeffs: vec![(i, crate::rat(1))],
                    cost: Rat::zero(),
                    phase1_cost: crate::rat(1),
                    priority: (2, i as u64),
                    artificial: true,
                });
                basis.push(id);
            }
            Relation::Eq => {
                let id = cols.len();
                cols.push(StdColumn {
                    coeffs: vec![(i, crate::rat(1))],
                    cost: Rat::zero(),
                    phase1_cost: crate::rat(1),
                    priority: (2, i as u64),
                    artificial: true,
                });
                basis.push(id);
            }
        }
    }
    StdForm {
        cols,
        rhs,
        basis,
        m,
        flipped,
    }
}

/// Exact primal simplex: two phases, Bland's rule, basis duals.
///
/// Rejects integrality marks; use [`crate::solve_binary`] for those.
pub fn solve_lp(lp: &LinearProgram) -> LpOutcome {
    assert!(
        !lp.binary.iter().any(|b| *b),
        "solve_lp requires a pure LP; strip integrality marks first"
    );
    let n = lp.num_vars();
    let std_form = standardize(lp);
    let StdForm {
        cols,
        rhs,
        basis,
        m,
        flipped,
    } = std_form;
    let internal_rhs = rhs.clone();
    let mut state = RevisedState::identity(m, basis, rhs);

    // Phase 1: drive artificials to zero.
    let needs_phase1 = state.basis.iter().any(|&b| cols[b].artificial);
    if needs_phase1 {
        let p1 = pivot_loop(
            &mut state,
            &cols,
            &|c| c.phase1_cost.clone(),
            &|_, _| true,
        );
        debug_assert!(matches!(p1, LoopResult::Optimal), "phase 1 cannot be unbounded");
        let infeas: Rat = state
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| cols[b].artificial)
            .map(|(i, _)| state.xb[i].clone())
            .sum();
        if !infeas.is_zero() {
            return LpOutcome {
                status: LpStatus::Infeasible,
                objective: Rat::zero(),
                primal: vec![Rat::zero(); n],
                duals: vec![Rat::zero(); lp.rows.len()],
                pivots: state.pivots,
            };
        }
        // Pivot basic zero-valued artificials out wherever a real column can
        // take their place; rows where none can are redundant and stay inert.
        let mut stuck: HashSet<usize> = HashSet::new();
        loop {
            let Some(row) = (0..m).find(|r| {
                cols[state.basis[*r]].artificial && !stuck.contains(r)
            }) else {
                break;
            };
            let in_basis: HashSet<usize> = state.basis.iter().copied().collect();
            let mut pivoted = false;
            for (j, col) in cols.iter().enumerate() {
                if col.artificial || in_basis.contains(&j) {
                    continue;
                }
                let y = state.ftran(&col.coeffs);
                if !y[row].is_zero() {
                    state.pivot(row, j, &y);
                    pivoted = true;
                    break;
                }
            }
            if !pivoted {
                stuck.insert(row);
            }
        }
        state.reset_cycle_guard();
    }

    // Phase 2: artificials may leave but never re-enter.
    let result = pivot_loop(
        &mut state,
        &cols,
        &|c| c.cost.clone(),
        &|_, c| !c.artificial,
    );
    if matches!(result, LoopResult::Unbounded) {
        return LpOutcome {
            status: LpStatus::Unbounded,
            objective: Rat::zero(),
            primal: vec![Rat::zero(); n],
            duals: vec![Rat::zero(); lp.rows.len()],
            pivots: state.pivots,
        };
    }

    let mut primal = vec![Rat::zero(); n];
    for (i, &b) in state.basis.iter().enumerate() {
        if b < n {
            primal[b] = state.xb[i].clone();
        }
    }
    let objective: Rat = lp
        .objective
        .iter()
        .zip(&primal)
        .map(|(c, x)| c * x)
        .sum();
    let pi = state.duals(&|v| cols[v].cost.clone());

    // Strong duality must hold exactly at every optimum.
    let dual_obj: Rat = pi.iter().zip(&internal_rhs).map(|(p, b)| p * b).sum();
    assert_eq!(
        objective, dual_obj,
        "strong duality violated at an optimal basis"
    );

    // Report duals only for the caller's rows, in the caller's orientation.
    let duals: Vec<Rat> = pi[..lp.rows.len()]
        .iter()
        .enumerate()
        .map(|(i, p)| if flipped[i] { -p.clone() } else { p.clone() })
        .collect();

    LpOutcome {
        status: LpStatus::Optimal,
        objective,
        primal,
        duals,
        pivots: state.pivots,
    }
}
