//! Independent ground truth: bounded finite-model search for consistency and
//! exhaustive full-master enumeration for the algebraic module.
//!
//! Neither path goes through the simplex stack; these are the oracles the
//! production code is tested against.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use shoi_simplex::{rat, MasterRowKind, Rat, Relation};

use crate::algebra::{DecompositionSet, PricingProblem};
use crate::concept::{Concept, Role};
use crate::rolebox::RoleBox;
use crate::tbox::Tbox;

/// A finite interpretation over domain {0..k-1}.
#[derive(Debug, Clone)]
pub struct FiniteModel {
    pub domain: usize,
    /// atom name -> element bitmask
    pub atoms: BTreeMap<String, u32>,
    /// nominal name -> its single element
    pub nominal_at: BTreeMap<String, usize>,
    /// role name -> pair bitmask (bit x*k + y)
    pub roles: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
pub enum OracleVerdict {
    Consistent(FiniteModel),
    /// No model with at most this many elements. Not a proof of
    /// inconsistency: the logic lacks the finite-model property in general.
    NoModelUpTo(usize),
    BudgetExceeded,
}

/// Three-valued role extension during search: edges known present (must)
/// and possibly present (may).
#[derive(Clone)]
struct RoleState {
    must: u64,
    may: u64,
}

struct AtomState {
    must: u32,
    may: u32,
}

struct ModelSearch<'a> {
    k: usize,
    full: u32,
    axioms: &'a [(Concept, Concept)],
    rolebox: &'a RoleBox,
    role_names: Vec<String>,
    atom_names: &'a [String],
    nominal_at: BTreeMap<String, usize>,
    budget: &'a mut u64,
}

impl ModelSearch<'_> {
    fn role_ext(&self, roles: &[RoleState], role: &Role) -> (u64, u64) {
        let idx = self
            .role_names
            .iter()
            .position(|n| *n == role.name)
            .expect("role known");
        let (must, may) = (roles[idx].must, roles[idx].may);
        if role.inverted {
            (self.transpose(must), self.transpose(may))
        } else {
            (must, may)
        }
    }

    fn transpose(&self, mask: u64) -> u64 {
        let mut out = 0u64;
        for x in 0..self.k {
            for y in 0..self.k {
                if mask & (1 << (x * self.k + y)) != 0 {
                    out |= 1 << (y * self.k + x);
                }
            }
        }
        out
    }

    /// (must, may) extension of a concept under the partial assignment.
    fn eval(&self, c: &Concept, atoms: &[AtomState], roles: &[RoleState]) -> (u32, u32) {
        match c {
            Concept::Top => (self.full, self.full),
            Concept::Bottom => (0, 0),
            Concept::Atom(a) => {
                match self.atom_names.iter().position(|n| n == a) {
                    Some(i) => (atoms[i].must, atoms[i].may),
                    None => (0, 0),
                }
            }
            Concept::Nominal(o) => {
                let ext = 1u32 << self.nominal_at[o];
                (ext, ext)
            }
            Concept::Not(inner) => {
                let (must, may) = self.eval(inner, atoms, roles);
                (self.full & !may, self.full & !must)
            }
            Concept::And(cs) => cs.iter().fold((self.full, self.full), |(m, y), child| {
                let (cm, cy) = self.eval(child, atoms, roles);
                (m & cm, y & cy)
            }),
            Concept::Or(cs) => cs.iter().fold((0, 0), |(m, y), child| {
                let (cm, cy) = self.eval(child, atoms, roles);
                (m | cm, y | cy)
            }),
            Concept::Exists(role, filler) => {
                let (emust, emay) = self.role_ext(roles, role);
                let (fmust, fmay) = self.eval(filler, atoms, roles);
                let mut must = 0u32;
                let mut may = 0u32;
                for x in 0..self.k {
                    let row_must = (emust >> (x * self.k)) as u32 & self.full;
                    let row_may = (emay >> (x * self.k)) as u32 & self.full;
                    if row_must & fmust != 0 {
                        must |= 1 << x;
                    }
                    if row_may & fmay != 0 {
                        may |= 1 << x;
                    }
                }
                (must, may)
            }
            Concept::Forall(role, filler) => {
                let (emust, emay) = self.role_ext(roles, role);
                let (fmust, fmay) = self.eval(filler, atoms, roles);
                let mut must = 0u32;
                let mut may = 0u32;
                for x in 0..self.k {
                    let row_must = (emust >> (x * self.k)) as u32 & self.full;
                    let row_may = (emay >> (x * self.k)) as u32 & self.full;
                    if row_may & !fmust == 0 {
                        must |= 1 << x;
                    }
                    if row_must & !fmay == 0 {
                        may |= 1 << x;
                    }
                }
                (must, may)
            }
        }
    }

    /// Definitely-violated check under the partial assignment.
    fn violated(&self, atoms: &[AtomState], roles: &[RoleState]) -> bool {
        for (lhs, rhs) in self.axioms {
            let (lmust, _) = self.eval(lhs, atoms, roles);
            let (_, rmay) = self.eval(rhs, atoms, roles);
            if lmust & !rmay != 0 {
                return true;
            }
        }
        // Role axioms: declared hierarchy and transitivity.
        for (r, s) in self.rolebox.declared_pairs() {
            if r.inverted {
                continue; // the base pair covers both orientations
            }
            let (rmust, _) = self.role_ext(roles, r);
            let (_, smay) = self.role_ext(roles, s);
            if rmust & !smay != 0 {
                return true;
            }
        }
        for name in &self.role_names {
            if !self.rolebox.is_transitive(&Role::named(name.clone())) {
                continue;
            }
            let idx = self.role_names.iter().position(|n| n == name).unwrap();
            let must = roles[idx].must;
            let may = roles[idx].may;
            // must ∘ must must stay possible.
            for x in 0..self.k {
                for y in 0..self.k {
                    if must & (1 << (x * self.k + y)) == 0 {
                        continue;
                    }
                    for z in 0..self.k {
                        if must & (1 << (y * self.k + z)) != 0
                            && may & (1 << (x * self.k + z)) == 0
                        {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    fn search(&mut self, atoms: &mut Vec<AtomState>, roles: &mut Vec<RoleState>) -> Result<bool, ()> {
        *self.budget = self.budget.saturating_sub(1);
        if *self.budget == 0 {
            return Err(());
        }
        if self.violated(atoms, roles) {
            return Ok(false);
        }
        // Next undecided atom membership, then next undecided edge.
        let mut atom_pick = None;
        for (idx, state) in atoms.iter().enumerate() {
            let undecided = state.may & !state.must;
            if undecided != 0 {
                atom_pick = Some((idx, undecided.trailing_zeros()));
                break;
            }
        }
        if let Some((idx, bit)) = atom_pick {
            // Sparse extensions first.
            let saved_may = atoms[idx].may;
            atoms[idx].may &= !(1 << bit);
            if self.search(atoms, roles)? {
                return Ok(true);
            }
            atoms[idx].may = saved_may;
            atoms[idx].must |= 1 << bit;
            if self.search(atoms, roles)? {
                return Ok(true);
            }
            atoms[idx].must &= !(1 << bit);
            return Ok(false);
        }
        let mut pick = None;
        for (idx, state) in roles.iter().enumerate() {
            let undecided = state.may & !state.must;
            if undecided != 0 {
                pick = Some((idx, undecided.trailing_zeros() as u64));
                break;
            }
        }
        let Some((idx, bit)) = pick else {
            // Full assignment: enforce transitive closure exactly.
            for (i, name) in self.role_names.iter().enumerate() {
                if self.rolebox.is_transitive(&Role::named(name.clone())) {
                    let m = roles[i].must;
                    if self.transitive_closure(m) != m {
                        return Ok(false);
                    }
                }
            }
            return Ok(true);
        };
        // Sparse models first: leave the edge out, then put it in.
        let saved = roles[idx].clone();
        roles[idx].may &= !(1 << bit);
        if self.search(atoms, roles)? {
            return Ok(true);
        }
        roles[idx] = saved.clone();
        roles[idx].must |= 1 << bit;
        if self.search(atoms, roles)? {
            return Ok(true);
        }
        roles[idx] = saved;
        Ok(false)
    }

    fn transitive_closure(&self, mask: u64) -> u64 {
        let mut closed = mask;
        loop {
            let mut next = closed;
            for x in 0..self.k {
                for y in 0..self.k {
                    if closed & (1 << (x * self.k + y)) == 0 {
                        continue;
                    }
                    for z in 0..self.k {
                        if closed & (1 << (y * self.k + z)) != 0 {
                            next |= 1 << (x * self.k + z);
                        }
                    }
                }
            }
            if next == closed {
                return closed;
            }
            closed = next;
        }
    }
}

/// All axioms as plain inclusions: GCIs (Abox already reduced), both
/// directions of equivalences, and pairwise disjointness.
pub fn oracle_axioms(tbox: &Tbox) -> Vec<(Concept, Concept)> {
    let mut axioms = tbox.all_gcis.clone();
    for (lhs, rhs) in &tbox.equivalences {
        axioms.push((lhs.clone(), rhs.clone()));
        axioms.push((rhs.clone(), lhs.clone()));
    }
    for group in &tbox.disjoint_groups {
        for (i, a) in group.iter().enumerate() {
            for b in group.iter().skip(i + 1) {
                axioms.push((
                    Concept::and(vec![a.as_concept(), b.as_concept()]),
                    Concept::Bottom,
                ));
            }
        }
    }
    axioms
}

/// Enumerates interpretations up to `max_domain` elements (anonymous
/// elements canonicalized by sorted atom type) and model-checks every axiom.
pub fn brute_force_consistency(
    tbox: &Tbox,
    rolebox: &RoleBox,
    max_domain: usize,
    mut budget: u64,
) -> OracleVerdict {
    assert!(max_domain <= 5, "oracle domains stay tiny");
    let axioms = oracle_axioms(tbox);
    let mut atom_names: BTreeSet<String> = BTreeSet::new();
    for (lhs, rhs) in &axioms {
        atom_names.extend(lhs.atoms());
        atom_names.extend(rhs.atoms());
    }
    let atom_names: Vec<String> = atom_names.into_iter().collect();
    let nominal_names: Vec<String> = tbox.nominals.iter().cloned().collect();
    let role_names: Vec<String> = rolebox.names().cloned().collect();

    for k in 1..=max_domain {
        let full = ((1u64 << k) - 1) as u32;
        // Nominal placements; atom extensions and role edges are decided by
        // depth-first search with three-valued pruning, symmetry falling out
        // of the sparse-first exploration order.
        let mut nominal_maps = vec![BTreeMap::new()];
        for o in &nominal_names {
            let mut next = Vec::new();
            for map in &nominal_maps {
                for e in 0..k {
                    let mut m: BTreeMap<String, usize> = map.clone();
                    m.insert(o.clone(), e);
                    next.push(m);
                }
            }
            nominal_maps = next;
        }
        for nominal_at in nominal_maps {
            let all_pairs = if k * k >= 64 {
                u64::MAX
            } else {
                (1u64 << (k * k)) - 1
            };
            let mut atoms: Vec<AtomState> = atom_names
                .iter()
                .map(|_| AtomState { must: 0, may: full })
                .collect();
            let mut roles: Vec<RoleState> = role_names
                .iter()
                .map(|_| RoleState {
                    must: 0,
                    may: all_pairs,
                })
                .collect();
            let mut search = ModelSearch {
                k,
                full,
                axioms: &axioms,
                rolebox,
                role_names: role_names.clone(),
                atom_names: &atom_names,
                nominal_at: nominal_at.clone(),
                budget: &mut budget,
            };
            match search.search(&mut atoms, &mut roles) {
                Err(()) => return OracleVerdict::BudgetExceeded,
                Ok(true) => {
                    let atoms = atom_names
                        .iter()
                        .enumerate()
                        .map(|(i, n)| (n.clone(), atoms[i].must))
                        .collect();
                    let roles = role_names
                        .iter()
                        .enumerate()
                        .map(|(i, n)| (n.clone(), roles[i].must))
                        .collect();
                    return OracleVerdict::Consistent(FiniteModel {
                        domain: k,
                        atoms,
                        nominal_at,
                        roles,
                    });
                }
                Ok(false) => {}
            }
        }
    }
    OracleVerdict::NoModelUpTo(max_domain)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MasterVerdict {
    Optimal(Rat),
    Infeasible,
}

/// Exhaustive ground truth for the column-generation path: materializes all
/// 2^|Q∃∪Qo| − 1 candidate cells, keeps the feasible ones with their minimum
/// costs, and solves the full master by direct cover search.
pub fn full_master_solve(q: &DecompositionSet, pp: &PricingProblem) -> MasterVerdict {
    let members = q.exists.len() + q.nominals.len();
    assert!(members <= 16, "full enumeration needs a small Q");
    let rows = q.master_rows();

    // Feasible cells with minimum cost.
    let mut cells: Vec<(Vec<usize>, Rat)> = Vec::new();
    for pattern in 1u32..(1 << members) {
        let covered: Vec<usize> = (0..members).filter(|i| pattern & (1 << i) != 0).collect();
        if let Some(cost) = min_cell_cost(pp, &covered) {
            cells.push((covered, cost));
        }
    }

    // Depth-first cover search over rows.
    let mut best: Option<Rat> = None;
    let mut coverage = vec![0u32; rows.len()];
    cover(
        &rows,
        &cells,
        0,
        &mut coverage,
        Rat::zero(),
        &mut best,
    );
    match best {
        Some(objective) => MasterVerdict::Optimal(objective),
        None => MasterVerdict::Infeasible,
    }
}

fn cover(
    rows: &[MasterRowKind],
    cells: &[(Vec<usize>, Rat)],
    row: usize,
    coverage: &mut Vec<u32>,
    cost_so_far: Rat,
    best: &mut Option<Rat>,
) {
    if let Some(b) = best {
        if &cost_so_far >= b {
            return;
        }
    }
    // Find the next unsatisfied row.
    let next = (row..rows.len()).find(|&i| coverage[i] == 0);
    let Some(next) = next else {
        let better = match best {
            None => true,
            Some(b) => &cost_so_far < b,
        };
        if better {
            *best = Some(cost_so_far);
        }
        return;
    };
    for (cell, cost) in cells {
        if !cell.contains(&next) {
            continue;
        }
        // Partition rows admit exactly one covering cell.
        let conflict = cell.iter().any(|&i| {
            matches!(rows[i], MasterRowKind::ExactlyOne) && coverage[i] > 0
        });
        if conflict {
            continue;
        }
        for &i in cell {
            coverage[i] += 1;
        }
        cover(rows, cells, next, coverage, &cost_so_far + cost, best);
        for &i in cell {
            coverage[i] -= 1;
        }
    }
}

/// Minimum Σb over completions of the pricing problem with the given
/// membership pattern, or None when infeasible. A small dedicated search,
/// independent of the production binary solver.
fn min_cell_cost(pp: &PricingProblem, covered: &[usize]) -> Option<Rat> {
    let n = pp.bp.num_vars();
    let mut assignment: Vec<Option<bool>> = vec![None; n];
    let mut memberships = pp.exists_vars.clone();
    memberships.extend(&pp.nominal_vars);
    for (i, &var) in memberships.iter().enumerate() {
        assignment[var] = Some(covered.contains(&i));
    }
    let mut best: Option<Rat> = None;
    enumerate_completions(pp, &mut assignment, 0, &mut best);
    best
}

fn enumerate_completions(
    pp: &PricingProblem,
    assignment: &mut Vec<Option<bool>>,
    from: usize,
    best: &mut Option<Rat>,
) {
    // Prune on any definitely violated row.
    for row in &pp.bp.rows {
        let mut lo = Rat::zero();
        let mut hi = Rat::zero();
        for (v, c) in &row.coeffs {
            match assignment[*v] {
                Some(true) => {
                    lo += c;
                    hi += c;
                }
                Some(false) => {}
                None => {
                    if *c < Rat::zero() {
                        lo += c;
                    } else {
                        hi += c;
                    }
                }
            }
        }
        let bad = match row.relation {
            Relation::Le => lo > row.rhs,
            Relation::Ge => hi < row.rhs,
            Relation::Eq => lo > row.rhs || hi < row.rhs,
        };
        if bad {
            return;
        }
    }
    let next = (from..assignment.len()).find(|&v| assignment[v].is_none());
    let Some(next) = next else {
        let cost: Rat = pp
            .name_vars
            .values()
            .filter(|v| assignment[**v] == Some(true))
            .map(|_| rat(1))
            .sum();
        let better = match best {
            None => true,
            Some(b) => &cost < b,
        };
        if better {
            *best = Some(cost);
        }
        return;
    };
    for value in [false, true] {
        assignment[next] = Some(value);
        enumerate_completions(pp, assignment, next + 1, best);
        assignment[next] = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_decomposition, build_pp, solve_node, AmOptions, AmOutcome};
    use crate::parser::parse_ontology;
    use crate::tbox::internalize;

    fn setup(text: &str) -> (Tbox, RoleBox) {
        let doc = parse_ontology(text).unwrap();
        let axioms = doc.axioms();
        let tbox = internalize(&axioms);
        let rolebox = crate::rolebox_of(&axioms);
        (tbox, rolebox)
    }

    #[test]
    fn empty_extension_satisfies_any_gci() {
        let (tbox, rolebox) = setup("(implies (and A A2) B)");
        let verdict = brute_force_consistency(&tbox, &rolebox, 1, 1_000_000);
        assert!(matches!(verdict, OracleVerdict::Consistent(_)));
    }

    #[test]
    fn contradiction_has_no_model() {
        let (tbox, rolebox) = setup("(implies top (and A (not A)))");
        let verdict = brute_force_consistency(&tbox, &rolebox, 3, 1_000_000);
        assert!(matches!(verdict, OracleVerdict::NoModelUpTo(3)));
    }

    #[test]
    fn worked_example_has_a_small_model() {
        let text = "\
(instance a A)
(implies A (and (some R B) (some R (oneof o1))))
(disjoint B o1)
(implies B (and (some R C) (some (inv R) D) (all (inv S) (oneof o2))))
(disjoint C D)
(implies C (some R E))
(implies E (all (inv S) (oneof o1)))
(subrole R S)
";
        let (tbox, rolebox) = setup(text);
        let verdict = brute_force_consistency(&tbox, &rolebox, 4, 200_000_000);
        let OracleVerdict::Consistent(model) = verdict else {
            panic!("expected a model, got {:?}", verdict);
        };
        assert!(model.domain <= 4);
    }

    #[test]
    fn full_master_agrees_on_reference_node() {
        let text = "\
(instance a A)
(implies A (and (some R B) (some R (oneof o1))))
(disjoint B o1)
(subrole R S)
";
        let (tbox, rolebox) = setup(text);
        let label: std::collections::BTreeSet<Concept> = [
            Concept::exists(Role::named("R"), Concept::atom("B")),
            Concept::exists(Role::named("R"), Concept::nominal("o1")),
        ]
        .into_iter()
        .collect();
        let q = build_decomposition(&label, &BTreeMap::new(), &rolebox);
        let pp = build_pp(&q, &tbox, &rolebox, &BTreeMap::new());
        assert_eq!(full_master_solve(&q, &pp), MasterVerdict::Optimal(rat(2)));
        let (outcome, _, _) = solve_node(&q, &pp, &AmOptions::default());
        assert!(matches!(outcome, AmOutcome::Satisfiable { objective, .. } if objective == rat(2)));
    }

    #[test]
    fn full_master_detects_infeasibility() {
        let text = "(disjoint A B o)\n(implies Z (and (some R A) (some R B) (all R (oneof o))))";
        let (tbox, rolebox) = setup(text);
        let label: std::collections::BTreeSet<Concept> = [
            Concept::exists(Role::named("R"), Concept::atom("A")),
            Concept::exists(Role::named("R"), Concept::atom("B")),
            Concept::forall(Role::named("R"), Concept::nominal("o")),
        ]
        .into_iter()
        .collect();
        let q = build_decomposition(&label, &BTreeMap::new(), &rolebox);
        let pp = build_pp(&q, &tbox, &rolebox, &BTreeMap::new());
        assert_eq!(full_master_solve(&q, &pp), MasterVerdict::Infeasible);
    }
}
