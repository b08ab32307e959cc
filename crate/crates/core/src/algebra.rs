//! The algebraic module: decomposition of a node's numerical obligations
//! into a column-generation instance, and extraction of solution tuples.
//!
//! Existential restrictions and related nominals become master rows
//! (coverage ≥ 1 and partition = 1 respectively); universal restrictions,
//! role hierarchy, name-level subsumption, and disjointness shape the
//! pricing problem. An infeasible instance is a clash at the node.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use shoi_simplex::{
    branch_and_price, rat, solve_binary, BinStatus, BinaryProgram, BnpError, BnpOptions,
    BnpResult, CgIteration, MasterRowKind, PricedColumn, Pricer, PricingOutcome, Rat, Relation,
};

use crate::concept::{Concept, Role};
use crate::graph::NodeId;
use crate::rolebox::RoleBox;
use crate::tbox::{Name, Tbox};

/// One decomposition element: a role with its qualification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QElem {
    pub role: Role,
    /// Name standing in for the qualification inside the pricing problem;
    /// complex fillers get a fresh name.
    pub qual_name: Name,
    /// The original filler concept (what the tableau materializes).
    pub qual_concept: Concept,
    /// Present on synthetic elements encoding an existing edge from B(x):
    /// the recorded neighbour and the recorded edge role set.
    pub reuse: Option<(NodeId, BTreeSet<Role>)>,
}

impl QElem {
    pub fn display_name(&self) -> String {
        format!("{}_{}", self.role, self.qual_name)
    }
}

/// Q = Q∃ ∪ Q∀ ∪ Qo.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecompositionSet {
    pub exists: Vec<QElem>,
    pub forall: Vec<QElem>,
    pub nominals: Vec<String>,
}

impl DecompositionSet {
    pub fn size(&self) -> usize {
        self.exists.len() + self.forall.len() + self.nominals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// Master rows: Q∃ coverage rows then Qo partition rows.
    pub fn master_rows(&self) -> Vec<MasterRowKind> {
        let mut rows = vec![MasterRowKind::AtLeastOne; self.exists.len()];
        rows.extend(vec![MasterRowKind::ExactlyOne; self.nominals.len()]);
        rows
    }
}

fn qual_to_name(
    qual: &Concept,
    fresh: &mut BTreeMap<Concept, Name>,
    counter: &mut usize,
) -> Name {
    match qual {
        Concept::Atom(a) => Name::Atom(a.clone()),
        Concept::Nominal(o) => Name::Nominal(o.clone()),
        complex => fresh
            .entry(complex.clone())
            .or_insert_with(|| {
                *counter += 1;
                Name::Atom(format!("q#{}", counter))
            })
            .clone(),
    }
}

/// The least role of `roles` under ⊑* (ties broken by role order).
fn minimal_role(roles: &BTreeSet<Role>, rolebox: &RoleBox) -> Role {
    let mut best: Option<Role> = None;
    for r in roles {
        let minimal = roles.iter().all(|s| {
            s == r || !rolebox.subsumes_star(s, r).unwrap_or(false)
                || rolebox.subsumes_star(r, s).unwrap_or(false)
        });
        if minimal && best.is_none() {
            best = Some(r.clone());
        }
    }
    best.unwrap_or_else(|| roles.iter().next().expect("nonempty role set").clone())
}

/// Builds Q from a saturated label and the node's back-edge records.
pub fn build_decomposition(
    label: &BTreeSet<Concept>,
    back_edges: &BTreeMap<NodeId, BTreeSet<Role>>,
    rolebox: &RoleBox,
) -> DecompositionSet {
    let mut fresh = BTreeMap::new();
    let mut counter = 0usize;
    let mut exists = Vec::new();
    let mut forall = Vec::new();
    let mut seen_exists = BTreeSet::new();
    let mut seen_forall = BTreeSet::new();
    for c in label {
        match c {
            Concept::Exists(role, filler) => {
                if seen_exists.insert((role.clone(), (**filler).clone())) {
                    exists.push(QElem {
                        role: role.clone(),
                        qual_name: qual_to_name(filler, &mut fresh, &mut counter),
                        qual_concept: (**filler).clone(),
                        reuse: None,
                    });
                }
            }
            Concept::Forall(role, filler) => {
                if seen_forall.insert((role.clone(), (**filler).clone())) {
                    forall.push(QElem {
                        role: role.clone(),
                        qual_name: qual_to_name(filler, &mut fresh, &mut counter),
                        qual_concept: (**filler).clone(),
                        reuse: None,
                    });
                }
            }
            _ => {}
        }
    }
    // Synthetic elements for already existing neighbours recorded in B(x).
    let mut reuse_counter = 0usize;
    for (v, roles) in back_edges {
        reuse_counter += 1;
        let fresh_name = Name::Atom(format!("x#{}", reuse_counter));
        exists.push(QElem {
            role: minimal_role(roles, rolebox),
            qual_name: fresh_name,
            qual_concept: Concept::Top,
            reuse: Some((*v, roles.clone())),
        });
    }
    // Qo: nominals in the closures of all qualifications.
    let mut nominals = BTreeSet::new();
    for elem in exists.iter().chain(forall.iter()) {
        if elem.reuse.is_none() {
            nominals.extend(elem.qual_concept.nominals());
        }
    }
    DecompositionSet {
        exists,
        forall,
        nominals: nominals.into_iter().collect(),
    }
}

/// The pricing problem, ready to receive dual objective coefficients.
#[derive(Debug, Clone)]
pub struct PricingProblem {
    pub bp: BinaryProgram,
    /// membership variable per Q∃ element (r_{R_q})
    pub exists_vars: Vec<usize>,
    /// membership variable per Qo nominal (r_{I_q})
    pub nominal_vars: Vec<usize>,
    /// r_{R_⊤} per relevant role
    pub top_vars: BTreeMap<Role, usize>,
    /// b variable per name
    pub name_vars: BTreeMap<Name, usize>,
}

impl PricingProblem {
    fn membership_vars(&self) -> Vec<usize> {
        let mut v = self.exists_vars.clone();
        v.extend(&self.nominal_vars);
        v
    }
}

/// Builds the pricing problem for a decomposition set.
///
/// `reuse_names` lists, per reused node, the atomic/nominal names in its
/// label; the corresponding cell is forced to carry them.
pub fn build_pp(
    q: &DecompositionSet,
    tbox: &Tbox,
    rolebox: &RoleBox,
    reuse_names: &BTreeMap<NodeId, BTreeSet<Name>>,
) -> PricingProblem {
    let mut bp = BinaryProgram::default();
    let mut name_vars: BTreeMap<Name, usize> = BTreeMap::new();

    // Name universe: qualification names, related nominals, reused labels,
    // then closure under applicable name-level inclusions.
    let mut universe: BTreeSet<Name> = BTreeSet::new();
    for elem in q.exists.iter().chain(q.forall.iter()) {
        universe.insert(elem.qual_name.clone());
        if elem.reuse.is_none() {
            for o in elem.qual_concept.nominals() {
                universe.insert(Name::Nominal(o));
            }
        }
    }
    for o in &q.nominals {
        universe.insert(Name::Nominal(o.clone()));
    }
    let mut applicable = vec![false; tbox.name_inclusions.len()];
    loop {
        let mut grew = false;
        for (i, inc) in tbox.name_inclusions.iter().enumerate() {
            if applicable[i] {
                continue;
            }
            if inc.lhs.iter().all(|n| universe.contains(n)) {
                applicable[i] = true;
                for n in &inc.rhs {
                    universe.insert(n.clone());
                }
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    for name in &universe {
        let var = bp.add_var(rat(1));
        name_vars.insert(name.clone(), var);
    }

    // Membership variables.
    let exists_vars: Vec<usize> = q.exists.iter().map(|_| bp.add_var(Rat::zero())).collect();
    let nominal_vars: Vec<usize> = q.nominals.iter().map(|_| bp.add_var(Rat::zero())).collect();

    // r_{R_q} - b_q ≤ 0 for every Q∃ element.
    for (elem, &r_var) in q.exists.iter().zip(&exists_vars) {
        let b_var = name_vars[&elem.qual_name];
        bp.add_row(
            vec![(r_var, rat(1)), (b_var, rat(-1))],
            Relation::Le,
            Rat::zero(),
        );
    }
    // r_{I_q} - b_q = 0 for every related nominal.
    for (o, &r_var) in q.nominals.iter().zip(&nominal_vars) {
        let b_var = name_vars[&Name::Nominal(o.clone())];
        bp.add_row(
            vec![(r_var, rat(1)), (b_var, rat(-1))],
            Relation::Eq,
            Rat::zero(),
        );
    }

    // Universal-restriction machinery: roles U that are subroles of some
    // universally restricted role get an r_{U_⊤} variable.
    let forall_roles: Vec<Role> = q.forall.iter().map(|e| e.role.clone()).collect();
    let mut relevant: BTreeSet<Role> = BTreeSet::new();
    let mut role_universe: Vec<Role> = Vec::new();
    for n in rolebox.names() {
        role_universe.push(Role::named(n.clone()));
        role_universe.push(Role::inverse_of(n.clone()));
    }
    let reaches_forall = |u: &Role| {
        forall_roles
            .iter()
            .any(|s| rolebox.subsumes_star(u, s).unwrap_or(false))
    };
    for elem in &q.exists {
        if reaches_forall(&elem.role) {
            for t in role_universe.iter() {
                if rolebox.subsumes_star(&elem.role, t).unwrap_or(false) && reaches_forall(t) {
                    relevant.insert(t.clone());
                }
            }
        }
    }
    for s in &forall_roles {
        if q.exists.iter().any(|e| {
            rolebox.subsumes_star(&e.role, s).unwrap_or(false)
        }) {
            relevant.insert(s.clone());
        }
    }
    let mut top_vars: BTreeMap<Role, usize> = BTreeMap::new();
    for role in &relevant {
        top_vars.insert(role.clone(), bp.add_var(Rat::zero()));
    }
    // r_{R_q} - r_{R_⊤} ≤ 0.
    for (elem, &r_var) in q.exists.iter().zip(&exists_vars) {
        if let Some(&t_var) = top_vars.get(&elem.role) {
            bp.add_row(
                vec![(r_var, rat(1)), (t_var, rat(-1))],
                Relation::Le,
                Rat::zero(),
            );
        }
    }
    // r_{R_⊤} - r_{S_⊤} ≤ 0 per declared pair with both ends relevant.
    for (r, s) in rolebox.declared_pairs() {
        if let (Some(&rv), Some(&sv)) = (top_vars.get(r), top_vars.get(s)) {
            bp.add_row(
                vec![(rv, rat(1)), (sv, rat(-1))],
                Relation::Le,
                Rat::zero(),
            );
        }
    }
    // r_{S_⊤} - Σ b_{oᵢ} ≤ 0 per universal restriction (generalized to
    // nominal sets; a plain or fresh qualification uses its single name).
    for elem in &q.forall {
        let Some(&t_var) = top_vars.get(&elem.role) else {
            continue;
        };
        let names: Vec<Name> = match elem.qual_concept.as_nominal_set() {
            Some(os) => os.into_iter().map(Name::Nominal).collect(),
            None => vec![elem.qual_name.clone()],
        };
        let mut coeffs = vec![(t_var, rat(1))];
        for n in &names {
            coeffs.push((name_vars[n], rat(-1)));
        }
        bp.add_row(coeffs, Relation::Le, Rat::zero());
    }

    // A reused neighbour's cell cannot contain anything declared disjoint
    // with a name already in that neighbour's label.
    for elem in &q.exists {
        let Some((v, _)) = &elem.reuse else {
            continue;
        };
        let b_cell = name_vars[&elem.qual_name];
        let Some(labels) = reuse_names.get(v) else {
            continue;
        };
        let mut conflicting: BTreeSet<usize> = BTreeSet::new();
        for group in &tbox.disjoint_groups {
            if !group.iter().any(|m| labels.contains(m)) {
                continue;
            }
            for other in group {
                if labels.contains(other) {
                    continue;
                }
                if let Some(&b_other) = name_vars.get(other) {
                    conflicting.insert(b_other);
                }
            }
        }
        for b_other in conflicting {
            bp.add_row(
                vec![(b_cell, rat(1)), (b_other, rat(1))],
                Relation::Le,
                rat(1),
            );
        }
    }

    // Name-level inclusions: Σ b_lhs − (n−1) ≤ Σ b_rhs.
    for (i, inc) in tbox.name_inclusions.iter().enumerate() {
        if !applicable[i] {
            continue;
        }
        let mut coeffs: Vec<(usize, Rat)> = Vec::new();
        for n in &inc.lhs {
            coeffs.push((name_vars[n], rat(1)));
        }
        for n in &inc.rhs {
            if let Some(&v) = name_vars.get(n) {
                coeffs.push((v, rat(-1)));
            }
        }
        bp.add_row(coeffs, Relation::Le, rat(inc.lhs.len() as i64 - 1));
    }
    // Disjointness groups: at most one member per cell.
    for group in &tbox.disjoint_groups {
        let members: Vec<usize> = group
            .iter()
            .filter_map(|n| name_vars.get(n).copied())
            .collect();
        if members.len() >= 2 {
            bp.add_row(
                members.into_iter().map(|v| (v, rat(1))).collect(),
                Relation::Le,
                rat(1),
            );
        }
    }

    PricingProblem {
        bp,
        exists_vars,
        nominal_vars,
        top_vars,
        name_vars,
    }
}

/// The algebraic module's instruction to the tableau engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionTuple {
    pub roles: BTreeSet<Role>,
    pub concepts: BTreeSet<Concept>,
    pub n: u64,
    pub reuse: BTreeSet<NodeId>,
}

/// Payload carried by generated columns, enough to rebuild tuples.
#[derive(Debug, Clone)]
pub struct ColumnInfo {
    pub member_exists: Vec<usize>,
    pub member_nominals: Vec<usize>,
    pub top_roles: BTreeSet<Role>,
    pub b_names: Vec<Name>,
}

pub struct PpPricer<'a> {
    pub q: &'a DecompositionSet,
    pub pp: &'a PricingProblem,
    pub node_budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpBudgetExceeded;

impl PpPricer<'_> {
    fn priced_bp(&self, duals: &[Rat], forbidden: &[Vec<usize>]) -> BinaryProgram {
        let mut bp = self.pp.bp.clone();
        let n_exists = self.pp.exists_vars.len();
        for (i, &var) in self.pp.exists_vars.iter().enumerate() {
            bp.objective[var] = -duals[i].clone();
        }
        for (i, &var) in self.pp.nominal_vars.iter().enumerate() {
            bp.objective[var] = -duals[n_exists + i].clone();
        }
        // No-good cuts: forbid exact membership patterns.
        let members = self.pp.membership_vars();
        for pattern in forbidden {
            let inside: BTreeSet<usize> = pattern.iter().copied().collect();
            let mut coeffs = Vec::new();
            let mut k = 0i64;
            for (row, &var) in members.iter().enumerate() {
                if inside.contains(&row) {
                    coeffs.push((var, rat(1)));
                    k += 1;
                } else {
                    coeffs.push((var, rat(-1)));
                }
            }
            bp.add_row(coeffs, Relation::Le, rat(k - 1));
        }
        bp
    }

    /// Greedy canonical optimum: membership variables are included
    /// lowest-index-first whenever an optimal solution still exists, which
    /// realizes the lexicographically-smallest-member-set tie-break; the
    /// remaining variables are then minimized in order.
    fn canonical_solution(
        &self,
        bp: &BinaryProgram,
        optimum: &Rat,
    ) -> Result<Vec<bool>, PpBudgetExceeded> {
        let mut bp = bp.clone();
        let members = self.pp.membership_vars();
        let member_set: BTreeSet<usize> = members.iter().copied().collect();
        for &var in &members {
            let mut trial = bp.clone();
            trial.fix_var(var, true);
            let out = solve_binary(&trial, self.node_budget).map_err(|_| PpBudgetExceeded)?;
            let keep = out.status == BinStatus::Optimal && &out.objective == optimum;
            bp.fix_var(var, keep);
        }
        let others: Vec<usize> =
            (0..bp.num_vars()).filter(|v| !member_set.contains(v)).collect();
        for var in others {
            let mut trial = bp.clone();
            trial.fix_var(var, false);
            let out = solve_binary(&trial, self.node_budget).map_err(|_| PpBudgetExceeded)?;
            let keep_zero = out.status == BinStatus::Optimal && &out.objective == optimum;
            bp.fix_var(var, !keep_zero);
        }
        let out = solve_binary(&bp, self.node_budget).map_err(|_| PpBudgetExceeded)?;
        debug_assert_eq!(out.status, BinStatus::Optimal);
        debug_assert_eq!(&out.objective, optimum);
        Ok(out.assignment)
    }
}

impl Pricer for PpPricer<'_> {
    type Info = ColumnInfo;
    type Error = PpBudgetExceeded;

    fn price(
        &mut self,
        duals: &[Rat],
        forbidden: &[Vec<usize>],
    ) -> Result<PricingOutcome<ColumnInfo>, PpBudgetExceeded> {
        let bp = self.priced_bp(duals, forbidden);
        let out = solve_binary(&bp, self.node_budget).map_err(|_| PpBudgetExceeded)?;
        // The all-zero cell is always feasible, so the PP optimum is ≤ 0
        // unless no-good cuts make the program infeasible outright.
        if out.status == BinStatus::Infeasible || !(out.objective < Rat::zero()) {
            let objective = if out.status == BinStatus::Infeasible {
                Rat::zero()
            } else {
                out.objective
            };
            return Ok(PricingOutcome {
                objective,
                column: None,
            });
        }
        let optimum = out.objective;
        let assignment = self.canonical_solution(&bp, &optimum)?;

        let mut rows = Vec::new();
        let mut info = ColumnInfo {
            member_exists: Vec::new(),
            member_nominals: Vec::new(),
            top_roles: BTreeSet::new(),
            b_names: Vec::new(),
        };
        for (i, &var) in self.pp.exists_vars.iter().enumerate() {
            if assignment[var] {
                rows.push(i);
                info.member_exists.push(i);
            }
        }
        let n_exists = self.pp.exists_vars.len();
        for (i, &var) in self.pp.nominal_vars.iter().enumerate() {
            if assignment[var] {
                rows.push(n_exists + i);
                info.member_nominals.push(i);
            }
        }
        for (role, &var) in &self.pp.top_vars {
            if assignment[var] {
                info.top_roles.insert(role.clone());
            }
        }
        let mut cost = Rat::zero();
        for (name, &var) in &self.pp.name_vars {
            if assignment[var] {
                cost += rat(1);
                info.b_names.push(name.clone());
            }
        }
        Ok(PricingOutcome {
            objective: optimum,
            column: Some(PricedColumn {
                rows,
                cost,
                info,
            }),
        })
    }
}

#[derive(Debug, Clone)]
pub struct AmOptions {
    /// Big-M override (reproduces reference traces when pinned to 10).
    pub big_m: Option<Rat>,
    pub max_bp_nodes: usize,
    pub max_pp_nodes: usize,
    pub max_cg_iterations: usize,
    pub dual_sweep_max_rows: usize,
}

impl Default for AmOptions {
    fn default() -> Self {
        AmOptions {
            big_m: None,
            max_bp_nodes: 10_000,
            max_pp_nodes: 2_000_000,
            max_cg_iterations: 100_000,
            dual_sweep_max_rows: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub enum AmOutcome {
    Satisfiable {
        objective: Rat,
        tuples: Vec<SolutionTuple>,
        selection: Vec<(ColumnInfo, u64, Rat)>,
    },
    Infeasible,
    ResourceLimit(String),
}

/// Default big-M: 10 for tiny instances (matching the reference traces),
/// otherwise 2·(|N| + |Q|).
pub fn default_big_m(q: &DecompositionSet, pp: &PricingProblem) -> Rat {
    if q.size() <= 4 {
        rat(10)
    } else {
        rat(2 * (pp.name_vars.len() as i64 + q.size() as i64))
    }
}

/// Runs branch-and-price and converts the selected columns to tuples.
pub fn solve_node(
    q: &DecompositionSet,
    pp: &PricingProblem,
    options: &AmOptions,
) -> (AmOutcome, Vec<CgIteration>, usize) {
    let rows = q.master_rows();
    let mut pricer = PpPricer {
        q,
        pp,
        node_budget: options.max_pp_nodes,
    };
    let bnp_options = BnpOptions {
        big_m: options
            .big_m
            .clone()
            .unwrap_or_else(|| default_big_m(q, pp)),
        max_tree_nodes: options.max_bp_nodes,
        max_cg_iterations: options.max_cg_iterations,
        dual_sweep_max_rows: options.dual_sweep_max_rows,
    };
    let outcome = match branch_and_price(&rows, &mut pricer, &bnp_options) {
        Ok(o) => o,
        Err(BnpError::TreeNodeBudget) => {
            return (
                AmOutcome::ResourceLimit("branch-and-price tree node budget".into()),
                Vec::new(),
                0,
            )
        }
        Err(BnpError::CgIterationBudget) => {
            return (
                AmOutcome::ResourceLimit("column generation iteration budget".into()),
                Vec::new(),
                0,
            )
        }
        Err(BnpError::Pricing(_)) => {
            return (
                AmOutcome::ResourceLimit("pricing search node budget".into()),
                Vec::new(),
                0,
            )
        }
    };
    let tree_nodes = outcome.tree_nodes;
    match outcome.result {
        BnpResult::Infeasible => (AmOutcome::Infeasible, outcome.iterations, tree_nodes),
        BnpResult::Optimal {
            objective,
            selection,
        } => {
            let mut tuples = Vec::new();
            let mut raw = Vec::new();
            for sel in selection {
                let tuple = tuple_from_column(q, &sel.info, sel.value);
                tuples.push(tuple);
                raw.push((sel.info, sel.value, sel.cost));
            }
            (
                AmOutcome::Satisfiable {
                    objective,
                    tuples,
                    selection: raw,
                },
                outcome.iterations,
                tree_nodes,
            )
        }
    }
}

fn tuple_from_column(q: &DecompositionSet, info: &ColumnInfo, value: u64) -> SolutionTuple {
    let mut roles = BTreeSet::new();
    let mut concepts = BTreeSet::new();
    let mut reuse = BTreeSet::new();
    for &i in &info.member_exists {
        let elem = &q.exists[i];
        match &elem.reuse {
            Some((v, edge_roles)) => {
                reuse.insert(*v);
                roles.extend(edge_roles.iter().cloned());
            }
            None => {
                roles.insert(elem.role.clone());
                concepts.insert(elem.qual_concept.clone());
            }
        }
    }
    for &i in &info.member_nominals {
        concepts.insert(Concept::nominal(q.nominals[i].clone()));
    }
    roles.extend(info.top_roles.iter().cloned());
    let has_nominal = concepts
        .iter()
        .any(|c| matches!(c, Concept::Nominal(_)));
    debug_assert!(
        !has_nominal || value == 1,
        "a cell containing a nominal has cardinality 1"
    );
    SolutionTuple {
        roles,
        concepts,
        n: value,
        reuse,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_ontology;
    use crate::tbox::internalize;

    fn worked_example() -> (Tbox, RoleBox) {
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
        let doc = parse_ontology(text).unwrap();
        let axioms = doc.axioms();
        let tbox = internalize(&axioms);
        let rolebox = RoleBox::new(
            axioms.roles.iter().cloned(),
            axioms.transitive.iter().cloned(),
            axioms.subroles.clone(),
        );
        (tbox, rolebox)
    }

    fn label(concepts: &[Concept]) -> BTreeSet<Concept> {
        concepts.iter().cloned().collect()
    }

    #[test]
    fn decomposition_of_root_label() {
        let (_, rolebox) = worked_example();
        let l = label(&[
            Concept::atom("A"),
            Concept::exists(Role::named("R"), Concept::atom("B")),
            Concept::exists(Role::named("R"), Concept::nominal("o1")),
        ]);
        let q = build_decomposition(&l, &BTreeMap::new(), &rolebox);
        assert_eq!(q.exists.len(), 2);
        assert_eq!(q.exists[0].qual_name, Name::Atom("B".into()));
        assert_eq!(q.exists[1].qual_name, Name::Nominal("o1".into()));
        assert!(q.forall.is_empty());
        assert_eq!(q.nominals, vec!["o1".to_string()]);
    }

    #[test]
    fn decomposition_with_back_edge() {
        let (_, rolebox) = worked_example();
        let l = label(&[
            Concept::atom("B"),
            Concept::exists(Role::named("R"), Concept::atom("C")),
            Concept::exists(Role::inverse_of("R"), Concept::atom("D")),
            Concept::forall(Role::inverse_of("S"), Concept::nominal("o2")),
        ]);
        let mut back = BTreeMap::new();
        back.insert(
            0usize,
            [Role::inverse_of("R"), Role::inverse_of("S")]
                .into_iter()
                .collect::<BTreeSet<_>>(),
        );
        let q = build_decomposition(&l, &back, &rolebox);
        assert_eq!(q.exists.len(), 3);
        assert!(q.exists[2].reuse.is_some());
        assert_eq!(q.exists[2].role, Role::inverse_of("R"));
        assert_eq!(q.forall.len(), 1);
        assert_eq!(q.nominals, vec!["o2".to_string()]);
    }

    #[test]
    fn empty_label_gives_empty_decomposition() {
        let (_, rolebox) = worked_example();
        let q = build_decomposition(&label(&[Concept::atom("A")]), &BTreeMap::new(), &rolebox);
        assert!(q.is_empty());
    }

    #[test]
    fn node_x_trace_matches_reference() {
        let (tbox, rolebox) = worked_example();
        let l = label(&[
            Concept::atom("A"),
            Concept::exists(Role::named("R"), Concept::atom("B")),
            Concept::exists(Role::named("R"), Concept::nominal("o1")),
        ]);
        let q = build_decomposition(&l, &BTreeMap::new(), &rolebox);
        let pp = build_pp(&q, &tbox, &rolebox, &BTreeMap::new());
        let options = AmOptions {
            big_m: Some(rat(10)),
            ..Default::default()
        };
        let (outcome, iterations, _) = solve_node(&q, &pp, &options);
        let rmp: Vec<Rat> = iterations.iter().map(|i| i.rmp_objective.clone()).collect();
        let pp_seq: Vec<Rat> = iterations.iter().map(|i| i.pp_objective.clone()).collect();
        assert_eq!(rmp, vec![rat(30), rat(11), rat(2)]);
        assert_eq!(pp_seq, vec![rat(-19), rat(-9), rat(0)]);
        match outcome {
            AmOutcome::Satisfiable {
                objective, tuples, ..
            } => {
                assert_eq!(objective, rat(2));
                assert_eq!(tuples.len(), 2);
                let o1_tuple = SolutionTuple {
                    roles: [Role::named("R")].into_iter().collect(),
                    concepts: [Concept::nominal("o1")].into_iter().collect(),
                    n: 1,
                    reuse: BTreeSet::new(),
                };
                let b_tuple = SolutionTuple {
                    roles: [Role::named("R")].into_iter().collect(),
                    concepts: [Concept::atom("B")].into_iter().collect(),
                    n: 1,
                    reuse: BTreeSet::new(),
                };
                assert!(tuples.contains(&o1_tuple));
                assert!(tuples.contains(&b_tuple));
            }
            other => panic!("expected satisfiable, got {:?}", other),
        }
    }

    #[test]
    fn node_x2_trace_matches_reference() {
        let (tbox, rolebox) = worked_example();
        let l = label(&[
            Concept::atom("B"),
            Concept::exists(Role::named("R"), Concept::atom("C")),
            Concept::exists(Role::inverse_of("R"), Concept::atom("D")),
            Concept::forall(Role::inverse_of("S"), Concept::nominal("o2")),
        ]);
        let reused_node: NodeId = 0;
        let mut back = BTreeMap::new();
        back.insert(
            reused_node,
            [Role::inverse_of("R"), Role::inverse_of("S")]
                .into_iter()
                .collect::<BTreeSet<_>>(),
        );
        let q = build_decomposition(&l, &back, &rolebox);
        let pp = build_pp(
            &q,
            &tbox,
            &rolebox,
            &[(reused_node, BTreeSet::from([Name::Atom("A".into())]))]
                .into_iter()
                .collect(),
        );
        let options = AmOptions {
            big_m: Some(rat(10)),
            ..Default::default()
        };
        let (outcome, iterations, _) = solve_node(&q, &pp, &options);
        let rmp: Vec<Rat> = iterations.iter().map(|i| i.rmp_objective.clone()).collect();
        assert_eq!(rmp, vec![rat(40), rat(13), rat(13), rat(4), rat(4)]);
        match outcome {
            AmOutcome::Satisfiable {
                objective, tuples, ..
            } => {
                assert_eq!(objective, rat(4));
                let c_tuple = SolutionTuple {
                    roles: [Role::named("R")].into_iter().collect(),
                    concepts: [Concept::atom("C")].into_iter().collect(),
                    n: 1,
                    reuse: BTreeSet::new(),
                };
                let reuse_tuple = SolutionTuple {
                    roles: [Role::inverse_of("R"), Role::inverse_of("S")]
                        .into_iter()
                        .collect(),
                    concepts: [Concept::atom("D"), Concept::nominal("o2")]
                        .into_iter()
                        .collect(),
                    n: 1,
                    reuse: [reused_node].into_iter().collect(),
                };
                assert_eq!(tuples.len(), 2);
                assert!(tuples.contains(&c_tuple), "missing {:?}", tuples);
                assert!(tuples.contains(&reuse_tuple), "missing reuse tuple: {:?}", tuples);
            }
            other => panic!("expected satisfiable, got {:?}", other),
        }
    }

    #[test]
    fn node_x3_trace_matches_reference() {
        let (tbox, rolebox) = worked_example();
        let l = label(&[
            Concept::atom("C"),
            Concept::exists(Role::named("R"), Concept::atom("E")),
        ]);
        let q = build_decomposition(&l, &BTreeMap::new(), &rolebox);
        let pp = build_pp(&q, &tbox, &rolebox, &BTreeMap::new());
        let options = AmOptions {
            big_m: Some(rat(10)),
            ..Default::default()
        };
        let (outcome, iterations, _) = solve_node(&q, &pp, &options);
        let rmp: Vec<Rat> = iterations.iter().map(|i| i.rmp_objective.clone()).collect();
        assert_eq!(rmp, vec![rat(10), rat(1)]);
        assert!(matches!(outcome, AmOutcome::Satisfiable { objective, .. } if objective == rat(1)));
    }

    #[test]
    fn disjoint_universe_is_infeasible() {
        // ∃R.A, ∃R.B under ∀R.{o} with A, B, o pairwise disjoint: no cell can
        // satisfy any coverage row.
        let text = "\
(instance seed top)
(disjoint A B o)
(implies Z (and (some R A) (some R B) (all R (oneof o))))
";
        let doc = parse_ontology(text).unwrap();
        let axioms = doc.axioms();
        let tbox = internalize(&axioms);
        let rolebox = RoleBox::new(axioms.roles.iter().cloned(), [], []);
        let l = label(&[
            Concept::exists(Role::named("R"), Concept::atom("A")),
            Concept::exists(Role::named("R"), Concept::atom("B")),
            Concept::forall(Role::named("R"), Concept::nominal("o")),
        ]);
        let q = build_decomposition(&l, &BTreeMap::new(), &rolebox);
        let pp = build_pp(&q, &tbox, &rolebox, &BTreeMap::new());
        let (outcome, _, _) = solve_node(&q, &pp, &AmOptions::default());
        assert!(matches!(outcome, AmOutcome::Infeasible));
    }
}
