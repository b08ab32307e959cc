//! The tableau engine: expansion rules over the completion graph, equality
//! blocking, chronological backtracking over disjunction choices, and
//! dispatch into the algebraic module.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use shoi_simplex::Rat;

use crate::algebra::{
    build_decomposition, build_pp, solve_node, AmOptions, AmOutcome, DecompositionSet,
    SolutionTuple,
};
use crate::concept::{Concept, Role};
use crate::graph::{CompletionGraph, NodeId};
use crate::rolebox::RoleBox;
use crate::tbox::{Name, Tbox, Unfolding};
use crate::trace::{EnteringColumn, Trace, TraceEvent, TupleRecord};

/// Nominal introduced for the root node; `#` keeps it outside the
/// identifier space of the ontology format.
pub const ROOT_NOMINAL: &str = "#root";

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub max_nodes: usize,
    /// Branch-and-price tree nodes per algebraic-module call.
    pub max_bp_nodes: usize,
    /// Search nodes per pricing-problem solve.
    pub max_pp_nodes: usize,
    pub timeout: Option<Duration>,
    /// Pins the artificial-variable cost (reference traces use 10).
    pub big_m: Option<Rat>,
    pub dual_sweep_max_rows: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            max_nodes: 100_000,
            max_bp_nodes: 10_000,
            max_pp_nodes: 2_000_000,
            timeout: Some(Duration::from_secs(300)),
            big_m: None,
            dual_sweep_max_rows: 16,
        }
    }
}

#[derive(Debug)]
pub enum Verdict {
    Consistent(CompletionGraph),
    Inconsistent,
    /// Resource budget exhausted: not a verdict.
    GaveUp(String),
}

#[derive(Debug, Clone, Default)]
pub struct EngineStats {
    pub nodes_created: usize,
    pub rule_applications: BTreeMap<&'static str, usize>,
    pub am_invocations: usize,
    pub columns_generated: usize,
    pub bp_tree_nodes: usize,
    pub backtracks: usize,
}

struct BranchPoint {
    graph: CompletionGraph,
    solved_q: BTreeMap<NodeId, DecompositionSet>,
    node: NodeId,
    concept: Concept,
    remaining: Vec<Concept>,
}

struct Engine<'a> {
    tbox: &'a Tbox,
    rolebox: &'a RoleBox,
    options: &'a EngineOptions,
    graph: CompletionGraph,
    solved_q: BTreeMap<NodeId, DecompositionSet>,
    branches: Vec<BranchPoint>,
    stats: EngineStats,
    started: Instant,
}

enum StepOutcome {
    Progress,
    Clash,
    Complete,
    GaveUp(String),
}

/// Checks Tbox consistency by saturating a completion graph rooted at a
/// fresh nominal carrying C_T.
pub fn check_consistency(
    tbox: &Tbox,
    rolebox: &RoleBox,
    options: &EngineOptions,
    trace: &mut Trace,
) -> (Verdict, EngineStats) {
    let mut graph = CompletionGraph::default();
    graph.add_node(
        [Concept::nominal(ROOT_NOMINAL), tbox.c_t.clone()],
        1,
        true,
        None,
    );
    // Every nominal occurring in the ontology gets an initial node: the
    // nominal semantics require it to exist, and assertion axioms
    // ¬{a} ⊔ C must be checked at a's node.
    for o in &tbox.nominals {
        graph.add_node([Concept::nominal(o.clone()), tbox.c_t.clone()], 1, true, None);
    }
    let mut engine = Engine {
        tbox,
        rolebox,
        options,
        graph,
        solved_q: BTreeMap::new(),
        branches: Vec::new(),
        stats: EngineStats::default(),
        started: Instant::now(),
    };
    engine.stats.nodes_created = engine.graph.nodes.len();
    let verdict = engine.run(trace);
    (verdict, engine.stats)
}

impl Engine<'_> {
    fn run(&mut self, trace: &mut Trace) -> Verdict {
        loop {
            if let Some(limit) = self.options.timeout {
                if self.started.elapsed() > limit {
                    return Verdict::GaveUp("wall-clock budget exceeded".into());
                }
            }
            if self.graph.nodes.len() > self.options.max_nodes {
                return Verdict::GaveUp("graph node budget exceeded".into());
            }
            match self.step(trace) {
                StepOutcome::Progress => {}
                StepOutcome::Complete => {
                    return Verdict::Consistent(std::mem::take(&mut self.graph))
                }
                StepOutcome::GaveUp(reason) => return Verdict::GaveUp(reason),
                StepOutcome::Clash => {
                    if !self.backtrack(trace) {
                        return Verdict::Inconsistent;
                    }
                }
            }
        }
    }

    /// Restores the most recent branch point that still has untried
    /// disjuncts. Returns false when the search space is exhausted.
    fn backtrack(&mut self, trace: &mut Trace) -> bool {
        self.stats.backtracks += 1;
        while let Some(top) = self.branches.last_mut() {
            if top.remaining.is_empty() {
                self.branches.pop();
                continue;
            }
            let next = top.remaining.remove(0);
            let node = top.node;
            let concept = top.concept.clone();
            self.graph = top.graph.clone();
            self.solved_q = top.solved_q.clone();
            trace.push(TraceEvent::Backtrack {
                node,
                concept: crate::parser::render_concept(&concept),
                chosen: crate::parser::render_concept(&next),
            });
            self.graph.add_concept(node, next);
            return true;
        }
        false
    }

    fn bump(&mut self, rule: &'static str) {
        *self.stats.rule_applications.entry(rule).or_insert(0) += 1;
    }

    /// Applies the highest-priority applicable rule instance:
    /// clash > nom_merge > inverse > unfold > ⊓ > ∀ > ∀₊ > ⊔ > algebraic module.
    fn step(&mut self, trace: &mut Trace) -> StepOutcome {
        if self.find_clash().is_some() {
            return StepOutcome::Clash;
        }
        if let Some((from, into, nominal)) = self.find_nom_merge() {
            self.bump("nom_merge");
            self.graph.merge(from, into);
            trace.push(TraceEvent::Merge {
                from,
                into,
                nominal,
            });
            return StepOutcome::Progress;
        }
        if self.apply_inverse(trace) {
            return StepOutcome::Progress;
        }
        if self.apply_unfold(trace) {
            return StepOutcome::Progress;
        }
        if self.apply_and(trace) {
            return StepOutcome::Progress;
        }
        if self.apply_forall(trace) {
            return StepOutcome::Progress;
        }
        if self.apply_forall_trans(trace) {
            return StepOutcome::Progress;
        }
        if let Some(outcome) = self.apply_or(trace) {
            return outcome;
        }
        self.apply_am(trace)
    }

    /// A clash: ⊥ in a label, a complementary pair, or two members of a
    /// disjointness group in one label.
    fn find_clash(&self) -> Option<NodeId> {
        for x in self.graph.live_nodes() {
            let label = self.graph.label(x);
            if label.contains(&Concept::Bottom) {
                return Some(x);
            }
            for c in label {
                if matches!(c, Concept::Not(_)) && label.contains(&c.negated()) {
                    return Some(x);
                }
            }
            for group in &self.tbox.disjoint_groups {
                let present = group
                    .iter()
                    .filter(|n| label.contains(&n.as_concept()))
                    .count();
                if present >= 2 {
                    return Some(x);
                }
            }
        }
        None
    }

    /// Two live nodes sharing a nominal. The initial node absorbs; between
    /// two non-initial nodes the newer merges into the older.
    fn find_nom_merge(&self) -> Option<(NodeId, NodeId, String)> {
        let mut holders: BTreeMap<&str, NodeId> = BTreeMap::new();
        for x in self.graph.live_nodes() {
            for c in self.graph.label(x) {
                let Concept::Nominal(o) = c else { continue };
                match holders.get(o.as_str()) {
                    None => {
                        holders.insert(o, x);
                    }
                    Some(&h) => {
                        let (from, into) = if self.graph.nodes[h].initial {
                            (x, h)
                        } else if self.graph.nodes[x].initial {
                            (h, x)
                        } else {
                            (x, h)
                        };
                        return Some((from, into, o.clone()));
                    }
                }
            }
        }
        None
    }

    /// Records ⟨v, L(y,v)⟩ in B(y) for every universal restriction in L(y)
    /// with a matching neighbour; edge labels are superrole-closed, so an
    /// exact role match suffices.
    fn apply_inverse(&mut self, trace: &mut Trace) -> bool {
        let mut pending: Option<(NodeId, NodeId, BTreeSet<Role>)> = None;
        'outer: for y in self.graph.live_nodes() {
            for c in self.graph.label(y) {
                let Concept::Forall(role, _) = c else { continue };
                for (v, roles) in self.graph.edges_from(y) {
                    if roles.contains(role)
                        && !self.graph.nodes[y].back_edges.contains(&(v, roles.clone()))
                    {
                        pending = Some((y, v, roles.clone()));
                        break 'outer;
                    }
                }
            }
        }
        if let Some((y, v, roles)) = pending {
            self.bump("inverse");
            self.graph.add_back_edge(y, v, roles);
            trace.push(TraceEvent::Rule {
                rule: "inverse",
                node: y,
                target: Some(v),
                added: Vec::new(),
            });
            return true;
        }
        false
    }

    /// Lazy unfolding: a defined atomic name pulls in its definition; a
    /// negated complete definition pulls in the negated definition.
    fn apply_unfold(&mut self, trace: &mut Trace) -> bool {
        let mut pending: Option<(NodeId, Concept)> = None;
        'outer: for x in self.graph.live_nodes() {
            let label = self.graph.label(x);
            for c in label {
                match c {
                    Concept::Atom(a) => {
                        if let Some(unfolding) = self.tbox.unfold.get(a) {
                            let d = match unfolding {
                                Unfolding::Primitive(d) | Unfolding::Definition(d) => d,
                            };
                            if !label.contains(d) && *d != Concept::Top {
                                pending = Some((x, d.clone()));
                                break 'outer;
                            }
                        }
                    }
                    Concept::Not(inner) => {
                        if let Concept::Atom(a) = &**inner {
                            if let Some(Unfolding::Definition(d)) = self.tbox.unfold.get(a) {
                                let nd = d.negated();
                                if !label.contains(&nd) && nd != Concept::Top {
                                    pending = Some((x, nd));
                                    break 'outer;
                                }
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        if let Some((x, d)) = pending {
            self.bump("unfold");
            trace.push(TraceEvent::Rule {
                rule: "unfold",
                node: x,
                target: None,
                added: vec![crate::parser::render_concept(&d)],
            });
            self.graph.add_concept(x, d);
            return true;
        }
        false
    }

    fn apply_and(&mut self, trace: &mut Trace) -> bool {
        let mut pending: Option<(NodeId, Vec<Concept>)> = None;
        'outer: for x in self.graph.live_nodes() {
            let label = self.graph.label(x);
            for c in label {
                let Concept::And(cs) = c else { continue };
                let missing: Vec<Concept> = cs
                    .iter()
                    .filter(|child| !label.contains(*child) && **child != Concept::Top)
                    .cloned()
                    .collect();
                if !missing.is_empty() {
                    pending = Some((x, missing));
                    break 'outer;
                }
            }
        }
        if let Some((x, additions)) = pending {
            self.bump("and");
            trace.push(TraceEvent::Rule {
                rule: "and",
                node: x,
                target: None,
                added: additions
                    .iter()
                    .map(crate::parser::render_concept)
                    .collect(),
            });
            for c in additions {
                self.graph.add_concept(x, c);
            }
            return true;
        }
        false
    }

    fn apply_forall(&mut self, trace: &mut Trace) -> bool {
        let mut pending: Option<(NodeId, NodeId, Concept)> = None;
        'outer: for x in self.graph.live_nodes() {
            for c in self.graph.label(x) {
                let Concept::Forall(s, filler) = c else { continue };
                for (y, roles) in self.graph.edges_from(x) {
                    let reaches = roles
                        .iter()
                        .any(|r| self.rolebox.subsumes_star(r, s).unwrap_or(false));
                    if reaches && !self.graph.label(y).contains(&**filler) {
                        pending = Some((x, y, (**filler).clone()));
                        break 'outer;
                    }
                }
            }
        }
        if let Some((x, y, filler)) = pending {
            self.bump("forall");
            trace.push(TraceEvent::Rule {
                rule: "forall",
                node: x,
                target: Some(y),
                added: vec![crate::parser::render_concept(&filler)],
            });
            self.graph.add_concept(y, filler);
            return true;
        }
        false
    }

    /// ∀₊: pushes ∀R.C through U-edges when U ⊑* R ⊑* S and R is transitive.
    fn apply_forall_trans(&mut self, trace: &mut Trace) -> bool {
        let mut pending: Option<(NodeId, NodeId, Concept)> = None;
        'outer: for x in self.graph.live_nodes() {
            for c in self.graph.label(x) {
                let Concept::Forall(s, filler) = c else { continue };
                for r in self.rolebox.transitive_roles() {
                    if !self.rolebox.subsumes_star(&r, s).unwrap_or(false) {
                        continue;
                    }
                    let pushed = Concept::forall(r.clone(), (**filler).clone());
                    for (y, roles) in self.graph.edges_from(x) {
                        let reaches = roles
                            .iter()
                            .any(|u| self.rolebox.subsumes_star(u, &r).unwrap_or(false));
                        if reaches && !self.graph.label(y).contains(&pushed) {
                            pending = Some((x, y, pushed));
                            break 'outer;
                        }
                    }
                }
            }
        }
        if let Some((x, y, pushed)) = pending {
            self.bump("forall_trans");
            trace.push(TraceEvent::Rule {
                rule: "forall_trans",
                node: x,
                target: Some(y),
                added: vec![crate::parser::render_concept(&pushed)],
            });
            self.graph.add_concept(y, pushed);
            return true;
        }
        false
    }

    /// ⊔: adds the first viable disjunct in canonical order and pushes a
    /// branch point holding the pre-choice graph and the untried disjuncts.
    ///
    /// Disjuncts already entailed by the label (a negated name whose
    /// complement is ruled out by a disjointness group) are added
    /// deterministically; disjuncts contradicted by the label are pruned
    /// from the choice. Pruning everything is a clash.
    fn apply_or(&mut self, trace: &mut Trace) -> Option<StepOutcome> {
        let mut pending: Option<(NodeId, Concept, Vec<Concept>)> = None;
        'outer: for x in self.graph.live_nodes() {
            for c in self.graph.label(x) {
                let Concept::Or(cs) = c else { continue };
                if cs.iter().any(|child| self.graph.label(x).contains(child)) {
                    continue;
                }
                pending = Some((x, c.clone(), cs.clone()));
                break 'outer;
            }
        }
        let (x, concept, disjuncts) = pending?;
        for d in &disjuncts {
            if self.entailed_by_label(x, d) {
                self.bump("or");
                trace.push(TraceEvent::Rule {
                    rule: "or",
                    node: x,
                    target: None,
                    added: vec![crate::parser::render_concept(d)],
                });
                self.graph.add_concept(x, d.clone());
                return Some(StepOutcome::Progress);
            }
        }
        let viable: Vec<Concept> = disjuncts
            .iter()
            .filter(|d| !self.contradicted_by_label(x, d))
            .cloned()
            .collect();
        if viable.is_empty() {
            return Some(StepOutcome::Clash);
        }
        self.bump("or");
        let chosen = viable[0].clone();
        let remaining = viable[1..].to_vec();
        if !remaining.is_empty() {
            self.branches.push(BranchPoint {
                graph: self.graph.clone(),
                solved_q: self.solved_q.clone(),
                node: x,
                concept: concept.clone(),
                remaining,
            });
        }
        trace.push(TraceEvent::BranchPoint {
            node: x,
            concept: crate::parser::render_concept(&concept),
            chosen: crate::parser::render_concept(&chosen),
        });
        self.graph.add_concept(x, chosen);
        Some(StepOutcome::Progress)
    }

    /// A negated name is entailed when the label holds a name declared
    /// disjoint from it.
    fn entailed_by_label(&self, x: NodeId, d: &Concept) -> bool {
        let Concept::Not(inner) = d else { return false };
        let Some(name) = Name::of_concept(inner) else {
            return false;
        };
        self.label_conflicts_with(x, &name)
    }

    /// A disjunct is contradicted when its complement is in the label or a
    /// disjointness group rules it out.
    fn contradicted_by_label(&self, x: NodeId, d: &Concept) -> bool {
        if *d == Concept::Bottom || self.graph.label(x).contains(&d.negated()) {
            return true;
        }
        match Name::of_concept(d) {
            Some(name) => self.label_conflicts_with(x, &name),
            None => false,
        }
    }

    fn label_conflicts_with(&self, x: NodeId, name: &Name) -> bool {
        let label = self.graph.label(x);
        self.tbox.disjoint_groups.iter().any(|group| {
            group.contains(name)
                && group
                    .iter()
                    .any(|m| m != name && label.contains(&m.as_concept()))
        })
    }

    /// Pairwise equality blocking: some unblocked blockable ancestor y with
    /// L(x)=L(y), L(x′)=L(y′), L(x′,x)=L(y′,y) for the creation parents.
    pub(crate) fn is_blocked(&self, x: NodeId) -> bool {
        let x = self.graph.resolve(x);
        let Some((px, _)) = self.blockable_pair(x) else {
            return false;
        };
        for y in self.graph.ancestors(x) {
            let Some((py, _)) = self.blockable_pair(y) else {
                continue;
            };
            if self.graph.label(x) == self.graph.label(y)
                && self.graph.label(px) == self.graph.label(py)
                && self.graph.edge(px, x) == self.graph.edge(py, y)
                && !self.is_blocked(y)
            {
                return true;
            }
        }
        false
    }

    /// Returns (parent, x) when both ends are blockable nodes.
    fn blockable_pair(&self, x: NodeId) -> Option<(NodeId, NodeId)> {
        let blockable = |n: NodeId| {
            !self.graph.nodes[n].initial
                && !self
                    .graph
                    .label(n)
                    .iter()
                    .any(|c| matches!(c, Concept::Nominal(_)))
        };
        if !blockable(x) {
            return None;
        }
        let p = self.graph.resolve(self.graph.nodes[x].parent?);
        blockable(p).then_some((p, x))
    }

    /// Dispatches the first node whose decomposition set is nonempty and has
    /// changed since its last algebraic solve.
    fn apply_am(&mut self, trace: &mut Trace) -> StepOutcome {
        let candidates: Vec<NodeId> = self.graph.live_nodes().collect();
        for x in candidates {
            if self.is_blocked(x) {
                continue;
            }
            let back = self.graph.back_edges(x);
            let q = build_decomposition(self.graph.label(x), &back, self.rolebox);
            if q.is_empty() {
                continue;
            }
            if self.solved_q.get(&x) == Some(&q) {
                continue;
            }
            return self.run_am(x, q, trace);
        }
        StepOutcome::Complete
    }

    fn run_am(&mut self, x: NodeId, q: DecompositionSet, trace: &mut Trace) -> StepOutcome {
        self.stats.am_invocations += 1;
        trace.push(TraceEvent::AmStart {
            node: x,
            q_exists: q.exists.iter().map(|e| e.display_name()).collect(),
            q_forall: q.forall.iter().map(|e| e.display_name()).collect(),
            q_nominals: q.nominals.clone(),
        });
        let mut reuse_names: BTreeMap<NodeId, BTreeSet<Name>> = BTreeMap::new();
        for elem in &q.exists {
            if let Some((v, _)) = &elem.reuse {
                let names = self
                    .graph
                    .label(*v)
                    .iter()
                    .filter_map(Name::of_concept)
                    .collect();
                reuse_names.insert(*v, names);
            }
        }
        let pp = build_pp(&q, self.tbox, self.rolebox, &reuse_names);
        let am_options = AmOptions {
            big_m: self.options.big_m.clone(),
            max_bp_nodes: self.options.max_bp_nodes,
            max_pp_nodes: self.options.max_pp_nodes,
            max_cg_iterations: 100_000,
            dual_sweep_max_rows: self.options.dual_sweep_max_rows,
        };
        let (outcome, iterations, bp_nodes) = solve_node(&q, &pp, &am_options);
        self.stats.bp_tree_nodes += bp_nodes;
        for (i, it) in iterations.iter().enumerate() {
            self.stats.columns_generated += usize::from(it.entering.is_some());
            trace.push(TraceEvent::AmIteration {
                node: x,
                iter: i + 1,
                rmp_objective: it.rmp_objective.to_string(),
                duals: it.duals.iter().map(|d| d.to_string()).collect(),
                pp_objective: it.pp_objective.to_string(),
                entering: it.entering.as_ref().map(|(rows, cost)| EnteringColumn {
                    members: rows
                        .iter()
                        .map(|&r| {
                            if r < q.exists.len() {
                                q.exists[r].display_name()
                            } else {
                                format!("I_{}", q.nominals[r - q.exists.len()])
                            }
                        })
                        .collect(),
                    cost: cost.to_string(),
                }),
                refined: it.refined,
            });
        }
        match outcome {
            AmOutcome::ResourceLimit(reason) => StepOutcome::GaveUp(reason),
            AmOutcome::Infeasible => {
                trace.push(TraceEvent::AmInfeasible { node: x });
                StepOutcome::Clash
            }
            AmOutcome::Satisfiable {
                objective,
                tuples,
                selection,
            } => {
                trace.push(TraceEvent::AmSolution {
                    node: x,
                    objective: objective.to_string(),
                    tuples: tuples
                        .iter()
                        .map(|t| TupleRecord {
                            roles: t.roles.iter().map(|r| r.to_string()).collect(),
                            concepts: t
                                .concepts
                                .iter()
                                .map(crate::parser::render_concept)
                                .collect(),
                            n: t.n,
                            reuse: t.reuse.iter().copied().collect(),
                        })
                        .collect(),
                    columns: selection
                        .iter()
                        .map(|(info, _, cost)| EnteringColumn {
                            members: info
                                .member_exists
                                .iter()
                                .map(|&i| q.exists[i].display_name())
                                .chain(
                                    info.member_nominals
                                        .iter()
                                        .map(|&i| format!("I_{}", q.nominals[i])),
                                )
                                .collect(),
                            cost: cost.to_string(),
                        })
                        .collect(),
                    bp_nodes,
                });
                self.solved_q.insert(x, q);
                self.apply_tuples(x, &tuples, trace)
            }
        }
    }

    /// fil-Rule and e-Rule over the solution tuples, in column order.
    fn apply_tuples(
        &mut self,
        x: NodeId,
        tuples: &[SolutionTuple],
        trace: &mut Trace,
    ) -> StepOutcome {
        for tuple in tuples {
            if tuple.reuse.is_empty() {
                let target = self.find_filler_node(tuple);
                let y = match target {
                    Some(y) => y,
                    None => {
                        if self.graph.nodes.len() >= self.options.max_nodes {
                            return StepOutcome::GaveUp("graph node budget exceeded".into());
                        }
                        let mut label: Vec<Concept> = tuple.concepts.iter().cloned().collect();
                        label.push(self.tbox.c_t.clone());
                        let y = self.graph.add_node(label, tuple.n, false, Some(x));
                        self.stats.nodes_created += 1;
                        self.bump("fil");
                        trace.push(TraceEvent::NodeCreated {
                            node: y,
                            parent: x,
                            label: tuple
                                .concepts
                                .iter()
                                .map(crate::parser::render_concept)
                                .collect(),
                            cardinality: tuple.n,
                        });
                        y
                    }
                };
                self.connect(x, y, &tuple.roles, trace);
            } else {
                for &v in &tuple.reuse {
                    let v = self.graph.resolve(v);
                    self.bump("fil");
                    let mut added = Vec::new();
                    for c in &tuple.concepts {
                        if self.graph.add_concept(v, c.clone()) {
                            added.push(crate::parser::render_concept(c));
                        }
                    }
                    let old = self.graph.cardinality(v);
                    if old != tuple.n {
                        trace.push(TraceEvent::CardinalityOverwritten {
                            node: v,
                            from: old,
                            to: tuple.n,
                        });
                        self.graph.set_cardinality(v, tuple.n);
                    }
                    if !added.is_empty() {
                        trace.push(TraceEvent::Rule {
                            rule: "fil",
                            node: x,
                            target: Some(v),
                            added,
                        });
                    }
                    self.connect(x, v, &tuple.roles, trace);
                }
            }
        }
        StepOutcome::Progress
    }

    /// e-Rule: merge the roles (plus implied superroles) into both edge
    /// directions.
    fn connect(&mut self, x: NodeId, y: NodeId, roles: &BTreeSet<Role>, trace: &mut Trace) {
        if self
            .graph
            .add_edge_roles(x, y, roles.iter().cloned(), self.rolebox)
        {
            self.bump("e");
            trace.push(TraceEvent::Rule {
                rule: "e",
                node: x,
                target: Some(self.graph.resolve(y)),
                added: roles.iter().map(|r| r.to_string()).collect(),
            });
        }
    }

    /// fil-Rule guard: an existing node already carrying the tuple's
    /// concepts with sufficient cardinality is reused instead of duplicated.
    fn find_filler_node(&self, tuple: &SolutionTuple) -> Option<NodeId> {
        self.graph.live_nodes().find(|&y| {
            self.graph.cardinality(y) >= tuple.n
                && tuple
                    .concepts
                    .iter()
                    .all(|c| self.graph.label(y).contains(c))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_ontology;
    use crate::tbox::internalize;

    fn check(text: &str) -> (Verdict, EngineStats, Trace) {
        let doc = parse_ontology(text).unwrap();
        let axioms = doc.axioms();
        let tbox = internalize(&axioms);
        let rolebox = crate::rolebox_of(&axioms);
        let mut trace = Trace::default();
        let (verdict, stats) =
            check_consistency(&tbox, &rolebox, &EngineOptions::default(), &mut trace);
        (verdict, stats, trace)
    }

    #[test]
    fn contradictory_tbox_is_inconsistent() {
        let (verdict, ..) = check("(implies top (and A (not A)))");
        assert!(matches!(verdict, Verdict::Inconsistent));
    }

    #[test]
    fn empty_tbox_is_consistent() {
        let (verdict, ..) = check("");
        assert!(matches!(verdict, Verdict::Consistent(_)));
    }

    #[test]
    fn disjunction_backtracks_to_second_disjunct() {
        // The first disjunct's contradiction hides behind unfolding, so it is
        // discovered by clashing and undone chronologically.
        let (verdict, stats, _) =
            check("(instance a (or A B))\n(implies A (and X (not X)))");
        assert!(matches!(verdict, Verdict::Consistent(_)));
        assert!(stats.backtracks > 0);
    }

    #[test]
    fn worked_example_is_consistent_with_merge() {
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
        let (verdict, stats, trace) = check(text);
        assert!(matches!(verdict, Verdict::Consistent(_)), "{:?}", verdict);
        assert!(stats.am_invocations >= 3);
        let merged = trace
            .events
            .iter()
            .any(|e| matches!(e, TraceEvent::Merge { nominal, .. } if nominal == "o1"));
        assert!(merged, "expected the o1 nodes to merge");
    }

    #[test]
    fn blocking_terminates_infinite_chains() {
        let (verdict, stats, _) = check("(implies top (some R A))");
        assert!(matches!(verdict, Verdict::Consistent(_)), "{:?}", verdict);
        assert!(stats.nodes_created < 50);
    }

    #[test]
    fn extra_member_of_closed_enumeration_is_inconsistent() {
        let text = "(equivalent P (oneof o1 o2 o3))\n(disjoint o1 o2 o3 p4)\n(instance p4 P)\n";
        let (verdict, ..) = check(text);
        assert!(matches!(verdict, Verdict::Inconsistent));
    }

    #[test]
    fn budget_exhaustion_is_not_a_verdict() {
        let options = EngineOptions {
            max_nodes: 2,
            ..Default::default()
        };
        let doc =
            parse_ontology("(implies top (and (some R A) (some R B)))\n(disjoint A B)").unwrap();
        let axioms = doc.axioms();
        let tbox = internalize(&axioms);
        let rolebox = crate::rolebox_of(&axioms);
        let mut trace = Trace::default();
        let (verdict, _) = check_consistency(&tbox, &rolebox, &options, &mut trace);
        assert!(matches!(verdict, Verdict::GaveUp(_)));
    }
}
