//! Runtime verifier for the ten tableau properties of a complete,
//! clash-free completion graph.

use std::collections::BTreeMap;

use crate::concept::Concept;
use crate::graph::{CompletionGraph, NodeId};
use crate::rolebox::RoleBox;
use crate::tbox::Tbox;

#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub property: &'static str,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub results: Vec<PropertyResult>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }
}

/// Pairwise equality blocking, recomputed from the graph: the nearest
/// unblocked blockable ancestor with equal node and predecessor labels and
/// an equal connecting edge label.
pub fn find_blocker(graph: &CompletionGraph, x: NodeId) -> Option<NodeId> {
    let blockable = |n: NodeId| {
        !graph.nodes[n].initial
            && !graph
                .label(n)
                .iter()
                .any(|c| matches!(c, Concept::Nominal(_)))
    };
    let pair = |n: NodeId| -> Option<(NodeId, NodeId)> {
        if !blockable(n) {
            return None;
        }
        let p = graph.resolve(graph.nodes[n].parent?);
        blockable(p).then_some((p, n))
    };
    let x = graph.resolve(x);
    let (px, _) = pair(x)?;
    for y in graph.ancestors(x) {
        let Some((py, _)) = pair(y) else { continue };
        if graph.label(x) == graph.label(y)
            && graph.label(px) == graph.label(py)
            && graph.edge(px, x) == graph.edge(py, y)
            && find_blocker(graph, y).is_none()
        {
            return Some(y);
        }
    }
    None
}

/// Checks the ten tableau properties on the (live part of the) graph.
/// Existential satisfaction is checked modulo blocking: a blocked node
/// defers to its blocker.
pub fn verify_tableau_properties(
    graph: &CompletionGraph,
    tbox: &Tbox,
    rolebox: &RoleBox,
) -> PropertyReport {
    let mut results = Vec::new();
    let live: Vec<NodeId> = graph.live_nodes().collect();

    // P1: no complementary pair (and no bottom) in any label.
    let mut witness = None;
    'p1: for &x in &live {
        let label = graph.label(x);
        if label.contains(&Concept::Bottom) {
            witness = Some(format!("node {} contains bottom", x));
            break;
        }
        for c in label {
            if label.contains(&c.negated()) {
                witness = Some(format!(
                    "node {} contains {} and its complement",
                    x,
                    crate::parser::render_concept(c)
                ));
                break 'p1;
            }
        }
    }
    push(&mut results, "P1", witness);

    // P2: conjunctions are expanded.
    let mut witness = None;
    'p2: for &x in &live {
        let label = graph.label(x);
        for c in label {
            if let Concept::And(cs) = c {
                if let Some(missing) = cs.iter().find(|child| !label.contains(child)) {
                    witness = Some(format!(
                        "node {} lacks conjunct {}",
                        x,
                        crate::parser::render_concept(missing)
                    ));
                    break 'p2;
                }
            }
        }
    }
    push(&mut results, "P2", witness);

    // P3: disjunctions are decided.
    let mut witness = None;
    'p3: for &x in &live {
        let label = graph.label(x);
        for c in label {
            if let Concept::Or(cs) = c {
                if !cs.iter().any(|child| label.contains(child)) {
                    witness = Some(format!(
                        "node {} decides no disjunct of {}",
                        x,
                        crate::parser::render_concept(c)
                    ));
                    break 'p3;
                }
            }
        }
    }
    push(&mut results, "P3", witness);

    // P4: universal restrictions propagate along matching edges.
    let mut witness = None;
    'p4: for &x in &live {
        for c in graph.label(x) {
            let Concept::Forall(role, filler) = c else { continue };
            for (y, roles) in graph.edges_from(x) {
                if roles.contains(role) && !graph.label(y).contains(filler) {
                    witness = Some(format!(
                        "node {} has {} but {} lacks the filler",
                        x,
                        crate::parser::render_concept(c),
                        y
                    ));
                    break 'p4;
                }
            }
        }
    }
    push(&mut results, "P4", witness);

    // P5: existential restrictions are satisfied, modulo blocking.
    let mut witness = None;
    'p5: for &x in &live {
        let subject = match find_blocker(graph, x) {
            Some(blocker) => blocker,
            None => x,
        };
        for c in graph.label(x) {
            let Concept::Exists(role, filler) = c else { continue };
            let satisfied = graph
                .edges_from(subject)
                .any(|(y, roles)| roles.contains(role) && graph.label(y).contains(filler));
            if !satisfied {
                witness = Some(format!(
                    "node {} (checked at {}) does not satisfy {}",
                    x,
                    subject,
                    crate::parser::render_concept(c)
                ));
                break 'p5;
            }
        }
    }
    push(&mut results, "P5", witness);

    // P6: transitive propagation of universals.
    let mut witness = None;
    'p6: for &x in &live {
        for c in graph.label(x) {
            let Concept::Forall(s, filler) = c else { continue };
            for r in rolebox.transitive_roles() {
                if !rolebox.subsumes_star(&r, s).unwrap_or(false) {
                    continue;
                }
                let pushed = Concept::forall(r.clone(), (**filler).clone());
                for (y, roles) in graph.edges_from(x) {
                    let reaches = roles
                        .iter()
                        .any(|u| rolebox.subsumes_star(u, &r).unwrap_or(false));
                    if reaches && !graph.label(y).contains(&pushed) {
                        witness = Some(format!(
                            "node {} misses transitive propagation of {} to {}",
                            x,
                            crate::parser::render_concept(c),
                            y
                        ));
                        break 'p6;
                    }
                }
            }
        }
    }
    push(&mut results, "P6", witness);

    // P7: edge labels are closed under superroles.
    let mut witness = None;
    'p7: for (x, y, roles) in graph.all_edges() {
        for r in roles {
            for s in rolebox.superroles(r) {
                if !roles.contains(&s) {
                    witness = Some(format!("edge ({}, {}) lacks superrole {}", x, y, s));
                    break 'p7;
                }
            }
        }
    }
    push(&mut results, "P7", witness);

    // P8: edges mirror under inversion.
    let mut witness = None;
    'p8: for (x, y, roles) in graph.all_edges() {
        for r in roles {
            let mirrored = graph
                .edge(y, x)
                .map(|back| back.contains(&r.inverse()))
                .unwrap_or(false);
            if !mirrored {
                witness = Some(format!(
                    "edge ({}, {}) role {} has no inverse mirror",
                    x, y, r
                ));
                break 'p8;
            }
        }
    }
    push(&mut results, "P8", witness);

    // P9/P10: each nominal names exactly one live node.
    let mut counts: BTreeMap<&str, Vec<NodeId>> = BTreeMap::new();
    for &x in &live {
        for c in graph.label(x) {
            if let Concept::Nominal(o) = c {
                counts.entry(o).or_default().push(x);
            }
        }
    }
    let witness = counts
        .iter()
        .find(|(_, nodes)| nodes.len() > 1)
        .map(|(o, nodes)| format!("nominal {} occurs in nodes {:?}", o, nodes));
    push(&mut results, "P9", witness);

    let mut witness = None;
    for o in &tbox.nominals {
        let n = counts.get(o.as_str()).map(|v| v.len()).unwrap_or(0);
        if n != 1 {
            witness = Some(format!("nominal {} occurs in {} live nodes", o, n));
            break;
        }
    }
    if witness.is_none() {
        witness = counts
            .iter()
            .find(|(_, nodes)| nodes.len() != 1)
            .map(|(o, nodes)| format!("nominal {} occurs in {} live nodes", o, nodes.len()));
    }
    push(&mut results, "P10", witness);

    PropertyReport { results }
}

fn push(results: &mut Vec<PropertyResult>, property: &'static str, witness: Option<String>) {
    results.push(PropertyResult {
        property,
        pass: witness.is_none(),
        witness,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::Role;
    use crate::tableau::{check_consistency, EngineOptions, Verdict};
    use crate::tbox::internalize;
    use crate::Trace;

    #[test]
    fn worked_example_graph_passes_all_properties() {
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
        let doc = crate::parse_ontology(text).unwrap();
        let axioms = doc.axioms();
        let tbox = internalize(&axioms);
        let rolebox = crate::rolebox_of(&axioms);
        let mut trace = Trace::default();
        let (verdict, _) =
            check_consistency(&tbox, &rolebox, &EngineOptions::default(), &mut trace);
        let Verdict::Consistent(graph) = verdict else {
            panic!("expected consistent");
        };
        let report = verify_tableau_properties(&graph, &tbox, &rolebox);
        assert!(
            report.all_pass(),
            "failed: {:?}",
            report
                .results
                .iter()
                .filter(|r| !r.pass)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn constructed_complement_violation_fails_p1() {
        let mut graph = CompletionGraph::default();
        graph.add_node(
            [Concept::atom("A"), Concept::atom("A").negated()],
            1,
            true,
            None,
        );
        let tbox = internalize(&Default::default());
        let rolebox = RoleBox::new([], [], []);
        let report = verify_tableau_properties(&graph, &tbox, &rolebox);
        let p1 = &report.results[0];
        assert_eq!(p1.property, "P1");
        assert!(!p1.pass);
        assert!(p1.witness.is_some());
    }

    #[test]
    fn shared_nominal_fails_p9_and_p10() {
        let mut graph = CompletionGraph::default();
        graph.add_node([Concept::nominal("o")], 1, true, None);
        graph.add_node([Concept::nominal("o")], 1, false, None);
        let tbox = internalize(&Default::default());
        let rolebox = RoleBox::new([], [], []);
        let report = verify_tableau_properties(&graph, &tbox, &rolebox);
        let p9 = report.results.iter().find(|r| r.property == "P9").unwrap();
        let p10 = report.results.iter().find(|r| r.property == "P10").unwrap();
        assert!(!p9.pass);
        assert!(!p10.pass);
    }

    #[test]
    fn properly_built_edges_pass_p7_p8() {
        let rolebox = RoleBox::new(["R".to_string()], [], []);
        let mut graph = CompletionGraph::default();
        let x = graph.add_node([Concept::atom("A")], 1, true, None);
        let y = graph.add_node([Concept::atom("B")], 1, false, Some(x));
        graph.add_edge_roles(x, y, [Role::named("R")], &rolebox);
        let tbox = internalize(&Default::default());
        let report = verify_tableau_properties(&graph, &tbox, &rolebox);
        assert!(report.all_pass());
    }
}
