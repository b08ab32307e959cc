// quick debug binary
use std::collections::{BTreeMap, BTreeSet};
use shoi_core::algebra::*;
use shoi_core::concept::{Concept, Role};
use shoi_core::parser::parse_ontology;
use shoi_core::rolebox::RoleBox;
use shoi_core::tbox::{internalize, Name};
use shoi_simplex::rat;

fn main() {
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
    let rolebox = RoleBox::new(axioms.roles.iter().cloned(), axioms.transitive.iter().cloned(), axioms.subroles.clone());
    let l: BTreeSet<Concept> = [
        Concept::atom("B"),
        Concept::exists(Role::named("R"), Concept::atom("C")),
        Concept::exists(Role::inverse_of("R"), Concept::atom("D")),
        Concept::forall(Role::inverse_of("S"), Concept::nominal("o2")),
    ].into_iter().collect();
    let mut back = BTreeMap::new();
    back.insert(0usize, [Role::inverse_of("R"), Role::inverse_of("S")].into_iter().collect::<BTreeSet<_>>());
    let q = build_decomposition(&l, &back, &rolebox);
    for (i, e) in q.exists.iter().enumerate() { println!("Q∃[{}] = {} reuse={:?}", i, e.display_name(), e.reuse); }
    for e in &q.forall { println!("Q∀ = {}", e.display_name()); }
    println!("Qo = {:?}", q.nominals);
    let pp = build_pp(&q, &tbox, &rolebox, &[(0usize, BTreeSet::from([Name::Atom("A".into())]))].into_iter().collect());
    println!("PP vars: names={:?}", pp.name_vars);
    println!("PP rows:");
    for row in &pp.bp.rows { println!("  {:?}", row); }
    let options = AmOptions { big_m: Some(rat(10)), ..Default::default() };
    let (outcome, iterations, _) = solve_node(&q, &pp, &options);
    for it in &iterations {
        println!("iter node={} rmp={} duals={:?} pp={} entering={:?} refined={}",
            it.tree_node, it.rmp_objective, it.duals.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            it.pp_objective, it.entering.as_ref().map(|(r, c)| (r.clone(), c.to_string())), it.refined);
    }
    match outcome {
        AmOutcome::Satisfiable { objective, tuples, .. } => {
            println!("objective = {}", objective);
            for t in tuples { println!("tuple roles={:?} concepts={:?} n={} reuse={:?}", t.roles, t.concepts, t.n, t.reuse); }
        }
        other => println!("{:?}", other),
    }
}
