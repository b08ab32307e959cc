//! Axioms, Abox reduction, internalization, and lazy-unfolding partition.

use std::collections::{BTreeMap, BTreeSet};

use crate::concept::{Concept, Role};

/// An atomic concept name or a nominal name; the two namespaces are disjoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Name {
    Atom(String),
    Nominal(String),
}

impl Name {
    pub fn as_concept(&self) -> Concept {
        match self {
            Name::Atom(a) => Concept::atom(a.clone()),
            Name::Nominal(o) => Concept::nominal(o.clone()),
        }
    }

    pub fn of_concept(c: &Concept) -> Option<Name> {
        match c {
            Concept::Atom(a) => Some(Name::Atom(a.clone())),
            Concept::Nominal(o) => Some(Name::Nominal(o.clone())),
            _ => None,
        }
    }
}

impl std::fmt::Display for Name {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Name::Atom(a) => write!(f, "{}", a),
            Name::Nominal(o) => write!(f, "{}", o),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assertion {
    /// a : C
    Instance(String, Concept),
    /// (a, b) : R
    Related(String, String, Role),
}

/// A parsed ontology before internalization.
#[derive(Debug, Clone, Default)]
pub struct Axioms {
    pub gcis: Vec<(Concept, Concept)>,
    pub equivalences: Vec<(Concept, Concept)>,
    /// Groups of pairwise-disjoint names.
    pub disjoint_groups: Vec<Vec<Name>>,
    pub assertions: Vec<Assertion>,
    pub transitive: BTreeSet<String>,
    pub subroles: Vec<(Role, Role)>,
    /// Every role name mentioned anywhere.
    pub roles: BTreeSet<String>,
}

/// Reduces Abox assertions to concept inclusions over nominals:
/// `a:C ↦ {a} ⊑ C` and `(a,b):R ↦ {a} ⊑ ∃R.{b}`.
pub fn abox_to_tbox(assertions: &[Assertion]) -> Vec<(Concept, Concept)> {
    assertions
        .iter()
        .map(|assertion| match assertion {
            Assertion::Instance(a, c) => (Concept::nominal(a.clone()), c.clone()),
            Assertion::Related(a, b, r) => (
                Concept::nominal(a.clone()),
                Concept::exists(r.clone(), Concept::nominal(b.clone())),
            ),
        })
        .collect()
}

/// How an atomic name unfolds lazily.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Unfolding {
    /// A ⊑ C: positive occurrences of A pick up C.
    Primitive(Concept),
    /// A ≡ C: positive occurrences pick up C, negative pick up nnf(¬C).
    Definition(Concept),
}

/// A name-level inclusion ⊓lhs ⊑ ⊔rhs (rhs empty = ⊥), for the algebraic
/// module's axiom rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameInclusion {
    pub lhs: Vec<Name>,
    pub rhs: Vec<Name>,
}

/// Internalized Tbox: lazy-unfolding partition plus one global concept C_T.
#[derive(Debug, Clone)]
pub struct Tbox {
    pub unfold: BTreeMap<String, Unfolding>,
    pub c_t: Concept,
    pub disjoint_groups: Vec<Vec<Name>>,
    /// Name-only inclusions feeding the pricing problem.
    pub name_inclusions: Vec<NameInclusion>,
    /// Original GCIs after Abox reduction (for the model-search oracle).
    pub all_gcis: Vec<(Concept, Concept)>,
    pub equivalences: Vec<(Concept, Concept)>,
    /// Every nominal occurring anywhere in the ontology.
    pub nominals: BTreeSet<String>,
}

fn unfold_eligible(lhs: &Concept) -> Option<&str> {
    match lhs {
        Concept::Atom(a) => Some(a),
        _ => None,
    }
}

/// Splits a concept into a name conjunction, if it is one.
fn name_conjunction(c: &Concept) -> Option<Vec<Name>> {
    match c {
        Concept::And(cs) => cs.iter().map(Name::of_concept).collect(),
        other => Name::of_concept(other).map(|n| vec![n]),
    }
}

/// Splits a concept into a name disjunction (empty = ⊥), if it is one.
fn name_disjunction(c: &Concept) -> Option<Vec<Name>> {
    match c {
        Concept::Bottom => Some(Vec::new()),
        Concept::Or(cs) => cs.iter().map(Name::of_concept).collect(),
        other => Name::of_concept(other).map(|n| vec![n]),
    }
}

/// Builds the internalized Tbox.
///
/// Axioms with a unique atomic left-hand side and acyclic definitions go to
/// the lazy-unfolding map; everything else is conjoined into
/// `C_T = ⊓ nnf(¬C ⊔ D)`. Disjointness groups are kept aside for clash
/// checking and the pricing problem. Equivalences internalize as two GCIs.
pub fn internalize(axioms: &Axioms) -> Tbox {
    let mut gcis: Vec<(Concept, Concept)> = Vec::new();
    gcis.extend(abox_to_tbox(&axioms.assertions));
    gcis.extend(axioms.gcis.iter().cloned());

    // Candidate definitions: unique atomic LHS across GCIs and equivalences.
    let mut lhs_counts: BTreeMap<String, usize> = BTreeMap::new();
    for (lhs, _) in gcis.iter().chain(axioms.equivalences.iter()) {
        if let Some(a) = unfold_eligible(lhs) {
            *lhs_counts.entry(a.to_string()).or_insert(0) += 1;
        }
    }
    let mut candidates: BTreeMap<String, Unfolding> = BTreeMap::new();
    for (lhs, rhs) in &gcis {
        if let Some(a) = unfold_eligible(lhs) {
            if lhs_counts[a] == 1 {
                candidates.insert(a.to_string(), Unfolding::Primitive(rhs.nnf()));
            }
        }
    }
    for (lhs, rhs) in &axioms.equivalences {
        if let Some(a) = unfold_eligible(lhs) {
            if lhs_counts[a] == 1 {
                candidates.insert(a.to_string(), Unfolding::Definition(rhs.nnf()));
            }
        }
    }

    // Drop cyclic candidates: cyclic atomic definitions fall back to C_T.
    let cyclic = cyclic_names(&candidates);
    let unfold: BTreeMap<String, Unfolding> = candidates
        .into_iter()
        .filter(|(a, _)| !cyclic.contains(a))
        .collect();

    let mut conjuncts: Vec<Concept> = Vec::new();
    for (lhs, rhs) in &gcis {
        if let Some(a) = unfold_eligible(lhs) {
            if unfold.contains_key(a) {
                continue;
            }
        }
        conjuncts.push(Concept::or(vec![lhs.negated(), rhs.clone()]).nnf());
    }
    for (lhs, rhs) in &axioms.equivalences {
        if let Some(a) = unfold_eligible(lhs) {
            if unfold.contains_key(a) {
                continue;
            }
        }
        conjuncts.push(Concept::or(vec![lhs.negated(), rhs.clone()]).nnf());
        conjuncts.push(Concept::or(vec![rhs.negated(), lhs.clone()]).nnf());
    }
    let c_t = Concept::and(conjuncts);

    let name_inclusions = collect_name_inclusions(&gcis, &axioms.equivalences);

    let mut nominals: BTreeSet<String> = BTreeSet::new();
    for (lhs, rhs) in gcis.iter().chain(axioms.equivalences.iter()) {
        nominals.extend(lhs.nominals());
        nominals.extend(rhs.nominals());
    }
    for group in &axioms.disjoint_groups {
        for name in group {
            if let Name::Nominal(o) = name {
                nominals.insert(o.clone());
            }
        }
    }

    Tbox {
        unfold,
        c_t,
        disjoint_groups: axioms.disjoint_groups.clone(),
        name_inclusions,
        all_gcis: gcis,
        equivalences: axioms.equivalences.clone(),
        nominals,
    }
}

fn cyclic_names(candidates: &BTreeMap<String, Unfolding>) -> BTreeSet<String> {
    // A candidate is cyclic if its definition reaches itself through the
    // dependency graph over candidate names (either polarity).
    let deps: BTreeMap<String, BTreeSet<String>> = candidates
        .iter()
        .map(|(a, u)| {
            let c = match u {
                Unfolding::Primitive(c) | Unfolding::Definition(c) => c,
            };
            (a.clone(), c.atoms())
        })
        .collect();
    let mut cyclic = BTreeSet::new();
    for start in candidates.keys() {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut stack: Vec<String> = deps[start].iter().cloned().collect();
        while let Some(cur) = stack.pop() {
            if &cur == start {
                cyclic.insert(start.clone());
                break;
            }
            if !seen.insert(cur.clone()) {
                continue;
            }
            if let Some(ds) = deps.get(&cur) {
                stack.extend(ds.iter().cloned());
            }
        }
    }
    cyclic
}

fn collect_name_inclusions(
    gcis: &[(Concept, Concept)],
    equivalences: &[(Concept, Concept)],
) -> Vec<NameInclusion> {
    let mut out = Vec::new();
    let mut push = |lhs: &Concept, rhs: &Concept| {
        if let (Some(l), Some(r)) = (name_conjunction(lhs), name_disjunction(rhs)) {
            if !l.is_empty() {
                out.push(NameInclusion { lhs: l, rhs: r });
            }
        }
    };
    for (lhs, rhs) in gcis {
        push(lhs, rhs);
    }
    for (lhs, rhs) in equivalences {
        push(lhs, rhs);
        push(rhs, lhs);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_gci_internalizes_to_disjunction() {
        // With a unique atomic LHS the axiom is lazily unfolded, so force the
        // C_T path with a complex LHS.
        let axioms = Axioms {
            gcis: vec![(
                Concept::and(vec![Concept::atom("A"), Concept::atom("X")]),
                Concept::atom("B"),
            )],
            ..Default::default()
        };
        let tbox = internalize(&axioms);
        assert_eq!(
            tbox.c_t,
            Concept::or(vec![
                Concept::atom("B"),
                Concept::atom("A").negated(),
                Concept::atom("X").negated(),
            ])
        );
    }

    #[test]
    fn empty_tbox_internalizes_to_top() {
        let tbox = internalize(&Axioms::default());
        assert_eq!(tbox.c_t, Concept::Top);
    }

    #[test]
    fn two_complex_gcis_conjoin() {
        let lhs1 = Concept::and(vec![Concept::atom("A"), Concept::atom("A2")]);
        let lhs2 = Concept::and(vec![Concept::atom("C"), Concept::atom("C2")]);
        let axioms = Axioms {
            gcis: vec![
                (lhs1.clone(), Concept::atom("B")),
                (lhs2.clone(), Concept::atom("D")),
            ],
            ..Default::default()
        };
        let tbox = internalize(&axioms);
        let expected = Concept::and(vec![
            Concept::or(vec![lhs1.negated(), Concept::atom("B")]),
            Concept::or(vec![lhs2.negated(), Concept::atom("D")]),
        ]);
        assert_eq!(tbox.c_t, expected);
    }

    #[test]
    fn atomic_axiom_goes_to_unfold_map() {
        let axioms = Axioms {
            gcis: vec![(Concept::atom("A"), Concept::atom("B"))],
            ..Default::default()
        };
        let tbox = internalize(&axioms);
        assert_eq!(tbox.c_t, Concept::Top);
        assert_eq!(
            tbox.unfold.get("A"),
            Some(&Unfolding::Primitive(Concept::atom("B")))
        );
    }

    #[test]
    fn cyclic_definition_falls_back_to_ct() {
        let axioms = Axioms {
            gcis: vec![(
                Concept::atom("A"),
                Concept::exists(Role::named("R"), Concept::atom("A")),
            )],
            ..Default::default()
        };
        let tbox = internalize(&axioms);
        assert!(tbox.unfold.is_empty());
        assert_ne!(tbox.c_t, Concept::Top);
    }

    #[test]
    fn abox_reduction() {
        let assertions = vec![
            Assertion::Instance("a".into(), Concept::atom("C")),
            Assertion::Related("a".into(), "b".into(), Role::named("R")),
        ];
        let gcis = abox_to_tbox(&assertions);
        assert_eq!(gcis.len(), 2);
        assert_eq!(gcis[0], (Concept::nominal("a"), Concept::atom("C")));
        assert_eq!(
            gcis[1],
            (
                Concept::nominal("a"),
                Concept::exists(Role::named("R"), Concept::nominal("b"))
            )
        );
        assert!(abox_to_tbox(&[]).is_empty());
    }
}
