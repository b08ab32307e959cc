//! Random instance generators for cross-checking against the oracles.
//!
//! Ontologies marked as small-model-guaranteed are generated model-first: a
//! concrete interpretation is drawn, then only axioms true in it are kept,
//! so consistency (with a model no larger than the plant) holds by
//! construction.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::concept::{Concept, Role};
use crate::tbox::Name;

#[derive(Debug, Clone)]
pub struct CorpusOntology {
    pub text: String,
    /// Planted model size when the instance is small-model-guaranteed.
    pub small_model: Option<usize>,
}

#[derive(Debug, Clone)]
struct Plant {
    k: usize,
    atoms: BTreeMap<String, u32>,
    nominal_at: BTreeMap<String, usize>,
    roles: BTreeMap<String, u64>,
}

impl Plant {
    fn full(&self) -> u32 {
        ((1u64 << self.k) - 1) as u32
    }

    fn role_pairs(&self, role: &Role) -> u64 {
        let base = self.roles.get(&role.name).copied().unwrap_or(0);
        if !role.inverted {
            return base;
        }
        let mut out = 0u64;
        for x in 0..self.k {
            for y in 0..self.k {
                if base & (1 << (x * self.k + y)) != 0 {
                    out |= 1 << (y * self.k + x);
                }
            }
        }
        out
    }

    fn eval(&self, c: &Concept) -> u32 {
        match c {
            Concept::Top => self.full(),
            Concept::Bottom => 0,
            Concept::Atom(a) => self.atoms.get(a).copied().unwrap_or(0),
            Concept::Nominal(o) => 1 << self.nominal_at[o],
            Concept::Not(inner) => self.full() & !self.eval(inner),
            Concept::And(cs) => cs.iter().fold(self.full(), |acc, c| acc & self.eval(c)),
            Concept::Or(cs) => cs.iter().fold(0, |acc, c| acc | self.eval(c)),
            Concept::Exists(role, filler) => {
                let pairs = self.role_pairs(role);
                let filler_ext = self.eval(filler);
                let mut out = 0u32;
                for x in 0..self.k {
                    let row = (pairs >> (x * self.k)) as u32 & self.full();
                    if row & filler_ext != 0 {
                        out |= 1 << x;
                    }
                }
                out
            }
            Concept::Forall(role, filler) => {
                let pairs = self.role_pairs(role);
                let filler_ext = self.eval(filler);
                let mut out = 0u32;
                for x in 0..self.k {
                    let row = (pairs >> (x * self.k)) as u32 & self.full();
                    if row & !filler_ext == 0 {
                        out |= 1 << x;
                    }
                }
                out
            }
        }
    }

    fn holds(&self, lhs: &Concept, rhs: &Concept) -> bool {
        self.eval(lhs) & !self.eval(rhs) == 0
    }
}

fn random_concept(rng: &mut impl Rng, atoms: &[String], nominals: &[String], roles: &[String], depth: usize) -> Concept {
    let leaf = depth == 0 || rng.gen_bool(0.4);
    if leaf {
        match rng.gen_range(0..5) {
            0 if !nominals.is_empty() => {
                Concept::nominal(nominals[rng.gen_range(0..nominals.len())].clone())
            }
            1 => Concept::atom(atoms[rng.gen_range(0..atoms.len())].clone()).negated(),
            _ => Concept::atom(atoms[rng.gen_range(0..atoms.len())].clone()),
        }
    } else {
        match rng.gen_range(0..4) {
            0 => Concept::and(vec![
                random_concept(rng, atoms, nominals, roles, depth - 1),
                random_concept(rng, atoms, nominals, roles, depth - 1),
            ]),
            1 => Concept::or(vec![
                random_concept(rng, atoms, nominals, roles, depth - 1),
                random_concept(rng, atoms, nominals, roles, depth - 1),
            ]),
            kind => {
                let role = Role {
                    name: roles[rng.gen_range(0..roles.len())].clone(),
                    inverted: rng.gen_bool(0.3),
                };
                let filler = random_concept(rng, atoms, nominals, roles, depth - 1);
                if kind == 2 {
                    Concept::exists(role, filler)
                } else {
                    Concept::forall(role, filler)
                }
            }
        }
    }
}

/// Random small ontology. Marked instances are consistent by construction
/// and have a model of the returned size.
pub fn random_ontology(rng: &mut impl Rng, marked: bool) -> CorpusOntology {
    let n_atoms = rng.gen_range(1..=4);
    let n_roles = rng.gen_range(1..=2);
    let n_nominals = rng.gen_range(0..=3);
    let atoms: Vec<String> = (0..n_atoms).map(|i| format!("A{}", i)).collect();
    let roles: Vec<String> = (0..n_roles).map(|i| format!("R{}", i)).collect();
    let nominals: Vec<String> = (0..n_nominals).map(|i| format!("o{}", i)).collect();

    let plant = marked.then(|| {
        let k = rng.gen_range(1..=3);
        let full = ((1u64 << k) - 1) as u32;
        let atoms_ext: BTreeMap<String, u32> = atoms
            .iter()
            .map(|a| (a.clone(), rng.gen_range(0..=full)))
            .collect();
        let nominal_at: BTreeMap<String, usize> = nominals
            .iter()
            .map(|o| (o.clone(), rng.gen_range(0..k)))
            .collect();
        let pairs = (1u64 << (k * k)) - 1;
        let roles_ext: BTreeMap<String, u64> = roles
            .iter()
            .map(|r| (r.clone(), rng.gen::<u64>() & pairs))
            .collect();
        Plant {
            k,
            atoms: atoms_ext,
            nominal_at,
            roles: roles_ext,
        }
    });

    let mut statements: Vec<String> = Vec::new();
    let want_axioms = rng.gen_range(1..=4);
    let mut guard = 0;
    while statements.len() < want_axioms && guard < 200 {
        guard += 1;
        let lhs = random_concept(rng, &atoms, &nominals, &roles, 1);
        let rhs = random_concept(rng, &atoms, &nominals, &roles, 2);
        if let Some(p) = &plant {
            if !p.holds(&lhs, &rhs) {
                continue;
            }
        }
        statements.push(format!(
            "(implies {} {})",
            crate::parser::render_concept(&lhs),
            crate::parser::render_concept(&rhs)
        ));
    }
    // A disjointness group over names, kept only if the plant satisfies it.
    if rng.gen_bool(0.5) {
        let mut pool: Vec<Name> = atoms.iter().map(|a| Name::Atom(a.clone())).collect();
        pool.extend(nominals.iter().map(|o| Name::Nominal(o.clone())));
        let size = rng.gen_range(2..=pool.len().min(3));
        let mut members = Vec::new();
        let mut pool = pool;
        for _ in 0..size {
            members.push(pool.swap_remove(rng.gen_range(0..pool.len())));
        }
        let ok = match &plant {
            None => true,
            Some(p) => {
                let exts: Vec<u32> = members.iter().map(|m| p.eval(&m.as_concept())).collect();
                exts.iter()
                    .enumerate()
                    .all(|(i, a)| exts.iter().skip(i + 1).all(|b| a & b == 0))
            }
        };
        if ok {
            let names: Vec<String> = members.iter().map(|m| m.to_string()).collect();
            statements.push(format!("(disjoint {})", names.join(" ")));
        }
    }
    // An assertion on a nominal that the plant validates.
    if !nominals.is_empty() && rng.gen_bool(0.6) {
        let o = &nominals[rng.gen_range(0..nominals.len())];
        let c = random_concept(rng, &atoms, &nominals, &roles, 1);
        let ok = match &plant {
            None => true,
            Some(p) => p.eval(&c) & (1 << p.nominal_at[o]) != 0,
        };
        if ok {
            statements.push(format!(
                "(instance {} {})",
                o,
                crate::parser::render_concept(&c)
            ));
        }
    }
    // Mention every nominal so the namespaces resolve deterministically.
    for o in &nominals {
        statements.push(format!("(instance {} top)", o));
    }

    CorpusOntology {
        text: statements.join("\n") + "\n",
        small_model: plant.as_ref().map(|p| p.k),
    }
}

/// A random algebraic-module instance: a saturated label plus supporting
/// axioms, with |Q| ≤ 8.
pub struct AlgebraInstance {
    pub label: BTreeSet<Concept>,
    pub back_edges: BTreeMap<crate::graph::NodeId, BTreeSet<Role>>,
    pub reuse_labels: BTreeMap<crate::graph::NodeId, BTreeSet<Name>>,
    pub text: String,
}

pub fn random_algebra_instance(rng: &mut impl Rng) -> AlgebraInstance {
    let atoms: Vec<String> = (0..rng.gen_range(2..=4)).map(|i| format!("A{}", i)).collect();
    let nominals: Vec<String> = (0..rng.gen_range(1..=3)).map(|i| format!("o{}", i)).collect();
    let roles = ["R".to_string(), "S".to_string()];
    let subrole = rng.gen_bool(0.5);

    let mut label: BTreeSet<Concept> = BTreeSet::new();
    let n_exists = rng.gen_range(1..=4);
    for _ in 0..n_exists {
        let role = Role {
            name: if rng.gen_bool(0.5) { "S" } else { "R" }.to_string(),
            inverted: rng.gen_range(0..10) < 3,
        };
        let qual = if rng.gen_range(0..10) < 3 {
            Concept::nominal(nominals[rng.gen_range(0..nominals.len())].clone())
        } else {
            Concept::atom(atoms[rng.gen_range(0..atoms.len())].clone())
        };
        label.insert(Concept::exists(role, qual));
    }
    for _ in 0..rng.gen_range(0..=2) {
        let role = Role {
            name: if rng.gen_bool(0.5) { "S" } else { "R" }.to_string(),
            inverted: rng.gen_range(0..10) < 3,
        };
        let qual = if rng.gen_range(0..2) == 0 {
            let take = rng.gen_range(1..=nominals.len().min(2));
            Concept::or(
                nominals[..take]
                    .iter()
                    .map(|o| Concept::nominal(o.clone()))
                    .collect(),
            )
        } else {
            Concept::atom(atoms[rng.gen_range(0..atoms.len())].clone())
        };
        label.insert(Concept::forall(role, qual));
    }

    // Supporting axioms: disjointness + some name-level inclusions.
    let mut statements = Vec::new();
    if subrole {
        statements.push("(subrole R S)".to_string());
    }
    if rng.gen_bool(0.7) {
        let mut pool: Vec<String> = atoms.clone();
        pool.extend(nominals.iter().cloned());
        let size = rng.gen_range(2..=pool.len().min(4));
        let mut members = Vec::new();
        for _ in 0..size {
            members.push(pool.swap_remove(rng.gen_range(0..pool.len())));
        }
        statements.push(format!("(disjoint {})", members.join(" ")));
    }
    if rng.gen_bool(0.5) {
        let a = &atoms[rng.gen_range(0..atoms.len())];
        let b = &atoms[rng.gen_range(0..atoms.len())];
        let o = &nominals[rng.gen_range(0..nominals.len())];
        if rng.gen_bool(0.5) {
            statements.push(format!("(implies {} (or {} (oneof {})))", a, b, o));
        } else {
            statements.push(format!("(implies (and {} {}) bottom)", a, b));
        }
    }
    // Optional reuse element from a recorded back edge.
    let mut back_edges = BTreeMap::new();
    let mut reuse_labels = BTreeMap::new();
    if rng.gen_bool(0.4) {
        let mut set = BTreeSet::new();
        set.insert(Role::inverse_of("R"));
        if subrole {
            set.insert(Role::inverse_of("S"));
        }
        back_edges.insert(0usize, set);
        let mut names = BTreeSet::new();
        if rng.gen_bool(0.5) {
            names.insert(Name::Atom(atoms[rng.gen_range(0..atoms.len())].clone()));
        }
        reuse_labels.insert(0usize, names);
    }
    // Mention the nominals so namespaces resolve.
    for o in &nominals {
        statements.push(format!("(instance {} top)", o));
    }

    AlgebraInstance {
        label,
        back_edges,
        reuse_labels,
        text: statements.join("\n") + "\n",
    }
}
