//! Concept expressions, roles, negation normal form, and closure.

use std::collections::BTreeSet;
use std::fmt;

/// A role or its inverse.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role {
    pub name: String,
    pub inverted: bool,
}

impl Role {
    pub fn named(name: impl Into<String>) -> Role {
        Role {
            name: name.into(),
            inverted: false,
        }
    }

    pub fn inverse_of(name: impl Into<String>) -> Role {
        Role {
            name: name.into(),
            inverted: true,
        }
    }

    /// Inv(Inv(R)) = R structurally.
    pub fn inverse(&self) -> Role {
        Role {
            name: self.name.clone(),
            inverted: !self.inverted,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverted {
            write!(f, "{}^-", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

/// A SHOI concept expression.
///
/// `And`/`Or` are n-ary with canonically ordered, deduplicated children so
/// structural equality is decidable (needed by blocking and label sets).
/// After [`Concept::nnf`], `Not` wraps only atoms and nominals.
///
/// Variant order matters: `Not` sorts before `Atom`, so internalized
/// assertion axioms `¬{a} ⊔ C` try the cheap `¬{a}` disjunct first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Top,
    Bottom,
    Not(Box<Concept>),
    Atom(String),
    Nominal(String),
    And(Vec<Concept>),
    Or(Vec<Concept>),
    Exists(Role, Box<Concept>),
    Forall(Role, Box<Concept>),
}

impl Concept {
    pub fn atom(name: impl Into<String>) -> Concept {
        Concept::Atom(name.into())
    }

    pub fn nominal(name: impl Into<String>) -> Concept {
        Concept::Nominal(name.into())
    }

    pub fn exists(role: Role, filler: Concept) -> Concept {
        Concept::Exists(role, Box::new(filler))
    }

    pub fn forall(role: Role, filler: Concept) -> Concept {
        Concept::Forall(role, Box::new(filler))
    }

    /// n-ary conjunction with flattening, deduplication, canonical order,
    /// and ⊤/⊥ simplification.
    pub fn and(children: Vec<Concept>) -> Concept {
        let mut flat = BTreeSet::new();
        for c in children {
            match c {
                Concept::And(inner) => {
                    flat.extend(inner);
                }
                Concept::Top => {}
                other => {
                    flat.insert(other);
                }
            }
        }
        if flat.contains(&Concept::Bottom) {
            return Concept::Bottom;
        }
        let mut v: Vec<Concept> = flat.into_iter().collect();
        match v.len() {
            0 => Concept::Top,
            1 => v.pop().unwrap(),
            _ => Concept::And(v),
        }
    }

    /// n-ary disjunction, dual to [`Concept::and`].
    pub fn or(children: Vec<Concept>) -> Concept {
        let mut flat = BTreeSet::new();
        for c in children {
            match c {
                Concept::Or(inner) => {
                    flat.extend(inner);
                }
                Concept::Bottom => {}
                other => {
                    flat.insert(other);
                }
            }
        }
        if flat.contains(&Concept::Top) {
            return Concept::Top;
        }
        let mut v: Vec<Concept> = flat.into_iter().collect();
        match v.len() {
            0 => Concept::Bottom,
            1 => v.pop().unwrap(),
            _ => Concept::Or(v),
        }
    }

    /// Negation normal form: negation pushed onto atoms and nominals.
    pub fn nnf(&self) -> Concept {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atom(_) | Concept::Nominal(_) => {
                self.clone()
            }
            Concept::Not(inner) => inner.nnf_negated(),
            Concept::And(cs) => Concept::and(cs.iter().map(|c| c.nnf()).collect()),
            Concept::Or(cs) => Concept::or(cs.iter().map(|c| c.nnf()).collect()),
            Concept::Exists(r, c) => Concept::exists(r.clone(), c.nnf()),
            Concept::Forall(r, c) => Concept::forall(r.clone(), c.nnf()),
        }
    }

    fn nnf_negated(&self) -> Concept {
        match self {
            Concept::Top => Concept::Bottom,
            Concept::Bottom => Concept::Top,
            Concept::Atom(_) | Concept::Nominal(_) => Concept::Not(Box::new(self.clone())),
            Concept::Not(inner) => inner.nnf(),
            Concept::And(cs) => Concept::or(cs.iter().map(|c| c.nnf_negated()).collect()),
            Concept::Or(cs) => Concept::and(cs.iter().map(|c| c.nnf_negated()).collect()),
            Concept::Exists(r, c) => Concept::forall(r.clone(), c.nnf_negated()),
            Concept::Forall(r, c) => Concept::exists(r.clone(), c.nnf_negated()),
        }
    }

    /// NNF complement, for clash detection.
    pub fn negated(&self) -> Concept {
        self.nnf_negated()
    }

    /// Closure: the smallest set containing `self` and closed under
    /// stripping negation, taking And/Or children, and taking quantifier
    /// fillers.
    pub fn closure(&self) -> BTreeSet<Concept> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self.clone()];
        while let Some(c) = stack.pop() {
            if !out.insert(c.clone()) {
                continue;
            }
            match c {
                Concept::Not(inner) => stack.push(*inner),
                Concept::And(cs) | Concept::Or(cs) => stack.extend(cs),
                Concept::Exists(_, f) | Concept::Forall(_, f) => stack.push(*f),
                _ => {}
            }
        }
        out
    }

    /// Nominal names occurring anywhere in the expression.
    pub fn nominals(&self) -> BTreeSet<String> {
        self.closure()
            .into_iter()
            .filter_map(|c| match c {
                Concept::Nominal(o) => Some(o),
                _ => None,
            })
            .collect()
    }

    /// Atom names occurring anywhere in the expression.
    pub fn atoms(&self) -> BTreeSet<String> {
        self.closure()
            .into_iter()
            .filter_map(|c| match c {
                Concept::Atom(a) => Some(a),
                _ => None,
            })
            .collect()
    }

    /// Role names (base names) mentioned anywhere in the expression.
    pub fn role_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(c) = stack.pop() {
            match c {
                Concept::Not(inner) => stack.push(inner),
                Concept::And(cs) | Concept::Or(cs) => stack.extend(cs.iter()),
                Concept::Exists(r, f) | Concept::Forall(r, f) => {
                    out.insert(r.name.clone());
                    stack.push(f);
                }
                _ => {}
            }
        }
        out
    }

    /// True when this is `{o₁} ⊔ ⋯ ⊔ {oₙ}` or a single nominal; returns the names.
    pub fn as_nominal_set(&self) -> Option<Vec<String>> {
        match self {
            Concept::Nominal(o) => Some(vec![o.clone()]),
            Concept::Or(cs) => {
                let mut names = Vec::new();
                for c in cs {
                    match c {
                        Concept::Nominal(o) => names.push(o.clone()),
                        _ => return None,
                    }
                }
                Some(names)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::render_concept(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Concept {
        Concept::atom("A")
    }
    fn b() -> Concept {
        Concept::atom("B")
    }
    fn r() -> Role {
        Role::named("R")
    }

    #[test]
    fn de_morgan() {
        let c = Concept::Not(Box::new(Concept::and(vec![a(), b()])));
        assert_eq!(
            c.nnf(),
            Concept::or(vec![a().negated(), b().negated()])
        );
    }

    #[test]
    fn negated_exists_becomes_forall() {
        let c = Concept::Not(Box::new(Concept::exists(r(), a())));
        assert_eq!(c.nnf(), Concept::forall(r(), a().negated()));
    }

    #[test]
    fn nnf_is_identity_on_nnf_input() {
        assert_eq!(a().nnf(), a());
    }

    #[test]
    fn closure_of_nested_exists() {
        let c = Concept::exists(r(), Concept::and(vec![a(), b()]));
        let clos = c.closure();
        assert!(clos.contains(&c));
        assert!(clos.contains(&Concept::and(vec![a(), b()])));
        assert!(clos.contains(&a()));
        assert!(clos.contains(&b()));
        assert_eq!(clos.len(), 4);
    }

    #[test]
    fn closure_strips_negation() {
        let c = a().negated();
        let clos = c.closure();
        assert!(clos.contains(&a()));
        assert_eq!(clos.len(), 2);
    }

    #[test]
    fn closure_of_atom_is_singleton() {
        assert_eq!(a().closure().len(), 1);
    }

    #[test]
    fn double_role_inverse_is_identity() {
        let role = Role::inverse_of("R");
        assert_eq!(role.inverse().inverse(), role);
    }

    #[test]
    fn and_flattens_and_orders() {
        let c1 = Concept::and(vec![b(), Concept::and(vec![a(), b()])]);
        let c2 = Concept::and(vec![a(), b()]);
        assert_eq!(c1, c2);
    }
}
