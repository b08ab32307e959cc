//! Role hierarchy with precomputed reflexive-transitive closure.

use std::collections::BTreeSet;

use crate::concept::Role;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown role name: {0}")]
pub struct UnknownRole(pub String);

/// Role names, transitivity flags, and the subrole relation ⊑*.
///
/// The closure is kept over roles *and their inverses*, so
/// `R ⊑* S` iff `Inv(R) ⊑* Inv(S)` by construction.
#[derive(Debug, Clone, Default)]
pub struct RoleBox {
    names: BTreeSet<String>,
    transitive: BTreeSet<String>,
    declared: BTreeSet<(Role, Role)>,
    star: BTreeSet<(Role, Role)>,
}

impl RoleBox {
    pub fn new(
        names: impl IntoIterator<Item = String>,
        transitive: impl IntoIterator<Item = String>,
        subroles: impl IntoIterator<Item = (Role, Role)>,
    ) -> RoleBox {
        let mut rb = RoleBox {
            names: names.into_iter().collect(),
            transitive: transitive.into_iter().collect(),
            declared: BTreeSet::new(),
            star: BTreeSet::new(),
        };
        for (r, s) in subroles {
            rb.names.insert(r.name.clone());
            rb.names.insert(s.name.clone());
            rb.declared.insert((r.inverse(), s.inverse()));
            rb.declared.insert((r, s));
        }
        for t in &rb.transitive {
            rb.names.insert(t.clone());
        }
        rb.recompute_star();
        rb
    }

    fn recompute_star(&mut self) {
        let universe: Vec<Role> = self
            .names
            .iter()
            .flat_map(|n| [Role::named(n.clone()), Role::inverse_of(n.clone())])
            .collect();
        let mut star = BTreeSet::new();
        for r in &universe {
            star.insert((r.clone(), r.clone()));
        }
        star.extend(self.declared.iter().cloned());
        // Warshall over a handful of roles.
        loop {
            let mut added = Vec::new();
            for (a, b) in &star {
                for (c, d) in &star {
                    if b == c && !star.contains(&(a.clone(), d.clone())) {
                        added.push((a.clone(), d.clone()));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            star.extend(added);
        }
        self.star = star;
    }

    pub fn declare(&mut self, name: &str) {
        if self.names.insert(name.to_string()) {
            self.recompute_star();
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.names.iter()
    }

    pub fn knows(&self, role: &Role) -> bool {
        self.names.contains(&role.name)
    }

    /// Transitivity is declared on base names; R⁻ is transitive iff R is.
    pub fn is_transitive(&self, role: &Role) -> bool {
        self.transitive.contains(&role.name)
    }

    pub fn transitive_roles(&self) -> impl Iterator<Item = Role> + '_ {
        self.transitive.iter().flat_map(|n| {
            [Role::named(n.clone()), Role::inverse_of(n.clone())]
        })
    }

    /// R ⊑* S: reflexive-transitive subrole relation with inverse symmetry.
    pub fn subsumes_star(&self, r: &Role, s: &Role) -> Result<bool, UnknownRole> {
        for role in [r, s] {
            if !self.knows(role) {
                return Err(UnknownRole(role.name.clone()));
            }
        }
        Ok(r == s || self.star.contains(&(r.clone(), s.clone())))
    }

    /// All S with `r ⊑* S`, including `r` itself.
    pub fn superroles(&self, r: &Role) -> Vec<Role> {
        let mut out = vec![r.clone()];
        for (a, b) in &self.star {
            if a == r && b != r {
                out.push(b.clone());
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Declared subrole pairs (already closed under inversion).
    pub fn declared_pairs(&self) -> impl Iterator<Item = &(Role, Role)> {
        self.declared.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rb() -> RoleBox {
        RoleBox::new(
            ["R".to_string(), "S".to_string()],
            [],
            [(Role::named("R"), Role::named("S"))],
        )
    }

    #[test]
    fn declared_subrole_holds() {
        let rb = rb();
        assert!(rb.subsumes_star(&Role::named("R"), &Role::named("S")).unwrap());
        assert!(!rb.subsumes_star(&Role::named("S"), &Role::named("R")).unwrap());
    }

    #[test]
    fn reflexive() {
        let rb = rb();
        assert!(rb.subsumes_star(&Role::named("R"), &Role::named("R")).unwrap());
    }

    #[test]
    fn closed_under_inverse() {
        let rb = rb();
        assert!(rb
            .subsumes_star(&Role::inverse_of("R"), &Role::inverse_of("S"))
            .unwrap());
    }

    #[test]
    fn unknown_role_is_an_error() {
        let rb = rb();
        assert!(rb.subsumes_star(&Role::named("T"), &Role::named("S")).is_err());
    }

    #[test]
    fn agrees_with_floyd_warshall_on_random_hierarchies() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let names: Vec<String> = (0..n).map(|i| format!("R{}", i)).collect();
            let mut pairs = Vec::new();
            for _ in 0..rng.gen_range(0..=8) {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                let inv_a = rng.gen_bool(0.3);
                let inv_b = rng.gen_bool(0.3);
                let mk = |i: usize, inv: bool| {
                    if inv {
                        Role::inverse_of(names[i].clone())
                    } else {
                        Role::named(names[i].clone())
                    }
                };
                pairs.push((mk(a, inv_a), mk(b, inv_b)));
            }
            let rb = RoleBox::new(names.clone(), [], pairs.clone());

            // Brute-force closure over the 2n-role universe.
            let universe: Vec<Role> = names
                .iter()
                .flat_map(|x| [Role::named(x.clone()), Role::inverse_of(x.clone())])
                .collect();
            let idx = |r: &Role| universe.iter().position(|u| u == r).unwrap();
            let mut reach = vec![vec![false; universe.len()]; universe.len()];
            for (i, row) in reach.iter_mut().enumerate() {
                row[i] = true;
            }
            for (a, b) in &pairs {
                reach[idx(a)][idx(b)] = true;
                reach[idx(&a.inverse())][idx(&b.inverse())] = true;
            }
            for k in 0..universe.len() {
                for i in 0..universe.len() {
                    for j in 0..universe.len() {
                        if reach[i][k] && reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
            for (i, a) in universe.iter().enumerate() {
                for (j, b) in universe.iter().enumerate() {
                    assert_eq!(rb.subsumes_star(a, b).unwrap(), reach[i][j]);
                }
            }
        }
    }
}
