//! The completion graph: labelled nodes, role-labelled edges, back-edge
//! records, and merge forwarding.

use std::collections::{BTreeMap, BTreeSet};

use crate::concept::{Concept, Role};
use crate::rolebox::RoleBox;

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct Node {
    pub label: BTreeSet<Concept>,
    pub cardinality: u64,
    /// B(x): recorded neighbours for the algebraic module, as ⟨node, L(x,v)⟩.
    pub back_edges: BTreeSet<(NodeId, BTreeSet<Role>)>,
    pub initial: bool,
    /// Creation parent (the node whose solution tuple spawned this one).
    pub parent: Option<NodeId>,
    pub merged_into: Option<NodeId>,
}

/// Completion graph with explicit mirrored edges: for every stored edge
/// (x, y) the mirror (y, x) holds exactly the inverted role set.
#[derive(Debug, Clone, Default)]
pub struct CompletionGraph {
    pub nodes: Vec<Node>,
    edges: BTreeMap<(NodeId, NodeId), BTreeSet<Role>>,
}

impl CompletionGraph {
    pub fn add_node(
        &mut self,
        label: impl IntoIterator<Item = Concept>,
        cardinality: u64,
        initial: bool,
        parent: Option<NodeId>,
    ) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            label: label.into_iter().filter(|c| *c != Concept::Top).collect(),
            cardinality,
            back_edges: BTreeSet::new(),
            initial,
            parent,
            merged_into: None,
        });
        id
    }

    /// Chases merge forwarding to the live representative.
    pub fn resolve(&self, mut x: NodeId) -> NodeId {
        while let Some(next) = self.nodes[x].merged_into {
            x = next;
        }
        x
    }

    pub fn is_live(&self, x: NodeId) -> bool {
        self.nodes[x].merged_into.is_none()
    }

    pub fn live_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&x| self.is_live(x))
    }

    pub fn label(&self, x: NodeId) -> &BTreeSet<Concept> {
        &self.nodes[self.resolve(x)].label
    }

    /// Adds a concept; Top is never stored. Returns true if the label grew.
    pub fn add_concept(&mut self, x: NodeId, c: Concept) -> bool {
        if c == Concept::Top {
            return false;
        }
        let x = self.resolve(x);
        self.nodes[x].label.insert(c)
    }

    pub fn cardinality(&self, x: NodeId) -> u64 {
        self.nodes[self.resolve(x)].cardinality
    }

    pub fn set_cardinality(&mut self, x: NodeId, n: u64) {
        let x = self.resolve(x);
        self.nodes[x].cardinality = n;
    }

    pub fn edge(&self, x: NodeId, y: NodeId) -> Option<&BTreeSet<Role>> {
        self.edges.get(&(self.resolve(x), self.resolve(y)))
    }

    /// Outgoing edges of `x` (mirrors included, so incoming edges appear
    /// here with inverted roles).
    pub fn edges_from(&self, x: NodeId) -> impl Iterator<Item = (NodeId, &BTreeSet<Role>)> {
        let x = self.resolve(x);
        self.edges
            .range((x, 0)..=(x, usize::MAX))
            .map(|((_, y), roles)| (*y, roles))
    }

    pub fn all_edges(&self) -> impl Iterator<Item = (NodeId, NodeId, &BTreeSet<Role>)> {
        self.edges.iter().map(|((x, y), roles)| (*x, *y, roles))
    }

    /// Merges `roles` (closed upward under ⊑*) into L(x,y) and the inverted
    /// closure into L(y,x). Returns true if anything was added.
    pub fn add_edge_roles(
        &mut self,
        x: NodeId,
        y: NodeId,
        roles: impl IntoIterator<Item = Role>,
        rolebox: &RoleBox,
    ) -> bool {
        let x = self.resolve(x);
        let y = self.resolve(y);
        let mut grew = false;
        for role in roles {
            for sup in rolebox.superroles(&role) {
                grew |= self
                    .edges
                    .entry((x, y))
                    .or_default()
                    .insert(sup.clone());
                grew |= self
                    .edges
                    .entry((y, x))
                    .or_default()
                    .insert(sup.inverse());
            }
        }
        grew
    }

    pub fn add_back_edge(&mut self, x: NodeId, v: NodeId, roles: BTreeSet<Role>) -> bool {
        let x = self.resolve(x);
        let v = self.resolve(v);
        self.nodes[x].back_edges.insert((v, roles))
    }

    /// B(x) with forwarded node ids resolved and per-node role sets unioned.
    pub fn back_edges(&self, x: NodeId) -> BTreeMap<NodeId, BTreeSet<Role>> {
        let x = self.resolve(x);
        let mut out: BTreeMap<NodeId, BTreeSet<Role>> = BTreeMap::new();
        for (v, roles) in &self.nodes[x].back_edges {
            out.entry(self.resolve(*v))
                .or_default()
                .extend(roles.iter().cloned());
        }
        out
    }

    /// Merges node `from` into node `to`: labels union, edges re-target with
    /// unioned labels, B-records union, `from` is tombstoned with a
    /// forwarding pointer and never reused.
    pub fn merge(&mut self, from: NodeId, to: NodeId) {
        let from = self.resolve(from);
        let to = self.resolve(to);
        assert_ne!(from, to, "merge requires distinct live nodes");

        let from_label = std::mem::take(&mut self.nodes[from].label);
        self.nodes[to].label.extend(from_label);
        let from_card = self.nodes[from].cardinality;
        if from_card > self.nodes[to].cardinality {
            self.nodes[to].cardinality = from_card;
        }
        let from_back = std::mem::take(&mut self.nodes[from].back_edges);
        self.nodes[to].back_edges.extend(from_back);

        let affected: Vec<((NodeId, NodeId), BTreeSet<Role>)> = self
            .edges
            .iter()
            .filter(|((a, b), _)| *a == from || *b == from)
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        for (key, _) in &affected {
            self.edges.remove(key);
        }
        for ((a, b), roles) in affected {
            let a2 = if a == from { to } else { a };
            let b2 = if b == from { to } else { b };
            self.edges.entry((a2, b2)).or_default().extend(roles);
        }
        self.nodes[from].merged_into = Some(to);
    }

    /// Creation-parent chain of `x`, nearest first, with forwarding resolved.
    pub fn ancestors(&self, x: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.resolve(x);
        let mut guard = 0;
        while let Some(p) = self.nodes[cur].parent {
            let p = self.resolve(p);
            if p == cur {
                break;
            }
            out.push(p);
            cur = p;
            guard += 1;
            if guard > self.nodes.len() {
                break; // merge loops cannot form a proper ancestry
            }
        }
        out
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
    fn edges_close_under_superroles_and_mirror() {
        let rb = rb();
        let mut g = CompletionGraph::default();
        let x = g.add_node([Concept::atom("A")], 1, true, None);
        let y = g.add_node([Concept::atom("B")], 1, false, Some(x));
        g.add_edge_roles(x, y, [Role::named("R")], &rb);
        let fwd = g.edge(x, y).unwrap();
        assert!(fwd.contains(&Role::named("R")) && fwd.contains(&Role::named("S")));
        let back = g.edge(y, x).unwrap();
        assert!(back.contains(&Role::inverse_of("R")) && back.contains(&Role::inverse_of("S")));
    }

    #[test]
    fn merge_redirects_edges_and_unions_labels() {
        let rb = rb();
        let mut g = CompletionGraph::default();
        let z = g.add_node([Concept::atom("Z")], 1, true, None);
        let x = g.add_node([Concept::atom("A")], 1, false, Some(z));
        let y = g.add_node([Concept::atom("B")], 1, false, Some(z));
        g.add_edge_roles(z, x, [Role::named("R")], &rb);
        g.add_edge_roles(z, y, [Role::named("S")], &rb);
        g.merge(x, y);
        assert!(!g.is_live(x));
        assert_eq!(g.resolve(x), y);
        assert!(g.label(y).contains(&Concept::atom("A")));
        let zy = g.edge(z, y).unwrap();
        assert!(zy.contains(&Role::named("R")) && zy.contains(&Role::named("S")));
    }
}
