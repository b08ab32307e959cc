//! SHOI ontology consistency checking.
//!
//! A tableau completion-graph engine decides Tbox consistency; the numerical
//! obligations carried by nominals, existential, and universal restrictions
//! are handed to an algebraic module that solves them by column generation
//! and branch-and-price over exact rationals.

pub mod algebra;
pub mod bench;
pub mod concept;
pub mod corpus;
pub mod graph;
pub mod oracle;
pub mod parser;
pub mod rolebox;
pub mod tableau;
pub mod tbox;
pub mod trace;
pub mod verify;

pub use concept::{Concept, Role};
pub use graph::{CompletionGraph, NodeId};
pub use parser::{parse_ontology, render_concept, OntologyDocument, ParseError};
pub use rolebox::RoleBox;
pub use tableau::{check_consistency, EngineOptions, Verdict};
pub use tbox::{internalize, Axioms, Name, Tbox};
pub use trace::{Trace, TraceEvent};

/// Builds the role box an ontology declares.
pub fn rolebox_of(axioms: &Axioms) -> RoleBox {
    RoleBox::new(
        axioms.roles.iter().cloned(),
        axioms.transitive.iter().cloned(),
        axioms.subroles.clone(),
    )
}
