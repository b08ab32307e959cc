//! Structured trace of rule applications and algebraic-module activity.
//!
//! Consumers get machine-readable JSON lines (versioned, one record per
//! event) via [`Trace::to_json_lines`]; the CLI layers a human summary on top.

use serde::Serialize;

use crate::graph::NodeId;

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct TupleRecord {
    pub roles: Vec<String>,
    pub concepts: Vec<String>,
    pub n: u64,
    pub reuse: Vec<NodeId>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Rule {
        rule: &'static str,
        node: NodeId,
        #[serde(skip_serializing_if = "Option::is_none")]
        target: Option<NodeId>,
        #[serde(skip_serializing_if = "Vec::is_empty")]
        added: Vec<String>,
    },
    Merge {
        from: NodeId,
        into: NodeId,
        nominal: String,
    },
    BranchPoint {
        node: NodeId,
        concept: String,
        chosen: String,
    },
    Backtrack {
        node: NodeId,
        concept: String,
        chosen: String,
    },
    AmStart {
        node: NodeId,
        q_exists: Vec<String>,
        q_forall: Vec<String>,
        q_nominals: Vec<String>,
    },
    AmIteration {
        node: NodeId,
        iter: usize,
        rmp_objective: String,
        duals: Vec<String>,
        pp_objective: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        entering: Option<EnteringColumn>,
        refined: bool,
    },
    AmSolution {
        node: NodeId,
        objective: String,
        tuples: Vec<TupleRecord>,
        columns: Vec<EnteringColumn>,
        bp_nodes: usize,
    },
    AmInfeasible {
        node: NodeId,
    },
    CardinalityOverwritten {
        node: NodeId,
        from: u64,
        to: u64,
    },
    NodeCreated {
        node: NodeId,
        parent: NodeId,
        label: Vec<String>,
        cardinality: u64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct EnteringColumn {
    /// Member elements of the partition cell, by printable name.
    pub members: Vec<String>,
    pub cost: String,
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    /// Versioned machine format: a header line then one JSON record per event.
    pub fn to_json_lines(&self) -> String {
        let mut out = format!("{{\"trace_version\":{}}}\n", TRACE_VERSION);
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("trace serialization"));
            out.push('\n');
        }
        out
    }

    /// RMP/PP objective sequences of the first algebraic invocation for `node`.
    pub fn am_objective_sequences(&self, node: NodeId) -> (Vec<String>, Vec<String>) {
        let mut rmp = Vec::new();
        let mut pp = Vec::new();
        let mut started = false;
        for event in &self.events {
            match event {
                TraceEvent::AmStart { node: n, .. } if *n == node => {
                    if started {
                        break;
                    }
                    started = true;
                }
                TraceEvent::AmIteration {
                    node: n,
                    rmp_objective,
                    pp_objective,
                    ..
                } if started && *n == node => {
                    rmp.push(rmp_objective.clone());
                    pp.push(pp_objective.clone());
                }
                TraceEvent::AmSolution { node: n, .. } | TraceEvent::AmInfeasible { node: n }
                    if started && *n == node =>
                {
                    break;
                }
                _ => {}
            }
        }
        (rmp, pp)
    }
}
