//! Exact-arithmetic linear programming for the reasoner's algebraic module.
//!
//! Everything here computes over arbitrary-precision rationals: the primal
//! simplex (`solve_lp`), a 0/1 branch-and-bound solver for pricing problems
//! (`solve_binary`), and a branch-and-price driver (`branch_and_price`) that
//! combines column generation with branch-and-bound. Objective values in the
//! reasoner's regression fixtures are matched exactly, never within an epsilon.

use num_bigint::BigInt;
use num_rational::BigRational;

pub mod binary;
pub mod bnp;
mod solver;

pub use binary::{solve_binary, BinOutcome, BinStatus, BinaryProgram};
pub use bnp::{
    branch_and_price, BnpError, BnpOptions, BnpOutcome, BnpResult, CgIteration, MasterRowKind,
    PricedColumn, Pricer, PricingOutcome, SelectedColumn,
};
pub use solver::solve_lp;

/// Exact rational scalar used throughout the solver stack.
pub type Rat = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(v: i64) -> Rat {
    BigRational::from_integer(BigInt::from(v))
}

/// Row sense of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// A single constraint row: sparse coefficients, sense, right-hand side.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, Rat)>,
    pub relation: Relation,
    pub rhs: Rat,
}

/// A minimization LP over nonnegative variables.
///
/// Variables are referenced by index. Integrality marks are carried but only
/// honored by [`solve_binary`]; [`solve_lp`] requires them to be absent.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<Rat>,
    pub rows: Vec<Row>,
    /// Per-variable binary mark (`solve_binary` input). Empty means all continuous.
    pub binary: Vec<bool>,
    /// Optional per-variable upper bounds, enforced as extra rows by `solve_lp`.
    pub upper_bounds: Vec<Option<Rat>>,
    /// Bland tie-break priority per variable; lower wins. Defaults to the index.
    pub priority: Vec<u64>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, cost: Rat) -> usize {
        let id = self.objective.len();
        self.objective.push(cost);
        if !self.binary.is_empty() {
            self.binary.push(false);
        }
        if !self.upper_bounds.is_empty() {
            self.upper_bounds.push(None);
        }
        id
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rat)>, relation: Relation, rhs: Rat) {
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn is_binary(&self, var: usize) -> bool {
        self.binary.get(var).copied().unwrap_or(false)
    }

    pub fn bland_priority(&self, var: usize) -> u64 {
        self.priority.get(var).copied().unwrap_or(var as u64)
    }

    /// Plain-text dump, one row per line: relation, rhs, sparse coefficient pairs.
    /// Debugging aid only; not a compatibility surface.
    pub fn dump_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "min {}",
            self.objective
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{}*x{}", c, i))
                .collect::<Vec<_>>()
                .join(" + ")
        );
        for row in &self.rows {
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = write!(out, "{} {}", rel, row.rhs);
            for (var, coef) in &row.coeffs {
                let _ = write!(out, " {}:{}", var, coef);
            }
            let _ = writeln!(out);
        }
        out
    }
}

/// Terminal status of an LP solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`]: exact primal and dual data for the final basis.
#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub objective: Rat,
    pub primal: Vec<Rat>,
    /// One dual value per row, from the optimal basis.
    pub duals: Vec<Rat>,
    pub pivots: usize,
}
