//! Branch-and-price: column generation with branch-and-bound on top of the
//! exact simplex.
//!
//! The restricted master problem is seeded with one big-M artificial variable
//! per row (the bootstrap described by the column-generation formulation);
//! artificials surviving in the final solution signal infeasibility. Pricing
//! is delegated to a caller-supplied [`Pricer`]. Master re-solves are
//! warm-started from the previous basis, and pivoting follows Bland's rule
//! with a fixed variable order: generated columns first (in generation
//! order), then surplus variables, then artificials in reverse row order.
//!
//! Degenerate master optima admit several dual vertices, and which one is
//! used decides whether pricing can still see an (objective-neutral)
//! improving column. After the basis duals price out, the driver re-prices
//! once more under the lexicographically maximal optimal dual vector taken in
//! reverse row order (the "dual sweep"). This never changes the optimum - the
//! first dual vector already certifies it - but it surfaces alternative
//! columns exactly the way the reference traces expect. The sweep costs a few
//! auxiliary LP solves, so it is skipped above a configurable row count.

use std::collections::HashSet;

use num_traits::{Signed, Zero};

use crate::solver::{pivot_loop, LoopResult, RevisedState, StdColumn};
use crate::{rat, LinearProgram, LpStatus, Rat, Relation};

/// Sense of a master row; the right-hand side is always 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterRowKind {
    /// Coverage row (existential restrictions): Σ a·x ≥ 1.
    AtLeastOne,
    /// Partition row (nominals): Σ a·x = 1.
    ExactlyOne,
}

/// A column produced by the pricer: the set of rows it covers (coefficient 1)
/// plus its cost and caller-side payload.
#[derive(Debug, Clone)]
pub struct PricedColumn<I> {
    pub rows: Vec<usize>,
    pub cost: Rat,
    pub info: I,
}

/// Result of one pricing call. `column` is present iff `objective < 0`.
#[derive(Debug, Clone)]
pub struct PricingOutcome<I> {
    pub objective: Rat,
    pub column: Option<PricedColumn<I>>,
}

/// Caller-supplied pricing problem.
pub trait Pricer {
    type Info: Clone;
    type Error;

    /// Finds the column with the most negative reduced cost under `duals`,
    /// never returning a column whose row pattern is in `forbidden`.
    fn price(
        &mut self,
        duals: &[Rat],
        forbidden: &[Vec<usize>],
    ) -> Result<PricingOutcome<Self::Info>, Self::Error>;
}

/// One column-generation iteration, for tracing.
#[derive(Debug, Clone)]
pub struct CgIteration {
    pub tree_node: usize,
    pub rmp_objective: Rat,
    pub duals: Vec<Rat>,
    pub pp_objective: Rat,
    pub entering: Option<(Vec<usize>, Rat)>,
    /// True when the iteration priced under swept duals rather than basis duals.
    pub refined: bool,
}

#[derive(Debug, Clone)]
pub struct BnpOptions {
    pub big_m: Rat,
    pub max_tree_nodes: usize,
    pub max_cg_iterations: usize,
    /// Disable the degenerate-dual sweep above this many master rows (0 = off).
    pub dual_sweep_max_rows: usize,
}

impl Default for BnpOptions {
    fn default() -> Self {
        BnpOptions {
            big_m: rat(10),
            max_tree_nodes: 10_000,
            max_cg_iterations: 100_000,
            dual_sweep_max_rows: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelectedColumn<I> {
    pub info: I,
    pub value: u64,
    pub rows: Vec<usize>,
    pub cost: Rat,
}

#[derive(Debug, Clone)]
pub enum BnpResult<I> {
    Optimal {
        objective: Rat,
        selection: Vec<SelectedColumn<I>>,
    },
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct BnpOutcome<I> {
    pub result: BnpResult<I>,
    pub iterations: Vec<CgIteration>,
    pub tree_nodes: usize,
    pub columns_generated: usize,
}

/// Budget or pricing failure.
#[derive(Debug)]
pub enum BnpError<E> {
    TreeNodeBudget,
    CgIterationBudget,
    Pricing(E),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BoundSense {
    Ge,
    Le,
}

/// A branching constraint `x_col ≥ bound` or `x_col ≤ bound` (bound ≥ 1;
/// the ≤ 0 branch is expressed by forbidding the column instead).
#[derive(Debug, Clone)]
struct BranchBound {
    col: usize,
    sense: BoundSense,
    bound: u64,
}

#[derive(Debug, Clone)]
struct TreeNode {
    forbidden: Vec<usize>,
    bounds: Vec<BranchBound>,
}

struct Pool<I> {
    columns: Vec<PricedColumn<I>>,
    patterns: HashSet<Vec<usize>>,
}

/// Runs branch-and-price over the master rows, pricing columns on demand.
pub fn branch_and_price<P: Pricer>(
    rows: &[MasterRowKind],
    pricer: &mut P,
    options: &BnpOptions,
) -> Result<BnpOutcome<P::Info>, BnpError<P::Error>> {
    let mut pool = Pool {
        columns: Vec::new(),
        patterns: HashSet::new(),
    };
    let mut iterations = Vec::new();
    let mut incumbent: Option<(Rat, Vec<SelectedColumn<P::Info>>)> = None;
    let mut stack = vec![TreeNode {
        forbidden: Vec::new(),
        bounds: Vec::new(),
    }];
    let mut tree_nodes = 0usize;
    let mut cg_iterations = 0usize;

    while let Some(node) = stack.pop() {
        if tree_nodes >= options.max_tree_nodes {
            return Err(BnpError::TreeNodeBudget);
        }
        let node_id = tree_nodes;
        tree_nodes += 1;

        let node_solution = solve_node(
            rows,
            pricer,
            options,
            &mut pool,
            &node,
            node_id,
            &mut iterations,
            &mut cg_iterations,
        )?;
        let NodeSolution::Feasible { objective, primal } = node_solution else {
            continue; // artificial stuck positive: infeasible leaf
        };
        if let Some((best, _)) = &incumbent {
            if &objective >= best {
                continue;
            }
        }
        match most_fractional(&primal) {
            None => {
                let selection = pool
                    .columns
                    .iter()
                    .zip(&primal)
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(col, v)| SelectedColumn {
                        info: col.info.clone(),
                        value: rat_to_u64(v),
                        rows: col.rows.clone(),
                        cost: col.cost.clone(),
                    })
                    .collect();
                incumbent = Some((objective, selection));
            }
            Some(branch_col) => {
                let v = &primal[branch_col];
                let floor = v.floor().to_integer();
                let floor_u64: u64 = floor.clone().try_into().unwrap_or(0);
                let mut up = node.clone();
                up.bounds.push(BranchBound {
                    col: branch_col,
                    sense: BoundSense::Ge,
                    bound: floor_u64 + 1,
                });
                let mut down = node.clone();
                if floor_u64 == 0 {
                    down.forbidden.push(branch_col);
                } else {
                    down.bounds.push(BranchBound {
                        col: branch_col,
                        sense: BoundSense::Le,
                        bound: floor_u64,
                    });
                }
                stack.push(up);
                stack.push(down);
            }
        }
    }

    let result = match incumbent {
        Some((objective, selection)) => BnpResult::Optimal {
            objective,
            selection,
        },
        None => BnpResult::Infeasible,
    };
    Ok(BnpOutcome {
        result,
        iterations,
        tree_nodes,
        columns_generated: pool.columns.len(),
    })
}

enum NodeSolution {
    Feasible { objective: Rat, primal: Vec<Rat> },
    ArtificialStuck,
}

/// Master LP for one tree node, solved incrementally as columns arrive.
struct Master {
    n_rows: usize,
    cols: Vec<StdColumn>,
    /// master-column index per pool column (usize::MAX = forbidden here)
    pool_slot: Vec<usize>,
    artificial_slots: Vec<usize>,
    state: RevisedState,
}

#[allow(clippy::too_many_arguments)]
fn solve_node<P: Pricer>(
    rows: &[MasterRowKind],
    pricer: &mut P,
    options: &BnpOptions,
    pool: &mut Pool<P::Info>,
    node: &TreeNode,
    node_id: usize,
    iterations: &mut Vec<CgIteration>,
    cg_iterations: &mut usize,
) -> Result<NodeSolution, BnpError<P::Error>> {
    let mut master = build_master(rows, pool, node, &options.big_m);
    reoptimize(&mut master);

    // Patterns the pricer must not regenerate: branch-forbidden ones plus
    // patterns of columns pinned by a lower-bound branch (their master
    // reduced cost includes branch-row duals the pricer cannot see).
    let mut forbidden_patterns: Vec<Vec<usize>> = node
        .forbidden
        .iter()
        .map(|&c| pool.columns[c].rows.clone())
        .collect();
    for b in &node.bounds {
        forbidden_patterns.push(pool.columns[b.col].rows.clone());
    }

    loop {
        *cg_iterations += 1;
        if *cg_iterations > options.max_cg_iterations {
            return Err(BnpError::CgIterationBudget);
        }
        let rmp_objective = master_objective(&master);
        let basis_duals = master_duals(&master);
        let pricing_duals: Vec<Rat> = basis_duals[..rows.len()].to_vec();

        let outcome = pricer
            .price(&pricing_duals, &forbidden_patterns)
            .map_err(BnpError::Pricing)?;
        let (record_duals, pp_objective, column, refined) = match outcome.column {
            Some(col) => (pricing_duals, outcome.objective, Some(col), false),
            None => {
                let mut chosen = (pricing_duals, outcome.objective.clone(), None, false);
                if rows.len() <= options.dual_sweep_max_rows {
                    let swept = lex_max_reversed_duals(rows, pool, node, &options.big_m, &master);
                    if let Some(swept) = swept {
                        if swept != chosen.0 {
                            let again = pricer
                                .price(&swept, &forbidden_patterns)
                                .map_err(BnpError::Pricing)?;
                            if let Some(col) = again.column {
                                chosen = (swept, again.objective, Some(col), true);
                            }
                        }
                    }
                }
                chosen
            }
        };

        match column {
            // Duplicate column: stall. The optimum is already certified by the
            // basis duals, so stop generating rather than loop.
            Some(col) if pool.patterns.contains(&col.rows) => {
                iterations.push(CgIteration {
                    tree_node: node_id,
                    rmp_objective,
                    duals: record_duals,
                    pp_objective,
                    entering: None,
                    refined,
                });
                break;
            }
            Some(col) => {
                iterations.push(CgIteration {
                    tree_node: node_id,
                    rmp_objective,
                    duals: record_duals,
                    pp_objective,
                    entering: Some((col.rows.clone(), col.cost.clone())),
                    refined,
                });
                pool.patterns.insert(col.rows.clone());
                add_master_column(&mut master, pool.columns.len(), &col);
                pool.columns.push(col);
                master.pool_slot.push(master.cols.len() - 1);
                reoptimize(&mut master);
            }
            None => {
                iterations.push(CgIteration {
                    tree_node: node_id,
                    rmp_objective,
                    duals: record_duals,
                    pp_objective,
                    entering: None,
                    refined,
                });
                break;
            }
        }
    }

    let artificial_mass: Rat = master
        .artificial_slots
        .iter()
        .map(|&slot| basic_value(&master, slot))
        .sum();
    if !artificial_mass.is_zero() {
        return Ok(NodeSolution::ArtificialStuck);
    }
    let primal: Vec<Rat> = (0..pool.columns.len())
        .map(|c| {
            let slot = master.pool_slot[c];
            if slot == usize::MAX {
                Rat::zero()
            } else {
                basic_value(&master, slot)
            }
        })
        .collect();
    let objective: Rat = pool
        .columns
        .iter()
        .zip(&primal)
        .map(|(col, v)| &col.cost * v)
        .sum();
    Ok(NodeSolution::Feasible { objective, primal })
}

fn build_master<I>(
    rows: &[MasterRowKind],
    pool: &Pool<I>,
    node: &TreeNode,
    big_m: &Rat,
) -> Master {
    let n_rows = rows.len() + node.bounds.len();
    let mut cols: Vec<StdColumn> = Vec::new();
    let mut pool_slot = vec![usize::MAX; pool.columns.len()];
    let forbidden: HashSet<usize> = node.forbidden.iter().copied().collect();

    for (c, col) in pool.columns.iter().enumerate() {
        if forbidden.contains(&c) {
            continue;
        }
        let mut coeffs: Vec<(usize, Rat)> = col.rows.iter().map(|&r| (r, rat(1))).collect();
        for (bi, b) in node.bounds.iter().enumerate() {
            if b.col == c {
                coeffs.push((rows.len() + bi, rat(1)));
            }
        }
        pool_slot[c] = cols.len();
        cols.push(StdColumn {
            coeffs,
            cost: col.cost.clone(),
            phase1_cost: Rat::zero(),
            priority: (0, c as u64),
            artificial: false,
        });
    }
    // Surplus variables for ≥ rows.
    for (i, kind) in rows.iter().enumerate() {
        if matches!(kind, MasterRowKind::AtLeastOne) {
            cols.push(StdColumn {
                coeffs: vec![(i, rat(-1))],
                cost: Rat::zero(),
                phase1_cost: Rat::zero(),
                priority: (1, i as u64),
                artificial: false,
            });
        }
    }
    for (bi, b) in node.bounds.iter().enumerate() {
        let coef = match b.sense {
            BoundSense::Ge => rat(-1),
            BoundSense::Le => rat(1),
        };
        cols.push(StdColumn {
            coeffs: vec![(rows.len() + bi, coef)],
            cost: Rat::zero(),
            phase1_cost: Rat::zero(),
            priority: (1, (rows.len() + bi) as u64),
            artificial: false,
        });
    }
    // Artificials last, prioritized in reverse row order so that ratio-test
    // ties expel the latest row's artificial first.
    let mut basis = Vec::with_capacity(n_rows);
    let mut rhs = Vec::with_capacity(n_rows);
    let mut artificial_slots = Vec::new();
    for i in 0..n_rows {
        let bound_slack = if i >= rows.len() {
            let b = &node.bounds[i - rows.len()];
            rhs.push(rat(b.bound as i64));
            matches!(b.sense, BoundSense::Le)
        } else {
            rhs.push(rat(1));
            false
        };
        if bound_slack {
            // ≤ bound rows start feasible with their slack basic; no artificial.
            let slot = cols
                .iter()
                .position(|c| c.priority == (1, i as u64))
                .expect("slack for bound row");
            basis.push(slot);
        } else {
            let slot = cols.len();
            cols.push(StdColumn {
                coeffs: vec![(i, rat(1))],
                cost: big_m.clone(),
                phase1_cost: Rat::zero(),
                priority: (2, (n_rows - 1 - i) as u64),
                artificial: true,
            });
            artificial_slots.push(slot);
            basis.push(slot);
        }
    }
    let state = RevisedState::identity(n_rows, basis, rhs);
    Master {
        n_rows,
        cols,
        pool_slot,
        artificial_slots,
        state,
    }
}

fn add_master_column<I>(master: &mut Master, pool_index: usize, col: &PricedColumn<I>) {
    master.cols.push(StdColumn {
        coeffs: col.rows.iter().map(|&r| (r, rat(1))).collect(),
        cost: col.cost.clone(),
        phase1_cost: Rat::zero(),
        priority: (0, pool_index as u64),
        artificial: false,
    });
    // New column: previously visited bases may legitimately recur.
    master.state.reset_cycle_guard();
}

fn reoptimize(master: &mut Master) {
    let cols = &master.cols;
    let result = pivot_loop(&mut master.state, cols, &|c| c.cost.clone(), &|_, _| true);
    debug_assert!(
        matches!(result, LoopResult::Optimal),
        "master LP cannot be unbounded: all costs are positive"
    );
}

fn master_objective(master: &Master) -> Rat {
    master
        .state
        .basis
        .iter()
        .zip(&master.state.xb)
        .map(|(&b, v)| &master.cols[b].cost * v)
        .sum()
}

fn master_duals(master: &Master) -> Vec<Rat> {
    master.state.duals(&|v| master.cols[v].cost.clone())
}

fn basic_value(master: &Master, slot: usize) -> Rat {
    master
        .state
        .basis
        .iter()
        .position(|&b| b == slot)
        .map(|i| master.state.xb[i].clone())
        .unwrap_or_else(Rat::zero)
}

fn rat_to_u64(v: &Rat) -> u64 {
    debug_assert!(v.is_integer());
    v.to_integer().try_into().unwrap_or(0)
}

fn most_fractional(primal: &[Rat]) -> Option<usize> {
    let half = Rat::new(1.into(), 2.into());
    let mut pick: Option<(usize, Rat)> = None;
    for (c, v) in primal.iter().enumerate() {
        if v.is_integer() {
            continue;
        }
        let frac = v - v.floor();
        let dist = (&frac - &half).abs();
        match &pick {
            Some((_, best)) if best <= &dist => {}
            _ => pick = Some((c, dist)),
        }
    }
    pick.map(|(c, _)| c)
}

/// Lexicographically maximal optimal dual vector, priorities in reverse row
/// order. Returns the caller-row components.
fn lex_max_reversed_duals<I>(
    rows: &[MasterRowKind],
    pool: &Pool<I>,
    node: &TreeNode,
    big_m: &Rat,
    master: &Master,
) -> Option<Vec<Rat>> {
    let z_star = master_objective(master);
    let n_rows = master.n_rows;
    // Dual variables: y_i ≥ 0 for ≥ rows, free (split) for = rows,
    // y_i ≤ 0 (negated) for ≤ bound rows.
    #[derive(Clone, Copy)]
    enum DualVar {
        Nonneg(usize),
        Split(usize, usize),
        Nonpos(usize),
    }
    let mut lp = LinearProgram::default();
    let mut dual_vars = Vec::with_capacity(n_rows);
    for i in 0..n_rows {
        let kind = if i < rows.len() {
            match rows[i] {
                MasterRowKind::AtLeastOne => 0,
                MasterRowKind::ExactlyOne => 1,
            }
        } else {
            match node.bounds[i - rows.len()].sense {
                BoundSense::Ge => 0,
                BoundSense::Le => 2,
            }
        };
        dual_vars.push(match kind {
            0 => DualVar::Nonneg(lp.add_var(Rat::zero())),
            1 => DualVar::Split(lp.add_var(Rat::zero()), lp.add_var(Rat::zero())),
            _ => DualVar::Nonpos(lp.add_var(Rat::zero())),
        });
    }
    let term = |dv: &DualVar, coef: Rat| -> Vec<(usize, Rat)> {
        match dv {
            DualVar::Nonneg(v) => vec![(*v, coef)],
            DualVar::Split(p, n) => vec![(*p, coef.clone()), (*n, -coef)],
            DualVar::Nonpos(v) => vec![(*v, -coef)],
        }
    };

    // Dual feasibility for every column present at this node.
    let forbidden: HashSet<usize> = node.forbidden.iter().copied().collect();
    for (c, col) in pool.columns.iter().enumerate() {
        if forbidden.contains(&c) {
            continue;
        }
        let mut coeffs = Vec::new();
        for &r in &col.rows {
            coeffs.extend(term(&dual_vars[r], rat(1)));
        }
        for (bi, b) in node.bounds.iter().enumerate() {
            if b.col == c {
                coeffs.extend(term(&dual_vars[rows.len() + bi], rat(1)));
            }
        }
        lp.add_row(coeffs, Relation::Le, col.cost.clone());
    }
    // Artificial columns bound their row's dual by M.
    for i in 0..n_rows {
        if i >= rows.len() && matches!(node.bounds[i - rows.len()].sense, BoundSense::Le) {
            continue;
        }
        lp.add_row(term(&dual_vars[i], rat(1)), Relation::Le, big_m.clone());
    }
    // Dual objective pinned to the primal optimum.
    let mut obj_row = Vec::new();
    for (i, dv) in dual_vars.iter().enumerate() {
        let rhs_i = if i < rows.len() {
            rat(1)
        } else {
            rat(node.bounds[i - rows.len()].bound as i64)
        };
        obj_row.extend(term(dv, rhs_i));
    }
    lp.add_row(obj_row, Relation::Eq, z_star);

    // Sequential lexicographic maximization, last row first.
    let mut fixed: Vec<Rat> = vec![Rat::zero(); n_rows];
    for i in (0..n_rows).rev() {
        for c in lp.objective.iter_mut() {
            *c = Rat::zero();
        }
        for (v, c) in term(&dual_vars[i], rat(-1)) {
            lp.objective[v] = c;
        }
        let out = crate::solve_lp(&lp);
        if out.status != LpStatus::Optimal {
            return None;
        }
        let value = match &dual_vars[i] {
            DualVar::Nonneg(v) => out.primal[*v].clone(),
            DualVar::Split(p, n) => &out.primal[*p] - &out.primal[*n],
            DualVar::Nonpos(v) => -out.primal[*v].clone(),
        };
        lp.add_row(term(&dual_vars[i], rat(1)), Relation::Eq, value.clone());
        fixed[i] = value;
    }
    Some(fixed[..rows.len()].to_vec())
}
