use num_traits::Zero;
use shoi_simplex::{
    branch_and_price, rat, solve_lp, BnpOptions, BnpResult, LinearProgram, LpStatus,
    MasterRowKind, PricedColumn, Pricer, PricingOutcome, Rat, Relation,
};

#[test]
fn single_constraint_lp() {
    // min x s.t. x ≥ 1
    let mut lp = LinearProgram::default();
    lp.add_var(rat(1));
    lp.add_row(vec![(0, rat(1))], Relation::Ge, rat(1));
    let out = solve_lp(&lp);
    assert_eq!(out.status, LpStatus::Optimal);
    assert_eq!(out.objective, rat(1));
    assert_eq!(out.duals, vec![rat(1)]);
}

#[test]
fn artificial_seed_lp_matches_reference_values() {
    // Three big-M artificials over rows (≥1, ≥1, =1): objective 30, duals all 10.
    let mut lp = LinearProgram::default();
    for _ in 0..3 {
        lp.add_var(rat(10));
    }
    lp.add_row(vec![(0, rat(1))], Relation::Ge, rat(1));
    lp.add_row(vec![(1, rat(1))], Relation::Ge, rat(1));
    lp.add_row(vec![(2, rat(1))], Relation::Eq, rat(1));
    let out = solve_lp(&lp);
    assert_eq!(out.status, LpStatus::Optimal);
    assert_eq!(out.objective, rat(30));
    assert_eq!(out.duals, vec![rat(10), rat(10), rat(10)]);
}

#[test]
fn covered_master_reaches_final_objective() {
    // The master after both reference columns entered: objective 2.
    let mut lp = LinearProgram::default();
    let x_o1 = lp.add_var(rat(1));
    let x_b = lp.add_var(rat(1));
    for _ in 0..3 {
        lp.add_var(rat(10));
    }
    lp.add_row(vec![(x_b, rat(1)), (2, rat(1))], Relation::Ge, rat(1));
    lp.add_row(vec![(x_o1, rat(1)), (3, rat(1))], Relation::Ge, rat(1));
    lp.add_row(vec![(x_o1, rat(1)), (4, rat(1))], Relation::Eq, rat(1));
    let out = solve_lp(&lp);
    assert_eq!(out.objective, rat(2));
    assert_eq!(out.primal[x_o1], rat(1));
    assert_eq!(out.primal[x_b], rat(1));
}

#[test]
fn detects_infeasible_system() {
    let mut lp = LinearProgram::default();
    lp.add_var(rat(1));
    lp.add_row(vec![(0, rat(1))], Relation::Le, rat(1));
    lp.add_row(vec![(0, rat(1))], Relation::Ge, rat(2));
    assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);
}

#[test]
fn detects_unbounded_objective() {
    let mut lp = LinearProgram::default();
    lp.add_var(rat(-1));
    lp.add_row(vec![(0, rat(-1))], Relation::Le, rat(0));
    assert_eq!(solve_lp(&lp).status, LpStatus::Unbounded);
}

#[test]
fn honors_upper_bounds() {
    let mut lp = LinearProgram::default();
    lp.add_var(rat(-1));
    lp.upper_bounds = vec![Some(rat(3))];
    let out = solve_lp(&lp);
    assert_eq!(out.status, LpStatus::Optimal);
    assert_eq!(out.objective, rat(-3));
}

/// Prices from a fixed candidate set: min reduced cost, ties by pattern.
struct StaticPricer {
    candidates: Vec<(Vec<usize>, i64)>,
}

impl Pricer for StaticPricer {
    type Info = usize;
    type Error = ();

    fn price(
        &mut self,
        duals: &[Rat],
        forbidden: &[Vec<usize>],
    ) -> Result<PricingOutcome<usize>, ()> {
        let mut best: Option<(Rat, usize)> = None;
        for (idx, (rows, cost)) in self.candidates.iter().enumerate() {
            if forbidden.contains(rows) {
                continue;
            }
            let mut rc = rat(*cost);
            for &r in rows {
                rc -= duals[r].clone();
            }
            match &best {
                Some((b, _)) if *b <= rc => {}
                _ => best = Some((rc, idx)),
            }
        }
        match best {
            Some((rc, idx)) if rc < Rat::zero() => Ok(PricingOutcome {
                objective: rc,
                column: Some(PricedColumn {
                    rows: self.candidates[idx].0.clone(),
                    cost: rat(self.candidates[idx].1),
                    info: idx,
                }),
            }),
            Some((rc, _)) => Ok(PricingOutcome {
                objective: rc.min(Rat::zero()),
                column: None,
            }),
            None => Ok(PricingOutcome {
                objective: Rat::zero(),
                column: None,
            }),
        }
    }
}

#[test]
fn column_generation_reproduces_reference_objective_sequence() {
    // Rows: coverage for two existentials and one nominal partition row.
    let rows = [
        MasterRowKind::AtLeastOne,
        MasterRowKind::AtLeastOne,
        MasterRowKind::ExactlyOne,
    ];
    // Candidate cells: {B} covers row 0; {o1} covers rows 1 and 2.
    let mut pricer = StaticPricer {
        candidates: vec![(vec![0], 1), (vec![1, 2], 1)],
    };
    let out = branch_and_price(&rows, &mut pricer, &BnpOptions::default()).unwrap();
    let rmp: Vec<Rat> = out.iterations.iter().map(|i| i.rmp_objective.clone()).collect();
    let pp: Vec<Rat> = out.iterations.iter().map(|i| i.pp_objective.clone()).collect();
    assert_eq!(rmp, vec![rat(30), rat(11), rat(2)]);
    assert_eq!(pp, vec![rat(-19), rat(-9), rat(0)]);
    match out.result {
        BnpResult::Optimal {
            objective,
            selection,
        } => {
            assert_eq!(objective, rat(2));
            assert_eq!(selection.len(), 2);
            assert!(selection.iter().all(|s| s.value == 1));
        }
        BnpResult::Infeasible => panic!("expected feasible"),
    }
}

#[test]
fn uncoverable_row_is_infeasible() {
    let rows = [MasterRowKind::AtLeastOne, MasterRowKind::AtLeastOne];
    // No candidate ever covers row 1, so its artificial persists.
    let mut pricer = StaticPricer {
        candidates: vec![(vec![0], 1)],
    };
    let out = branch_and_price(&rows, &mut pricer, &BnpOptions::default()).unwrap();
    assert!(matches!(out.result, BnpResult::Infeasible));
}

#[test]
fn fractional_root_forces_branching() {
    // Odd-cycle covering: LP relaxation 3/2, integer optimum 2.
    let rows = [
        MasterRowKind::AtLeastOne,
        MasterRowKind::AtLeastOne,
        MasterRowKind::AtLeastOne,
    ];
    let mut pricer = StaticPricer {
        candidates: vec![(vec![0, 1], 1), (vec![1, 2], 1), (vec![0, 2], 1)],
    };
    let out = branch_and_price(&rows, &mut pricer, &BnpOptions::default()).unwrap();
    match out.result {
        BnpResult::Optimal { objective, .. } => assert_eq!(objective, rat(2)),
        BnpResult::Infeasible => panic!("expected feasible"),
    }
    assert!(out.tree_nodes > 1, "root relaxation is fractional");
}

#[test]
fn lp_dual_feasibility_on_random_instances() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let m = rng.gen_range(1..=4);
        let mut lp = LinearProgram::default();
        for _ in 0..n {
            lp.add_var(rat(rng.gen_range(0..=6)));
        }
        for _ in 0..m {
            let coeffs: Vec<(usize, Rat)> = (0..n)
                .filter_map(|v| {
                    let c = rng.gen_range(-2..=3);
                    (c != 0).then(|| (v, rat(c)))
                })
                .collect();
            let relation = match rng.gen_range(0..3) {
                0 => Relation::Le,
                1 => Relation::Ge,
                _ => Relation::Eq,
            };
            lp.add_row(coeffs, relation, rat(rng.gen_range(-3..=3)));
        }
        let out = solve_lp(&lp);
        if out.status != LpStatus::Optimal {
            continue;
        }
        // Primal feasibility of the reported solution.
        for row in &lp.rows {
            let lhs: Rat = row.coeffs.iter().map(|(v, c)| c * &out.primal[*v]).sum();
            match row.relation {
                Relation::Le => assert!(lhs <= row.rhs),
                Relation::Ge => assert!(lhs >= row.rhs),
                Relation::Eq => assert_eq!(lhs, row.rhs),
            }
        }
        // Dual feasibility: reduced costs nonnegative, row-sense signs respected.
        for (i, row) in lp.rows.iter().enumerate() {
            match row.relation {
                Relation::Le => assert!(out.duals[i] <= Rat::zero()),
                Relation::Ge => assert!(out.duals[i] >= Rat::zero()),
                Relation::Eq => {}
            }
        }
        for v in 0..n {
            let mut rc = lp.objective[v].clone();
            for (i, row) in lp.rows.iter().enumerate() {
                for (var, c) in &row.coeffs {
                    if *var == v {
                        rc -= &out.duals[i] * c;
                    }
                }
            }
            assert!(rc >= Rat::zero(), "negative reduced cost at optimum");
        }
    }
}
