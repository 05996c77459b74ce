use mapf_sat::sat::{
    parse_dimacs, satisfies, write_dimacs, Budget, Cnf, Lit, SolveResult, Solver, Var,
};
use proptest::prelude::*;

fn brute_force(num_vars: usize, clauses: &[Vec<Lit>]) -> bool {
    (0u32..1 << num_vars).any(|bits| {
        let assignment: Vec<bool> = (0..num_vars).map(|i| bits >> i & 1 == 1).collect();
        satisfies(clauses, &assignment)
    })
}

fn cnf_strategy() -> impl Strategy<Value = Cnf> {
    (1usize..=10).prop_flat_map(|n| {
        let lit = (0..n as u32, any::<bool>()).prop_map(|(v, p)| Lit::new(Var(v), p));
        let clause = prop::collection::vec(lit, 1..=3);
        prop::collection::vec(clause, 0..=45).prop_map(move |clauses| Cnf {
            num_vars: n,
            clauses,
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn verdict_matches_truth_table(cnf in cnf_strategy()) {
        let mut solver = Solver::from_cnf(&cnf);
        solver.set_paranoid(true);
        match solver.solve(None, &Budget::unlimited()) {
            SolveResult::Sat(model) => {
                prop_assert!(satisfies(&cnf.clauses, &model));
            }
            SolveResult::Unsat => prop_assert!(!brute_force(cnf.num_vars, &cnf.clauses)),
            SolveResult::Budget(_) => prop_assert!(false, "no budget was set"),
        }
    }

    #[test]
    fn dimacs_round_trip(cnf in cnf_strategy()) {
        let text = write_dimacs(&cnf, &["generated".to_string()]);
        let back = parse_dimacs(&text).unwrap();
        prop_assert_eq!(back, cnf);
    }
}

#[test]
fn conflict_budget_is_reported() {
    // pigeonhole 6 into 5: hard enough to need more than one conflict
    let (p, h) = (6u32, 5u32);
    let var = |i: u32, j: u32| Var(i * h + j);
    let mut clauses: Vec<Vec<Lit>> = (0..p)
        .map(|i| (0..h).map(|j| var(i, j).pos()).collect())
        .collect();
    for j in 0..h {
        for a in 0..p {
            for b in a + 1..p {
                clauses.push(vec![var(a, j).neg(), var(b, j).neg()]);
            }
        }
    }
    let cnf = Cnf {
        num_vars: (p * h) as usize,
        clauses,
    };
    let budget = Budget {
        deadline: None,
        max_conflicts: Some(1),
    };
    assert!(matches!(
        Solver::from_cnf(&cnf).solve(None, &budget),
        SolveResult::Budget(_)
    ));
    assert!(Solver::from_cnf(&cnf)
        .solve(None, &Budget::unlimited())
        .is_unsat());
}
