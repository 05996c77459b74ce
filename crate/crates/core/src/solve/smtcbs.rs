use std::collections::BTreeSet;

use crate::encode::{encode_incomplete, extract_solution};
use crate::instance::{check_consistency, Conflict, MapfInstance};
use crate::sat::SolveResult;

use super::{xi_loop, Fixed, SolveError, SolveOptions, SolveOutcome};

/// Lazy solver. Each ξ starts from the incomplete model with every conflict
/// seen so far; the SAT solver is consulted as a black box on total
/// assignments, and detected collisions are added as refinement clauses
/// before the next consultation.
pub fn smt_cbs(inst: &MapfInstance, opts: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    let mut conflicts: BTreeSet<Conflict> = BTreeSet::new();
    xi_loop(inst, opts, |round, stats, last| {
        let mut model = encode_incomplete(&conflicts, round.inst, &round.mdds, round.xi);
        let fixed = loop {
            stats.sat_consultations += 1;
            let mut solver = model.to_solver();
            let result = solver.solve(None, &round.budget);
            stats.absorb(solver.stats());
            let assignment = match result {
                SolveResult::Sat(a) => a,
                SolveResult::Unsat => break Fixed::Unsat,
                SolveResult::Budget(_) => break Fixed::Budget,
            };
            let paths = extract_solution(&assignment, model.varmap())
                .expect("incomplete model keeps single-agent structure");
            stats.consistency_checks += 1;
            let mut collisions =
                check_consistency(&paths, round.inst).expect("extracted paths follow MDD arcs");
            if collisions.is_empty() {
                break Fixed::Solved(paths);
            }
            if opts.refine_first_only {
                collisions.truncate(1);
            }
            let added = model.refine(&collisions);
            assert!(
                !added.is_empty(),
                "collision already refined yet reported again"
            );
            stats.conflicts_refined += added.len() as u64;
        };
        stats.clauses_final = model.num_clauses();
        conflicts.extend(model.conflicts().iter().copied());
        *last = Some(model);
        fixed
    })
}
