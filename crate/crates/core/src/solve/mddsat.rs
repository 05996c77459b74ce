use crate::encode::{encode_complete, extract_solution};
use crate::instance::MapfInstance;
use crate::sat::SolveResult;

use super::{xi_loop, Fixed, SolveError, SolveOptions, SolveOutcome};

/// Eager solver: one complete model per ξ, first satisfiable ξ is optimal.
pub fn mdd_sat(inst: &MapfInstance, opts: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    xi_loop(inst, opts, |round, stats, last| {
        let model = encode_complete(round.inst, &round.mdds, round.xi);
        stats.clauses_final = model.num_clauses();
        stats.sat_consultations += 1;
        let mut solver = model.to_solver();
        let result = solver.solve(None, &round.budget);
        stats.absorb(solver.stats());
        let fixed = match result {
            SolveResult::Sat(assignment) => Fixed::Solved(
                extract_solution(&assignment, model.varmap())
                    .expect("complete model assignments encode paths"),
            ),
            SolveResult::Unsat => Fixed::Unsat,
            SolveResult::Budget(_) => Fixed::Budget,
        };
        *last = Some(model);
        fixed
    })
}
