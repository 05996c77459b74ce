use std::collections::BTreeSet;

use crate::encode::{encode_incomplete, extract_partial_solution, extract_solution, BooleanModel};
use crate::instance::{check_partial_consistency, Conflict, MapfInstance};
use crate::sat::{AssignmentView, CheckStage, Lit, SolveResult, TheoryHook};

use super::{xi_loop, DpllConfig, Fixed, SolveError, SolveOptions, SolveOutcome};

/// Collision checker run from inside the SAT search. Reads the positions
/// fixed so far, reports collisions among them and turns new ones into
/// refinement clauses of `model`.
pub struct MapfTheory<'a> {
    pub model: &'a mut BooleanModel,
    pub inst: &'a MapfInstance,
    pub refine_first_only: bool,
    pub checks: u64,
    pub refined: u64,
}

impl<'a> MapfTheory<'a> {
    pub fn new(model: &'a mut BooleanModel, inst: &'a MapfInstance) -> Self {
        MapfTheory {
            model,
            inst,
            refine_first_only: false,
            checks: 0,
            refined: 0,
        }
    }
}

impl TheoryHook for MapfTheory<'_> {
    fn check(&mut self, view: &AssignmentView<'_>, _stage: CheckStage) -> Vec<Vec<Lit>> {
        self.checks += 1;
        let partial = extract_partial_solution(view, self.model.varmap())
            .expect("layer AMO holds at quiescence");
        let collisions = check_partial_consistency(&partial, self.inst)
            .expect("positions follow MDD arcs at quiescence");
        let mut clauses = Vec::new();
        for c in collisions {
            if let Some(clause) = self.model.incorporate(c) {
                clauses.push(clause);
                if self.refine_first_only {
                    break;
                }
            }
        }
        self.refined += clauses.len() as u64;
        clauses
    }
}

/// Lazy solver with the collision check inside the SAT search: one solver
/// per ξ, checked at the configured fractions of assigned variables and at
/// every total assignment.
pub fn dpll_mapf(
    inst: &MapfInstance,
    config: &DpllConfig,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolveError> {
    let mut conflicts: BTreeSet<Conflict> = BTreeSet::new();
    xi_loop(inst, opts, |round, stats, last| {
        let mut model = encode_incomplete(&conflicts, round.inst, &round.mdds, round.xi);
        let mut solver = model.to_solver();
        solver.set_check_points(config.check_points.clone());
        stats.sat_consultations += 1;
        let (result, checks, refined) = {
            let mut theory = MapfTheory::new(&mut model, round.inst);
            theory.refine_first_only = opts.refine_first_only;
            let result = solver.solve(Some(&mut theory), &round.budget);
            (result, theory.checks, theory.refined)
        };
        let s = solver.stats();
        stats.absorb(s);
        stats.consistency_checks += checks;
        stats.partial_checks += s.partial_checks;
        stats.conflicts_refined += refined;
        stats.checks_before_full += s.checks_before_full;
        stats.refinements_before_full += s.refinements_before_full;
        stats.clauses_final = model.num_clauses();
        let fixed = match result {
            SolveResult::Sat(assignment) => Fixed::Solved(
                extract_solution(&assignment, model.varmap())
                    .expect("satisfying assignment encodes paths"),
            ),
            SolveResult::Unsat => Fixed::Unsat,
            SolveResult::Budget(_) => Fixed::Budget,
        };
        conflicts.extend(model.conflicts().iter().copied());
        *last = Some(model);
        fixed
    })
}
