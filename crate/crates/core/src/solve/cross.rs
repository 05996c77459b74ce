use std::fmt;

use crate::instance::{is_valid_solution, sum_of_costs, MapfInstance};
use crate::oracle::{joint_optimum, JointSearch};

use super::{solve, Algorithm, SolveError, SolveOptions, SolveOutcome, SolveStatus};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Disagreement {
    /// Two solvers finished with different optimal costs.
    Cost {
        first: String,
        first_xi: u64,
        second: String,
        second_xi: u64,
    },
    /// A returned solution is not a valid solution of the instance.
    InvalidSolution { algo: String },
    /// Returned solution cost differs from the reported ξ.
    CostMismatch { algo: String, xi: u64, actual: u64 },
    /// The exhaustive search disagrees.
    Oracle {
        algo: String,
        xi: Option<u64>,
        oracle: Option<u64>,
    },
}

impl fmt::Display for Disagreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Disagreement::Cost {
                first,
                first_xi,
                second,
                second_xi,
            } => {
                write!(
                    f,
                    "{first} found cost {first_xi} but {second} found {second_xi}"
                )
            }
            Disagreement::InvalidSolution { algo } => {
                write!(f, "{algo} returned an invalid solution")
            }
            Disagreement::CostMismatch { algo, xi, actual } => {
                write!(
                    f,
                    "{algo} reported cost {xi} for a solution costing {actual}"
                )
            }
            Disagreement::Oracle { algo, xi, oracle } => {
                write!(f, "{algo} found {xi:?} but joint search found {oracle:?}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrossCheckReport {
    pub outcomes: Vec<(Algorithm, SolveOutcome)>,
    pub oracle: Option<JointSearch>,
    pub disagreements: Vec<Disagreement>,
}

impl CrossCheckReport {
    pub fn agrees(&self) -> bool {
        self.disagreements.is_empty()
    }
}

fn label(a: &Algorithm) -> String {
    match a {
        Algorithm::DpllMapf(cfg) => format!("dpllmapf[{}]", cfg.name),
        _ => a.name().to_string(),
    }
}

/// Runs every algorithm on `inst` and compares the costs of those that
/// solved it. With `oracle_states`, also runs the joint-state search with
/// that state limit and compares against it when it finishes.
pub fn cross_check(
    inst: &MapfInstance,
    algorithms: &[Algorithm],
    opts: &SolveOptions,
    oracle_states: Option<usize>,
) -> Result<CrossCheckReport, SolveError> {
    let mut outcomes = Vec::with_capacity(algorithms.len());
    let mut disagreements = Vec::new();
    for algo in algorithms {
        let out = solve(inst, algo, opts)?;
        if let (Some(sol), Some(xi)) = (&out.solution, out.xi) {
            if !is_valid_solution(sol, inst) {
                disagreements.push(Disagreement::InvalidSolution { algo: label(algo) });
            }
            let actual = sum_of_costs(sol) as u64;
            if actual != xi {
                disagreements.push(Disagreement::CostMismatch {
                    algo: label(algo),
                    xi,
                    actual,
                });
            }
        }
        outcomes.push((algo.clone(), out));
    }
    let solved: Vec<(&Algorithm, u64)> = outcomes
        .iter()
        .filter_map(|(a, o)| o.xi.map(|xi| (a, xi)))
        .collect();
    if let Some(&(first, first_xi)) = solved.first() {
        for &(other, xi) in &solved[1..] {
            if xi != first_xi {
                disagreements.push(Disagreement::Cost {
                    first: label(first),
                    first_xi,
                    second: label(other),
                    second_xi: xi,
                });
            }
        }
    }
    let oracle = oracle_states.map(|n| joint_optimum(inst, n));
    if let Some(result) = &oracle {
        if !matches!(result, JointSearch::Aborted) {
            for (algo, out) in &outcomes {
                let comparable =
                    matches!(out.status, SolveStatus::Solved | SolveStatus::Unsolvable);
                if comparable && out.xi != result.cost() {
                    disagreements.push(Disagreement::Oracle {
                        algo: label(algo),
                        xi: out.xi,
                        oracle: result.cost(),
                    });
                }
            }
        }
    }
    Ok(CrossCheckReport {
        outcomes,
        oracle,
        disagreements,
    })
}
