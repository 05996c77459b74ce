//! Optimal solvers sharing the sum-of-costs iteration `ξ₀, ξ₀ + 1, ...`.

mod config;
mod cross;
mod dpll;
mod mddsat;
mod smtcbs;

pub use config::{ConfigError, DpllConfig};
pub use cross::{cross_check, CrossCheckReport, Disagreement};
pub use dpll::{dpll_mapf, MapfTheory};
pub use mddsat::mdd_sat;
pub use smtcbs::smt_cbs;

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::encode::BooleanModel;
use crate::instance::{validate_instance, MapfInstance, Solution, Violation};
use crate::mdd::{all_distances, build_all, DistanceTable, Mdd};
use crate::sat::{Budget, SolverStats};

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Wall-clock limit for the whole solve call.
    pub timeout: Option<Duration>,
    /// Largest slack `ξ - ξ₀` tried; defaults to `|V| * k`.
    pub max_slack: Option<u64>,
    /// Refine only the first reported collision per check.
    pub refine_first_only: bool,
    /// Keep the last model consulted in the outcome (for DIMACS dumps).
    pub keep_final_model: bool,
}

impl SolveOptions {
    pub fn with_timeout(timeout: Duration) -> Self {
        SolveOptions {
            timeout: Some(timeout),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    /// Some agent cannot reach its goal at all.
    Unsolvable,
    Timeout,
    /// No solution with slack up to the cap.
    XiCapReached,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Solved => "SOLVED",
            SolveStatus::Unsolvable => "UNSOLVABLE",
            SolveStatus::Timeout => "TIMEOUT",
            SolveStatus::XiCapReached => "XI_CAP",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiRecord {
    pub xi: u64,
    pub seconds: f64,
    pub satisfiable: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub per_xi: Vec<XiRecord>,
    pub runtime: Duration,
    pub sat_consultations: u64,
    /// Calls of the MAPF consistency checker, partial and final.
    pub consistency_checks: u64,
    pub partial_checks: u64,
    pub conflicts_refined: u64,
    /// Checks and refinements that happened before the SAT search first
    /// reached a total assignment (per ξ, summed).
    pub checks_before_full: u64,
    pub refinements_before_full: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub sat_conflicts: u64,
    /// Clause count of the last model consulted.
    pub clauses_final: usize,
}

impl SolveStats {
    fn absorb(&mut self, s: &SolverStats) {
        self.decisions += s.decisions;
        self.propagations += s.propagations;
        self.sat_conflicts += s.conflicts;
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub solution: Option<Solution>,
    /// Optimal sum-of-costs when solved.
    pub xi: Option<u64>,
    pub lower_bound: Option<u64>,
    pub stats: SolveStats,
    pub final_model: Option<BooleanModel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Violation>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Algorithm {
    MddSat,
    SmtCbs,
    DpllMapf(DpllConfig),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::MddSat => "mddsat",
            Algorithm::SmtCbs => "smtcbs",
            Algorithm::DpllMapf(_) => "dpllmapf",
        }
    }

    pub fn preset(&self) -> &str {
        match self {
            Algorithm::DpllMapf(cfg) => &cfg.name,
            _ => "",
        }
    }
}

pub fn solve(
    inst: &MapfInstance,
    algorithm: &Algorithm,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolveError> {
    match algorithm {
        Algorithm::MddSat => mdd_sat(inst, opts),
        Algorithm::SmtCbs => smt_cbs(inst, opts),
        Algorithm::DpllMapf(cfg) => dpll_mapf(inst, cfg, opts),
    }
}

/// Result of the fixed-ξ level.
pub(crate) enum Fixed {
    Solved(Solution),
    Unsat,
    Budget,
}

/// Everything the fixed-ξ level gets to see.
pub(crate) struct Round<'a> {
    pub inst: &'a MapfInstance,
    pub mdds: Vec<Mdd>,
    pub xi: u64,
    pub budget: Budget,
}

/// The outer loop: ξ from the lower bound upward until the fixed-ξ level
/// finds a solution. `fixed` may stash the model it consulted last in
/// `model`.
pub(crate) fn xi_loop(
    inst: &MapfInstance,
    opts: &SolveOptions,
    mut fixed: impl FnMut(&Round<'_>, &mut SolveStats, &mut Option<BooleanModel>) -> Fixed,
) -> Result<SolveOutcome, SolveError> {
    let started = Instant::now();
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(SolveError::InvalidInstance(violations));
    }
    let mut stats = SolveStats::default();
    let outcome = |status, solution, xi, lower_bound, stats: SolveStats, model| {
        let mut stats = stats;
        stats.runtime = started.elapsed();
        Ok(SolveOutcome {
            status,
            solution,
            xi,
            lower_bound,
            stats,
            final_model: model,
        })
    };
    let tables: Vec<DistanceTable> = match all_distances(inst) {
        Ok(t) => t,
        Err(_) => return outcome(SolveStatus::Unsolvable, None, None, None, stats, None),
    };
    let lower: u64 = tables
        .iter()
        .enumerate()
        .map(|(a, d)| d.shortest(inst.start_of(a)) as u64)
        .sum();
    let cap = opts
        .max_slack
        .unwrap_or((inst.graph.vertex_count() * inst.agent_count()) as u64);
    let budget = Budget {
        deadline: opts.timeout.map(|t| started + t),
        max_conflicts: None,
    };
    let mut model = None;
    for slack in 0..=cap {
        if budget.expired(0) {
            return outcome(SolveStatus::Timeout, None, None, Some(lower), stats, model);
        }
        let round_start = Instant::now();
        let xi = lower + slack;
        let round = Round {
            inst,
            mdds: build_all(inst, &tables, slack as usize),
            xi,
            budget,
        };
        let result = fixed(&round, &mut stats, &mut model);
        let seconds = round_start.elapsed().as_secs_f64();
        match result {
            Fixed::Solved(solution) => {
                stats.per_xi.push(XiRecord {
                    xi,
                    seconds,
                    satisfiable: Some(true),
                });
                let model = if opts.keep_final_model { model } else { None };
                return outcome(
                    SolveStatus::Solved,
                    Some(solution),
                    Some(xi),
                    Some(lower),
                    stats,
                    model,
                );
            }
            Fixed::Unsat => stats.per_xi.push(XiRecord {
                xi,
                seconds,
                satisfiable: Some(false),
            }),
            Fixed::Budget => {
                stats.per_xi.push(XiRecord {
                    xi,
                    seconds,
                    satisfiable: None,
                });
                let model = if opts.keep_final_model { model } else { None };
                return outcome(SolveStatus::Timeout, None, None, Some(lower), stats, model);
            }
        }
    }
    let model = if opts.keep_final_model { model } else { None };
    outcome(
        SolveStatus::XiCapReached,
        None,
        None,
        Some(lower),
        stats,
        model,
    )
}
