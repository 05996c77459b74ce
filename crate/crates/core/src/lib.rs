//! Sum-of-costs optimal multi-agent path finding built on a CDCL SAT core.
//!
//! Three solvers share one ξ-iteration loop and differ in how collision
//! constraints reach the SAT solver:
//!
//! * [`solve::mdd_sat`] encodes everything up front (complete model),
//! * [`solve::smt_cbs`] starts without collision constraints and refines
//!   between black-box SAT calls,
//! * [`solve::dpll_mapf`] refines from inside the search through a
//!   [`sat::TheoryHook`] that checks partial assignments.

pub mod encode;
pub mod gen;
pub mod instance;
pub mod mdd;
pub mod movingai;
pub mod oracle;
pub mod report;
pub mod sat;
pub mod solve;

pub use instance::{
    check_consistency, check_partial_consistency, is_valid_solution, makespan, sum_of_costs,
    validate_instance, AgentId, Conflict, ConflictKind, Graph, MapfInstance, PartialSolution,
    Solution, VertexId,
};
