//! CDCL SAT solver with a theory hook for consistency checks on partial
//! assignments.

mod dimacs;
mod heap;
mod solver;

pub use dimacs::{parse_dimacs, write_dimacs, Cnf, DimacsError};
pub use solver::{
    AssignmentView, Budget, CheckStage, ClauseRef, SolveResult, Solver, SolverStats, TheoryHook,
    TopLevelConflict,
};

use std::fmt;
use std::ops::Not;

/// Boolean variable, numbered from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

/// Variable plus polarity, packed as `2 * var + (negated as u32)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        Lit(var.0 << 1 | (!positive) as u32)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// 1-based signed DIMACS integer.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64 + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(x: i64) -> Option<Self> {
        if x == 0 {
            return None;
        }
        Some(Lit::new(Var((x.unsigned_abs() - 1) as u32), x > 0))
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClauseKind {
    Problem,
    Learned,
    /// Injected by a theory hook; never deleted.
    Theory,
}

/// Evaluates a clause set under a total assignment.
pub fn satisfies(clauses: &[Vec<Lit>], assignment: &[bool]) -> bool {
    clauses.iter().all(|c| {
        c.iter()
            .any(|l| assignment[l.var().index()] == l.is_positive())
    })
}
