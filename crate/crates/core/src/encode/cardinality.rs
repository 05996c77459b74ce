//! At-most-one and at-most-k constraints.

use crate::sat::{Lit, Var};

/// Layers up to this size get pairwise at-most-one clauses, larger ones a
/// sequential counter.
pub const PAIRWISE_LIMIT: usize = 6;

/// Growing clause list with a variable allocator.
#[derive(Debug, Clone, Default)]
pub struct CnfBuilder {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl CnfBuilder {
    pub fn new(num_vars: usize) -> Self {
        CnfBuilder {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn fresh(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars as u32 - 1)
    }

    pub fn add(&mut self, clause: Vec<Lit>) {
        self.clauses.push(clause);
    }
}

pub fn at_most_one(b: &mut CnfBuilder, lits: &[Lit]) {
    if lits.len() <= PAIRWISE_LIMIT {
        for i in 0..lits.len() {
            for j in i + 1..lits.len() {
                b.add(vec![!lits[i], !lits[j]]);
            }
        }
    } else {
        at_most_k(b, lits, 1);
    }
}

/// Sinz sequential counter for `Σ lits ≤ k`. Register `s[i][j]` is true when
/// at least `j + 1` of `lits[0..=i]` are true.
pub fn at_most_k(b: &mut CnfBuilder, lits: &[Lit], k: usize) {
    let n = lits.len();
    if n <= k {
        return;
    }
    if k == 0 {
        for &l in lits {
            b.add(vec![!l]);
        }
        return;
    }
    let s: Vec<Vec<Var>> = (0..n - 1)
        .map(|_| (0..k).map(|_| b.fresh()).collect())
        .collect();
    b.add(vec![!lits[0], s[0][0].pos()]);
    for j in 1..k {
        b.add(vec![s[0][j].neg()]);
    }
    for i in 1..n - 1 {
        b.add(vec![!lits[i], s[i][0].pos()]);
        b.add(vec![s[i - 1][0].neg(), s[i][0].pos()]);
        for j in 1..k {
            b.add(vec![!lits[i], s[i - 1][j - 1].neg(), s[i][j].pos()]);
            b.add(vec![s[i - 1][j].neg(), s[i][j].pos()]);
        }
        b.add(vec![!lits[i], s[i - 1][k - 1].neg()]);
    }
    b.add(vec![!lits[n - 1], s[n - 2][k - 1].neg()]);
}
