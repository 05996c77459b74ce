use std::time::Instant;

use thiserror::Error;

use super::heap::VarHeap;
use super::{ClauseKind, Cnf, Lit, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClauseRef(u32);

#[derive(Debug, Clone)]
struct Clause {
    lits: Vec<Lit>,
    kind: ClauseKind,
    activity: f64,
    deleted: bool,
}

#[derive(Debug, Clone, Copy)]
struct Watch {
    cref: ClauseRef,
    blocker: Lit,
}

/// The clause database became unsatisfiable at decision level 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("conflict at decision level 0")]
pub struct TopLevelConflict;

/// Resource limits for one `solve` call.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    pub deadline: Option<Instant>,
    pub max_conflicts: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn expired(&self, conflicts: u64) -> bool {
        self.max_conflicts.is_some_and(|m| conflicts >= m)
            || self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheckStage {
    /// Propagation is quiescent and `fraction` of the variables are assigned.
    Partial { fraction: f64 },
    /// Every variable is assigned.
    Final,
}

/// Read-only view of the current assignment handed to a [`TheoryHook`].
pub struct AssignmentView<'a> {
    assigns: &'a [Option<bool>],
    trail: &'a [Lit],
    decision_level: u32,
}

impl AssignmentView<'_> {
    pub fn value(&self, var: Var) -> Option<bool> {
        self.assigns.get(var.index()).copied().flatten()
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.value(lit.var()).map(|b| b == lit.is_positive())
    }

    /// Assigned literals in assignment order.
    pub fn trail(&self) -> &[Lit] {
        self.trail
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn decision_level(&self) -> u32 {
        self.decision_level
    }
}

/// Consistency check plugged into the search loop. Returned clauses become
/// [`ClauseKind::Theory`] clauses; each must be falsified or undetermined under
/// the assignment it was computed from.
pub trait TheoryHook {
    fn check(&mut self, view: &AssignmentView<'_>, stage: CheckStage) -> Vec<Vec<Lit>>;
}

#[derive(Debug, Clone)]
pub enum SolveResult {
    Sat(Vec<bool>),
    Unsat,
    Budget(SolverStats),
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveResult::Unsat)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learned_clauses: u64,
    pub deleted_clauses: u64,
    pub theory_clauses: u64,
    pub partial_checks: u64,
    pub final_checks: u64,
    /// Hook clauses injected by partial checks.
    pub partial_refinements: u64,
    pub final_refinements: u64,
    /// Number of times the search reached a total assignment.
    pub full_assignments: u64,
    pub checks_before_full: u64,
    pub refinements_before_full: u64,
    pub rejected_hook_clauses: u64,
}

const RESTART_UNIT: f64 = 64.0;
const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;

/// CDCL solver: two-watched-literal propagation, first-UIP learning with
/// clause minimization, VSIDS with phase saving, Luby restarts and
/// activity-based learned clause reduction.
#[derive(Debug, Clone)]
pub struct Solver {
    clauses: Vec<Clause>,
    units: Vec<(Lit, ClauseKind)>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    cla_inc: f64,
    seen: Vec<bool>,
    learned: Vec<ClauseRef>,
    max_learned: f64,
    ok: bool,
    check_points: Vec<f64>,
    fired: Vec<Option<u32>>,
    paranoid: bool,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(0)
    }
}

impl Solver {
    pub fn new(num_vars: usize) -> Self {
        let mut s = Solver {
            clauses: Vec::new(),
            units: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            cla_inc: 1.0,
            seen: Vec::new(),
            learned: Vec::new(),
            max_learned: 1000.0,
            ok: true,
            check_points: Vec::new(),
            fired: Vec::new(),
            paranoid: false,
            stats: SolverStats::default(),
        };
        s.ensure_vars(num_vars);
        s
    }

    pub fn from_cnf(cnf: &Cnf) -> Self {
        let mut s = Solver::new(cnf.num_vars);
        for c in &cnf.clauses {
            if s.add_clause(c, ClauseKind::Problem).is_err() {
                break;
            }
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.num_vars() as u32);
        self.ensure_vars(self.num_vars() + 1);
        v
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            let v = self.assigns.len() as u32;
            self.assigns.push(None);
            self.level.push(0);
            self.reason.push(None);
            self.activity.push(0.0);
            self.phase.push(false);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.heap.insert(v, &self.activity);
        }
    }

    /// Assignment fractions in `(0, 1]` at which the hook runs on a partial
    /// assignment. Sorted and deduplicated.
    pub fn set_check_points(&mut self, mut points: Vec<f64>) {
        points.retain(|p| *p > 0.0 && *p <= 1.0);
        points.sort_by(f64::total_cmp);
        points.dedup();
        self.fired = vec![None; points.len()];
        self.check_points = points;
    }

    /// Verifies the propagation fixpoint and trail invariants by full scan
    /// after every propagation round. Slow; meant for tests.
    pub fn set_paranoid(&mut self, on: bool) {
        self.paranoid = on;
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        self.assigns[var.index()]
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.assigns[lit.var().index()].map(|b| b == lit.is_positive())
    }

    pub fn level_of(&self, var: Var) -> u32 {
        self.level[var.index()]
    }

    pub fn reason_of(&self, var: Var) -> Option<ClauseRef> {
        self.reason[var.index()]
    }

    pub fn clause_lits(&self, cref: ClauseRef) -> &[Lit] {
        &self.clauses[cref.0 as usize].lits
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn activity(&self, var: Var) -> f64 {
        self.activity[var.index()]
    }

    pub fn view(&self) -> AssignmentView<'_> {
        AssignmentView {
            assigns: &self.assigns,
            trail: &self.trail,
            decision_level: self.decision_level(),
        }
    }

    /// Live clauses, optionally including learned ones, as a CNF.
    pub fn to_cnf(&self, include_learned: bool) -> Cnf {
        let mut clauses: Vec<Vec<Lit>> = self.units.iter().map(|(l, _)| vec![*l]).collect();
        for c in &self.clauses {
            if !c.deleted && (include_learned || c.kind != ClauseKind::Learned) {
                clauses.push(c.lits.clone());
            }
        }
        if !self.ok {
            clauses.push(Vec::new());
        }
        Cnf {
            num_vars: self.num_vars(),
            clauses,
        }
    }

    /// Problem and theory clauses in insertion order (units first).
    pub fn permanent_clauses(&self) -> Vec<Vec<Lit>> {
        self.to_cnf(false).clauses
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<ClauseRef>) {
        let v = lit.var().index();
        debug_assert!(self.assigns[v].is_none());
        self.assigns[v] = Some(lit.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    /// Adds a clause at any point of the search. The clause is normalized
    /// (duplicates removed, tautologies dropped, literals false at level 0
    /// removed). If it is unit or falsified under the current assignment the
    /// solver backjumps as needed and enqueues the implied literal, or
    /// analyzes the conflict it represents.
    pub fn add_clause(&mut self, lits: &[Lit], kind: ClauseKind) -> Result<(), TopLevelConflict> {
        if !self.ok {
            return Err(TopLevelConflict);
        }
        let mut lits = lits.to_vec();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return Ok(());
        }
        if let Some(max) = lits.iter().map(|l| l.var().index()).max() {
            self.ensure_vars(max + 1);
        }
        let mut satisfied = false;
        lits.retain(|&l| match self.lit_value(l) {
            Some(b) if self.level[l.var().index()] == 0 => {
                satisfied |= b;
                false
            }
            _ => true,
        });
        if satisfied {
            return Ok(());
        }
        match lits.len() {
            0 => {
                self.ok = false;
                Err(TopLevelConflict)
            }
            1 => {
                let l = lits[0];
                self.backtrack(0);
                self.units.push((l, kind));
                if self.lit_value(l).is_none() {
                    self.enqueue(l, None);
                }
                Ok(())
            }
            _ => {
                let key = |s: &Solver, l: Lit| match s.lit_value(l) {
                    Some(true) => (0u8, s.level[l.var().index()]),
                    None => (1, 0),
                    Some(false) => (2, u32::MAX - s.level[l.var().index()]),
                };
                lits.sort_by_key(|&l| key(self, l));
                let cref = self.attach(lits, kind);
                let (l0, l1) = {
                    let c = &self.clauses[cref.0 as usize].lits;
                    (c[0], c[1])
                };
                if self.lit_value(l1) != Some(false) {
                    return Ok(());
                }
                let lvl1 = self.level[l1.var().index()];
                match self.lit_value(l0) {
                    None => {
                        self.backtrack(lvl1);
                        self.enqueue(l0, Some(cref));
                    }
                    Some(true) => {
                        if self.level[l0.var().index()] > lvl1 {
                            self.backtrack(lvl1);
                            self.enqueue(l0, Some(cref));
                        }
                    }
                    Some(false) => {
                        let lvl0 = self.level[l0.var().index()];
                        if lvl0 > lvl1 {
                            self.backtrack(lvl1);
                            self.enqueue(l0, Some(cref));
                        } else {
                            self.backtrack(lvl0);
                            if !self.resolve_conflict(cref) {
                                return Err(TopLevelConflict);
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, kind: ClauseKind) -> ClauseRef {
        debug_assert!(lits.len() >= 2);
        let cref = ClauseRef(self.clauses.len() as u32);
        self.watches[lits[0].code()].push(Watch {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].code()].push(Watch {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause {
            lits,
            kind,
            activity: 0.0,
            deleted: false,
        });
        cref
    }

    /// Unit propagation to fixpoint. Returns the first falsified clause.
    pub fn propagate(&mut self) -> Option<ClauseRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut conflict = None;
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if lit_val(&self.assigns, w.blocker) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let clause = &mut self.clauses[w.cref.0 as usize];
                if clause.deleted {
                    continue;
                }
                let lits = &mut clause.lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let watch = Watch {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && lit_val(&self.assigns, first) == Some(true) {
                    ws[j] = watch;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    if lit_val(&self.assigns, lits[k]) != Some(false) {
                        lits.swap(1, k);
                        self.watches[lits[1].code()].push(watch);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = watch;
                j += 1;
                if lit_val(&self.assigns, first) == Some(false) {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// Picks the most active unassigned variable (ties: lowest index) and
    /// assigns it its saved phase at a new decision level. `None` when every
    /// variable is assigned.
    pub fn decide(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize].is_none() {
                let lit = Lit::new(Var(v), self.phase[v as usize]);
                self.push_decision(lit);
                return Some(lit);
            }
        }
        None
    }

    /// Assigns `lit` as a decision at a new decision level.
    pub fn push_decision(&mut self, lit: Lit) {
        self.stats.decisions += 1;
        self.trail_lim.push(self.trail.len());
        self.enqueue(lit, None);
    }

    pub fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for idx in (lim..self.trail.len()).rev() {
            let v = self.trail[idx].var().index();
            self.phase[v] = self.assigns[v].expect("trail literal is assigned");
            self.assigns[v] = None;
            self.reason[v] = None;
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.qhead.min(lim);
        for f in &mut self.fired {
            if f.is_some_and(|l| l > level) {
                *f = None;
            }
        }
    }

    /// First-UIP analysis. Returns the learned clause with the asserting
    /// literal first and the highest remaining level second, plus the
    /// backjump level. Requires a conflict above level 0.
    pub fn analyze_conflict(&mut self, confl: ClauseRef) -> (Vec<Lit>, u32) {
        let current = self.decision_level();
        debug_assert!(current > 0);
        let mut learnt = vec![Lit::new(Var(0), true)];
        let mut pending = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let mut confl = Some(confl);
        loop {
            let cref = confl.expect("non-decision literal has a reason");
            self.bump_clause(cref);
            let n = self.clauses[cref.0 as usize].lits.len();
            for k in 0..n {
                let q = self.clauses[cref.0 as usize].lits[k];
                if p.is_some_and(|p| p.var() == q.var()) {
                    continue;
                }
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            confl = self.reason[lit.var().index()];
            self.seen[lit.var().index()] = false;
            pending -= 1;
            if pending == 0 {
                break;
            }
        }
        learnt[0] = !p.expect("UIP found");

        // drop literals implied by the rest of the clause
        let marked: Vec<Lit> = learnt[1..].to_vec();
        let mut keep = vec![learnt[0]];
        for &q in &learnt[1..] {
            let redundant = match self.reason[q.var().index()] {
                None => false,
                Some(r) => self.clauses[r.0 as usize].lits.iter().all(|l| {
                    let v = l.var().index();
                    l.var() == q.var() || self.seen[v] || self.level[v] == 0
                }),
            };
            if !redundant {
                keep.push(q);
            }
        }
        for q in marked {
            self.seen[q.var().index()] = false;
        }
        let mut learnt = keep;

        let mut bt = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().index()] > self.level[learnt[best].var().index()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            bt = self.level[learnt[1].var().index()];
        }
        (learnt, bt)
    }

    /// Analyzes `confl`, backjumps and asserts the learned clause. Returns
    /// `false` when the conflict is at level 0.
    fn resolve_conflict(&mut self, confl: ClauseRef) -> bool {
        self.stats.conflicts += 1;
        if self.decision_level() == 0 {
            self.ok = false;
            return false;
        }
        let (learnt, bt) = self.analyze_conflict(confl);
        self.backtrack(bt);
        self.stats.learned_clauses += 1;
        if learnt.len() == 1 {
            self.units.push((learnt[0], ClauseKind::Learned));
            self.enqueue(learnt[0], None);
        } else {
            let asserting = learnt[0];
            let cref = self.attach(learnt, ClauseKind::Learned);
            self.bump_clause(cref);
            self.learned.push(cref);
            self.enqueue(asserting, Some(cref));
        }
        self.var_inc /= VAR_DECAY;
        self.cla_inc /= CLAUSE_DECAY;
        true
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, cref: ClauseRef) {
        let c = &mut self.clauses[cref.0 as usize];
        if c.kind != ClauseKind::Learned {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &r in &self.learned {
                self.clauses[r.0 as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn locked(&self, cref: ClauseRef) -> bool {
        let l0 = self.clauses[cref.0 as usize].lits[0];
        self.reason[l0.var().index()] == Some(cref) && self.lit_value(l0) == Some(true)
    }

    /// Deletes the less active half of the learned clauses (binary and
    /// reason clauses are kept). Problem and theory clauses are never touched.
    fn reduce_db(&mut self) {
        let mut cands = self.learned.clone();
        cands.sort_by(|a, b| {
            self.clauses[a.0 as usize]
                .activity
                .total_cmp(&self.clauses[b.0 as usize].activity)
        });
        let half = cands.len() / 2;
        for &cref in &cands[..half] {
            if self.clauses[cref.0 as usize].lits.len() > 2 && !self.locked(cref) {
                let c = &mut self.clauses[cref.0 as usize];
                c.deleted = true;
                c.lits = Vec::new();
                self.stats.deleted_clauses += 1;
            }
        }
        let clauses = &self.clauses;
        self.learned.retain(|c| !clauses[c.0 as usize].deleted);
    }

    fn all_assigned(&self) -> bool {
        self.trail.len() == self.num_vars()
    }

    fn model(&self) -> Vec<bool> {
        self.assigns.iter().map(|a| a.unwrap_or(false)).collect()
    }

    /// Marks every armed check point at or below the current assignment
    /// fraction as fired. Returns whether any fired.
    fn crossed_check_point(&mut self) -> Option<f64> {
        let fraction = self.trail.len() as f64 / self.num_vars().max(1) as f64;
        let level = self.decision_level();
        let mut any = false;
        for (p, f) in self.check_points.iter().zip(self.fired.iter_mut()) {
            if f.is_none() && *p <= fraction {
                *f = Some(level);
                any = true;
            }
        }
        any.then_some(fraction)
    }

    /// Adds hook clauses. Clauses already satisfied by the assignment the
    /// hook saw are rejected. Returns how many were added.
    fn inject(&mut self, clauses: Vec<Vec<Lit>>) -> Result<u64, TopLevelConflict> {
        let accepted: Vec<Vec<Lit>> = clauses
            .into_iter()
            .filter(|c| {
                let sat = c.iter().any(|&l| self.lit_value(l) == Some(true));
                debug_assert!(!sat, "theory hook returned a satisfied clause {c:?}");
                if sat {
                    self.stats.rejected_hook_clauses += 1;
                }
                !sat
            })
            .collect();
        let n = accepted.len() as u64;
        for c in accepted {
            self.stats.theory_clauses += 1;
            self.add_clause(&c, ClauseKind::Theory)?;
        }
        Ok(n)
    }

    /// Runs CDCL search. With a hook, the hook is consulted whenever
    /// propagation is quiescent and the assigned fraction crosses an armed
    /// check point, again after every round that injected clauses, and always
    /// on a total assignment before SAT is declared.
    pub fn solve(&mut self, mut hook: Option<&mut dyn TheoryHook>, budget: &Budget) -> SolveResult {
        if !self.ok {
            return SolveResult::Unsat;
        }
        let mut restarts_done: u64 = 0;
        let mut conflicts_since_restart: u64 = 0;
        let mut restart_limit = luby(2.0, 0) * RESTART_UNIT;
        self.max_learned = (self.clauses.len() as f64 / 3.0).max(2000.0);
        let mut recheck = false;
        let mut reached_full = false;
        let mut ticks: u32 = 0;
        loop {
            if let Some(confl) = self.propagate() {
                if !self.resolve_conflict(confl) {
                    return SolveResult::Unsat;
                }
                conflicts_since_restart += 1;
                if budget.expired(self.stats.conflicts) {
                    return SolveResult::Budget(self.stats.clone());
                }
                continue;
            }
            if self.paranoid {
                self.assert_invariants();
            }
            if conflicts_since_restart as f64 >= restart_limit {
                restarts_done += 1;
                self.stats.restarts += 1;
                conflicts_since_restart = 0;
                restart_limit = luby(2.0, restarts_done) * RESTART_UNIT;
                self.backtrack(0);
                continue;
            }
            if self.learned.len() as f64 >= self.max_learned + self.trail.len() as f64 {
                self.reduce_db();
                self.max_learned *= 1.1;
            }

            let full = self.all_assigned();
            if let Some(h) = hook.as_deref_mut() {
                if full {
                    self.stats.full_assignments += 1;
                    reached_full = true;
                    self.stats.final_checks += 1;
                    let clauses = h.check(&self.view(), CheckStage::Final);
                    match self.inject(clauses) {
                        Err(_) => return SolveResult::Unsat,
                        Ok(0) => return SolveResult::Sat(self.model()),
                        Ok(n) => {
                            self.stats.final_refinements += n;
                            recheck = false;
                            continue;
                        }
                    }
                }
                let due = self.crossed_check_point();
                if recheck || due.is_some() {
                    let fraction = self.trail.len() as f64 / self.num_vars().max(1) as f64;
                    self.stats.partial_checks += 1;
                    if !reached_full {
                        self.stats.checks_before_full += 1;
                    }
                    let clauses = h.check(&self.view(), CheckStage::Partial { fraction });
                    match self.inject(clauses) {
                        Err(_) => return SolveResult::Unsat,
                        Ok(0) => recheck = false,
                        Ok(n) => {
                            self.stats.partial_refinements += n;
                            if !reached_full {
                                self.stats.refinements_before_full += n;
                            }
                            recheck = true;
                            continue;
                        }
                    }
                }
            } else if full {
                self.stats.full_assignments += 1;
                return SolveResult::Sat(self.model());
            }

            ticks = ticks.wrapping_add(1);
            if ticks % 32 == 0 && budget.expired(self.stats.conflicts) {
                return SolveResult::Budget(self.stats.clone());
            }
            if self.decide().is_none() {
                // only reachable with a hook after `full` was handled above
                unreachable!("decide on a total assignment");
            }
        }
    }

    /// Full-scan check: propagation fixpoint, non-decreasing trail levels,
    /// and reason clauses unit under the trail prefix. Panics on violation.
    pub fn assert_invariants(&self) {
        for c in self.clauses.iter().filter(|c| !c.deleted) {
            let mut open = 0;
            let mut sat = false;
            for &l in &c.lits {
                match self.lit_value(l) {
                    Some(true) => sat = true,
                    None => open += 1,
                    Some(false) => {}
                }
            }
            assert!(
                sat || open >= 2,
                "clause {:?} is unit or falsified at fixpoint",
                c.lits
            );
        }
        let mut pos = vec![usize::MAX; self.num_vars()];
        for (i, l) in self.trail.iter().enumerate() {
            pos[l.var().index()] = i;
        }
        for w in self.trail.windows(2) {
            assert!(self.level[w[0].var().index()] <= self.level[w[1].var().index()]);
        }
        for (i, &l) in self.trail.iter().enumerate() {
            if let Some(r) = self.reason[l.var().index()] {
                for &q in &self.clauses[r.0 as usize].lits {
                    if q == l {
                        continue;
                    }
                    assert_eq!(self.lit_value(q), Some(false));
                    assert!(
                        pos[q.var().index()] < i,
                        "reason literal assigned after implied one"
                    );
                }
            }
        }
    }
}

#[inline]
fn lit_val(assigns: &[Option<bool>], lit: Lit) -> Option<bool> {
    assigns[lit.var().index()].map(|b| b == lit.is_positive())
}

/// Luby restart sequence `1 1 2 1 1 2 4 ...` scaled as `y^k`.
fn luby(y: f64, mut x: u64) -> f64 {
    let (mut size, mut seq) = (1u64, 0i32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(x: i64) -> Lit {
        Lit::from_dimacs(x).unwrap()
    }

    fn clause(xs: &[i64]) -> Vec<Lit> {
        xs.iter().map(|&x| lit(x)).collect()
    }

    #[test]
    fn luby_sequence() {
        let seq: Vec<f64> = (0..15).map(|i| luby(2.0, i)).collect();
        assert_eq!(
            seq,
            vec![1., 1., 2., 1., 1., 2., 4., 1., 1., 2., 1., 1., 2., 4., 8.]
        );
    }

    #[test]
    fn add_binary_without_propagation() {
        let mut s = Solver::new(2);
        s.add_clause(&clause(&[1, -2]), ClauseKind::Problem)
            .unwrap();
        assert!(s.trail().is_empty());
        assert_eq!(s.propagate(), None);
        assert!(s.trail().is_empty());
    }

    #[test]
    fn contradictory_units() {
        let mut s = Solver::new(1);
        s.add_clause(&clause(&[1]), ClauseKind::Problem).unwrap();
        assert_eq!(
            s.add_clause(&clause(&[-1]), ClauseKind::Problem),
            Err(TopLevelConflict)
        );
        assert!(s.solve(None, &Budget::unlimited()).is_unsat());
    }

    #[test]
    fn clause_unit_under_assignment_enqueues() {
        let mut s = Solver::new(2);
        s.push_decision(lit(1));
        s.add_clause(&clause(&[-1, 2]), ClauseKind::Problem)
            .unwrap();
        assert_eq!(s.value(Var(1)), Some(true));
        let r = s.reason_of(Var(1)).expect("implied literal has a reason");
        assert_eq!(s.clause_lits(r)[0], lit(2));
    }

    #[test]
    fn propagation_chain_and_conflict() {
        let mut s = Solver::new(2);
        s.add_clause(&clause(&[1]), ClauseKind::Problem).unwrap();
        s.add_clause(&clause(&[-1, 2]), ClauseKind::Problem)
            .unwrap();
        assert_eq!(s.propagate(), None);
        assert_eq!(s.value(Var(0)), Some(true));
        assert_eq!(s.value(Var(1)), Some(true));

        let mut s = Solver::new(3);
        s.add_clause(&clause(&[-1, 2]), ClauseKind::Problem)
            .unwrap();
        s.add_clause(&clause(&[-1, -2]), ClauseKind::Problem)
            .unwrap();
        s.push_decision(lit(1));
        assert!(s.propagate().is_some());
    }

    #[test]
    fn decide_when_everything_assigned() {
        let mut s = Solver::new(1);
        s.add_clause(&clause(&[1]), ClauseKind::Problem).unwrap();
        s.propagate();
        assert_eq!(s.decide(), None);
    }

    #[test]
    fn fresh_solver_decides_lowest_index_false() {
        let mut s = Solver::new(5);
        assert_eq!(s.decide(), Some(Var(0).neg()));
        assert_eq!(s.decide(), Some(Var(1).neg()));
    }

    #[test]
    fn single_decision_conflict_learns_unit() {
        // x1 -> x2, x1 -> x3, x2 & x3 -> false
        let mut s = Solver::new(3);
        for c in [[-1, 2, 0], [-1, 3, 0], [-2, -3, 0]] {
            let c: Vec<i64> = c.into_iter().filter(|&x| x != 0).collect();
            s.add_clause(&clause(&c), ClauseKind::Problem).unwrap();
        }
        s.push_decision(lit(1));
        let confl = s.propagate().unwrap();
        let (learnt, bt) = s.analyze_conflict(confl);
        assert_eq!(learnt, clause(&[-1]));
        assert_eq!(bt, 0);
    }

    #[test]
    fn empty_db_is_sat() {
        let mut s = Solver::new(3);
        match s.solve(None, &Budget::unlimited()) {
            SolveResult::Sat(m) => assert_eq!(m, vec![false; 3]),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn falsified_clause_injected_mid_search_triggers_backjump() {
        let mut s = Solver::new(4);
        s.push_decision(lit(1));
        s.push_decision(lit(2));
        s.push_decision(lit(3));
        // falsified with two literals at level 2 would be analyzed; here the
        // clause has one literal per level so it asserts -2 at level 1
        s.add_clause(&clause(&[-1, -2]), ClauseKind::Theory)
            .unwrap();
        assert_eq!(s.decision_level(), 1);
        assert_eq!(s.value(Var(1)), Some(false));
        s.assert_invariants_after_propagation();
    }

    impl Solver {
        fn assert_invariants_after_propagation(&mut self) {
            assert!(self.propagate().is_none());
            self.assert_invariants();
        }
    }

    #[test]
    fn budget_on_conflict_limit() {
        // pigeonhole 5 into 4 needs many conflicts
        let holes = 4;
        let pigeons = 5;
        let var = |p: usize, h: usize| (p * holes + h + 1) as i64;
        let mut s = Solver::new(pigeons * holes);
        for p in 0..pigeons {
            let c: Vec<i64> = (0..holes).map(|h| var(p, h)).collect();
            s.add_clause(&clause(&c), ClauseKind::Problem).unwrap();
        }
        for h in 0..holes {
            for p in 0..pigeons {
                for q in p + 1..pigeons {
                    s.add_clause(&clause(&[-var(p, h), -var(q, h)]), ClauseKind::Problem)
                        .unwrap();
                }
            }
        }
        let budget = Budget {
            deadline: None,
            max_conflicts: Some(3),
        };
        assert!(matches!(s.solve(None, &budget), SolveResult::Budget(_)));
        assert!(s.solve(None, &Budget::unlimited()).is_unsat());
    }
}
