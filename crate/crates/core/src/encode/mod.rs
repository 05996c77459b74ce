//! Boolean models of MAPF over MDD variables.
//!
//! Constraint families:
//!
//! | family | content |
//! |--------|---------|
//! | C1 | agent at its start at `t = 0` and at its goal at `t = T` |
//! | C2 | at most one vertex per agent and timestep |
//! | C3 | an occupied node takes one of its outgoing MDD arcs |
//! | C3' | an arc implies both of its endpoints |
//! | C4 | at most one outgoing arc per agent, vertex and timestep |
//! | C5 | no two agents on one vertex at one timestep |
//! | C6 | no two agents traversing one edge in opposite directions |
//! | C8 | total time spent off-goal beyond the shortest distances is at most Δ |
//!
//! Entering a vertex that is being vacated in the same step is legal, so no
//! following constraint exists. The complete model contains every family;
//! the incomplete model leaves out C5 and C6 and instead carries one
//! refinement clause per recorded conflict.

pub mod cardinality;
mod varmap;

pub use varmap::{VarMap, VarMeaning};

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::instance::{Conflict, ConflictKind, MapfInstance, PartialSolution, Solution, VertexId};
use crate::mdd::Mdd;
use crate::sat::{write_dimacs, AssignmentView, ClauseKind, Cnf, Lit, Solver, Var};
use cardinality::{at_most_k, at_most_one, CnfBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Complete,
    Incomplete,
}

/// Clause database plus the meaning of its variables.
#[derive(Debug, Clone)]
pub struct BooleanModel {
    pub kind: ModelKind,
    pub xi: u64,
    pub slack: usize,
    varmap: VarMap,
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    refinements: Vec<(Conflict, Vec<Lit>)>,
    conflicts: BTreeSet<Conflict>,
}

impl BooleanModel {
    pub fn varmap(&self) -> &VarMap {
        &self.varmap
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Structural clauses plus refinement clauses.
    pub fn num_clauses(&self) -> usize {
        self.clauses.len() + self.refinements.len()
    }

    pub fn structural_clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn refinement_clauses(&self) -> impl Iterator<Item = &[Lit]> {
        self.refinements.iter().map(|(_, c)| c.as_slice())
    }

    /// Conflicts incorporated into the model.
    pub fn conflicts(&self) -> &BTreeSet<Conflict> {
        &self.conflicts
    }

    pub fn to_cnf(&self) -> Cnf {
        let mut clauses = self.clauses.clone();
        clauses.extend(self.refinements.iter().map(|(_, c)| c.clone()));
        Cnf {
            num_vars: self.num_vars,
            clauses,
        }
    }

    /// Fresh solver loaded with the model; refinement clauses are theory
    /// clauses.
    pub fn to_solver(&self) -> Solver {
        let mut s = Solver::new(self.num_vars);
        for c in &self.clauses {
            if s.add_clause(c, ClauseKind::Problem).is_err() {
                return s;
            }
        }
        for (_, c) in &self.refinements {
            if s.add_clause(c, ClauseKind::Theory).is_err() {
                return s;
            }
        }
        s
    }

    /// DIMACS text with a comment line per structural variable.
    pub fn to_dimacs(&self) -> String {
        let mut comments = vec![format!(
            "{} model, xi={}, slack={}, horizon={}",
            match self.kind {
                ModelKind::Complete => "complete",
                ModelKind::Incomplete => "incomplete",
            },
            self.xi,
            self.slack,
            self.varmap.horizon()
        )];
        for i in 0..self.varmap.structural_vars() {
            let var = Var(i as u32);
            let text = match self.varmap.meaning(var) {
                VarMeaning::At { agent, vertex, t } => format!("at a{} v{vertex} t{t}", agent + 1),
                VarMeaning::Move { agent, from, to, t } => {
                    format!("move a{} {from}->{to} t{t}", agent + 1)
                }
                VarMeaning::Late { agent, t } => format!("late a{} t{t}", agent + 1),
                VarMeaning::Aux => continue,
            };
            comments.push(format!("var {} = {text}", i + 1));
        }
        write_dimacs(&self.to_cnf(), &comments)
    }

    /// Records `conflict` and returns its clause when it was not already
    /// incorporated. A conflict over nodes or arcs absent from the MDDs is
    /// recorded without a clause, since it cannot occur in this model.
    pub fn incorporate(&mut self, conflict: Conflict) -> Option<Vec<Lit>> {
        if !self.conflicts.insert(conflict) {
            return None;
        }
        let clause = refinement_clause(&self.varmap, &conflict)?;
        self.refinements.push((conflict, clause.clone()));
        Some(clause)
    }

    /// Adds one refinement clause per new collision. Returns the clauses
    /// added, in order.
    pub fn refine(&mut self, collisions: &[Conflict]) -> Vec<Vec<Lit>> {
        collisions
            .iter()
            .filter_map(|c| self.incorporate(*c))
            .collect()
    }
}

/// Clause forbidding `conflict`, or `None` when one of its variables does not
/// exist.
pub fn refinement_clause(varmap: &VarMap, conflict: &Conflict) -> Option<Vec<Lit>> {
    let (a, b) = match conflict.kind {
        ConflictKind::Vertex => (
            varmap.at(conflict.first, conflict.from, conflict.t)?,
            varmap.at(conflict.second, conflict.from, conflict.t)?,
        ),
        ConflictKind::Swap => (
            varmap.arc(conflict.first, conflict.t, conflict.from, conflict.to)?,
            varmap.arc(conflict.second, conflict.t, conflict.to, conflict.from)?,
        ),
    };
    Some(vec![a.neg(), b.neg()])
}

fn check_inputs(inst: &MapfInstance, mdds: &[Mdd], xi: u64) -> usize {
    assert_eq!(mdds.len(), inst.agent_count(), "one MDD per agent");
    let slack = mdds.first().map_or(0, Mdd::slack);
    assert!(
        mdds.iter().all(|m| m.slack() == slack),
        "MDDs must share one slack"
    );
    let lower: u64 = mdds.iter().map(|m| m.shortest as u64).sum();
    assert_eq!(lower + slack as u64, xi, "MDD slack must equal xi - xi0");
    slack
}

/// C1-C4 and C8.
fn single_agent_structure(mdds: &[Mdd], varmap: &VarMap, b: &mut CnfBuilder) {
    let horizon = varmap.horizon();
    let mut late_inputs = Vec::new();
    for (agent, mdd) in mdds.iter().enumerate() {
        let goal = mdd.goal();
        // C1
        b.add(vec![varmap
            .at(agent, mdd.layers[0][0], 0)
            .expect("start node")
            .pos()]);
        b.add(vec![varmap
            .at(agent, goal, horizon)
            .expect("goal node")
            .pos()]);
        for t in 0..=horizon {
            // C2
            let layer: Vec<Lit> = varmap.layer_vars(agent, t).map(|(_, v)| v.pos()).collect();
            at_most_one(b, &layer);
            if t == horizon {
                break;
            }
            let arcs: Vec<(VertexId, VertexId, Var)> = varmap.arc_vars(agent, t).collect();
            let mut i = 0;
            while i < arcs.len() {
                let u = arcs[i].0;
                let mut j = i;
                while j < arcs.len() && arcs[j].0 == u {
                    j += 1;
                }
                let x = varmap.at(agent, u, t).expect("arc source node");
                // C3
                let mut out = vec![x.neg()];
                out.extend(arcs[i..j].iter().map(|a| a.2.pos()));
                b.add(out);
                // C3'
                for &(_, v, e) in &arcs[i..j] {
                    b.add(vec![e.neg(), x.pos()]);
                    b.add(vec![
                        e.neg(),
                        varmap.at(agent, v, t + 1).expect("arc target").pos(),
                    ]);
                }
                // C4
                let outgoing: Vec<Lit> = arcs[i..j].iter().map(|a| a.2.pos()).collect();
                at_most_one(b, &outgoing);
                i = j;
            }
        }
        // C8: late_t holds whenever a non-goal-wait arc is taken at t, and
        // lateness is downward closed in t
        for t in varmap.late_range(agent) {
            let late = varmap.late(agent, t).expect("late var in range");
            for (u, v, e) in varmap.arc_vars(agent, t) {
                if !(u == goal && v == goal) {
                    b.add(vec![e.neg(), late.pos()]);
                }
            }
            if let Some(next) = varmap.late(agent, t + 1) {
                b.add(vec![next.neg(), late.pos()]);
            }
        }
        late_inputs.extend(varmap.late_vars(agent).map(Var::pos));
    }
    let slack = mdds.first().map_or(0, Mdd::slack);
    at_most_k(b, &late_inputs, slack);
}

/// C5 and C6 over every pair of agents.
fn collision_constraints(varmap: &VarMap, b: &mut CnfBuilder) {
    let k = varmap.agent_count();
    for t in 0..=varmap.horizon() {
        let mut at: HashMap<VertexId, Vec<Var>> = HashMap::new();
        for agent in 0..k {
            for (v, x) in varmap.layer_vars(agent, t) {
                at.entry(v).or_default().push(x);
            }
        }
        let mut vertices: Vec<_> = at.into_iter().filter(|(_, xs)| xs.len() > 1).collect();
        vertices.sort_unstable_by_key(|(v, _)| *v);
        for (_, xs) in vertices {
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    b.add(vec![xs[i].neg(), xs[j].neg()]);
                }
            }
        }
        if t == varmap.horizon() {
            continue;
        }
        let mut moves: HashMap<(VertexId, VertexId), Vec<(usize, Var)>> = HashMap::new();
        for agent in 0..k {
            for (u, v, e) in varmap.arc_vars(agent, t) {
                if u != v {
                    moves.entry((u, v)).or_default().push((agent, e));
                }
            }
        }
        let mut forward: Vec<_> = moves.iter().filter(|((u, v), _)| u < v).collect();
        forward.sort_unstable_by_key(|(edge, _)| **edge);
        for ((u, v), fs) in forward {
            let Some(bs) = moves.get(&(*v, *u)) else {
                continue;
            };
            for &(a, ea) in fs {
                for &(b2, eb) in bs {
                    if a != b2 {
                        b.add(vec![ea.neg(), eb.neg()]);
                    }
                }
            }
        }
    }
}

/// Complete model `F(ξ)`: satisfiable iff a solution of sum-of-costs at most
/// `xi` exists. `mdds` must be built with slack `xi - ξ₀` and padded to a
/// common horizon.
pub fn encode_complete(inst: &MapfInstance, mdds: &[Mdd], xi: u64) -> BooleanModel {
    let slack = check_inputs(inst, mdds, xi);
    let varmap = VarMap::new(mdds);
    let mut b = CnfBuilder::new(varmap.structural_vars());
    single_agent_structure(mdds, &varmap, &mut b);
    collision_constraints(&varmap, &mut b);
    BooleanModel {
        kind: ModelKind::Complete,
        xi,
        slack,
        varmap,
        num_vars: b.num_vars,
        clauses: b.clauses,
        refinements: Vec::new(),
        conflicts: BTreeSet::new(),
    }
}

/// Incomplete model `H(ξ)`: single-agent structure plus refinement clauses
/// for `conflicts`.
pub fn encode_incomplete<'a>(
    conflicts: impl IntoIterator<Item = &'a Conflict>,
    inst: &MapfInstance,
    mdds: &[Mdd],
    xi: u64,
) -> BooleanModel {
    let slack = check_inputs(inst, mdds, xi);
    let varmap = VarMap::new(mdds);
    let mut b = CnfBuilder::new(varmap.structural_vars());
    single_agent_structure(mdds, &varmap, &mut b);
    let mut model = BooleanModel {
        kind: ModelKind::Incomplete,
        xi,
        slack,
        varmap,
        num_vars: b.num_vars,
        clauses: b.clauses,
        refinements: Vec::new(),
        conflicts: BTreeSet::new(),
    };
    for c in conflicts {
        model.incorporate(*c);
    }
    model
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("a{}: {count} vertices true at t={t}", agent + 1)]
    MalformedAssignment {
        agent: usize,
        t: usize,
        count: usize,
    },
}

/// Anything that can answer "is this variable true?".
pub trait Valuation {
    fn value(&self, var: Var) -> Option<bool>;
}

impl Valuation for [bool] {
    fn value(&self, var: Var) -> Option<bool> {
        self.get(var.index()).copied()
    }
}

impl Valuation for Vec<bool> {
    fn value(&self, var: Var) -> Option<bool> {
        self.as_slice().value(var)
    }
}

impl Valuation for [Option<bool>] {
    fn value(&self, var: Var) -> Option<bool> {
        self.get(var.index()).copied().flatten()
    }
}

impl Valuation for AssignmentView<'_> {
    fn value(&self, var: Var) -> Option<bool> {
        AssignmentView::value(self, var)
    }
}

/// Positions from a total assignment satisfying C1-C4.
pub fn extract_solution<V: Valuation + ?Sized>(
    assignment: &V,
    varmap: &VarMap,
) -> Result<Solution, ExtractError> {
    let mut paths = Vec::with_capacity(varmap.agent_count());
    for agent in 0..varmap.agent_count() {
        let mut path = Vec::with_capacity(varmap.horizon() + 1);
        for t in 0..=varmap.horizon() {
            let mut hits = varmap
                .layer_vars(agent, t)
                .filter(|(_, x)| assignment.value(*x) == Some(true))
                .map(|(v, _)| v);
            let first = hits.next();
            let extra = hits.count();
            match first {
                Some(v) if extra == 0 => path.push(v),
                _ => {
                    return Err(ExtractError::MalformedAssignment {
                        agent,
                        t,
                        count: first.map_or(0, |_| 1 + extra),
                    })
                }
            }
        }
        paths.push(path);
    }
    Ok(Solution::from_paths(paths))
}

/// Positions whose vertex variable is assigned true; everything else is a
/// gap.
pub fn extract_partial_solution<V: Valuation + ?Sized>(
    assignment: &V,
    varmap: &VarMap,
) -> Result<PartialSolution, ExtractError> {
    let mut partial = PartialSolution::empty(varmap.agent_count(), varmap.horizon());
    for agent in 0..varmap.agent_count() {
        for t in 0..=varmap.horizon() {
            let mut count = 0;
            for (v, x) in varmap.layer_vars(agent, t) {
                if assignment.value(x) == Some(true) {
                    count += 1;
                    partial.positions[agent][t] = Some(v);
                }
            }
            if count > 1 {
                return Err(ExtractError::MalformedAssignment { agent, t, count });
            }
        }
    }
    Ok(partial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Graph;
    use crate::mdd::{all_distances, build_all};
    use crate::sat::{Budget, SolveResult};

    fn mdds_for(inst: &MapfInstance, slack: usize) -> (Vec<Mdd>, u64) {
        let tables = all_distances(inst).unwrap();
        let mdds = build_all(inst, &tables, slack);
        let xi = mdds.iter().map(|m| m.shortest as u64).sum::<u64>() + slack as u64;
        (mdds, xi)
    }

    fn solve(model: &BooleanModel) -> Option<Vec<bool>> {
        match model.to_solver().solve(None, &Budget::unlimited()) {
            SolveResult::Sat(m) => Some(m),
            _ => None,
        }
    }

    #[test]
    fn single_agent_zero_slack_path_has_unique_model() {
        let inst = MapfInstance::new(Graph::path(3), vec![0], vec![2]);
        let (mdds, xi) = mdds_for(&inst, 0);
        let model = encode_complete(&inst, &mdds, xi);
        assert!(model.num_vars() <= 12);
        // truth table over all variables
        let n = model.num_vars();
        let mut models = Vec::new();
        for mask in 0u32..1 << n {
            let a: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            if crate::sat::satisfies(&model.to_cnf().clauses, &a) {
                models.push(extract_solution(&a, model.varmap()).unwrap());
            }
        }
        assert!(!models.is_empty());
        assert!(models.iter().all(|s| s.paths() == [vec![0, 1, 2]]));
    }

    #[test]
    fn agents_at_goals_use_wait_arcs() {
        let inst = MapfInstance::new(Graph::path(4), vec![0, 3], vec![0, 3]);
        let (mdds, xi) = mdds_for(&inst, 0);
        assert_eq!(xi, 0);
        let model = encode_complete(&inst, &mdds, xi);
        let m = solve(&model).unwrap();
        let sol = extract_solution(&m, model.varmap()).unwrap();
        assert_eq!(sol.paths(), [vec![0], vec![3]]);
    }

    #[test]
    fn incomplete_equals_complete_for_one_agent() {
        let inst = MapfInstance::new(Graph::grid(3, 3), vec![0], vec![8]);
        let (mdds, xi) = mdds_for(&inst, 2);
        let full = encode_complete(&inst, &mdds, xi);
        let lazy = encode_incomplete([], &inst, &mdds, xi);
        assert_eq!(full.to_cnf(), lazy.to_cnf());
    }

    #[test]
    fn disjoint_corridors_need_no_refinement() {
        let inst = MapfInstance::new(Graph::grid(3, 3), vec![0, 6], vec![2, 8]);
        let (mdds, xi) = mdds_for(&inst, 0);
        let lazy = encode_incomplete([], &inst, &mdds, xi);
        let m = solve(&lazy).unwrap();
        let sol = extract_solution(&m, lazy.varmap()).unwrap();
        assert!(crate::is_valid_solution(&sol, &inst));
    }

    #[test]
    fn one_conflict_adds_one_clause() {
        let inst = MapfInstance::new(Graph::path(3), vec![0, 2], vec![2, 0]);
        let (mdds, xi) = mdds_for(&inst, 0);
        let base = encode_incomplete([], &inst, &mdds, xi);
        let c = Conflict::vertex(0, 1, 1, 1);
        let refined = encode_incomplete([&c], &inst, &mdds, xi);
        assert_eq!(refined.num_clauses(), base.num_clauses() + 1);
        assert!(refined.num_clauses() <= encode_complete(&inst, &mdds, xi).num_clauses());
    }

    #[test]
    fn refine_is_idempotent() {
        let inst = MapfInstance::new(Graph::path(3), vec![0, 2], vec![2, 0]);
        let (mdds, xi) = mdds_for(&inst, 0);
        let mut model = encode_incomplete([], &inst, &mdds, xi);
        let c = Conflict::vertex(0, 1, 1, 1);
        assert_eq!(model.refine(&[c]).len(), 1);
        assert!(model.refine(&[c]).is_empty());
        assert_eq!(model.conflicts().len(), 1);
        assert!(solve(&model).is_none());
    }

    #[test]
    fn swap_clause_shape() {
        let inst = MapfInstance::new(Graph::path(2), vec![0, 1], vec![1, 0]);
        let (mdds, xi) = mdds_for(&inst, 0);
        let mut model = encode_incomplete([], &inst, &mdds, xi);
        let c = Conflict::swap(0, 1, 0, 1, 0);
        let clauses = model.refine(&[c]);
        let vm = model.varmap();
        assert_eq!(
            clauses,
            vec![vec![
                vm.arc(0, 0, 0, 1).unwrap().neg(),
                vm.arc(1, 0, 1, 0).unwrap().neg()
            ]]
        );
        assert!(solve(&model).is_none());
    }

    #[test]
    fn malformed_assignment_is_reported() {
        let inst = MapfInstance::new(Graph::path(3), vec![0], vec![1]);
        let (mdds, xi) = mdds_for(&inst, 1);
        let model = encode_complete(&inst, &mdds, xi);
        let vm = model.varmap();
        let mut a = vec![false; model.num_vars()];
        a[vm.at(0, 0, 0).unwrap().index()] = true;
        a[vm.at(0, 0, 1).unwrap().index()] = true;
        a[vm.at(0, 1, 1).unwrap().index()] = true;
        a[vm.at(0, 1, 2).unwrap().index()] = true;
        assert_eq!(
            extract_solution(&a, vm),
            Err(ExtractError::MalformedAssignment {
                agent: 0,
                t: 1,
                count: 2
            })
        );
    }

    #[test]
    fn partial_extraction_of_empty_assignment() {
        let inst = MapfInstance::new(Graph::path(3), vec![0, 2], vec![2, 0]);
        let (mdds, xi) = mdds_for(&inst, 0);
        let model = encode_incomplete([], &inst, &mdds, xi);
        let none: Vec<Option<bool>> = vec![None; model.num_vars()];
        let p = extract_partial_solution(none.as_slice(), model.varmap()).unwrap();
        assert_eq!(p.known_positions(), 0);
        assert!(crate::check_partial_consistency(&p, &inst)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn dimacs_export_names_variables() {
        let inst = MapfInstance::new(Graph::path(2), vec![0], vec![1]);
        let (mdds, xi) = mdds_for(&inst, 0);
        let text = encode_complete(&inst, &mdds, xi).to_dimacs();
        assert!(text.contains("c var 1 = at a1 v0 t0"));
        assert!(text.contains("move a1 0->1 t0"));
        assert!(crate::sat::parse_dimacs(&text).is_ok());
    }
}
