//! MAPF instances, solutions and the movement-rule checker.
//!
//! Agents are indexed `0..k` everywhere in the API; only `Display`
//! implementations print them 1-based (`a1`, `a2`, ...).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub type VertexId = u32;
pub type AgentId = usize;

/// Undirected simple graph with dense vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    adjacency: Vec<Vec<VertexId>>,
    edge_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    VertexOutOfRange(VertexId, VertexId, usize),
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges are merged.
    pub fn new(vertex_count: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(GraphError::VertexOutOfRange(u, v, vertex_count));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Ok(Graph {
            vertex_count,
            adjacency,
            edge_count: edge_count / 2,
        })
    }

    /// Path graph `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n as VertexId).map(|v| (v - 1, v)).collect();
        Graph::new(n, &edges).expect("path graph is simple")
    }

    /// 4-connected `width x height` grid, vertex id `y * width + x`.
    pub fn grid(width: usize, height: usize) -> Self {
        let mut edges = Vec::new();
        for y in 0..height {
            for x in 0..width {
                let v = (y * width + x) as VertexId;
                if x + 1 < width {
                    edges.push((v, v + 1));
                }
                if y + 1 < height {
                    edges.push((v, v + width as VertexId));
                }
            }
        }
        Graph::new(width * height, &edges).expect("grid graph is simple")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v as usize]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        (u as usize) < self.vertex_count && self.adjacency[u as usize].binary_search(&v).is_ok()
    }

    /// `true` when `v` is `u` itself or one of its neighbours.
    pub fn is_step(&self, u: VertexId, v: VertexId) -> bool {
        u == v || self.has_edge(u, v)
    }

    /// Edges as `(u, v)` pairs with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                if (u as VertexId) < v {
                    out.push((u as VertexId, v));
                }
            }
        }
        out
    }
}

/// Agent positions at one timestep (`α_t`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration(pub Vec<VertexId>);

impl Configuration {
    pub fn positions(&self) -> &[VertexId] {
        &self.0
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.iter().all(|v| seen.insert(*v))
    }
}

/// `Σ = (G, A, α₀, α₊)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapfInstance {
    pub graph: Graph,
    pub start: Configuration,
    pub goal: Configuration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    AgentCountMismatch {
        starts: usize,
        goals: usize,
    },
    DuplicateStart {
        vertex: VertexId,
        agents: (AgentId, AgentId),
    },
    DuplicateGoal {
        vertex: VertexId,
        agents: (AgentId, AgentId),
    },
    VertexOutOfRange {
        agent: AgentId,
        vertex: VertexId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AgentCountMismatch { starts, goals } => {
                write!(f, "{starts} start positions but {goals} goal positions")
            }
            Violation::DuplicateStart { vertex, agents } => write!(
                f,
                "duplicate start vertex {vertex} (a{} and a{})",
                agents.0 + 1,
                agents.1 + 1
            ),
            Violation::DuplicateGoal { vertex, agents } => write!(
                f,
                "duplicate goal vertex {vertex} (a{} and a{})",
                agents.0 + 1,
                agents.1 + 1
            ),
            Violation::VertexOutOfRange { agent, vertex } => {
                write!(f, "vertex out of range: {vertex} for a{}", agent + 1)
            }
        }
    }
}

impl MapfInstance {
    pub fn new(graph: Graph, start: Vec<VertexId>, goal: Vec<VertexId>) -> Self {
        MapfInstance {
            graph,
            start: Configuration(start),
            goal: Configuration(goal),
        }
    }

    pub fn agent_count(&self) -> usize {
        self.start.0.len()
    }

    pub fn start_of(&self, agent: AgentId) -> VertexId {
        self.start.0[agent]
    }

    pub fn goal_of(&self, agent: AgentId) -> VertexId {
        self.goal.0[agent]
    }

    /// Returns every violated instance invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        validate_instance(self)
    }
}

pub fn validate_instance(inst: &MapfInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let (starts, goals) = (inst.start.0.len(), inst.goal.0.len());
    if starts != goals {
        out.push(Violation::AgentCountMismatch { starts, goals });
    }
    let n = inst.graph.vertex_count();
    for (config, is_start) in [(&inst.start, true), (&inst.goal, false)] {
        let mut owner: std::collections::HashMap<VertexId, AgentId> = Default::default();
        for (agent, &v) in config.0.iter().enumerate() {
            if v as usize >= n {
                out.push(Violation::VertexOutOfRange { agent, vertex: v });
                continue;
            }
            if let Some(&prev) = owner.get(&v) {
                out.push(if is_start {
                    Violation::DuplicateStart {
                        vertex: v,
                        agents: (prev, agent),
                    }
                } else {
                    Violation::DuplicateGoal {
                        vertex: v,
                        agents: (prev, agent),
                    }
                });
            } else {
                owner.insert(v, agent);
            }
        }
    }
    out
}

/// Full plan: one vertex per agent per timestep `0..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    paths: Vec<Vec<VertexId>>,
}

impl Solution {
    /// Pads every path by repeating its last vertex up to a common horizon.
    ///
    /// Panics on an empty path.
    pub fn from_paths(mut paths: Vec<Vec<VertexId>>) -> Self {
        let len = paths.iter().map(Vec::len).max().unwrap_or(1);
        for p in &mut paths {
            let last = *p
                .last()
                .expect("path must contain at least the start vertex");
            p.resize(len, last);
        }
        Solution { paths }
    }

    pub fn paths(&self) -> &[Vec<VertexId>] {
        &self.paths
    }

    pub fn path(&self, agent: AgentId) -> &[VertexId] {
        &self.paths[agent]
    }

    pub fn agent_count(&self) -> usize {
        self.paths.len()
    }

    /// Last timestep `T`.
    pub fn horizon(&self) -> usize {
        self.paths.first().map_or(0, |p| p.len() - 1)
    }

    pub fn to_partial(&self) -> PartialSolution {
        PartialSolution {
            positions: self
                .paths
                .iter()
                .map(|p| p.iter().map(|&v| Some(v)).collect())
                .collect(),
        }
    }
}

/// Per-agent path fragments; `None` marks a timestep with no known position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialSolution {
    pub positions: Vec<Vec<Option<VertexId>>>,
}

impl PartialSolution {
    pub fn empty(agents: usize, horizon: usize) -> Self {
        PartialSolution {
            positions: vec![vec![None; horizon + 1]; agents],
        }
    }

    pub fn known_positions(&self) -> usize {
        self.positions
            .iter()
            .flatten()
            .filter(|p| p.is_some())
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConflictKind {
    Vertex,
    Swap,
}

/// A MAPF rule violation between two agents, `first < second`.
///
/// For a vertex conflict `from == to == v`. For a swap conflict `first` moves
/// `from -> to` between `t` and `t + 1` while `second` moves `to -> from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conflict {
    pub kind: ConflictKind,
    pub first: AgentId,
    pub second: AgentId,
    pub from: VertexId,
    pub to: VertexId,
    pub t: usize,
}

impl Conflict {
    pub fn vertex(a: AgentId, b: AgentId, v: VertexId, t: usize) -> Self {
        debug_assert_ne!(a, b);
        let (first, second) = if a < b { (a, b) } else { (b, a) };
        Conflict {
            kind: ConflictKind::Vertex,
            first,
            second,
            from: v,
            to: v,
            t,
        }
    }

    /// Agent `a` moves `u -> v` while agent `b` moves `v -> u`, starting at `t`.
    pub fn swap(a: AgentId, b: AgentId, u: VertexId, v: VertexId, t: usize) -> Self {
        debug_assert_ne!(a, b);
        if a < b {
            Conflict {
                kind: ConflictKind::Swap,
                first: a,
                second: b,
                from: u,
                to: v,
                t,
            }
        } else {
            Conflict {
                kind: ConflictKind::Swap,
                first: b,
                second: a,
                from: v,
                to: u,
                t,
            }
        }
    }
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConflictKind::Vertex => write!(
                f,
                "vertex(a{}, a{}, v={}, t={})",
                self.first + 1,
                self.second + 1,
                self.from,
                self.t
            ),
            ConflictKind::Swap => write!(
                f,
                "swap(a{}, a{}, ({}, {}), t={})",
                self.first + 1,
                self.second + 1,
                self.from,
                self.to,
                self.t
            ),
        }
    }
}

/// A path that breaks single-agent movement rules, as opposed to a collision.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("expected {expected} paths, got {got}")]
    AgentCount { expected: usize, got: usize },
    #[error("a{}: path does not start at its start vertex", agent + 1)]
    WrongStart { agent: AgentId },
    #[error("a{}: jump {from} -> {to} at t={t} is not an edge", agent + 1)]
    NotAdjacent {
        agent: AgentId,
        from: VertexId,
        to: VertexId,
        t: usize,
    },
    #[error("a{}: vertex {vertex} at t={t} is outside the graph", agent + 1)]
    OutOfRange {
        agent: AgentId,
        vertex: VertexId,
        t: usize,
    },
}

/// Runs the MAPF consistency check on a complete solution.
pub fn check_consistency(
    solution: &Solution,
    inst: &MapfInstance,
) -> Result<Vec<Conflict>, PathError> {
    check_partial_consistency(&solution.to_partial(), inst)
}

/// Reports every vertex and swap conflict between simultaneously known
/// positions. Fragments separated by gaps are only checked for steps whose
/// two endpoints are both known.
pub fn check_partial_consistency(
    partial: &PartialSolution,
    inst: &MapfInstance,
) -> Result<Vec<Conflict>, PathError> {
    let k = inst.agent_count();
    if partial.positions.len() != k {
        return Err(PathError::AgentCount {
            expected: k,
            got: partial.positions.len(),
        });
    }
    let graph = &inst.graph;
    let horizon = partial.positions.iter().map(Vec::len).max().unwrap_or(0);
    for (agent, path) in partial.positions.iter().enumerate() {
        if let Some(Some(first)) = path.first() {
            if *first != inst.start_of(agent) {
                return Err(PathError::WrongStart { agent });
            }
        }
        for (t, pos) in path.iter().enumerate() {
            if let Some(v) = *pos {
                if v as usize >= graph.vertex_count() {
                    return Err(PathError::OutOfRange {
                        agent,
                        vertex: v,
                        t,
                    });
                }
            }
        }
        for (t, w) in path.windows(2).enumerate() {
            if let (Some(u), Some(v)) = (w[0], w[1]) {
                if !graph.is_step(u, v) {
                    return Err(PathError::NotAdjacent {
                        agent,
                        from: u,
                        to: v,
                        t,
                    });
                }
            }
        }
    }

    let at = |agent: usize, t: usize| partial.positions[agent].get(t).copied().flatten();
    let mut conflicts = Vec::new();
    // occupants[v] lists agents at v for the current timestep
    let mut occupants: Vec<Vec<AgentId>> = vec![Vec::new(); graph.vertex_count()];
    let mut touched = Vec::new();
    for t in 0..horizon {
        for agent in 0..k {
            if let Some(v) = at(agent, t) {
                if occupants[v as usize].is_empty() {
                    touched.push(v);
                }
                occupants[v as usize].push(agent);
            }
        }
        for &v in &touched {
            let here = &occupants[v as usize];
            for i in 0..here.len() {
                for j in i + 1..here.len() {
                    conflicts.push(Conflict::vertex(here[i], here[j], v, t));
                }
            }
        }
        // swap: a moves u -> v, the agent at v at t moves v -> u
        for a in 0..k {
            let (Some(u), Some(v)) = (at(a, t), at(a, t + 1)) else {
                continue;
            };
            if u == v {
                continue;
            }
            for &b in &occupants[v as usize] {
                if b > a && at(b, t + 1) == Some(u) {
                    conflicts.push(Conflict::swap(a, b, u, v, t));
                }
            }
        }
        for v in touched.drain(..) {
            occupants[v as usize].clear();
        }
    }
    conflicts.sort();
    Ok(conflicts)
}

/// Boundary conditions, edge-or-wait steps and no collisions.
pub fn is_valid_solution(solution: &Solution, inst: &MapfInstance) -> bool {
    if solution.agent_count() != inst.agent_count() {
        return false;
    }
    for (agent, path) in solution.paths().iter().enumerate() {
        if path.first() != Some(&inst.start_of(agent)) || path.last() != Some(&inst.goal_of(agent))
        {
            return false;
        }
    }
    matches!(check_consistency(solution, inst), Ok(c) if c.is_empty())
}

/// Number of actions before the agent reaches its final vertex for good.
pub fn path_cost(path: &[VertexId]) -> usize {
    let Some(&goal) = path.last() else { return 0 };
    path.iter().rposition(|&v| v != goal).map_or(0, |t| t + 1)
}

pub fn sum_of_costs(solution: &Solution) -> usize {
    solution.paths().iter().map(|p| path_cost(p)).sum()
}

pub fn makespan(solution: &Solution) -> usize {
    solution
        .paths()
        .iter()
        .map(|p| path_cost(p))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_agents(graph: Graph, start: [VertexId; 2], goal: [VertexId; 2]) -> MapfInstance {
        MapfInstance::new(graph, start.to_vec(), goal.to_vec())
    }

    #[test]
    fn validate_examples() {
        let ok = two_agents(Graph::path(3), [0, 1], [1, 0]);
        assert!(validate_instance(&ok).is_empty());

        let dup = two_agents(Graph::path(3), [0, 0], [1, 2]);
        let v = validate_instance(&dup);
        assert_eq!(
            v,
            vec![Violation::DuplicateStart {
                vertex: 0,
                agents: (0, 1)
            }]
        );
        assert!(v[0].to_string().contains("duplicate start vertex"));

        let far = MapfInstance::new(Graph::path(4), vec![0], vec![99]);
        let v = validate_instance(&far);
        assert_eq!(
            v,
            vec![Violation::VertexOutOfRange {
                agent: 0,
                vertex: 99
            }]
        );
        assert!(v[0].to_string().contains("vertex out of range"));
    }

    #[test]
    fn graph_rejects_self_loops() {
        assert_eq!(Graph::new(2, &[(1, 1)]), Err(GraphError::SelfLoop(1)));
        let g = Graph::new(3, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn disjoint_paths_have_no_conflicts() {
        let inst = two_agents(Graph::grid(3, 2), [0, 3], [2, 5]);
        let sol = Solution::from_paths(vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(check_consistency(&sol, &inst).unwrap(), vec![]);
        assert!(is_valid_solution(&sol, &inst));
    }

    #[test]
    fn swap_across_edge() {
        let inst = two_agents(Graph::path(2), [0, 1], [1, 0]);
        let sol = Solution::from_paths(vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(
            check_consistency(&sol, &inst).unwrap(),
            vec![Conflict::swap(0, 1, 0, 1, 0)]
        );
        assert!(!is_valid_solution(&sol, &inst));
    }

    #[test]
    fn head_on_meeting_in_middle() {
        let inst = two_agents(Graph::path(3), [0, 2], [2, 0]);
        let sol = Solution::from_paths(vec![vec![0, 1, 2], vec![2, 1, 0]]);
        assert_eq!(
            check_consistency(&sol, &inst).unwrap(),
            vec![Conflict::vertex(0, 1, 1, 1)]
        );
    }

    #[test]
    fn following_into_vacated_vertex_is_legal() {
        let inst = two_agents(Graph::path(3), [1, 0], [2, 1]);
        let sol = Solution::from_paths(vec![vec![1, 2], vec![0, 1]]);
        assert!(is_valid_solution(&sol, &inst));
    }

    #[test]
    fn structural_errors_are_not_conflicts() {
        let inst = MapfInstance::new(Graph::path(3), vec![0], vec![2]);
        let jump = Solution::from_paths(vec![vec![0, 2]]);
        assert_eq!(
            check_consistency(&jump, &inst),
            Err(PathError::NotAdjacent {
                agent: 0,
                from: 0,
                to: 2,
                t: 0
            })
        );
        let wrong = Solution::from_paths(vec![vec![1, 2]]);
        assert_eq!(
            check_consistency(&wrong, &inst),
            Err(PathError::WrongStart { agent: 0 })
        );
    }

    #[test]
    fn partial_gaps_are_skipped() {
        let inst = two_agents(Graph::path(4), [0, 3], [3, 0]);
        let partial = PartialSolution {
            positions: vec![
                vec![Some(0), None, Some(2), None],
                vec![Some(3), None, None, Some(0)],
            ],
        };
        assert_eq!(check_partial_consistency(&partial, &inst).unwrap(), vec![]);
        let clash = PartialSolution {
            positions: vec![vec![Some(0), None, Some(2)], vec![Some(3), None, Some(2)]],
        };
        assert_eq!(
            check_partial_consistency(&clash, &inst).unwrap(),
            vec![Conflict::vertex(0, 1, 2, 2)]
        );
    }

    #[test]
    fn costs() {
        assert_eq!(sum_of_costs(&Solution::from_paths(vec![vec![0, 1, 2]])), 2);
        assert_eq!(sum_of_costs(&Solution::from_paths(vec![vec![5, 5, 5]])), 0);
        assert_eq!(sum_of_costs(&Solution::from_paths(vec![vec![0, 0, 1]])), 2);
        // wait at goal, leave, come back: every action counts
        assert_eq!(path_cost(&[1, 1, 0, 1]), 3);

        assert_eq!(
            makespan(&Solution::from_paths(vec![vec![0, 1, 2], vec![3, 4]])),
            2
        );
        assert_eq!(makespan(&Solution::from_paths(vec![vec![0], vec![1]])), 0);
        let s = Solution::from_paths(vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7, 8, 9]]);
        assert_eq!(makespan(&s), 4);
        assert_eq!(sum_of_costs(&s), 7);
    }

    #[test]
    fn waiting_at_goal_from_the_start_is_valid() {
        let inst = MapfInstance::new(Graph::path(6), vec![5], vec![5]);
        let sol = Solution::from_paths(vec![vec![5, 5, 5]]);
        assert!(is_valid_solution(&sol, &inst));
        assert_eq!(sum_of_costs(&sol), 0);
    }
}
