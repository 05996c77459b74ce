//! Time-expanded graphs pruned to multi-value decision diagrams.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::{AgentId, Graph, MapfInstance, VertexId};

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MddError {
    #[error("goal of a{} is unreachable from its start", agent + 1)]
    GoalUnreachable { agent: AgentId },
}

/// Unweighted BFS from `source`; unreachable vertices get [`UNREACHABLE`].
pub fn bfs(graph: &Graph, source: VertexId) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; graph.vertex_count()];
    let mut queue = VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let d = dist[u as usize] + 1;
        for &v in graph.neighbors(u) {
            if dist[v as usize] == UNREACHABLE {
                dist[v as usize] = d;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Distances from an agent's start and to its goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    pub from_start: Vec<u32>,
    pub to_goal: Vec<u32>,
}

impl DistanceTable {
    /// Shortest start-goal distance.
    pub fn shortest(&self, start: VertexId) -> u32 {
        self.to_goal[start as usize]
    }
}

pub fn bfs_distances(inst: &MapfInstance, agent: AgentId) -> Result<DistanceTable, MddError> {
    let from_start = bfs(&inst.graph, inst.start_of(agent));
    let to_goal = bfs(&inst.graph, inst.goal_of(agent));
    if to_goal[inst.start_of(agent) as usize] == UNREACHABLE {
        return Err(MddError::GoalUnreachable { agent });
    }
    Ok(DistanceTable {
        from_start,
        to_goal,
    })
}

pub fn all_distances(inst: &MapfInstance) -> Result<Vec<DistanceTable>, MddError> {
    (0..inst.agent_count())
        .map(|a| bfs_distances(inst, a))
        .collect()
}

/// `ξ₀`: the sum of individual shortest-path lengths.
pub fn sum_of_costs_lower_bound(inst: &MapfInstance) -> Result<u64, MddError> {
    let tables = all_distances(inst)?;
    Ok(tables
        .iter()
        .enumerate()
        .map(|(a, d)| d.shortest(inst.start_of(a)) as u64)
        .sum())
}

/// Layered DAG of the `(vertex, t)` nodes an agent can occupy on some plan of
/// individual cost at most `depth`. Layers past `depth` (if padded) hold only
/// the goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mdd {
    pub agent: AgentId,
    /// Shortest start-goal distance.
    pub shortest: usize,
    /// Individual budget μ = shortest + slack.
    pub depth: usize,
    /// Sorted vertex set per timestep `0..=horizon`.
    pub layers: Vec<Vec<VertexId>>,
    /// Sorted `(u, v)` arcs from layer `t` to layer `t + 1`, waits included.
    pub arcs: Vec<Vec<(VertexId, VertexId)>>,
}

impl Mdd {
    pub fn horizon(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn slack(&self) -> usize {
        self.depth - self.shortest
    }

    pub fn goal(&self) -> VertexId {
        self.layers[self.depth][0]
    }

    pub fn contains(&self, v: VertexId, t: usize) -> bool {
        self.layers
            .get(t)
            .is_some_and(|l| l.binary_search(&v).is_ok())
    }

    pub fn has_arc(&self, t: usize, u: VertexId, v: VertexId) -> bool {
        self.arcs
            .get(t)
            .is_some_and(|a| a.binary_search(&(u, v)).is_ok())
    }

    pub fn node_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.iter().map(Vec::len).sum()
    }

    /// Extends the diagram to `horizon` by repeating the goal node.
    pub fn pad_to(&mut self, horizon: usize) {
        let goal = *self
            .layers
            .last()
            .and_then(|l| l.first())
            .expect("non-empty MDD");
        while self.horizon() < horizon {
            self.layers.push(vec![goal]);
            self.arcs.push(vec![(goal, goal)]);
        }
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph mdd_a{} {{", self.agent + 1);
        let _ = writeln!(s, "  rankdir=LR;");
        for (t, layer) in self.layers.iter().enumerate() {
            let names: Vec<String> = layer.iter().map(|v| format!("\"{v}@{t}\"")).collect();
            let _ = writeln!(s, "  {{ rank=same; {} }}", names.join("; "));
        }
        for (t, arcs) in self.arcs.iter().enumerate() {
            for (u, v) in arcs {
                let _ = writeln!(s, "  \"{u}@{t}\" -> \"{v}@{}\";", t + 1);
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Builds the MDD for `agent` with budget `shortest + slack`.
pub fn build_mdd(inst: &MapfInstance, agent: AgentId, slack: usize) -> Result<Mdd, MddError> {
    let dist = bfs_distances(inst, agent)?;
    Ok(build_mdd_with(
        &inst.graph,
        agent,
        &dist,
        inst.start_of(agent),
        slack,
    ))
}

pub fn build_mdd_with(
    graph: &Graph,
    agent: AgentId,
    dist: &DistanceTable,
    start: VertexId,
    slack: usize,
) -> Mdd {
    let depth = dist.shortest(start) as usize + slack;
    let mut layers = Vec::with_capacity(depth + 1);
    for t in 0..=depth {
        let layer: Vec<VertexId> = (0..graph.vertex_count() as VertexId)
            .filter(|&u| {
                let (ds, dg) = (dist.from_start[u as usize], dist.to_goal[u as usize]);
                ds != UNREACHABLE
                    && dg != UNREACHABLE
                    && ds as usize <= t
                    && t + dg as usize <= depth
            })
            .collect();
        layers.push(layer);
    }
    let mut arcs = Vec::with_capacity(depth);
    for t in 0..depth {
        let next = &layers[t + 1];
        let mut out = Vec::new();
        for &u in &layers[t] {
            if next.binary_search(&u).is_ok() {
                out.push((u, u));
            }
            for &v in graph.neighbors(u) {
                if next.binary_search(&v).is_ok() {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        arcs.push(out);
    }
    Mdd {
        agent,
        shortest: depth - slack,
        depth,
        layers,
        arcs,
    }
}

/// MDDs for every agent under a common slack, padded to the common horizon
/// `max_i(d_i) + slack`.
pub fn build_all(inst: &MapfInstance, tables: &[DistanceTable], slack: usize) -> Vec<Mdd> {
    let mut mdds: Vec<Mdd> = tables
        .iter()
        .enumerate()
        .map(|(a, d)| build_mdd_with(&inst.graph, a, d, inst.start_of(a), slack))
        .collect();
    let horizon = mdds.iter().map(Mdd::horizon).max().unwrap_or(0);
    for m in &mut mdds {
        m.pad_to(horizon);
    }
    mdds
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_distances() {
        let inst = MapfInstance::new(Graph::path(3), vec![0], vec![2]);
        let d = bfs_distances(&inst, 0).unwrap();
        assert_eq!(d.from_start, vec![0, 1, 2]);
        assert_eq!(d.to_goal, vec![2, 1, 0]);

        let same = MapfInstance::new(Graph::path(3), vec![1], vec![1]);
        assert_eq!(bfs_distances(&same, 0).unwrap().shortest(1), 0);
    }

    #[test]
    fn grid_corner_to_corner() {
        let inst = MapfInstance::new(Graph::grid(3, 3), vec![0], vec![8]);
        assert_eq!(bfs_distances(&inst, 0).unwrap().shortest(0), 4);
    }

    #[test]
    fn unreachable_goal() {
        let g = Graph::new(4, &[(0, 1), (2, 3)]).unwrap();
        let inst = MapfInstance::new(g, vec![0], vec![3]);
        assert_eq!(
            bfs_distances(&inst, 0),
            Err(MddError::GoalUnreachable { agent: 0 })
        );
        assert!(sum_of_costs_lower_bound(&inst).is_err());
    }

    #[test]
    fn lower_bound_sums() {
        let inst = MapfInstance::new(Graph::path(6), vec![0, 5], vec![0, 5]);
        assert_eq!(sum_of_costs_lower_bound(&inst).unwrap(), 0);
        let inst = MapfInstance::new(Graph::path(6), vec![0, 4], vec![2, 1]);
        assert_eq!(sum_of_costs_lower_bound(&inst).unwrap(), 5);
    }

    #[test]
    fn zero_slack_on_path_is_single_path() {
        let inst = MapfInstance::new(Graph::path(4), vec![0], vec![3]);
        let m = build_mdd(&inst, 0, 0).unwrap();
        assert_eq!(m.layers, vec![vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(m.arcs, vec![vec![(0, 1)], vec![(1, 2)], vec![(2, 3)]]);
    }

    #[test]
    fn agent_at_goal_zero_slack() {
        let inst = MapfInstance::new(Graph::path(4), vec![2], vec![2]);
        let m = build_mdd(&inst, 0, 0).unwrap();
        assert_eq!(m.layers, vec![vec![2]]);
        assert_eq!(m.arc_count(), 0);
    }

    #[test]
    fn slack_adds_waits_and_detours() {
        let inst = MapfInstance::new(Graph::path(3), vec![0], vec![1]);
        let m = build_mdd(&inst, 0, 1).unwrap();
        assert_eq!(m.layers, vec![vec![0], vec![0, 1], vec![1]]);
        assert_eq!(m.arcs, vec![vec![(0, 0), (0, 1)], vec![(0, 1), (1, 1)]]);
        assert!(!m.contains(2, 1));
    }

    #[test]
    fn padding_repeats_goal() {
        let inst = MapfInstance::new(Graph::path(4), vec![0, 3], vec![1, 0]);
        let tables = all_distances(&inst).unwrap();
        let mdds = build_all(&inst, &tables, 0);
        assert_eq!(mdds[0].horizon(), 3);
        assert_eq!(mdds[0].layers[3], vec![1]);
        assert!(mdds[0].has_arc(2, 1, 1));
        assert!(mdds[0].to_dot().contains("\"1@2\" -> \"1@3\""));
    }
}
