//! Exhaustive sum-of-costs optimal search over joint configurations.
//!
//! Independent of the SAT machinery: uniform-cost search where a state is the
//! agents' positions plus the set of agents that have settled at their goal
//! for good. Settling is free; every joint step costs the number of agents not
//! yet settled. Settled agents stay put and still block their goal vertex.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::instance::{MapfInstance, Solution, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JointSearch {
    Solved {
        cost: u64,
        solution: Solution,
    },
    Unsolvable,
    /// More than the allowed number of states would be expanded.
    Aborted,
}

impl JointSearch {
    pub fn cost(&self) -> Option<u64> {
        match self {
            JointSearch::Solved { cost, .. } => Some(*cost),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    pos: Vec<VertexId>,
    settled: u32,
}

#[derive(Clone, Copy)]
enum Edge {
    Start,
    Settle(usize),
    Step(usize),
}

/// Optimal sum-of-costs by uniform-cost search, giving up after `max_states`
/// distinct states. At most 32 agents.
pub fn joint_optimum(inst: &MapfInstance, max_states: usize) -> JointSearch {
    let k = inst.agent_count();
    assert!(k <= 32, "joint search supports at most 32 agents");
    let full: u32 = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    let graph = &inst.graph;

    let mut states: Vec<State> = Vec::new();
    let mut parent: Vec<Edge> = Vec::new();
    let mut dist: Vec<u64> = Vec::new();
    let mut ids: HashMap<State, usize> = HashMap::new();
    let mut queue = BinaryHeap::new();

    let start = State {
        pos: inst.start.0.clone(),
        settled: 0,
    };
    ids.insert(start.clone(), 0);
    states.push(start);
    parent.push(Edge::Start);
    dist.push(0);
    queue.push(Reverse((0u64, 0usize)));

    let mut moves: Vec<Vec<VertexId>> = vec![Vec::new(); k];
    while let Some(Reverse((d, id))) = queue.pop() {
        if d > dist[id] {
            continue;
        }
        let state = states[id].clone();
        if state.settled == full {
            return JointSearch::Solved {
                cost: d,
                solution: rebuild(&states, &parent, id, k),
            };
        }
        let mut relax = |next: State,
                         cost: u64,
                         edge: Edge,
                         states: &mut Vec<State>,
                         parent: &mut Vec<Edge>,
                         dist: &mut Vec<u64>|
         -> bool {
            let nd = d + cost;
            match ids.get(&next) {
                Some(&nid) => {
                    if nd < dist[nid] {
                        dist[nid] = nd;
                        parent[nid] = edge;
                        queue.push(Reverse((nd, nid)));
                    }
                }
                None => {
                    let nid = states.len();
                    ids.insert(next.clone(), nid);
                    states.push(next);
                    parent.push(edge);
                    dist.push(nd);
                    queue.push(Reverse((nd, nid)));
                }
            }
            states.len() <= max_states
        };

        for a in 0..k {
            if state.settled >> a & 1 == 0 && state.pos[a] == inst.goal_of(a) {
                let next = State {
                    pos: state.pos.clone(),
                    settled: state.settled | 1 << a,
                };
                if !relax(
                    next,
                    0,
                    Edge::Settle(id),
                    &mut states,
                    &mut parent,
                    &mut dist,
                ) {
                    return JointSearch::Aborted;
                }
            }
        }

        let active: Vec<usize> = (0..k).filter(|a| state.settled >> a & 1 == 0).collect();
        for &a in &active {
            moves[a].clear();
            moves[a].push(state.pos[a]);
            moves[a].extend_from_slice(graph.neighbors(state.pos[a]));
        }
        let mut choice = vec![0usize; active.len()];
        'product: loop {
            let mut pos = state.pos.clone();
            for (i, &a) in active.iter().enumerate() {
                pos[a] = moves[a][choice[i]];
            }
            if legal_step(&state.pos, &pos) {
                let next = State {
                    pos,
                    settled: state.settled,
                };
                let cost = active.len() as u64;
                if !relax(
                    next,
                    cost,
                    Edge::Step(id),
                    &mut states,
                    &mut parent,
                    &mut dist,
                ) {
                    return JointSearch::Aborted;
                }
            }
            for i in 0..active.len() {
                choice[i] += 1;
                if choice[i] < moves[active[i]].len() {
                    continue 'product;
                }
                choice[i] = 0;
            }
            break;
        }
    }
    JointSearch::Unsolvable
}

fn legal_step(from: &[VertexId], to: &[VertexId]) -> bool {
    for i in 0..to.len() {
        for j in i + 1..to.len() {
            if to[i] == to[j] {
                return false;
            }
            if from[i] != to[i] && from[i] == to[j] && from[j] == to[i] {
                return false;
            }
        }
    }
    true
}

fn rebuild(states: &[State], parent: &[Edge], mut id: usize, k: usize) -> Solution {
    let mut frames = vec![states[id].pos.clone()];
    loop {
        match parent[id] {
            Edge::Start => break,
            Edge::Settle(p) => id = p,
            Edge::Step(p) => {
                id = p;
                frames.push(states[id].pos.clone());
            }
        }
    }
    frames.reverse();
    let paths = (0..k)
        .map(|a| frames.iter().map(|f| f[a]).collect())
        .collect();
    Solution::from_paths(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{is_valid_solution, sum_of_costs, Graph};

    #[test]
    fn corridor_with_pocket() {
        // 0 - 1 - 2 with pocket 3 attached to 1: agents exchange ends
        let g = Graph::new(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let inst = MapfInstance::new(g, vec![0, 2], vec![2, 0]);
        let JointSearch::Solved { cost, solution } = joint_optimum(&inst, 100_000) else {
            panic!("solvable")
        };
        assert!(is_valid_solution(&solution, &inst));
        assert_eq!(sum_of_costs(&solution) as u64, cost);
        // one agent ducks into the pocket (4 actions), the other waits once (3)
        assert_eq!(cost, 7);
    }

    #[test]
    fn swap_on_two_vertices_is_unsolvable() {
        let inst = MapfInstance::new(Graph::path(2), vec![0, 1], vec![1, 0]);
        assert_eq!(joint_optimum(&inst, 1000), JointSearch::Unsolvable);
    }

    #[test]
    fn waiting_at_goal_then_yielding_costs() {
        // corridor 0-1-2-3 with pocket 4 at vertex 1; a1 starts on its goal 1
        // and has to dodge into the pocket while a2 passes: [1, 4, 1]
        let g = Graph::new(5, &[(0, 1), (1, 2), (2, 3), (1, 4)]).unwrap();
        let inst = MapfInstance::new(g, vec![1, 0], vec![1, 3]);
        let JointSearch::Solved { cost, solution } = joint_optimum(&inst, 100_000) else {
            panic!("solvable")
        };
        assert!(is_valid_solution(&solution, &inst));
        assert_eq!(cost, 2 + 3);
    }

    #[test]
    fn abort_on_state_limit() {
        let inst = MapfInstance::new(Graph::grid(4, 4), vec![0, 15], vec![15, 0]);
        assert_eq!(joint_optimum(&inst, 10), JointSearch::Aborted);
    }
}
