//! Random instances for tests and experiments.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::{Graph, MapfInstance, VertexId};
use crate::mdd::{bfs, UNREACHABLE};
use crate::movingai::{grid_to_graph, GridMap};

/// Grid with each cell blocked independently with probability
/// `obstacle_ratio`, restricted to its largest 4-connected component so every
/// cell reaches every other.
pub fn random_grid<R: Rng>(
    rng: &mut R,
    width: usize,
    height: usize,
    obstacle_ratio: f64,
) -> GridMap {
    let mut map = GridMap::open(width, height);
    for p in map.passable.iter_mut() {
        *p = !rng.gen_bool(obstacle_ratio);
    }
    let grid = grid_to_graph(&map);
    let n = grid.graph.vertex_count();
    let mut best: Vec<VertexId> = Vec::new();
    let mut seen = vec![false; n];
    for v in 0..n {
        if seen[v] {
            continue;
        }
        let comp: Vec<VertexId> = bfs(&grid.graph, v as VertexId)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != UNREACHABLE)
            .map(|(u, _)| u as VertexId)
            .collect();
        for &u in &comp {
            seen[u as usize] = true;
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    let mut out = GridMap {
        width,
        height,
        passable: vec![false; width * height],
    };
    for v in best {
        let (x, y) = grid.cell(v);
        out.passable[y * width + x] = true;
    }
    out
}

/// Instance solvable by construction: `k` distinct random starts, then
/// `steps` random collision-free joint moves; the final positions are the
/// goals. Returns `None` when the graph has fewer than `k` vertices.
pub fn random_walk_instance<R: Rng>(
    rng: &mut R,
    graph: &Graph,
    k: usize,
    steps: usize,
) -> Option<MapfInstance> {
    let n = graph.vertex_count();
    if n < k {
        return None;
    }
    let mut verts: Vec<VertexId> = (0..n as VertexId).collect();
    verts.shuffle(rng);
    let start: Vec<VertexId> = verts[..k].to_vec();
    let mut pos = start.clone();
    for _ in 0..steps {
        let mut next = pos.clone();
        for a in 0..k {
            let mut options = vec![pos[a]];
            options.extend_from_slice(graph.neighbors(pos[a]));
            next[a] = *options.choose(rng).expect("non-empty");
        }
        if joint_step_ok(&pos, &next) {
            pos = next;
        }
    }
    Some(MapfInstance::new(graph.clone(), start, pos))
}

fn joint_step_ok(from: &[VertexId], to: &[VertexId]) -> bool {
    (0..to.len()).all(|i| {
        (i + 1..to.len()).all(|j| to[i] != to[j] && !(from[i] == to[j] && from[j] == to[i]))
    })
}
