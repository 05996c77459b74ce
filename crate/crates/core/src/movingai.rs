//! movingai.com `.map` and `.scen` (version 1) files on 4-connected grids.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Graph, MapfInstance, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    /// Row-major, `passable[y * width + x]`.
    pub passable: Vec<bool>,
}

impl GridMap {
    pub fn open(width: usize, height: usize) -> Self {
        GridMap {
            width,
            height,
            passable: vec![true; width * height],
        }
    }

    pub fn is_passable(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.passable[y * self.width + x]
    }

    pub fn passable_count(&self) -> usize {
        self.passable.iter().filter(|&&p| p).count()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "type octile\nheight {}\nwidth {}\nmap\n",
            self.height, self.width
        );
        for row in self.passable.chunks(self.width.max(1)) {
            s.extend(row.iter().map(|&p| if p { '.' } else { '@' }));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("line {line}: {message}")]
    HeaderMismatch { line: usize, message: String },
    #[error("line {line}, column {column}: unknown terrain character {ch:?}")]
    UnknownTerrainChar {
        line: usize,
        column: usize,
        ch: char,
    },
    #[error("line {line}: row has {got} cells, expected {expected}")]
    RaggedRow {
        line: usize,
        expected: usize,
        got: usize,
    },
}

fn header_value(lines: &[&str], idx: usize, key: &str) -> Result<String, MapError> {
    let line = lines.get(idx).map(|l| l.trim()).unwrap_or("");
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => Ok(v.to_string()),
        _ => Err(MapError::HeaderMismatch {
            line: idx + 1,
            message: format!("expected `{key} <value>`, found `{line}`"),
        }),
    }
}

fn header_dim(lines: &[&str], idx: usize, key: &str) -> Result<usize, MapError> {
    header_value(lines, idx, key)?
        .parse()
        .map_err(|_| MapError::HeaderMismatch {
            line: idx + 1,
            message: format!("`{key}` is not a non-negative integer"),
        })
}

pub fn parse_map(text: &str) -> Result<GridMap, MapError> {
    let lines: Vec<&str> = text.lines().collect();
    header_value(&lines, 0, "type")?;
    let height = header_dim(&lines, 1, "height")?;
    let width = header_dim(&lines, 2, "width")?;
    if lines.get(3).map(|l| l.trim()) != Some("map") {
        return Err(MapError::HeaderMismatch {
            line: 4,
            message: "expected `map`".into(),
        });
    }
    let mut rows: Vec<&str> = lines[4..]
        .iter()
        .map(|l| l.trim_end_matches('\r'))
        .collect();
    while rows.last().is_some_and(|r| r.is_empty()) {
        rows.pop();
    }
    if rows.len() != height {
        return Err(MapError::HeaderMismatch {
            line: 2,
            message: format!("header says height {height} but {} rows follow", rows.len()),
        });
    }
    let mut passable = Vec::with_capacity(width * height);
    for (y, row) in rows.iter().enumerate() {
        let line = y + 5;
        let cells = row.chars().count();
        if cells != width {
            return Err(MapError::RaggedRow {
                line,
                expected: width,
                got: cells,
            });
        }
        for (x, ch) in row.chars().enumerate() {
            passable.push(match ch {
                '.' | 'G' | 'S' => true,
                '@' | 'O' | 'T' | 'W' => false,
                _ => {
                    return Err(MapError::UnknownTerrainChar {
                        line,
                        column: x + 1,
                        ch,
                    })
                }
            });
        }
    }
    Ok(GridMap {
        width,
        height,
        passable,
    })
}

/// Graph over the passable cells plus the cell/vertex correspondence.
#[derive(Debug, Clone)]
pub struct GridGraph {
    pub graph: Graph,
    /// `cells[v] = (x, y)`.
    pub cells: Vec<(usize, usize)>,
    /// Row-major cell index to vertex.
    vertex_of: Vec<Option<VertexId>>,
    width: usize,
}

impl GridGraph {
    pub fn vertex(&self, x: usize, y: usize) -> Option<VertexId> {
        if x >= self.width {
            return None;
        }
        self.vertex_of.get(y * self.width + x).copied().flatten()
    }

    pub fn cell(&self, v: VertexId) -> (usize, usize) {
        self.cells[v as usize]
    }
}

/// Vertices are numbered in row-major order of passable cells; edges join
/// 4-connected passable neighbours.
pub fn grid_to_graph(map: &GridMap) -> GridGraph {
    let mut vertex_of = vec![None; map.width * map.height];
    let mut cells = Vec::with_capacity(map.passable_count());
    for y in 0..map.height {
        for x in 0..map.width {
            if map.is_passable(x, y) {
                vertex_of[y * map.width + x] = Some(cells.len() as VertexId);
                cells.push((x, y));
            }
        }
    }
    let mut edges = Vec::new();
    for (v, &(x, y)) in cells.iter().enumerate() {
        if map.is_passable(x + 1, y) {
            edges.push((v as VertexId, vertex_of[y * map.width + x + 1].unwrap()));
        }
        if map.is_passable(x, y + 1) {
            edges.push((v as VertexId, vertex_of[(y + 1) * map.width + x].unwrap()));
        }
    }
    let graph = Graph::new(cells.len(), &edges).expect("grid edges are well formed");
    GridGraph {
        graph,
        cells,
        vertex_of,
        width: map.width,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    pub bucket: u32,
    pub map_name: String,
    pub map_width: usize,
    pub map_height: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    /// Octile optimal length, informational only.
    pub reference_length: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenError {
    #[error("line 1: expected `version 1`, found `{0}`")]
    BadVersion(String),
    #[error("line {line}: expected 9 tab-separated fields, found {got}")]
    FieldCount { line: usize, got: usize },
    #[error("line {line}: field {field} is not a number: `{value}`")]
    NonNumericField {
        line: usize,
        field: usize,
        value: String,
    },
}

pub fn parse_scen(text: &str) -> Result<Vec<ScenarioEntry>, ScenError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").trim();
    let mut words = header.split_whitespace();
    if words.next() != Some("version") || words.next().map(str::parse::<f64>) != Some(Ok(1.0)) {
        return Err(ScenError::BadVersion(header.to_string()));
    }
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 9 {
            return Err(ScenError::FieldCount {
                line: line_no,
                got: fields.len(),
            });
        }
        let int = |idx: usize| -> Result<usize, ScenError> {
            fields[idx]
                .trim()
                .parse()
                .map_err(|_| ScenError::NonNumericField {
                    line: line_no,
                    field: idx + 1,
                    value: fields[idx].to_string(),
                })
        };
        let reference_length =
            fields[8]
                .trim()
                .parse()
                .map_err(|_| ScenError::NonNumericField {
                    line: line_no,
                    field: 9,
                    value: fields[8].to_string(),
                })?;
        entries.push(ScenarioEntry {
            bucket: int(0)? as u32,
            map_name: fields[1].to_string(),
            map_width: int(2)?,
            map_height: int(3)?,
            start: (int(4)?, int(5)?),
            goal: (int(6)?, int(7)?),
            reference_length,
        });
    }
    Ok(entries)
}

pub fn write_scen(entries: &[ScenarioEntry]) -> String {
    let mut s = String::from("version 1\n");
    for e in entries {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.8}",
            e.bucket,
            e.map_name,
            e.map_width,
            e.map_height,
            e.start.0,
            e.start.1,
            e.goal.0,
            e.goal.1,
            e.reference_length
        );
    }
    s
}

/// Permutes scenario rows with ChaCha8 seeded by `seed`.
pub fn shuffle_entries(entries: &mut [ScenarioEntry], seed: u64) {
    entries.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("at least one agent is required")]
    NoAgents,
    #[error("asked for {requested} agents but the scenario has {available} entries")]
    NotEnoughEntries { requested: usize, available: usize },
    #[error("entry {entry}: cell ({x}, {y}) is blocked or outside the map")]
    BlockedCell { entry: usize, x: usize, y: usize },
    #[error("entries {first} and {second} share a start cell")]
    DuplicateStart { first: usize, second: usize },
    #[error("entries {first} and {second} share a goal cell")]
    DuplicateGoal { first: usize, second: usize },
}

/// Instance with the first `k` entries as agents. Entry numbers in errors are
/// 1-based.
pub fn build_instance(
    grid: &GridGraph,
    entries: &[ScenarioEntry],
    k: usize,
) -> Result<MapfInstance, BuildError> {
    if k == 0 {
        return Err(BuildError::NoAgents);
    }
    if k > entries.len() {
        return Err(BuildError::NotEnoughEntries {
            requested: k,
            available: entries.len(),
        });
    }
    let mut start = Vec::with_capacity(k);
    let mut goal = Vec::with_capacity(k);
    for (i, e) in entries[..k].iter().enumerate() {
        let lookup = |(x, y): (usize, usize)| {
            grid.vertex(x, y)
                .ok_or(BuildError::BlockedCell { entry: i + 1, x, y })
        };
        let s = lookup(e.start)?;
        let g = lookup(e.goal)?;
        if let Some(j) = start.iter().position(|&o| o == s) {
            return Err(BuildError::DuplicateStart {
                first: j + 1,
                second: i + 1,
            });
        }
        if let Some(j) = goal.iter().position(|&o| o == g) {
            return Err(BuildError::DuplicateGoal {
                first: j + 1,
                second: i + 1,
            });
        }
        start.push(s);
        goal.push(g);
    }
    Ok(MapfInstance::new(grid.graph.clone(), start, goal))
}

/// Random scenario for `map`: `count` rows with pairwise distinct starts and
/// pairwise distinct goals, each goal reachable from its start. Bucket is
/// `length / 4` and the reference length is the 4-connected distance.
pub fn generate_scen(map: &GridMap, map_name: &str, count: usize, seed: u64) -> Vec<ScenarioEntry> {
    let grid = grid_to_graph(map);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.graph.vertex_count();
    let mut used_start = HashSet::new();
    let mut used_goal = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut verts: Vec<VertexId> = (0..n as VertexId).collect();
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count.max(1) {
        attempts += 1;
        verts.shuffle(&mut rng);
        let (s, g) = (verts[0], verts[1.min(n - 1)]);
        if used_start.contains(&s) || used_goal.contains(&g) {
            continue;
        }
        let d = crate::mdd::bfs(&grid.graph, s)[g as usize];
        if d == crate::mdd::UNREACHABLE {
            continue;
        }
        used_start.insert(s);
        used_goal.insert(g);
        out.push(ScenarioEntry {
            bucket: d / 4,
            map_name: map_name.to_string(),
            map_width: map.width,
            map_height: map.height,
            start: grid.cell(s),
            goal: grid.cell(g),
            reference_length: d as f64,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(rows: &[&str]) -> String {
        format!(
            "type octile\nheight {}\nwidth {}\nmap\n{}\n",
            rows.len(),
            rows[0].len(),
            rows.join("\n")
        )
    }

    #[test]
    fn parse_open_and_blocked() {
        let m = parse_map(&map(&["..", ".."])).unwrap();
        assert_eq!(m.passable_count(), 4);
        let m = parse_map(&map(&[".@", ".."])).unwrap();
        assert_eq!(m.passable_count(), 3);
        assert!(!m.is_passable(1, 0));
        assert!(m.is_passable(0, 1));
        let m = parse_map(&map(&["GSTW", "O..."])).unwrap();
        assert_eq!(
            m.passable,
            vec![true, true, false, false, false, true, true, true]
        );
    }

    #[test]
    fn map_errors() {
        let text = "type octile\nheight 3\nwidth 2\nmap\n..\n..\n";
        assert!(matches!(
            parse_map(text),
            Err(MapError::HeaderMismatch { .. })
        ));
        assert!(matches!(
            parse_map(&map(&["..", "..."])),
            Err(MapError::RaggedRow { line: 6, .. })
        ));
        assert_eq!(
            parse_map(&map(&["..", ".x"])),
            Err(MapError::UnknownTerrainChar {
                line: 6,
                column: 2,
                ch: 'x'
            })
        );
        assert!(matches!(
            parse_map("height 2\n"),
            Err(MapError::HeaderMismatch { line: 1, .. })
        ));
    }

    #[test]
    fn map_text_round_trip() {
        let m = parse_map(&map(&[".@.", "..@"])).unwrap();
        assert_eq!(parse_map(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn graph_sizes() {
        let g = grid_to_graph(&parse_map(&map(&["..", ".."])).unwrap());
        assert_eq!((g.graph.vertex_count(), g.graph.edge_count()), (4, 4));
        let g = grid_to_graph(&parse_map(&map(&["..."])).unwrap());
        assert_eq!((g.graph.vertex_count(), g.graph.edge_count()), (3, 2));
        let g = grid_to_graph(&parse_map(&map(&["...", ".@.", "..."])).unwrap());
        assert_eq!((g.graph.vertex_count(), g.graph.edge_count()), (8, 8));
        assert_eq!(g.vertex(1, 1), None);
        for v in 0..8 {
            let (x, y) = g.cell(v);
            assert_eq!(g.vertex(x, y), Some(v));
        }
    }

    const ONE_ROW: &str = "version 1\n0\tempty-16-16.map\t16\t16\t3\t5\t12\t9\t13.00000000\n";

    #[test]
    fn scen_parsing() {
        let e = parse_scen(ONE_ROW).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].start, (3, 5));
        assert_eq!(e[0].goal, (12, 9));
        assert_eq!(e[0].reference_length, 13.0);
        assert_eq!(parse_scen("version 1\n").unwrap(), vec![]);
        assert_eq!(parse_scen(&write_scen(&e)).unwrap(), e);
    }

    #[test]
    fn scen_errors() {
        assert!(matches!(
            parse_scen("version 0\n"),
            Err(ScenError::BadVersion(_))
        ));
        assert_eq!(
            parse_scen("version 1\n0\tm\t16\t16\t3\t5\t12\t9\n"),
            Err(ScenError::FieldCount { line: 2, got: 8 })
        );
        assert!(matches!(
            parse_scen("version 1\n0\tm\t16\t16\tx\t5\t12\t9\t1\n"),
            Err(ScenError::NonNumericField {
                line: 2,
                field: 5,
                ..
            })
        ));
    }

    #[test]
    fn building() {
        let grid = grid_to_graph(&GridMap::open(16, 16));
        let e = parse_scen(ONE_ROW).unwrap();
        let inst = build_instance(&grid, &e, 1).unwrap();
        assert_eq!(inst.start_of(0), 5 * 16 + 3);
        assert_eq!(inst.goal_of(0), 9 * 16 + 12);
        assert_eq!(build_instance(&grid, &e, 0), Err(BuildError::NoAgents));
        assert!(matches!(
            build_instance(&grid, &e, 2),
            Err(BuildError::NotEnoughEntries { .. })
        ));
        let mut dup = e.clone();
        dup.push(dup[0].clone());
        dup[1].goal = (0, 0);
        assert_eq!(
            build_instance(&grid, &dup, 2),
            Err(BuildError::DuplicateStart {
                first: 1,
                second: 2
            })
        );
        let blocked = grid_to_graph(&parse_map(&map(&[".@", ".."])).unwrap());
        let mut e2 = e.clone();
        e2[0].start = (1, 0);
        e2[0].goal = (0, 0);
        assert!(matches!(
            build_instance(&blocked, &e2, 1),
            Err(BuildError::BlockedCell { .. })
        ));
    }

    #[test]
    fn generated_scen_is_usable_and_deterministic() {
        let m = GridMap::open(16, 16);
        let a = generate_scen(&m, "empty-16-16.map", 20, 7);
        assert_eq!(a, generate_scen(&m, "empty-16-16.map", 20, 7));
        assert_eq!(a.len(), 20);
        let grid = grid_to_graph(&m);
        let inst = build_instance(&grid, &a, 20).unwrap();
        assert!(inst.validate().is_empty());
    }

    #[test]
    fn shuffle_is_seeded() {
        let m = GridMap::open(8, 8);
        let base = generate_scen(&m, "m", 10, 1);
        let (mut a, mut b) = (base.clone(), base.clone());
        shuffle_entries(&mut a, 3);
        shuffle_entries(&mut b, 3);
        assert_eq!(a, b);
        assert_ne!(a, base);
    }
}
