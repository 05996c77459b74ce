//! Sweep runner behind the `mapf-bench` binary: builds instances from a
//! movingai map and scenario, solves every (k, algorithm, preset) cell under a
//! timeout and writes one CSV row per cell.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

use mapf_sat::movingai::{
    build_instance, grid_to_graph, parse_map, parse_scen, shuffle_entries, BuildError, GridGraph,
    GridMap, MapError, ScenError,
};
use mapf_sat::oracle::joint_optimum;
use mapf_sat::report::{ResultRecord, ResultWriter};
use mapf_sat::solve::{solve, Algorithm, ConfigError, DpllConfig, SolveOptions, SolveStatus};
use mapf_sat::{is_valid_solution, makespan, sum_of_costs, Solution};

/// Joint-search state limit used by `--cross-check`; larger cells skip the
/// exhaustive comparison.
pub const ORACLE_STATES: usize = 200_000;

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub map: PathBuf,
    pub scen: PathBuf,
    pub agents: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub timeout: Duration,
    pub xi_cap: Option<u64>,
    pub shuffle: Option<u64>,
    pub out: Option<PathBuf>,
    pub cross_check: bool,
    pub dump_dimacs: Option<PathBuf>,
    pub render: bool,
    pub refine_first_only: bool,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{}: {source}", path.display())]
    Map { path: PathBuf, source: MapError },
    #[error("{}: {source}", path.display())]
    Scen { path: PathBuf, source: ScenError },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("k={k}: {source}")]
    Build { k: usize, source: BuildError },
    #[error("{0}")]
    Spec(String),
    #[error("writing CSV: {0}")]
    Csv(String),
    #[error("solvers disagree:\n  {}", .0.join("\n  "))]
    Disagreement(Vec<String>),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Map { .. }
            | RunError::Scen { .. }
            | RunError::Build { .. }
            | RunError::Spec(_) => 2,
            RunError::Disagreement(_) => 3,
            RunError::Io { .. } | RunError::Csv(_) => 1,
        }
    }
}

/// `1..8` (inclusive), `1..=8`, `5`, or a comma-separated mix.
pub fn parse_agents(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{s}` is not an agent count"))
        };
        if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
            if lo > hi {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(num(part)?);
        }
    }
    if out.is_empty() {
        return Err("no agent counts given".into());
    }
    if out.contains(&0) {
        return Err("agent counts must be positive".into());
    }
    Ok(out)
}

/// Algorithms from a comma-separated name list, DPLL(MAPF) once per preset.
pub fn parse_algorithms(algos: &str, presets: &[DpllConfig]) -> Result<Vec<Algorithm>, String> {
    let mut out = Vec::new();
    for name in algos.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        match name {
            "mddsat" => out.push(Algorithm::MddSat),
            "smtcbs" => out.push(Algorithm::SmtCbs),
            "dpllmapf" => out.extend(presets.iter().cloned().map(Algorithm::DpllMapf)),
            other => return Err(format!("unknown algorithm `{other}`")),
        }
    }
    if out.is_empty() {
        return Err("no algorithms given".into());
    }
    Ok(out)
}

/// Presets separated by `;`, each a list of fractions such as `1/2,3/4`.
pub fn parse_presets(text: &str) -> Result<Vec<DpllConfig>, ConfigError> {
    text.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(DpllConfig::parse)
        .collect()
}

fn read(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

/// Symbol for agent `a` in rendered frames.
pub fn agent_symbol(a: usize) -> char {
    const SYMBOLS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
    SYMBOLS.get(a).map_or('*', |&b| b as char)
}

/// One text frame per timestep up to the makespan: `@` blocked, `.` free,
/// agents as `0-9a-zA-Z`.
pub fn render_solution(solution: &Solution, map: &GridMap, grid: &GridGraph) -> Vec<String> {
    (0..=makespan(solution))
        .map(|t| {
            let mut cells: Vec<Vec<char>> = (0..map.height)
                .map(|y| {
                    (0..map.width)
                        .map(|x| if map.is_passable(x, y) { '.' } else { '@' })
                        .collect()
                })
                .collect();
            for (a, path) in solution.paths().iter().enumerate() {
                let (x, y) = grid.cell(path[t.min(path.len() - 1)]);
                cells[y][x] = agent_symbol(a);
            }
            let mut frame = format!("t={t}\n");
            for row in cells {
                frame.extend(row);
                frame.push('\n');
            }
            frame
        })
        .collect()
}

fn dimacs_name(k: usize, algo: &Algorithm) -> String {
    match algo {
        Algorithm::DpllMapf(cfg) => {
            let preset: String = cfg
                .name
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                .collect();
            format!("k{k}-{}-{preset}.cnf", algo.name())
        }
        _ => format!("k{k}-{}.cnf", algo.name()),
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub rows: Vec<ResultRecord>,
    pub disagreements: Vec<String>,
}

/// Runs the sweep. CSV goes to `spec.out` or stdout; rendered frames go to
/// stdout when writing CSV to a file and to stderr otherwise. With
/// `cross_check`, disagreements between algorithms (or with the exhaustive
/// search on small cells) turn into [`RunError::Disagreement`] after all rows
/// are written.
pub fn run(spec: &RunSpec) -> Result<RunSummary, RunError> {
    if spec.timeout.is_zero() {
        return Err(RunError::Spec("timeout must be positive".into()));
    }
    let map = parse_map(&read(&spec.map)?).map_err(|source| RunError::Map {
        path: spec.map.clone(),
        source,
    })?;
    let mut entries = parse_scen(&read(&spec.scen)?).map_err(|source| RunError::Scen {
        path: spec.scen.clone(),
        source,
    })?;
    if let Some(seed) = spec.shuffle {
        shuffle_entries(&mut entries, seed);
    }
    if let Some(&k) = spec.agents.iter().find(|&&k| k == 0 || k > entries.len()) {
        return Err(RunError::Spec(format!(
            "agent count {k} outside 1..={} (scenario entries)",
            entries.len()
        )));
    }
    let grid = grid_to_graph(&map);
    let instances = spec
        .agents
        .iter()
        .map(|&k| {
            build_instance(&grid, &entries, k).map_err(|source| RunError::Build { k, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(dir) = &spec.dump_dimacs {
        fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.clone(),
            source,
        })?;
    }

    let sink: Box<dyn Write> = match &spec.out {
        Some(path) => Box::new(fs::File::create(path).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?),
        None => Box::new(io::stdout()),
    };
    let mut frames_out: Box<dyn Write> = if spec.out.is_some() {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    };
    let mut writer = ResultWriter::new(sink);
    let map_name = file_name(&spec.map);
    let scen_name = file_name(&spec.scen);
    let opts = SolveOptions {
        timeout: Some(spec.timeout),
        max_slack: spec.xi_cap,
        refine_first_only: spec.refine_first_only,
        keep_final_model: spec.dump_dimacs.is_some(),
    };

    let mut summary = RunSummary::default();
    for (&k, inst) in spec.agents.iter().zip(&instances) {
        let mut solved: Vec<(String, u64)> = Vec::new();
        for algo in &spec.algorithms {
            let out = solve(inst, algo, &opts).expect("scenario instances are valid");
            let record = ResultRecord::from_outcome(
                &map_name,
                &scen_name,
                k,
                algo.name(),
                algo.preset(),
                &out,
            );
            writer
                .write(&record)
                .map_err(|e| RunError::Csv(e.to_string()))?;
            let label = if algo.preset().is_empty() {
                algo.name().to_string()
            } else {
                format!("{}[{}]", algo.name(), algo.preset())
            };
            if let (Some(dir), Some(model)) = (&spec.dump_dimacs, &out.final_model) {
                let path = dir.join(dimacs_name(k, algo));
                fs::write(&path, model.to_dimacs()).map_err(|source| RunError::Io {
                    path: path.clone(),
                    source,
                })?;
            }
            if let (Some(sol), Some(xi)) = (&out.solution, out.xi) {
                if spec.render {
                    let _ = writeln!(frames_out, "# k={k} {label} xi={xi}");
                    for frame in render_solution(sol, &map, &grid) {
                        let _ = write!(frames_out, "{frame}");
                    }
                }
                if spec.cross_check {
                    if !is_valid_solution(sol, inst) {
                        summary
                            .disagreements
                            .push(format!("k={k}: {label} returned an invalid solution"));
                    } else if sum_of_costs(sol) as u64 != xi {
                        summary.disagreements.push(format!(
                            "k={k}: {label} reported {xi} for a solution of cost {}",
                            sum_of_costs(sol)
                        ));
                    }
                }
                solved.push((label, xi));
            }
            summary.rows.push(record);
        }
        if spec.cross_check {
            if let Some((first, xi)) = solved.first() {
                for (other, other_xi) in &solved[1..] {
                    if other_xi != xi {
                        summary.disagreements.push(format!(
                            "k={k}: {first} found {xi} but {other} found {other_xi}"
                        ));
                    }
                }
                if let Some(cost) = joint_optimum(inst, ORACLE_STATES).cost() {
                    if cost != *xi {
                        summary.disagreements.push(format!(
                            "k={k}: solvers found {xi} but joint search found {cost}"
                        ));
                    }
                }
            }
        }
    }
    if !summary.disagreements.is_empty() {
        return Err(RunError::Disagreement(summary.disagreements));
    }
    Ok(summary)
}

/// True when every SOLVED row of each k reports the same ξ.
pub fn rows_agree(rows: &[ResultRecord]) -> bool {
    rows.iter().all(|r| {
        rows.iter()
            .filter(|o| o.k == r.k && o.status == SolveStatus::Solved.to_string())
            .all(|o| r.status != SolveStatus::Solved.to_string() || o.xi == r.xi)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mapf_sat::{Graph, MapfInstance};

    #[test]
    fn agent_lists() {
        assert_eq!(parse_agents("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_agents("1..=2,5").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_agents("3").unwrap(), vec![3]);
        assert!(parse_agents("0..2").is_err());
        assert!(parse_agents("4..2").is_err());
        assert!(parse_agents("x").is_err());
    }

    #[test]
    fn algorithm_lists() {
        let presets = parse_presets("1/2,3/4;2/3").unwrap();
        assert_eq!(presets.len(), 2);
        let algos = parse_algorithms("mddsat,dpllmapf", &presets).unwrap();
        assert_eq!(algos.len(), 3);
        assert_eq!(algos[2].preset(), "2/3");
        assert!(parse_algorithms("cbs", &presets).is_err());
    }

    #[test]
    fn frames() {
        let map = GridMap::open(2, 2);
        let grid = grid_to_graph(&map);
        let sol = Solution::from_paths(vec![vec![0, 1, 3]]);
        let frames = render_solution(&sol, &map, &grid);
        assert_eq!(frames.len(), 3);
        assert_eq!(frames[0], "t=0\n0.\n..\n");
        assert_eq!(frames[2], "t=2\n..\n.0\n");
        let home = Solution::from_paths(vec![vec![2], vec![1]]);
        assert_eq!(
            render_solution(&home, &map, &grid),
            vec!["t=0\n.1\n0.\n".to_string()]
        );
    }

    #[test]
    fn frames_never_overlap_on_a_solved_instance() {
        let map = GridMap::open(3, 3);
        let grid = grid_to_graph(&map);
        let inst = MapfInstance::new(Graph::grid(3, 3), vec![0, 2, 6], vec![8, 6, 2]);
        let out = solve(&inst, &Algorithm::MddSat, &SolveOptions::default()).unwrap();
        let sol = out.solution.unwrap();
        for frame in render_solution(&sol, &map, &grid) {
            let agents = frame
                .lines()
                .skip(1)
                .flat_map(|l| l.chars())
                .filter(|c| c.is_ascii_digit());
            assert_eq!(agents.count(), 3);
        }
    }
}
