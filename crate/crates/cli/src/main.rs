use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand};

use mapf_bench::{parse_agents, parse_algorithms, parse_presets, run, RunSpec};
use mapf_sat::movingai::{generate_scen, parse_map, write_scen};

/// Optimal MAPF benchmark sweeps over movingai maps.
#[derive(Parser, Debug)]
#[command(version, about, subcommand_negates_reqs = true)]
struct Args {
    #[command(subcommand)]
    command: Option<Command>,
    /// Map file (.map).
    #[arg(long, required = true)]
    map: Option<PathBuf>,
    /// Scenario file (.scen, version 1).
    #[arg(long, required = true)]
    scen: Option<PathBuf>,
    /// Agent counts: `1..8`, `3` or `1,2,5`.
    #[arg(long, default_value = "1")]
    agents: String,
    /// Comma-separated subset of mddsat, smtcbs, dpllmapf.
    #[arg(long, default_value = "mddsat,smtcbs,dpllmapf")]
    algos: String,
    /// DPLL(MAPF) check-point presets separated by `;`.
    #[arg(long, default_value = "1/2,3/4;1/3,2/3;2/3")]
    presets: String,
    /// Seconds per cell.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
    /// Largest slack over the lower bound to try.
    #[arg(long)]
    xi_cap: Option<u64>,
    /// Permute scenario rows with this seed before taking the first k.
    #[arg(long)]
    shuffle: Option<u64>,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare costs across algorithms; exit 3 on disagreement.
    #[arg(long)]
    cross_check: bool,
    /// Write each cell's last formula as DIMACS into this directory.
    #[arg(long, value_name = "DIR")]
    dump_dimacs: Option<PathBuf>,
    /// Print solutions as ASCII frames.
    #[arg(long)]
    render: bool,
    /// Refine only one collision per consistency check.
    #[arg(long)]
    refine_first_only: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random scenario for a map.
    GenScen {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn gen_scen(map: PathBuf, count: usize, seed: u64, out: Option<PathBuf>) -> anyhow::Result<()> {
    let text = fs::read_to_string(&map).with_context(|| format!("reading {}", map.display()))?;
    let grid = parse_map(&text).with_context(|| format!("{}", map.display()))?;
    let name = map
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let scen = write_scen(&generate_scen(&grid, &name, count, seed));
    match out {
        Some(path) => {
            fs::write(&path, scen).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{scen}"),
    }
    Ok(())
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(Command::GenScen {
        map,
        count,
        seed,
        out,
    }) = args.command
    {
        return match gen_scen(map, count, seed, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => usage(format!("{e:#}")),
        };
    }
    let agents = match parse_agents(&args.agents) {
        Ok(a) => a,
        Err(e) => return usage(format!("--agents: {e}")),
    };
    let presets = match parse_presets(&args.presets) {
        Ok(p) => p,
        Err(e) => return usage(format!("--presets: {e}")),
    };
    let algorithms = match parse_algorithms(&args.algos, &presets) {
        Ok(a) => a,
        Err(e) => return usage(format!("--algos: {e}")),
    };
    if !(args.timeout > 0.0 && args.timeout.is_finite()) {
        return usage("--timeout must be positive");
    }
    let spec = RunSpec {
        map: args.map.expect("required"),
        scen: args.scen.expect("required"),
        agents,
        algorithms,
        timeout: Duration::from_secs_f64(args.timeout),
        xi_cap: args.xi_cap,
        shuffle: args.shuffle,
        out: args.out,
        cross_check: args.cross_check,
        dump_dimacs: args.dump_dimacs,
        render: args.render,
        refine_first_only: args.refine_first_only,
    };
    match run(&spec) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
