use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use treepack::driver::{find_mincut, near_min_cuts, Mode, RunConfig, SolverChoice};
use treepack::io::read_graph;
use treepack::oracle::{enumerate_alpha_cuts_exhaustive, qk_bound};
use treepack::WeightedGraph;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: treepack::Error,
    },
    #[error(transparent)]
    Core(#[from] treepack::Error),
    #[error("{0}")]
    Usage(String),
    #[error("no readable graph files in {0}")]
    NoGraphs(PathBuf),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(treepack::Error::Internal(_)) => 3,
            CliError::Input {
                source: treepack::Error::Internal(_),
                ..
            } => 3,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "treepack", version, about = "Minimum cuts by spanning tree packing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0 / 6.0)]
    epsilon: f64,
    /// Number of trees to check (overrides the mode's default).
    #[arg(long)]
    trees: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Find a minimum cut and print the run report.
    Mincut {
        file: PathBuf,
        #[arg(long, default_value = "high-probability", value_parser = parse_mode)]
        mode: Mode,
        #[arg(long, default_value = "auto", value_parser = parse_solver)]
        solver: SolverChoice,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// List the cuts within a factor alpha of the minimum.
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Check every bipartition instead of the packed trees (n <= 20).
        #[arg(long)]
        exhaustive: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Evaluate the bound on the number of alpha-minimum cuts.
    Bound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        alpha: f64,
    },
    /// Time the min cut search on every graph file in a directory.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 3)]
        repeat: usize,
        #[arg(long, default_value = "high-probability", value_parser = parse_mode)]
        mode: Mode,
        #[arg(long, default_value = "auto", value_parser = parse_solver)]
        solver: SolverChoice,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: treepack::Error| e.to_string())
}

fn parse_solver(s: &str) -> Result<SolverChoice, String> {
    s.parse().map_err(|e: treepack::Error| e.to_string())
}

fn load(path: &Path) -> Result<WeightedGraph, CliError> {
    match read_graph(path) {
        Err(source) => Err(CliError::Io {
            path: path.to_owned(),
            source,
        }),
        Ok(Err(source)) => Err(CliError::Input {
            path: path.to_owned(),
            source,
        }),
        Ok(Ok(g)) => Ok(g),
    }
}

fn config(mode: Mode, solver: SolverChoice, s: &SearchArgs) -> RunConfig {
    RunConfig {
        mode,
        solver,
        seed: s.seed,
        epsilon: s.epsilon,
        trees: s.trees,
        ..Default::default()
    }
}

/// One enumerated cut. Exhaustive listings have no tree.
#[derive(Serialize)]
struct Listed {
    value: f64,
    side: String,
    tree_id: Option<usize>,
    tree_edges: Vec<usize>,
}

#[derive(Serialize)]
struct BenchEntry {
    file: String,
    n: usize,
    m: usize,
    value: f64,
    runs_ms: Vec<f64>,
    median_ms: f64,
    min_ms: f64,
    skeleton_ms: f64,
    packing_ms: f64,
    trees_ms: f64,
}

#[derive(Serialize)]
struct BenchReport {
    mode: Mode,
    solver: SolverChoice,
    repeat: usize,
    graphs: Vec<BenchEntry>,
    /// Slope of log(median time) against log(m), when two sizes differ.
    fit_exponent: Option<f64>,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

fn fit_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if den < 1e-12 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / den)
}

fn bench(dir: &Path, repeat: usize, cfg: &RunConfig) -> Result<BenchReport, CliError> {
    if repeat == 0 {
        return Err(CliError::Usage("--repeat must be at least 1".into()));
    }
    let io = |source| CliError::Io {
        path: dir.to_owned(),
        source,
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    let mut graphs = Vec::new();
    for path in files {
        let g = match load(&path) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("skipping {e}");
                continue;
            }
        };
        let mut runs = Vec::with_capacity(repeat);
        let mut last = None;
        for _ in 0..repeat {
            let t = Instant::now();
            let r = find_mincut(&g, cfg).map_err(|source| CliError::Input {
                path: path.clone(),
                source,
            })?;
            runs.push(t.elapsed().as_secs_f64() * 1e3);
            last = Some(r);
        }
        let r = last.expect("repeat >= 1");
        eprintln!("{}: n={} m={} value={}", path.display(), g.n(), g.m(), r.value);
        graphs.push(BenchEntry {
            file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            n: g.n(),
            m: g.m(),
            value: r.value,
            median_ms: median(&runs),
            min_ms: runs.iter().copied().fold(f64::INFINITY, f64::min),
            runs_ms: runs,
            skeleton_ms: r.timings.skeleton_ms,
            packing_ms: r.timings.packing_ms,
            trees_ms: r.timings.trees_ms,
        });
    }
    if graphs.is_empty() {
        return Err(CliError::NoGraphs(dir.to_owned()));
    }
    let points: Vec<(f64, f64)> = graphs.iter().map(|e| (e.m as f64, e.median_ms)).collect();
    Ok(BenchReport {
        mode: cfg.mode,
        solver: cfg.solver,
        repeat,
        fit_exponent: fit_exponent(&points),
        graphs,
    })
}

fn json<T: Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("report serializes")
}

fn run(cli: Cli) -> Result<String, CliError> {
    Ok(match cli.command {
        Command::Mincut {
            file,
            mode,
            solver,
            search,
        } => {
            let g = load(&file)?;
            json(&find_mincut(&g, &config(mode, solver, &search))?)
        }
        Command::Enumerate {
            file,
            alpha,
            exhaustive,
            search,
        } => {
            let g = load(&file)?;
            let listed: Vec<Listed> = if exhaustive {
                enumerate_alpha_cuts_exhaustive(&g, alpha)?
                    .into_iter()
                    .map(|c| Listed {
                        value: c.value,
                        side: c.bitstring(),
                        tree_id: None,
                        tree_edges: Vec::new(),
                    })
                    .collect()
            } else {
                let cfg = config(Mode::HighProbability, SolverChoice::Auto, &search);
                near_min_cuts(&g, alpha, &cfg)?
                    .cuts
                    .into_iter()
                    .map(|c| Listed {
                        value: c.value,
                        side: c.side,
                        tree_id: Some(c.tree_id),
                        tree_edges: c.tree_edges,
                    })
                    .collect()
            };
            json(&listed)
        }
        Command::Bound { n, alpha } => json(&qk_bound(n, alpha)?),
        Command::Bench {
            dir,
            repeat,
            mode,
            solver,
            seed,
        } => {
            let cfg = RunConfig {
                mode,
                solver,
                seed,
                ..Default::default()
            };
            json(&bench(&dir, repeat, &cfg)?)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
