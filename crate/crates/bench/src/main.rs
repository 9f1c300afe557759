use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use qgreedy_bench::{load_angles, parse_advice, run_plan, ExperimentPlan};
use qgreedy_core::graph::Graph;
use qgreedy_core::lightcone::enumerate_cones;
use qgreedy_core::noise::{fit_noise, required_shots};
use qgreedy_core::qaoa::{optimize_tree_angles, AngleSchedule, Evaluator, OptimizerSettings};
use qgreedy_core::solver::{
    default_cutoff, solve_classical_greedy, solve_exact, solve_quantum_greedy, Advice, SolverConfig,
    DEFAULT_EXACT_LIMIT,
};

/// Quantum-enhanced greedy search for maximum independent sets.
#[derive(Parser, Debug)]
#[command(name = "qgreedy", version, arg_required_else_help = true)]
struct Cli {
    /// Master random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Penalty weight of the cost Hamiltonian.
    #[arg(long, global = true, default_value_t = 1.0)]
    lambda: f64,
    /// QAOA depth.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random regular graph as an edge list.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Optimize tree angles and write an angle file.
    Angles {
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Solve one instance and print the trace.
    Solve {
        /// Edge-list file; a random cubic graph is generated when absent.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Size of the generated graph.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// greedy, qgreedy or exact.
        #[arg(long, default_value = "qgreedy")]
        solver: String,
        /// Angle file; shipped cubic angles when absent.
        #[arg(long)]
        angles: Option<PathBuf>,
        /// ideal, shots:<M> or noise:<eta>,<alpha>,<sigma>[,<seed>].
        #[arg(long, default_value = "ideal")]
        advice: String,
        /// Degeneracy cutoff; defaults to 0 for ideal advice and the tree
        /// cutoff otherwise.
        #[arg(long)]
        cutoff: Option<f64>,
    },
    /// Count light-cone topologies.
    Census {
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Run an experiment plan.
    Bench {
        #[arg(long)]
        plan: PathBuf,
        /// Leave out the timestamp header line.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Fit the noise model to lines of "ideal noisy cone_size".
    FitNoise {
        #[arg(long)]
        pairs: PathBuf,
    },
    /// Shots needed to resolve a gap with failure probability eps.
    Shots {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        gap: f64,
    },
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<qgreedy_core::Error> for Failure {
    fn from(e: qgreedy_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn need_depth(cli: &Cli) -> Result<usize, Failure> {
    match cli.depth {
        Some(p) if p >= 1 => Ok(p),
        Some(_) => Err(Failure::Usage("--depth must be at least 1".into())),
        None => Err(Failure::Usage("this command needs --depth".into())),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Generate { n, degree } => {
            let g = Graph::generate_regular(*n, *degree, cli.seed)?;
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf)?;
            emit(out, &String::from_utf8_lossy(&buf))
        }
        Command::Angles { degree, restarts } => {
            let p = need_depth(cli)?;
            let settings = OptimizerSettings {
                restarts: *restarts,
                seed: cli.seed,
                ..OptimizerSettings::default()
            };
            let a = optimize_tree_angles(p, *degree, cli.lambda, &settings)?;
            emit(out, &a.to_string())
        }
        Command::Solve {
            graph,
            n,
            solver,
            angles,
            advice,
            cutoff,
        } => {
            let g = match graph {
                Some(path) => {
                    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                    Graph::read_edge_list(BufReader::new(f))?
                }
                None => Graph::generate_regular(*n, 3, cli.seed)?,
            };
            let text = match solver.as_str() {
                "greedy" => solve_classical_greedy(&g, cli.seed)?.to_string(),
                "exact" => {
                    let s = solve_exact(&g, DEFAULT_EXACT_LIMIT)?;
                    format!("{s}\nset_size {} {} {:.6}\n", s.len(), g.node_count(), s.len() as f64 / g.node_count() as f64)
                }
                "qgreedy" => {
                    let p = need_depth(cli)?;
                    let a = match angles {
                        Some(path) => AngleSchedule::read(path)?,
                        None => load_angles(None, p, 3, cli.lambda)?,
                    };
                    let advice = parse_advice(advice).map_err(|e| Failure::Usage(format!("{e:#}")))?;
                    let cutoff = match (cutoff, advice) {
                        (Some(c), _) => *c,
                        (None, Advice::Ideal) => 0.0,
                        (None, _) => default_cutoff(&a)?,
                    };
                    let cfg = SolverConfig::new(a.clone())
                        .with_seed(cli.seed)
                        .with_cutoff(cutoff)
                        .with_advice(advice);
                    cfg_depth_check(&cfg, p)?;
                    solve_quantum_greedy(&g, &cfg, &Evaluator::new(a))?.to_string()
                }
                other => return Err(Failure::Usage(format!("unknown solver {other:?}"))),
            };
            emit(out, &text)
        }
        Command::Census { degree } => {
            let p = need_depth(cli)?;
            let (report, _) = enumerate_cones(p, *degree)?;
            emit(out, &format!("{report}\n"))
        }
        Command::Bench { plan, no_timestamp } => {
            let text = fs::read_to_string(plan).with_context(|| format!("reading {}", plan.display()))?;
            let mut plan: ExperimentPlan = text.parse().map_err(|e| Failure::Usage(format!("{e:#}")))?;
            if let Some(path) = out {
                plan.output = path.to_path_buf();
            }
            plan.timestamp &= !no_timestamp;
            let report = run_plan(&plan)?;
            eprintln!("wrote {} rows to {}", report.cells.len(), plan.output.display());
            Ok(())
        }
        Command::FitNoise { pairs } => {
            let text = fs::read_to_string(pairs).with_context(|| format!("reading {}", pairs.display()))?;
            let mut data = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let w: Vec<&str> = line.split_whitespace().collect();
                if w.is_empty() || w[0].starts_with('#') {
                    continue;
                }
                let parsed = (w.len() == 3)
                    .then(|| Some((w[0].parse().ok()?, w[1].parse().ok()?, w[2].parse().ok()?)))
                    .flatten();
                data.push(parsed.with_context(|| format!("line {}: expected \"ideal noisy cone_size\"", i + 1))?);
            }
            let fit = fit_noise(&data)?;
            emit(out, &format!("eta {:.4} alpha {:.6} sigma {:.6}\n", fit.eta(), fit.alpha(), fit.sigma()))
        }
        Command::Shots { n, eps, gap } => {
            let m = required_shots(*n, *eps, *gap).map_err(|e| Failure::Usage(e.to_string()))?;
            emit(out, &format!("{m}\n"))
        }
    }
}

fn cfg_depth_check(cfg: &SolverConfig, p: usize) -> Result<(), Failure> {
    if cfg.angles.depth() != p {
        return Err(Failure::Usage(format!(
            "angle file has depth {}, --depth is {p}",
            cfg.angles.depth()
        )));
    }
    Ok(())
}
