//! Command-line front end: generate, solve, validate, export, import,
//! feasibility-check, and benchmark retrieval instances.
//!
//! Human-readable one-line summaries go to stdout; `--json` switches to
//! machine-readable output. Exit codes: 0 success, 1 domain errors
//! (infeasible instance, invalid solution, solver timeout), 2 usage errors.

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use sacrp_core::benchmark::{aggregate_rows, large_grid, small_grid, write_rows_csv, GridPoint};
use sacrp_core::feasibility::feasibility_violation;
use sacrp_core::oracle::{solve_oracle, DEFAULT_ORACLE_CAP};
use sacrp_core::sim::resolve_solution;
use sacrp_core::solution::{parse_solution_file, write_solution, Solution};
use sacrp_core::{
    export_model, generate_instance, import_solution, parse_instance, solve_dp, solve_greedy,
    write_instance, BenchSolver, DpOptions, GenConfig, GreedyTrace, Instance,
};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Parser)]
#[command(
    name = "sacrp",
    version,
    about = "Side-access compact retrieval toolkit"
)]
struct Cli {
    /// Emit machine-readable JSON instead of one-line summaries
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Dp,
    Greedy,
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Grid {
    Small,
    Large,
    Custom,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random feasible instance
    #[command(disable_help_flag = true)]
    Gen {
        /// Number of targets
        #[arg(short = 'd', long = "targets", value_parser = clap::value_parser!(u32).range(1..))]
        d: u32,
        /// Maximum number of stacks
        #[arg(short = 'w', long = "max-stacks", value_parser = clap::value_parser!(u32).range(1..))]
        w: u32,
        /// Maximum stack height
        #[arg(short = 'h', long = "max-height", value_parser = clap::value_parser!(u32).range(1..))]
        h: u32,
        /// RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout when omitted)
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
        /// Print help
        #[arg(long, action = ArgAction::HelpLong)]
        help: Option<bool>,
    },
    /// Solve an instance
    Solve {
        /// Instance file
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Solver to run
        #[arg(long, value_enum, default_value_t = Algo::Dp)]
        algo: Algo,
        /// Write the solution JSON here
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
        /// Disable one dominance rule (1, 2 or 3); repeatable
        #[arg(long = "no-dominance", value_name = "RULE",
              value_parser = clap::value_parser!(u8).range(1..=3))]
        no_dominance: Vec<u8>,
        /// Time limit in seconds for the exact solver
        #[arg(long = "time-limit", value_name = "SECONDS", default_value_t = 600.0)]
        time_limit: f64,
        /// Print exact-solver statistics as a JSON line
        #[arg(long)]
        stats: bool,
        /// Print the heuristic's per-cycle decision trace as a JSON line
        #[arg(long)]
        trace: bool,
        /// Expand exact-solver stages on parallel workers
        #[arg(long)]
        parallel: bool,
    },
    /// Check a solution file against an instance
    Validate {
        /// Instance file
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Solution file
        #[arg(long)]
        sol: PathBuf,
    },
    /// Write the integer-programming model as an LP file
    ExportLp {
        /// Instance file
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// LP output file
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Rebuild a solution from external solver variable values
    ImportSol {
        /// Instance file
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// `name value` lines from the external solver
        #[arg(long = "lp-sol", value_name = "FILE")]
        lp_sol: PathBuf,
        /// Write the solution JSON here
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Check whether every target can be retrieved
    Feas {
        /// Instance file
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Run the solver benchmark over an instance grid
    Bench {
        /// Instance grid
        #[arg(long, value_enum)]
        grid: Grid,
        /// Custom grid points as d,w,h triples; repeatable
        #[arg(long, value_name = "D,W,H", value_parser = parse_grid_point,
              required_if_eq("grid", "custom"))]
        dims: Vec<(u32, u32, u32)>,
        /// Instances per grid point (seeds 1..=N)
        #[arg(long, default_value_t = 30)]
        seeds: u64,
        /// Per-solve time limit in seconds
        #[arg(long = "time-limit", value_name = "SECONDS", default_value_t = 600.0)]
        time_limit: f64,
        /// CSV output file
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
}

fn parse_grid_point(s: &str) -> std::result::Result<(u32, u32, u32), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [d, w, h] = parts[..] else {
        return Err(format!("expected d,w,h, got `{s}`"));
    };
    let num = |v: &str| {
        v.trim()
            .parse::<u32>()
            .ok()
            .filter(|&x| x >= 1)
            .ok_or_else(|| format!("`{v}` is not a positive integer"))
    };
    Ok((num(d)?, num(w)?, num(h)?))
}

fn main() {
    // Die quietly when a downstream pipe (e.g. `head`) closes early.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            if json {
                println!("{}", json!({ "error": format!("{err:#}") }));
            }
            std::process::exit(1);
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read instance file {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("invalid instance file {}", path.display()))
}

fn time_limit_duration(seconds: f64) -> Result<Duration> {
    if !(seconds > 0.0 && seconds.is_finite()) {
        bail!("time limit must be a positive number of seconds");
    }
    Ok(Duration::from_secs_f64(seconds))
}

fn emit_solution(
    json: bool,
    solution: &Solution,
    out: Option<&Path>,
    stats: Option<&sacrp_core::DpStats>,
    trace: Option<&GreedyTrace>,
) -> Result<()> {
    if let Some(path) = out {
        fs::write(path, write_solution(solution))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if json {
        let mut body = json!({
            "energy": solution.total_energy(),
            "cycles": solution.cycles.len(),
        });
        if let Some(stats) = stats {
            body["stats"] = serde_json::to_value(stats)?;
        }
        if let Some(trace) = trace {
            body["trace"] = serde_json::to_value(trace)?;
        }
        println!("{body}");
    } else {
        println!(
            "energy={} cycles={}",
            solution.total_energy(),
            solution.cycles.len()
        );
        if let Some(stats) = stats {
            println!("{}", serde_json::to_string(stats)?);
        }
        if let Some(trace) = trace {
            println!("{}", serde_json::to_string(trace)?);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    let json = cli.json;
    match cli.command {
        Command::Gen {
            d,
            w,
            h,
            seed,
            out,
            help: _,
        } => {
            let instance = generate_instance(&GenConfig::new(d, w, h, seed))?;
            let text = write_instance(&instance);
            match out {
                Some(path) => {
                    fs::write(&path, &text)
                        .with_context(|| format!("cannot write {}", path.display()))?;
                    if json {
                        println!(
                            "{}",
                            json!({
                                "path": path.display().to_string(),
                                "d": d, "w": w, "h": h, "seed": seed,
                            })
                        );
                    } else {
                        println!(
                            "instance d={d} w={w} h={h} seed={seed} -> {}",
                            path.display()
                        );
                    }
                }
                None => println!("{}", text.trim_end()),
            }
            Ok(0)
        }
        Command::Solve {
            input,
            algo,
            out,
            no_dominance,
            time_limit,
            stats,
            trace,
            parallel,
        } => {
            let instance = read_instance(&input)?;
            match algo {
                Algo::Dp => {
                    let options = DpOptions {
                        rule1: !no_dominance.contains(&1),
                        rule2: !no_dominance.contains(&2),
                        rule3: !no_dominance.contains(&3),
                        parallel,
                        time_limit: time_limit_duration(time_limit)?,
                        ..DpOptions::default()
                    };
                    let outcome = solve_dp(&instance, &options)?;
                    let shown = stats.then_some(&outcome.stats);
                    match &outcome.solution {
                        Some(solution) => {
                            emit_solution(json, solution, out.as_deref(), shown, None)?;
                            Ok(0)
                        }
                        None => {
                            if let Some(stats) = shown {
                                println!("{}", serde_json::to_string(stats)?);
                            }
                            Err(anyhow!(
                                "time limit exceeded after {} of {} states",
                                outcome.stats.explored_states,
                                outcome.stats.total_states
                            ))
                        }
                    }
                }
                Algo::Greedy => {
                    let (solution, cycle_trace) = solve_greedy(&instance)?;
                    emit_solution(
                        json,
                        &solution,
                        out.as_deref(),
                        None,
                        trace.then_some(&cycle_trace),
                    )?;
                    Ok(0)
                }
                Algo::Oracle => {
                    let solution = solve_oracle(&instance, DEFAULT_ORACLE_CAP)?
                        .ok_or_else(|| anyhow!("no complete retrieval exists"))?;
                    emit_solution(json, &solution, out.as_deref(), None, None)?;
                    Ok(0)
                }
            }
        }
        Command::Validate { input, sol } => {
            let instance = read_instance(&input)?;
            let text = fs::read_to_string(&sol)
                .with_context(|| format!("cannot read solution file {}", sol.display()))?;
            let file = parse_solution_file(&text)
                .with_context(|| format!("invalid solution file {}", sol.display()))?;
            match resolve_solution(&instance, &file) {
                Ok(solution) => {
                    if json {
                        println!(
                            "{}",
                            json!({ "ok": true, "energy": solution.total_energy() })
                        );
                    } else {
                        println!("energy={} OK", solution.total_energy());
                    }
                    Ok(0)
                }
                Err(err) => {
                    if json {
                        println!("{}", json!({ "ok": false, "error": err.to_string() }));
                    } else {
                        println!("invalid: {err}");
                    }
                    Ok(1)
                }
            }
        }
        Command::ExportLp { input, out } => {
            let instance = read_instance(&input)?;
            let counts = export_model(&instance, &out)
                .with_context(|| format!("cannot write {}", out.display()))?;
            if json {
                println!(
                    "{}",
                    json!({
                        "path": out.display().to_string(),
                        "counts": serde_json::to_value(counts)?,
                    })
                );
            } else {
                println!(
                    "binaries={} continuous={} constraints={} -> {}",
                    counts.binaries,
                    counts.continuous,
                    counts.constraints,
                    out.display()
                );
            }
            Ok(0)
        }
        Command::ImportSol { input, lp_sol, out } => {
            let instance = read_instance(&input)?;
            let text = fs::read_to_string(&lp_sol)
                .with_context(|| format!("cannot read values file {}", lp_sol.display()))?;
            let solution = import_solution(&instance, &text)?;
            emit_solution(json, &solution, out.as_deref(), None, None)?;
            Ok(0)
        }
        Command::Feas { input } => {
            let instance = read_instance(&input)?;
            match feasibility_violation(&instance) {
                None => {
                    if json {
                        println!("{}", json!({ "feasible": true }));
                    } else {
                        println!("feasible");
                    }
                    Ok(0)
                }
                Some(v) => {
                    if json {
                        println!(
                            "{}",
                            json!({
                                "feasible": false,
                                "target": v.target,
                                "stack": v.stack,
                                "needed": v.needed,
                                "available": v.available,
                            })
                        );
                    } else {
                        println!("infeasible: {v}");
                    }
                    Ok(1)
                }
            }
        }
        Command::Bench {
            grid,
            dims,
            seeds,
            time_limit,
            out,
        } => {
            let points: Vec<GridPoint> = match grid {
                Grid::Small => small_grid(),
                Grid::Large => large_grid(),
                Grid::Custom => dims,
            };
            let limit = time_limit_duration(time_limit)?;
            let rows = sacrp_core::run_benchmark(
                &points,
                seeds,
                limit,
                &[BenchSolver::Dp, BenchSolver::Greedy],
            );
            let file = fs::File::create(&out)
                .with_context(|| format!("cannot write {}", out.display()))?;
            write_rows_csv(&rows, file)?;
            let aggregates = aggregate_rows(&rows);
            if json {
                println!("{}", serde_json::to_string(&aggregates)?);
            } else {
                let opt = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.2}"));
                for a in &aggregates {
                    println!(
                        "d={} w={} h={} solver={} instances={} mean_energy={} share_optimal={:.2} \
                         mean_gap_percent={} mean_runtime_ms={:.2} timeouts={}",
                        a.d,
                        a.w,
                        a.h,
                        a.solver,
                        a.instances,
                        opt(a.mean_energy),
                        a.share_optimal,
                        opt(a.mean_gap_percent),
                        a.mean_runtime_ms,
                        a.timeouts
                    );
                }
                println!("{} rows -> {}", rows.len(), out.display());
            }
            Ok(0)
        }
    }
}
