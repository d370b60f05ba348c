//! Benchmark harness: runs the exact and greedy solvers over seeded
//! instance grids and reports one CSV row per (instance, solver), plus
//! per-configuration aggregates recomputed from the rows.
//!
//! Gap convention: (energy − optimum) / optimum · 100 against the exact
//! solver's result when it finished; empty when there is no reference
//! optimum (exact solver timed out, or the optimum is zero while the
//! heuristic spent energy — a corner where the ratio is undefined).

use crate::dp::{solve_dp, DpOptions};
use crate::gen::{generate_instance, GenConfig};
use crate::greedy::solve_greedy;
use crate::instance::Instance;
use rayon::prelude::*;
use serde::Serialize;
use std::io;
use std::time::{Duration, Instant};

/// A (d, w, h) benchmark configuration.
pub type GridPoint = (u32, u32, u32);

/// The small testbed: 27 configurations of modest size.
pub fn small_grid() -> Vec<GridPoint> {
    let mut grid = Vec::new();
    for &d in &[5, 10, 15] {
        for &w in &[8, 12, 16] {
            for &h in &[8, 12, 16] {
                grid.push((d, w, h));
            }
        }
    }
    grid
}

/// The large testbed: 27 configurations that stress the exact solver.
pub fn large_grid() -> Vec<GridPoint> {
    let mut grid = Vec::new();
    for &d in &[18, 21, 24] {
        for &w in &[20, 24, 28] {
            for &h in &[20, 24, 28] {
                grid.push((d, w, h));
            }
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchSolver {
    Dp,
    Greedy,
}

impl BenchSolver {
    pub fn name(self) -> &'static str {
        match self {
            BenchSolver::Dp => "dp",
            BenchSolver::Greedy => "greedy",
        }
    }
}

/// One measurement; serializes to the pinned CSV column set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub d: u32,
    pub w: u32,
    pub h: u32,
    pub seed: u64,
    pub solver: &'static str,
    pub energy: Option<u64>,
    pub is_optimal: Option<bool>,
    pub gap_percent: Option<f64>,
    pub runtime_ms: u64,
    pub total_states: Option<u64>,
    pub explored_states: Option<u64>,
    pub timed_out: bool,
}

/// Per-configuration summary, recomputed from rows only.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchAggregate {
    pub d: u32,
    pub w: u32,
    pub h: u32,
    pub solver: &'static str,
    pub instances: usize,
    pub mean_energy: Option<f64>,
    pub share_optimal: f64,
    pub mean_gap_percent: Option<f64>,
    pub mean_runtime_ms: f64,
    pub timeouts: usize,
}

fn measure(
    instance: &Instance,
    grid: GridPoint,
    seed: u64,
    time_limit: Duration,
    solvers: &[BenchSolver],
) -> Vec<BenchRow> {
    let (d, w, h) = grid;
    let mut rows = Vec::new();
    let mut optimum = None;

    if solvers.contains(&BenchSolver::Dp) {
        let started = Instant::now();
        let outcome = solve_dp(
            instance,
            &DpOptions {
                time_limit,
                ..DpOptions::default()
            },
        )
        .expect("generated instances are feasible and within the state cap");
        let runtime_ms = started.elapsed().as_millis() as u64;
        optimum = outcome.solution.as_ref().map(|s| s.total_energy());
        rows.push(BenchRow {
            d,
            w,
            h,
            seed,
            solver: BenchSolver::Dp.name(),
            energy: optimum,
            is_optimal: outcome.solution.as_ref().map(|_| true),
            gap_percent: outcome.solution.as_ref().map(|_| 0.0),
            runtime_ms,
            total_states: Some(outcome.stats.total_states),
            explored_states: Some(outcome.stats.explored_states),
            timed_out: outcome.stats.timed_out,
        });
    }

    if solvers.contains(&BenchSolver::Greedy) {
        let started = Instant::now();
        let (solution, _) = solve_greedy(instance).expect("generated instances are feasible");
        let runtime_ms = started.elapsed().as_millis() as u64;
        let energy = solution.total_energy();
        let gap = match optimum {
            Some(0) if energy == 0 => Some(0.0),
            Some(0) => None,
            Some(opt) => Some((energy - opt) as f64 / opt as f64 * 100.0),
            None => None,
        };
        rows.push(BenchRow {
            d,
            w,
            h,
            seed,
            solver: BenchSolver::Greedy.name(),
            energy: Some(energy),
            is_optimal: optimum.map(|opt| energy == opt),
            gap_percent: gap,
            runtime_ms,
            total_states: None,
            explored_states: None,
            timed_out: false,
        });
    }
    rows
}

/// Runs every configured solver on `seeds` instances per grid point,
/// in parallel, and returns rows sorted by (d, w, h, seed, solver).
/// Grid points whose instance generation fails are skipped.
pub fn run_benchmark(
    grid: &[GridPoint],
    seeds: u64,
    time_limit: Duration,
    solvers: &[BenchSolver],
) -> Vec<BenchRow> {
    let tasks: Vec<(GridPoint, u64)> = grid
        .iter()
        .flat_map(|&point| (1..=seeds).map(move |seed| (point, seed)))
        .collect();
    let mut rows: Vec<BenchRow> = tasks
        .par_iter()
        .flat_map_iter(|&((d, w, h), seed)| {
            match generate_instance(&GenConfig::new(d, w, h, seed)) {
                Ok(instance) => measure(&instance, (d, w, h), seed, time_limit, solvers),
                Err(_) => Vec::new(),
            }
        })
        .collect();
    rows.sort_by(|a, b| (a.d, a.w, a.h, a.seed, a.solver).cmp(&(b.d, b.w, b.h, b.seed, b.solver)));
    rows
}

/// Groups rows by (d, w, h, solver) and recomputes the summary statistics.
pub fn aggregate_rows(rows: &[BenchRow]) -> Vec<BenchAggregate> {
    let mut keys: Vec<(u32, u32, u32, &'static str)> =
        rows.iter().map(|r| (r.d, r.w, r.h, r.solver)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(d, w, h, solver)| {
            let group: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| (r.d, r.w, r.h, r.solver) == (d, w, h, solver))
                .collect();
            let mean = |values: Vec<f64>| {
                (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
            };
            BenchAggregate {
                d,
                w,
                h,
                solver,
                instances: group.len(),
                mean_energy: mean(
                    group
                        .iter()
                        .filter_map(|r| r.energy)
                        .map(|e| e as f64)
                        .collect(),
                ),
                share_optimal: group.iter().filter(|r| r.is_optimal == Some(true)).count() as f64
                    / group.len() as f64,
                mean_gap_percent: mean(group.iter().filter_map(|r| r.gap_percent).collect()),
                mean_runtime_ms: group.iter().map(|r| r.runtime_ms as f64).sum::<f64>()
                    / group.len() as f64,
                timeouts: group.iter().filter(|r| r.timed_out).count(),
            }
        })
        .collect()
}

/// Writes rows as CSV with the pinned header.
pub fn write_rows_csv<W: io::Write>(rows: &[BenchRow], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOTH: &[BenchSolver] = &[BenchSolver::Dp, BenchSolver::Greedy];

    #[test]
    fn csv_header_is_pinned() {
        let rows = vec![BenchRow {
            d: 5,
            w: 8,
            h: 8,
            seed: 1,
            solver: "dp",
            energy: Some(4),
            is_optimal: Some(true),
            gap_percent: Some(0.0),
            runtime_ms: 1,
            total_states: Some(32),
            explored_states: Some(32),
            timed_out: false,
        }];
        let mut buf = Vec::new();
        write_rows_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "d,w,h,seed,solver,energy,isOptimal,gapPercent,runtimeMs,totalStates,exploredStates,timedOut"
        );
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "5,8,8,1,dp,4,true,0.0,1,32,32,false"
        );
    }

    #[test]
    fn grids_have_27_points_each() {
        assert_eq!(small_grid().len(), 27);
        assert_eq!(large_grid().len(), 27);
        assert!(small_grid().contains(&(5, 8, 8)));
        assert!(large_grid().contains(&(24, 28, 28)));
    }

    #[test]
    fn rows_are_sorted_and_consistent() {
        let rows = run_benchmark(&[(4, 4, 4), (3, 5, 5)], 3, Duration::from_secs(30), BOTH);
        assert_eq!(
            rows.len(),
            2 * 3 * 2,
            "two points, three seeds, two solvers"
        );
        let mut sorted = rows.clone();
        sorted.sort_by(|a, b| {
            (a.d, a.w, a.h, a.seed, a.solver).cmp(&(b.d, b.w, b.h, b.seed, b.solver))
        });
        assert_eq!(rows, sorted);
        for row in &rows {
            match row.solver {
                "dp" => {
                    assert_eq!(row.is_optimal, Some(true));
                    assert_eq!(row.total_states, Some(1 << row.d));
                    assert!(!row.timed_out);
                }
                "greedy" => {
                    assert!(row.gap_percent.unwrap_or(0.0) >= 0.0);
                    assert_eq!(row.total_states, None);
                }
                other => panic!("unexpected solver {other}"),
            }
        }
        // Greedy never beats the exact energy.
        for pair in rows.chunks(2) {
            let [dp, greedy] = pair else { panic!() };
            assert!(greedy.energy.unwrap() >= dp.energy.unwrap());
        }
    }

    #[test]
    fn reruns_reproduce_rows_and_aggregates() {
        let first = run_benchmark(&[(4, 4, 4)], 2, Duration::from_secs(30), BOTH);
        let second = run_benchmark(&[(4, 4, 4)], 2, Duration::from_secs(30), BOTH);
        let strip = |rows: &[BenchRow]| {
            rows.iter()
                .map(|r| BenchRow {
                    runtime_ms: 0,
                    ..r.clone()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(
            strip(&first),
            strip(&second),
            "timings aside, reruns are identical"
        );

        let aggregates = aggregate_rows(&first);
        assert_eq!(aggregates.len(), 2);
        for agg in &aggregates {
            assert_eq!(agg.instances, 2);
            if agg.solver == "dp" {
                assert_eq!(agg.share_optimal, 1.0);
                assert_eq!(agg.mean_gap_percent, Some(0.0));
            }
        }
    }

    #[test]
    fn solver_filter_limits_rows() {
        let rows = run_benchmark(
            &[(3, 3, 3)],
            1,
            Duration::from_secs(30),
            &[BenchSolver::Greedy],
        );
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].solver, "greedy");
        assert_eq!(rows[0].gap_percent, None, "no exact reference was run");
    }
}
