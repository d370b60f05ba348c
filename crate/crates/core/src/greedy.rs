//! Heuristic solver: anchor each cycle on the stack of the most
//! accessibility-critical target, then grow the batch greedily.
//!
//! Per cycle: the critical target is the remaining target of maximum current
//! height (ties to the rightmost stack — the hardest one to reach over). The
//! cycle is seeded with the topmost accessible target in that stack, then
//! candidates are scanned in the canonical enumeration order (same row right
//! to left, then rows above bottom-up, then rows below top-down, stacks left
//! to right within a row) and added when legal; every acceptance restarts the
//! scan, because retrieving one more target can lift the feasibility
//! objection that blocked an earlier candidate. A pass that accepts nothing
//! ends the cycle.
//!
//! A candidate is legal when it is (i) accessible on its own, (ii) a valid
//! shape extension of the batch, and (iii) the state after the grown batch
//! stays feasible.
//!
//! The scan-restart loop costs O(n²·(n+m)) per cycle in the worst case;
//! batches are short in practice and the solver is effectively instant next
//! to the exact one.

use crate::feasibility::{feasible_after, require_feasible, Infeasible};
use crate::geometry::{classify_extension, plan_cycle};
use crate::instance::Instance;
use crate::solution::Solution;
use crate::state::SliceState;
use serde::Serialize;

/// One cycle's decision record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleTrace {
    /// The remaining target of maximum current height (rightmost on ties).
    pub critical: usize,
    /// Topmost accessible target in the critical target's stack.
    pub seed: usize,
    /// Candidates accepted after the seed, in acceptance order.
    pub accepted: Vec<usize>,
    /// Final verdicts for the candidates left behind, from the closing scan.
    pub rejected: Vec<(usize, String)>,
}

/// Full decision record; replaying `seed` + `accepted` per cycle reproduces
/// the returned solution.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GreedyTrace {
    pub cycles: Vec<CycleTrace>,
}

/// Scan order for one cycle: the same key the batch enumerator uses, extended
/// to every candidate so rejected ones get deterministic trace positions.
fn scan_key(state: &SliceState, anchor_stack: u32, anchor_height: u32, b: usize) -> (u8, i64, i64) {
    let s = i64::from(state.instance().target(b).stack);
    let h = i64::from(state.target_height(b).expect("candidates are unretrieved"));
    let (s_a, h_a) = (i64::from(anchor_stack), i64::from(anchor_height));
    if h == h_a {
        (0, 0, s_a - s)
    } else if h > h_a {
        (1, h - h_a, s)
    } else {
        (2, h_a - h, s)
    }
}

fn legality(state: &SliceState, batch: &[usize], candidate: usize) -> Result<(), String> {
    if !state.singleton_accessible(candidate) {
        return Err("not accessible on its own".to_string());
    }
    classify_extension(state, batch, candidate).map_err(|r| r.to_string())?;
    let mut grown = batch.to_vec();
    grown.push(candidate);
    if !feasible_after(state, &grown) {
        return Err("retrieving it would strand a remaining target".to_string());
    }
    Ok(())
}

/// Builds one cycle's batch; returns the trace entry alongside the batch in
/// acceptance order (seed first).
fn grow_cycle(state: &SliceState) -> (Vec<usize>, CycleTrace) {
    let inst = state.instance();
    let critical = state
        .remaining()
        .max_by_key(|&b| (state.target_height(b).unwrap(), inst.target(b).stack))
        .expect("grow_cycle needs a remaining target");
    let stack = inst.target(critical).stack;

    // The seed always exists in a feasible state: the lowest remaining target
    // of the critical stack has nothing unretrieved below it, so its
    // feasibility bound — every left stack within one of its height — is
    // exactly the accessibility condition.
    let seed = state
        .remaining()
        .filter(|&b| inst.target(b).stack == stack && state.singleton_accessible(b))
        .max_by_key(|&b| state.target_height(b).unwrap())
        .expect("feasible state keeps the critical stack's lowest target accessible");
    let anchor_height = state.target_height(seed).unwrap();

    let mut batch = vec![seed];
    let mut rejected: Vec<(usize, String)> = Vec::new();
    loop {
        let mut candidates: Vec<usize> = state.remaining().filter(|b| !batch.contains(b)).collect();
        candidates.sort_by_key(|&b| scan_key(state, stack, anchor_height, b));

        rejected.clear();
        let mut accepted_one = false;
        for c in candidates {
            match legality(state, &batch, c) {
                Ok(()) => {
                    batch.push(c);
                    accepted_one = true;
                    break;
                }
                Err(reason) => rejected.push((c, reason)),
            }
        }
        if !accepted_one {
            break;
        }
    }

    let trace = CycleTrace {
        critical,
        seed,
        accepted: batch[1..].to_vec(),
        rejected,
    };
    (batch, trace)
}

/// Greedy retrieval: feasible, usually close to optimal, never below it.
pub fn solve_greedy(instance: &Instance) -> Result<(Solution, GreedyTrace), Infeasible> {
    require_feasible(instance)?;
    let mut retrieved = vec![false; instance.target_count()];
    let mut cycles = Vec::new();
    let mut trace = GreedyTrace::default();
    while retrieved.iter().any(|r| !r) {
        let state = SliceState::from_retrieved(instance, &retrieved);
        let (batch, cycle_trace) = grow_cycle(&state);
        let plan =
            plan_cycle(&state, &batch).expect("legality checks keep the grown batch retrievable");
        for &b in &batch {
            retrieved[b] = true;
        }
        cycles.push(plan);
        trace.cycles.push(cycle_trace);
    }
    Ok((Solution { cycles }, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{solve_dp, DpOptions};
    use crate::sim::simulate_solution;
    use crate::testutil::{four_stack_example, instance};

    #[test]
    fn traces_the_worked_example() {
        let inst = four_stack_example();
        let (sol, trace) = solve_greedy(&inst).unwrap();
        assert_eq!(sol.total_energy(), 4);
        assert_eq!(sol.cycles.len(), 2);
        assert_eq!(sol.cycles[0].energy, 3);
        assert_eq!(sol.cycles[1].energy, 1);
        assert_eq!(simulate_solution(&inst, &sol).unwrap(), 4);

        // Cycle 1: the height-4 tie breaks right to the stack-4 target; its
        // stack's topmost accessible target seeds the batch.
        let first = &trace.cycles[0];
        assert_eq!(first.critical, 1);
        assert_eq!(first.seed, 4);
        assert_eq!(first.accepted, vec![3, 2, 0, 5]);
        assert!(first
            .rejected
            .iter()
            .any(|(b, reason)| *b == 1 && reason.contains("not accessible")));

        let second = &trace.cycles[1];
        assert_eq!(second.critical, 1);
        assert_eq!(second.seed, 1);
        assert!(second.accepted.is_empty());
        assert!(second.rejected.is_empty());
    }

    #[test]
    fn clears_a_full_target_stack_for_free() {
        let inst = instance(&[3], &[(1, 1), (1, 2), (1, 3)]);
        let (sol, trace) = solve_greedy(&inst).unwrap();
        assert_eq!(sol.total_energy(), 0);
        assert_eq!(sol.cycles.len(), 1);
        assert_eq!(
            trace.cycles[0].accepted,
            vec![1, 0],
            "top-down below the seed"
        );
    }

    #[test]
    fn trace_replays_to_the_solution() {
        for inst in [
            four_stack_example(),
            instance(&[4, 4, 5, 3], &[(1, 4), (2, 1), (3, 2), (3, 5), (4, 3)]),
        ] {
            let (sol, trace) = solve_greedy(&inst).unwrap();
            let mut retrieved = vec![false; inst.target_count()];
            for (cycle, entry) in sol.cycles.iter().zip(&trace.cycles) {
                let state = SliceState::from_retrieved(&inst, &retrieved);
                let mut batch = vec![entry.seed];
                batch.extend(&entry.accepted);
                let replay = plan_cycle(&state, &batch).unwrap();
                assert_eq!(&replay, cycle);
                for b in batch {
                    retrieved[b] = true;
                }
            }
            assert!(retrieved.iter().all(|&r| r));
        }
    }

    #[test]
    fn never_beats_the_exact_solver() {
        let cases = [
            instance(&[3, 3], &[(1, 2), (2, 3), (2, 2)]),
            instance(&[2, 5, 3], &[(2, 3), (2, 4), (3, 3)]),
            instance(&[4, 2, 3], &[(1, 1), (1, 4), (3, 2)]),
            instance(&[1, 1, 1, 1], &[(1, 1), (2, 1), (3, 1), (4, 1)]),
            four_stack_example(),
        ];
        for inst in cases {
            let (sol, _) = solve_greedy(&inst).unwrap();
            assert_eq!(simulate_solution(&inst, &sol).unwrap(), sol.total_energy());
            let best = solve_dp(&inst, &DpOptions::default())
                .unwrap()
                .solution
                .unwrap()
                .total_energy();
            assert!(sol.total_energy() >= best);
        }
    }

    #[test]
    fn rejects_infeasible_instances() {
        let inst = instance(&[2, 4], &[(2, 4)]);
        assert!(solve_greedy(&inst).is_err());
    }
}
