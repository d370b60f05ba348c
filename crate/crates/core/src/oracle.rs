//! Brute-force reference solver for tiny instances.
//!
//! The oracle deliberately ignores everything the geometry module knows: it
//! searches raw retrieval orders and lets the simulator decide. For a fixed
//! order the accessibility equalities force each demanded stack's clearance
//! uniquely, so `infer_clearances` + `simulate_cycle` is a complete validity
//! test and no clearance search is needed. Validity is prefix-closed (an
//! order's demands contain its prefix's demands), which lets the order search
//! prune as it extends.
//!
//! Everything else in the crate is measured against this module in tests; it
//! trades all performance for directness and is capped at a handful of
//! targets.

use crate::instance::Instance;
use crate::sim::{infer_clearances, simulate_cycle};
use crate::solution::{CyclePlan, Solution};
use crate::state::{batch_anchor, SliceState};
use std::collections::BTreeMap;
use std::fmt;

/// Default target cap; the search visits permutations of subsets and is not
/// meant to go further.
pub const DEFAULT_ORACLE_CAP: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    TooManyTargets { count: usize, max: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooManyTargets { count, max } => {
                write!(
                    f,
                    "instance has {count} targets; the brute-force cap is {max}"
                )
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// One retrievable cycle found by the raw search: its (order-independent)
/// energy plus a witness order and clearances.
type RawCycle = (u64, Vec<usize>, Vec<u32>);

/// All sets retrievable in a single cycle from `state`, keyed by member
/// bitmask, each with a witness order and its forced clearances.
fn search_cycles(state: &SliceState) -> BTreeMap<u64, RawCycle> {
    let mut out = BTreeMap::new();
    let mut order = Vec::new();
    extend_order(state, &mut order, 0, &mut out);
    out
}

fn extend_order(
    state: &SliceState,
    order: &mut Vec<usize>,
    mask: u64,
    out: &mut BTreeMap<u64, RawCycle>,
) {
    for b in state.remaining() {
        if mask >> b & 1 == 1 {
            continue;
        }
        order.push(b);
        let valid = infer_clearances(state, order)
            .and_then(|clearances| {
                simulate_cycle(state, order, &clearances).map(|(_, energy)| (energy, clearances))
            })
            .ok();
        if let Some((energy, clearances)) = valid {
            let set = mask | 1 << b;
            let entry = out
                .entry(set)
                .or_insert_with(|| (energy, order.clone(), clearances));
            debug_assert_eq!(entry.0, energy, "cycle energy must not depend on the order");
            extend_order(state, order, set, out);
        }
        order.pop();
    }
}

/// Every target subset retrievable in one cycle from `state`, found purely by
/// order search, with its cycle energy. Members are listed sorted.
pub fn enumerate_feasible_batches_raw(
    state: &SliceState,
    max_targets: usize,
) -> Result<BTreeMap<Vec<usize>, u64>, OracleError> {
    let count = state.instance().target_count();
    if count > max_targets {
        return Err(OracleError::TooManyTargets {
            count,
            max: max_targets,
        });
    }
    Ok(search_cycles(state)
        .into_iter()
        .map(|(set, (energy, _, _))| {
            let members: Vec<usize> = (0..count).filter(|b| set >> b & 1 == 1).collect();
            (members, energy)
        })
        .collect())
}

/// Exact optimum by exhaustive search: `Ok(None)` when no complete retrieval
/// exists, otherwise one optimal solution (minimal total energy; ties go to
/// the first choice in bitmask order).
pub fn solve_oracle(
    instance: &Instance,
    max_targets: usize,
) -> Result<Option<Solution>, OracleError> {
    let n = instance.target_count();
    if n > max_targets {
        return Err(OracleError::TooManyTargets {
            count: n,
            max: max_targets,
        });
    }
    let full: u64 = (1u64 << n) - 1;
    let mut memo: Vec<Option<Option<u64>>> = vec![None; 1 << n];
    let mut choice: Vec<Option<RawCycle>> = vec![None; 1 << n];
    let feasible = best_from(instance, 0, full, &mut memo, &mut choice).is_some();
    if !feasible {
        return Ok(None);
    }

    let mut cycles = Vec::new();
    let mut mask = 0u64;
    while mask != full {
        let (energy, order, clearances) = choice[mask as usize]
            .clone()
            .expect("choice recorded for every feasible state");
        let state = SliceState::from_mask(instance, mask);
        let anchor = batch_anchor(&state, &order).expect("non-empty cycle");
        mask |= order.iter().fold(0u64, |m, &b| m | 1 << b);
        cycles.push(CyclePlan {
            targets: order,
            clearances,
            energy,
            anchor,
        });
    }
    Ok(Some(Solution { cycles }))
}

/// Minimal remaining energy from the retrieved-set `mask`, or `None` when the
/// remaining targets cannot all be retrieved.
fn best_from(
    instance: &Instance,
    mask: u64,
    full: u64,
    memo: &mut Vec<Option<Option<u64>>>,
    choice: &mut Vec<Option<RawCycle>>,
) -> Option<u64> {
    if let Some(v) = memo[mask as usize] {
        return v;
    }
    let result = if mask == full {
        Some(0)
    } else {
        let state = SliceState::from_mask(instance, mask);
        let mut best: Option<u64> = None;
        for (set, cycle) in search_cycles(&state) {
            if let Some(rest) = best_from(instance, mask | set, full, memo, choice) {
                let total = cycle.0 + rest;
                if best.is_none_or(|b| total < b) {
                    best = Some(total);
                    choice[mask as usize] = Some(cycle);
                }
            }
        }
        best
    };
    memo[mask as usize] = Some(result);
    result
}

/// Convenience wrapper: just the optimal energy.
pub fn oracle_optimum(instance: &Instance, max_targets: usize) -> Result<Option<u64>, OracleError> {
    Ok(solve_oracle(instance, max_targets)?.map(|s| s.total_energy()))
}
