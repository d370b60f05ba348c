//! A compressed, target-centric view of an instance, plus the closed-form
//! cycle energy it enables.
//!
//! Only stacks holding targets ever change during a retrieval; everything
//! else is frozen scenery. The sparse view therefore keeps, per target `b`:
//!
//! * `below(b)` — targets under `b` in its own stack, which is also `b`'s
//!   maximum retrieval level;
//! * `left_support(b)` — the lowest target-free stack left of `b`, the one
//!   hard ceiling that never erodes (`None` when no such stack exists);
//! * `anchor_energy(b, i)` — the energy of a cycle anchored at `b` on
//!   retrieval level `i`, measured against the untouched initial layout:
//!   clear `b`'s own stack above `b`, and bring every stack to its left down
//!   to one below `b`'s current height.
//!
//! Anchored cycle energies for live states then come out by counting
//! corrections instead of replaying lifts (`cycle_energy`).

use crate::instance::Instance;
use crate::state::SliceState;
use std::fmt;

/// Per-target reductions of an instance. Indexed by target id throughout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseView {
    /// Number of targets initially below each target in its stack.
    pub below: Vec<u32>,
    /// Minimum initial height over target-free stacks left of each target;
    /// `None` when every stack to the left holds a target (or none exists).
    pub left_support: Vec<Option<u32>>,
    /// `anchor_energy[b][i]` for levels `i in 0..=below(b)`; `None` where a
    /// left stack is too short to be ridden at that level.
    pub anchor_energy: Vec<Vec<Option<u64>>>,
    /// Stacks containing at least one target, ascending.
    pub occupied_stacks: Vec<u32>,
}

/// Builds the sparse view of an instance.
pub fn derive_sparse(instance: &Instance) -> SparseView {
    let n = instance.target_count();
    let m = instance.stack_count() as u32;
    let mut has_target = vec![false; m as usize];
    for tg in instance.targets() {
        has_target[tg.stack as usize - 1] = true;
    }
    let occupied_stacks: Vec<u32> = (1..=m).filter(|&t| has_target[t as usize - 1]).collect();

    let below: Vec<u32> = (0..n).map(|b| instance.targets_below(b)).collect();

    let left_support: Vec<Option<u32>> = (0..n)
        .map(|b| {
            let stack = instance.target(b).stack;
            (1..stack)
                .filter(|&t| !has_target[t as usize - 1])
                .map(|t| instance.stack_height(t))
                .min()
        })
        .collect();

    let anchor_energy: Vec<Vec<Option<u64>>> = (0..n)
        .map(|b| {
            let tg = instance.target(b);
            (0..=below[b])
                .map(|i| {
                    // Current height of the anchor at level i; the ride to it
                    // crosses every left stack at one unit lower.
                    let h = tg.height - i;
                    let surface = h - 1;
                    let mut energy = (instance.stack_height(tg.stack) - tg.height) as u64;
                    for t in 1..tg.stack {
                        let left = instance.stack_height(t);
                        if left < surface {
                            return None;
                        }
                        energy += (left - surface) as u64;
                    }
                    Some(energy)
                })
                .collect()
        })
        .collect();

    SparseView {
        below,
        left_support,
        anchor_energy,
        occupied_stacks,
    }
}

/// Errors from the closed-form cycle energy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnergyFormError {
    /// The batch is empty or the named anchor is not its topmost-rightmost member.
    BadAnchor { anchor: usize },
    /// The stated level disagrees with the state.
    LevelMismatch {
        anchor: usize,
        stated: u32,
        actual: u32,
    },
    /// The anchor cannot be ridden to at this level (a left stack is too short).
    Undefined { anchor: usize, level: u32 },
}

impl fmt::Display for EnergyFormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyFormError::BadAnchor { anchor } => {
                write!(
                    f,
                    "target {anchor} is not the batch's topmost-rightmost member"
                )
            }
            EnergyFormError::LevelMismatch {
                anchor,
                stated,
                actual,
            } => write!(
                f,
                "anchor {anchor} stated at level {stated}, but the state puts it at {actual}"
            ),
            EnergyFormError::Undefined { anchor, level } => write!(
                f,
                "no cycle can anchor at target {anchor} on level {level}: a left stack is too short"
            ),
        }
    }
}

impl std::error::Error for EnergyFormError {}

/// Closed-form energy of the cycle that retrieves `batch` from `state`,
/// anchored at `(anchor, level)`. Counts against the pristine-layout energy:
///
/// * minus one per already-retrieved target left of the anchor's stack or
///   above the anchor in its own stack (those lifts are already gone);
/// * minus one per batch member left of the anchor whose current height is
///   at least the anchor's (those ride along instead of being lifted).
///
/// Agreement with the simulator on the canonical plan is a tested invariant.
pub fn cycle_energy(
    view: &SparseView,
    state: &SliceState,
    anchor: usize,
    level: u32,
    batch: &[usize],
) -> Result<u64, EnergyFormError> {
    let inst = state.instance();
    let a = inst.target(anchor);

    let is_best = batch.contains(&anchor)
        && batch.iter().all(|&b| {
            let tg = inst.target(b);
            let h = state.target_height(b).expect("batch member retrieved");
            tg.stack < a.stack || (tg.stack == a.stack && h <= state.target_height(anchor).unwrap())
        });
    if !is_best {
        return Err(EnergyFormError::BadAnchor { anchor });
    }
    let actual = state.level(anchor);
    if actual != level {
        return Err(EnergyFormError::LevelMismatch {
            anchor,
            stated: level,
            actual,
        });
    }
    let base = view.anchor_energy[anchor][level as usize]
        .ok_or(EnergyFormError::Undefined { anchor, level })?;

    let anchor_height = state.target_height(anchor).unwrap();
    let prior: u64 = (0..inst.target_count())
        .filter(|&b| {
            state.is_retrieved(b) && {
                let tg = inst.target(b);
                tg.stack < a.stack || (tg.stack == a.stack && tg.height > a.height)
            }
        })
        .count() as u64;
    let riding: u64 = batch
        .iter()
        .filter(|&&b| {
            b != anchor && {
                let tg = inst.target(b);
                tg.stack < a.stack && state.target_height(b).unwrap() >= anchor_height
            }
        })
        .count() as u64;

    Ok(base - prior - riding)
}
