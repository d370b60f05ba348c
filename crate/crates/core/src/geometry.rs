//! Single-cycle geometry: which target sets can share a cycle, the canonical
//! plan for such a batch, and the enumeration of all batches of a state.
//!
//! A batch is anchored at its topmost member of the rightmost stack it
//! touches. Viewed from the anchor, a retrievable batch is *weakly
//! triangular* at current heights:
//!
//! * its members' heights form a gapless interval;
//! * the rightmost member stack per height rises to the anchor and falls
//!   after it (unimodal silhouette);
//! * between adjacent rows, the overlap demanded by the shuttle's riding
//!   surface is covered by batch members (prefix closure).
//!
//! Batches are grown candidate by candidate. Each growth step is one of four
//! rules relative to the anchor row, and each has a fixed effect on the
//! cycle's energy:
//!
//! | rule               | where the candidate sits            | energy |
//! |--------------------|-------------------------------------|--------|
//! | `SameRow`          | anchor row, left of the anchor      | -1     |
//! | `RowAbove`         | above, riding surface fully covered | -1     |
//! | `RowBelowAdjacent` | one below the anchor row            |  0     |
//! | `RowBelowDeep`     | lower, directly under a member      |  0     |
//!
//! The `-1` rules turn a UL that the anchor's cycle would have lifted into a
//! retrieval; the row-below rules ride piles that are cleared anyway.

use crate::solution::CyclePlan;
use crate::state::{batch_anchor, SliceState};
use std::fmt;

/// Outcome of the three shape tests, at current heights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriangularCheck {
    pub height_continuous: bool,
    pub stack_unimodal: bool,
    pub prefix_closed: bool,
}

impl TriangularCheck {
    pub fn holds(&self) -> bool {
        self.height_continuous && self.stack_unimodal && self.prefix_closed
    }
}

/// Errors from shape checking and planning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeometryError {
    EmptyBatch,
    RetrievedMember {
        target: usize,
    },
    NotTriangular(TriangularCheck),
    /// A stack left of the anchor cannot present the anchor's riding surface.
    LeftStackTooShort {
        stack: u32,
        needed: u32,
        available: u32,
    },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::EmptyBatch => write!(f, "batch is empty"),
            GeometryError::RetrievedMember { target } => {
                write!(f, "batch member {target} is already retrieved")
            }
            GeometryError::NotTriangular(c) => write!(
                f,
                "batch is not weakly triangular (height-continuous: {}, stack-unimodal: {}, \
                 prefix-closed: {})",
                c.height_continuous, c.stack_unimodal, c.prefix_closed
            ),
            GeometryError::LeftStackTooShort {
                stack,
                needed,
                available,
            } => write!(
                f,
                "stack {stack} is too short for the anchor's riding surface: needs {needed}, \
                 holds {available}"
            ),
        }
    }
}

impl std::error::Error for GeometryError {}

/// How a candidate extends a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionRule {
    SameRow,
    RowAbove,
    RowBelowAdjacent,
    RowBelowDeep,
}

/// A legal extension: the matched rule and its effect on cycle energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extension {
    pub rule: ExtensionRule,
    pub energy_delta: i64,
}

impl ExtensionRule {
    pub fn energy_delta(self) -> i64 {
        match self {
            ExtensionRule::SameRow | ExtensionRule::RowAbove => -1,
            ExtensionRule::RowBelowAdjacent | ExtensionRule::RowBelowDeep => 0,
        }
    }
}

/// Why a candidate cannot extend a batch; the first failed requirement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    AlreadyRetrieved,
    AlreadyInBatch,
    /// Candidates right of the anchor never extend it; batches grow leftward.
    RightOfAnchor,
    /// The riding surface one row below the candidate has a hole at `stack`
    /// (an absent cell, a non-target, or a target outside the batch).
    RowAboveGap {
        stack: u32,
    },
    /// Accepting the candidate would overtop the anchor in its own stack.
    WouldOvertopAnchor,
    /// A below-row candidate with no batch member directly above it.
    NoSupportAbove,
    /// A below-row candidate whose left neighbour cell is not in the batch.
    NoLeftNeighbor,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::AlreadyRetrieved => write!(f, "candidate is already retrieved"),
            Rejection::AlreadyInBatch => write!(f, "candidate is already in the batch"),
            Rejection::RightOfAnchor => write!(f, "candidate lies right of the anchor stack"),
            Rejection::RowAboveGap { stack } => {
                write!(
                    f,
                    "riding surface below the candidate is not covered at stack {stack}"
                )
            }
            Rejection::WouldOvertopAnchor => {
                write!(f, "candidate would overtop the anchor in its own stack")
            }
            Rejection::NoSupportAbove => {
                write!(f, "no batch member directly above the candidate")
            }
            Rejection::NoLeftNeighbor => {
                write!(f, "cell left of the candidate is not a batch member")
            }
        }
    }
}

/// Current-position lookup shared by the classifier and the enumerator.
struct Grid {
    /// `cell[t][h-1]` = unretrieved target currently at `(t+1, h)`.
    cell: Vec<Vec<Option<usize>>>,
}

impl Grid {
    fn new(state: &SliceState) -> Self {
        let m = state.instance().stack_count();
        let mut cell: Vec<Vec<Option<usize>>> = (0..m)
            .map(|t| vec![None; state.stack_heights()[t] as usize])
            .collect();
        for b in state.remaining() {
            let stack = state.instance().target(b).stack as usize - 1;
            let h = state.target_height(b).unwrap() as usize;
            cell[stack][h - 1] = Some(b);
        }
        Grid { cell }
    }

    /// The unretrieved target currently at `(stack, height)`, if the cell
    /// exists and holds one.
    fn target_at(&self, stack: u32, height: u32) -> Option<usize> {
        self.cell
            .get(stack as usize - 1)
            .and_then(|col| col.get(height as usize - 1))
            .copied()
            .flatten()
    }
}

fn classify_with_grid(
    state: &SliceState,
    grid: &Grid,
    in_batch: &[bool],
    anchor_stack: u32,
    anchor_height: u32,
    candidate: usize,
) -> Result<Extension, Rejection> {
    if state.is_retrieved(candidate) {
        return Err(Rejection::AlreadyRetrieved);
    }
    if in_batch[candidate] {
        return Err(Rejection::AlreadyInBatch);
    }
    let s = state.instance().target(candidate).stack;
    let h = state.target_height(candidate).unwrap();
    if s > anchor_stack {
        return Err(Rejection::RightOfAnchor);
    }

    let member_at = |stack: u32, height: u32| {
        grid.target_at(stack, height)
            .map(|b| in_batch[b])
            .unwrap_or(false)
    };

    let rule = if h == anchor_height {
        ExtensionRule::SameRow
    } else if h > anchor_height {
        // The whole riding surface one row down must be batch members, so
        // that this row is reached right after that one is cleared away.
        for t in 1..=s {
            if !member_at(t, h - 1) {
                return Err(Rejection::RowAboveGap { stack: t });
            }
        }
        if s == anchor_stack {
            return Err(Rejection::WouldOvertopAnchor);
        }
        ExtensionRule::RowAbove
    } else {
        if h + 1 < anchor_height && !member_at(s, h + 1) {
            return Err(Rejection::NoSupportAbove);
        }
        if s > 1 && !member_at(s - 1, h) {
            return Err(Rejection::NoLeftNeighbor);
        }
        if h + 1 == anchor_height {
            ExtensionRule::RowBelowAdjacent
        } else {
            ExtensionRule::RowBelowDeep
        }
    };
    Ok(Extension {
        rule,
        energy_delta: rule.energy_delta(),
    })
}

/// Decides whether `candidate` may join `batch` (non-empty, unretrieved
/// members) in `state`, and under which rule.
pub fn classify_extension(
    state: &SliceState,
    batch: &[usize],
    candidate: usize,
) -> Result<Extension, Rejection> {
    let (anchor, _) = batch_anchor(state, batch).expect("batch must not be empty");
    let grid = Grid::new(state);
    let mut in_batch = vec![false; state.instance().target_count()];
    for &b in batch {
        in_batch[b] = true;
    }
    classify_with_grid(
        state,
        &grid,
        &in_batch,
        state.instance().target(anchor).stack,
        state.target_height(anchor).unwrap(),
        candidate,
    )
}

/// Runs the three shape tests on `batch` at current heights.
pub fn is_weakly_triangular(
    state: &SliceState,
    batch: &[usize],
) -> Result<TriangularCheck, GeometryError> {
    if batch.is_empty() {
        return Err(GeometryError::EmptyBatch);
    }
    if let Some(&b) = batch.iter().find(|&&b| state.is_retrieved(b)) {
        return Err(GeometryError::RetrievedMember { target: b });
    }

    // Row profile: for each member height (ascending), the rightmost stack.
    let mut rows: Vec<(u32, u32)> = Vec::new(); // (height, max stack)
    let mut sorted: Vec<(u32, u32)> = batch
        .iter()
        .map(|&b| {
            (
                state.target_height(b).unwrap(),
                state.instance().target(b).stack,
            )
        })
        .collect();
    sorted.sort_unstable();
    for (h, s) in sorted {
        match rows.last_mut() {
            Some((rh, rs)) if *rh == h => *rs = (*rs).max(s),
            _ => rows.push((h, s)),
        }
    }

    let height_continuous = rows.windows(2).all(|w| w[1].0 == w[0].0 + 1);

    let peak = rows.iter().map(|&(_, s)| s).max().unwrap();
    let first = rows.iter().position(|&(_, s)| s == peak).unwrap();
    let last = rows.iter().rposition(|&(_, s)| s == peak).unwrap();
    let stack_unimodal = rows[first..=last].iter().all(|&(_, s)| s == peak)
        && rows[..=first].windows(2).all(|w| w[0].1 <= w[1].1)
        && rows[last..].windows(2).all(|w| w[0].1 >= w[1].1);

    // Prefix closure relative to the intrinsic anchor: each member must be
    // reachable through batch members alone — rows above the anchor ride a
    // fully-membered surface, rows below hang off a member directly above
    // (or the anchor row itself) and extend right one neighbour at a time.
    // Residual piles only step down through retrievals, which is what makes
    // each of these cells a hard requirement rather than a lifting choice.
    let grid = Grid::new(state);
    let mut in_batch = vec![false; state.instance().target_count()];
    for &b in batch {
        in_batch[b] = true;
    }
    let (anchor, _) = batch_anchor(state, batch).expect("non-empty batch");
    let anchor_height = state.target_height(anchor).unwrap();
    let member = |stack: u32, height: u32| {
        grid.target_at(stack, height)
            .map(|b| in_batch[b])
            .unwrap_or(false)
    };
    let prefix_closed = batch.iter().all(|&b| {
        let s = state.instance().target(b).stack;
        let h = state.target_height(b).unwrap();
        if h > anchor_height {
            (1..=s).all(|t| member(t, h - 1))
        } else if h < anchor_height {
            (h + 1 == anchor_height || member(s, h + 1)) && (s == 1 || member(s - 1, h))
        } else {
            true
        }
    });

    Ok(TriangularCheck {
        height_continuous,
        stack_unimodal,
        prefix_closed,
    })
}

/// Builds the canonical plan for `batch` from `state`: clear each touched
/// stack above its topmost member, bring member-free stacks left of the
/// anchor down to the anchor's riding surface, touch nothing right of the
/// anchor; retrieve top row first, left to right inside a row.
pub fn plan_cycle(state: &SliceState, batch: &[usize]) -> Result<CyclePlan, GeometryError> {
    let check = is_weakly_triangular(state, batch)?;
    if !check.holds() {
        return Err(GeometryError::NotTriangular(check));
    }
    let (anchor, level) = batch_anchor(state, batch).expect("non-empty batch");
    let anchor_stack = state.instance().target(anchor).stack;
    let anchor_height = state.target_height(anchor).unwrap();

    let m = state.instance().stack_count() as u32;
    let mut top = vec![None::<u32>; m as usize];
    for &b in batch {
        let s = state.instance().target(b).stack as usize - 1;
        let h = state.target_height(b).unwrap();
        top[s] = Some(top[s].map_or(h, |t: u32| t.max(h)));
    }

    let mut clearances = Vec::with_capacity(m as usize);
    let mut energy = 0u64;
    for t in 1..=m {
        let height = state.stack_height(t);
        let clr = match top[t as usize - 1] {
            Some(member_top) => member_top,
            None if t < anchor_stack => {
                if height + 1 < anchor_height {
                    return Err(GeometryError::LeftStackTooShort {
                        stack: t,
                        needed: anchor_height - 1,
                        available: height,
                    });
                }
                anchor_height - 1
            }
            None => height,
        };
        energy += (height - clr) as u64;
        clearances.push(clr);
    }

    let mut targets = batch.to_vec();
    targets.sort_by_key(|&b| {
        (
            std::cmp::Reverse(state.target_height(b).unwrap()),
            state.instance().target(b).stack,
        )
    });

    Ok(CyclePlan {
        targets,
        clearances,
        energy,
        anchor: (anchor, level),
    })
}

/// A batch produced by `enumerate_batches`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumeratedBatch {
    /// Members in canonical growth order; the anchor comes first.
    pub members: Vec<usize>,
    pub anchor: usize,
    /// The anchor's retrieval level in the originating state.
    pub level: u32,
    /// Cycle energy of the batch's canonical plan.
    pub energy: u64,
}

/// Calls `f` once per retrievable batch of `state`, with the member list (in
/// canonical growth order), the anchor, its level, and the cycle energy.
///
/// Every anchor is tried in target order; from each anchor, candidates are
/// scanned in the canonical order — anchor row right to left, rows above
/// bottom-up (left to right inside a row), rows below top-down (left to
/// right) — and each batch is produced exactly once because member sets are
/// only ever assembled along that order.
pub fn for_each_batch<F: FnMut(&[usize], usize, u32, u64)>(state: &SliceState, mut f: F) {
    let inst = state.instance();
    let grid = Grid::new(state);
    let mut in_batch = vec![false; inst.target_count()];

    for anchor in 0..inst.target_count() {
        if state.is_retrieved(anchor) || !state.singleton_accessible(anchor) {
            continue;
        }
        let anchor_stack = inst.target(anchor).stack;
        let anchor_height = state.target_height(anchor).unwrap();
        let level = state.level(anchor);

        // Energy of the singleton cycle, straight from current heights.
        let mut base = (state.stack_height(anchor_stack) - anchor_height) as u64;
        for t in 1..anchor_stack {
            base += (state.stack_height(t) + 1 - anchor_height) as u64;
        }

        // Candidates left of (or under) the anchor, in canonical scan order.
        let mut candidates: Vec<(u64, usize)> = state
            .remaining()
            .filter(|&b| b != anchor)
            .filter_map(|b| {
                let s = inst.target(b).stack;
                let h = state.target_height(b).unwrap();
                canonical_key(anchor_stack, anchor_height, s, h).map(|k| (k, b))
            })
            .collect();
        candidates.sort_unstable();

        let mut members = vec![anchor];
        in_batch[anchor] = true;
        f(&members, anchor, level, base);
        grow(
            state,
            &grid,
            &mut in_batch,
            &mut members,
            anchor_stack,
            anchor_height,
            &candidates,
            0,
            base as i64,
            anchor,
            level,
            &mut f,
        );
        in_batch[anchor] = false;
    }
}

/// Scan position of a candidate relative to the anchor, or `None` when it
/// can never extend batches of this anchor.
fn canonical_key(anchor_stack: u32, anchor_height: u32, s: u32, h: u32) -> Option<u64> {
    if s > anchor_stack || (s == anchor_stack && h > anchor_height) {
        return None;
    }
    let (phase, major, minor) = if h == anchor_height {
        (0u64, (anchor_stack - s) as u64, 0u64)
    } else if h > anchor_height {
        (1, (h - anchor_height) as u64, s as u64)
    } else {
        (2, (anchor_height - h) as u64, s as u64)
    };
    Some(phase << 40 | major << 20 | minor)
}

#[allow(clippy::too_many_arguments)]
fn grow<F: FnMut(&[usize], usize, u32, u64)>(
    state: &SliceState,
    grid: &Grid,
    in_batch: &mut Vec<bool>,
    members: &mut Vec<usize>,
    anchor_stack: u32,
    anchor_height: u32,
    candidates: &[(u64, usize)],
    from: usize,
    energy: i64,
    anchor: usize,
    level: u32,
    f: &mut F,
) {
    for idx in from..candidates.len() {
        let b = candidates[idx].1;
        let Ok(ext) = classify_with_grid(state, grid, in_batch, anchor_stack, anchor_height, b)
        else {
            continue;
        };
        let next_energy = energy + ext.energy_delta;
        debug_assert!(next_energy >= 0, "cycle energy can never go negative");
        members.push(b);
        in_batch[b] = true;
        f(members, anchor, level, next_energy as u64);
        grow(
            state,
            grid,
            in_batch,
            members,
            anchor_stack,
            anchor_height,
            candidates,
            idx + 1,
            next_energy,
            anchor,
            level,
            f,
        );
        in_batch[b] = false;
        members.pop();
    }
}

/// Every retrievable batch of `state`, with its canonical-plan energy.
pub fn enumerate_batches(state: &SliceState) -> impl Iterator<Item = EnumeratedBatch> {
    let mut out = Vec::new();
    for_each_batch(state, |members, anchor, level, energy| {
        out.push(EnumeratedBatch {
            members: members.to_vec(),
            anchor,
            level,
            energy,
        });
    });
    out.into_iter()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::simulate_cycle;
    use crate::testutil::{four_stack_example, instance};

    #[test]
    fn shape_tests_on_the_four_stack_example() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        assert!(is_weakly_triangular(&st, &[0, 2, 3, 4, 5]).unwrap().holds());
        let gap = is_weakly_triangular(&st, &[0, 5]).unwrap();
        assert!(!gap.height_continuous, "heights 4 and 2 leave a gap");
        assert!(is_weakly_triangular(&st, &[4]).unwrap().holds());
        assert_eq!(
            is_weakly_triangular(&st, &[]),
            Err(GeometryError::EmptyBatch)
        );
        let done = st.after(&[0]);
        assert_eq!(
            is_weakly_triangular(&done, &[0]),
            Err(GeometryError::RetrievedMember { target: 0 })
        );
    }

    #[test]
    fn plans_the_worked_cycle() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        let plan = plan_cycle(&st, &[0, 2, 3, 4, 5]).unwrap();
        assert_eq!(plan.targets, vec![0, 2, 3, 4, 5]);
        assert_eq!(plan.clearances, vec![4, 3, 2, 3]);
        assert_eq!(plan.energy, 3);
        assert_eq!(plan.anchor, (4, 0));
        let (_, sim) = simulate_cycle(&st, &plan.targets, &plan.clearances).unwrap();
        assert_eq!(sim, plan.energy);
    }

    #[test]
    fn plans_a_two_target_row() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        // Targets 3 and 4 share the row at height 3; stack 1 is member-free
        // and must be brought down to the riding surface.
        let plan = plan_cycle(&st, &[3, 4]).unwrap();
        assert_eq!(plan.targets, vec![3, 4]);
        assert_eq!(plan.clearances, vec![2, 3, 2, 3]);
        assert_eq!(plan.energy, 5);
        let (_, sim) = simulate_cycle(&st, &plan.targets, &plan.clearances).unwrap();
        assert_eq!(sim, 5);
    }

    #[test]
    fn plan_rejects_bad_batches() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        assert!(matches!(
            plan_cycle(&st, &[0, 5]),
            Err(GeometryError::NotTriangular(_))
        ));
        // Anchoring at (4,4) needs stack 3 at height 3; it holds 2.
        assert_eq!(
            plan_cycle(&st, &[1]),
            Err(GeometryError::LeftStackTooShort {
                stack: 3,
                needed: 3,
                available: 2
            })
        );
    }

    #[test]
    fn classifies_the_worked_extensions() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        let same = classify_extension(&st, &[4], 3).unwrap();
        assert_eq!(same.rule, ExtensionRule::SameRow);
        assert_eq!(same.energy_delta, -1);

        let above = classify_extension(&st, &[4, 3, 2], 0).unwrap();
        assert_eq!(above.rule, ExtensionRule::RowAbove);
        assert_eq!(above.energy_delta, -1);

        // (4,4) cannot join: the riding surface at height 3 has no member at
        // stack 3 (the cell does not even exist).
        assert_eq!(
            classify_extension(&st, &[4, 3, 2], 1),
            Err(Rejection::RowAboveGap { stack: 3 })
        );

        let below = classify_extension(&st, &[4, 3, 2, 0], 5).unwrap();
        assert_eq!(below.rule, ExtensionRule::RowBelowAdjacent);
        assert_eq!(below.energy_delta, 0);
    }

    #[test]
    fn classifies_deep_rows_and_rejections() {
        let single = instance(&[3], &[(1, 1), (1, 2), (1, 3)]);
        let st = SliceState::initial(&single);
        assert_eq!(
            classify_extension(&st, &[2], 1).unwrap().rule,
            ExtensionRule::RowBelowAdjacent
        );
        assert_eq!(
            classify_extension(&st, &[2, 1], 0).unwrap().rule,
            ExtensionRule::RowBelowDeep
        );
        assert_eq!(
            classify_extension(&st, &[2], 0),
            Err(Rejection::NoSupportAbove)
        );

        let pair = instance(&[3, 3], &[(1, 2), (2, 3), (2, 2)]);
        let st = SliceState::initial(&pair);
        assert_eq!(
            classify_extension(&st, &[0], 1),
            Err(Rejection::RightOfAnchor)
        );
        // (2,2) under the anchor needs its left neighbour (1,2) in the batch:
        // the anchor's passage pins stack 1's residual at 2, and only a
        // retrieval at (1,2) can step it down to 1.
        assert_eq!(
            classify_extension(&st, &[1], 2),
            Err(Rejection::NoLeftNeighbor)
        );
        assert_eq!(
            classify_extension(&st, &[1, 0], 2).unwrap().rule,
            ExtensionRule::RowBelowAdjacent
        );
        // A deep row likewise cannot spread right over a non-member cell.
        let deep = instance(&[3, 3], &[(2, 3), (2, 2), (2, 1)]);
        let st = SliceState::initial(&deep);
        assert_eq!(
            classify_extension(&st, &[0, 1], 2),
            Err(Rejection::NoLeftNeighbor)
        );
    }

    #[test]
    fn enumerates_the_worked_batches() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        let all: Vec<EnumeratedBatch> = enumerate_batches(&st).collect();

        let full = all
            .iter()
            .find(|eb| {
                let mut m = eb.members.clone();
                m.sort_unstable();
                m == vec![0, 2, 3, 4, 5]
            })
            .expect("the worked five-target batch is retrievable");
        assert_eq!(full.energy, 3);
        assert_eq!(full.anchor, 4);

        let lone = all
            .iter()
            .find(|eb| eb.members == vec![0])
            .expect("the top of stack 1 alone");
        assert_eq!(lone.energy, 1);

        // Target 1 at (4,4) is not singleton-accessible initially, so no
        // batch anchors there.
        assert!(all.iter().all(|eb| eb.anchor != 1));

        let done = SliceState::from_retrieved(&inst, &[true; 6]);
        assert_eq!(enumerate_batches(&done).count(), 0);
    }

    #[test]
    fn emits_each_batch_once_with_plan_energy() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        let mut seen = std::collections::HashSet::new();
        for eb in enumerate_batches(&st) {
            let mut key = eb.members.clone();
            key.sort_unstable();
            assert!(seen.insert(key.clone()), "batch {key:?} emitted twice");

            let plan = plan_cycle(&st, &eb.members).unwrap();
            assert_eq!(
                plan.energy, eb.energy,
                "incremental energy drifted for {key:?}"
            );
            let (_, sim) = simulate_cycle(&st, &plan.targets, &plan.clearances).unwrap();
            assert_eq!(sim, eb.energy);
        }
        assert!(!seen.is_empty());
    }
}
