//! Exact solver: shortest path over retrieved-set bitmask states.
//!
//! States are the 2^n subsets of retrieved targets; a transition retrieves
//! one enumerated batch and costs its cycle energy. Every transition strictly
//! increases the popcount, so states are relaxed stage by stage (popcount
//! ascending, bitmask ascending within a stage) — a plain DAG shortest path.
//!
//! Three dominance rules (each individually toggleable, all exactness-
//! preserving) shrink the transition set:
//!
//! 1. a sole-in-stack, strictly highest, leftmost, accessible target may be
//!    forced as a singleton cycle — it can never share a cycle, and taking
//!    it first never costs more;
//! 2. a singleton batch that takes the lower of two accessible stacked
//!    targets is dropped — the singleton that takes the upper one instead is
//!    cheaper and reaches an identical layout (the upper target falls into
//!    the vacated cell, and targets are interchangeable); only the
//!    one-target arc is dominated, since a larger batch holding the lower
//!    target has no such swap partner (retrieving the upper target one row
//!    higher needs carry support the rest of the batch may not provide);
//! 3. a batch that strands a free rider — a sole-in-stack accessible target
//!    at the same height, right of a member, nothing unretrieved between,
//!    still retrievable together and leaving a feasible state — is dropped
//!    in favour of the batch that includes it.
//!
//! Rule 1's height clause must be strict: with a tie, the forced target can
//! share a row with the other one, and splitting them can lift extra ULs
//! (stacks [2,1] with targets (1,1),(2,1): together costs 1, split costs 2).

use crate::feasibility::{feasibility_violation, FeasibilityViolation};
use crate::geometry::{for_each_batch, plan_cycle};
use crate::instance::Instance;
use crate::solution::Solution;
use crate::state::SliceState;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::time::{Duration, Instant};

/// Bitmask states put a hard ceiling on instance size; beyond this the arrays
/// alone are unreasonable.
pub const DEFAULT_DP_CAP: usize = 28;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpOptions {
    pub rule1: bool,
    pub rule2: bool,
    pub rule3: bool,
    /// Skip transitions into states from which some remaining target can
    /// never be retrieved. Such states are dead ends either way; skipping
    /// them early is exactness-preserving.
    pub prune_infeasible: bool,
    /// Expand the states of a stage in parallel. Results are bit-identical
    /// to sequential runs: relaxations are applied in state order.
    pub parallel: bool,
    pub time_limit: Duration,
    pub max_targets: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions {
            rule1: true,
            rule2: true,
            rule3: true,
            prune_infeasible: true,
            parallel: false,
            time_limit: Duration::from_secs(600),
            max_targets: DEFAULT_DP_CAP,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DpStats {
    pub total_states: u64,
    pub explored_states: u64,
    pub generated_transitions: u64,
    pub runtime_ms: u64,
    pub timed_out: bool,
    pub rule1_forced: u64,
    pub rule2_pruned: u64,
    pub rule3_pruned: u64,
    pub infeasible_pruned: u64,
}

impl DpStats {
    /// Everything except the wall-clock reading — the part that must be
    /// reproducible across runs and thread counts.
    pub fn counts(&self) -> (u64, u64, u64, bool, u64, u64, u64, u64) {
        (
            self.total_states,
            self.explored_states,
            self.generated_transitions,
            self.timed_out,
            self.rule1_forced,
            self.rule2_pruned,
            self.rule3_pruned,
            self.infeasible_pruned,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DpError {
    TooManyTargets { count: usize, max: usize },
    Infeasible(FeasibilityViolation),
    ZeroTimeLimit,
}

impl fmt::Display for DpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DpError::TooManyTargets { count, max } => {
                write!(
                    f,
                    "instance has {count} targets; the bitmask solver caps at {max}"
                )
            }
            DpError::Infeasible(v) => write!(f, "instance is infeasible: {v}"),
            DpError::ZeroTimeLimit => write!(f, "time limit must be positive"),
        }
    }
}

impl std::error::Error for DpError {}

/// Solver output: the optimal solution, or `None` with `stats.timed_out` set
/// when the time limit struck first (no incumbent is kept).
#[derive(Debug, Clone, PartialEq)]
pub struct DpOutcome {
    pub solution: Option<Solution>,
    pub stats: DpStats,
}

/// The forced target of dominance rule 1, if any: accessible, the only
/// unretrieved target of its stack, strictly higher than every other
/// unretrieved target, and in the leftmost stack holding one.
pub fn dominance_rule_1(state: &SliceState) -> Option<usize> {
    let inst = state.instance();
    let mut best: Option<usize> = None; // candidate in the leftmost occupied stack
    for b in state.remaining() {
        match best {
            Some(cur) if inst.target(cur).stack <= inst.target(b).stack => {}
            _ => best = Some(b),
        }
    }
    let i = best?;
    let stack = inst.target(i).stack;
    let height = state.target_height(i).unwrap();
    let clauses = state.remaining().all(|b| {
        b == i || (inst.target(b).stack != stack && state.target_height(b).unwrap() < height)
    });
    (clauses && state.singleton_accessible(i)).then_some(i)
}

/// All (upper, lower) pairs of rule 2: both unretrieved and accessible, the
/// upper directly on top of the lower in the same stack.
fn rule2_pairs(state: &SliceState) -> Vec<(usize, usize)> {
    let inst = state.instance();
    state
        .remaining()
        .filter(|&lower| state.singleton_accessible(lower))
        .filter_map(|lower| {
            let s = inst.target(lower).stack;
            let h = state.target_height(lower).unwrap();
            let upper = state.target_at(s, h + 1)?;
            (state.singleton_accessible(upper)).then_some((upper, lower))
        })
        .collect()
}

/// True if rule 2 discards `batch`: it retrieves exactly the lower member of
/// an accessible stacked pair. The singleton that takes the upper member
/// instead costs strictly less and leaves an identical layout, so this arc
/// can never be on a unique shortest path. Larger batches holding the lower
/// member are kept: their swap partner (retrieving the upper member one row
/// higher) needs carry support at that row which the rest of the batch may
/// not provide, so they are not dominated in general.
pub fn dominance_rule_2(state: &SliceState, batch: &[usize]) -> bool {
    let [sole] = batch[..] else { return false };
    rule2_pairs(state).iter().any(|&(_, lower)| sole == lower)
}

/// The unique possible rule-3 partner of `i`: the unretrieved target at
/// `i`'s current height in the nearest stack to the left that holds any
/// unretrieved target (clause 4 rules out anything farther).
fn rule3_partner(state: &SliceState, i: usize) -> Option<usize> {
    let inst = state.instance();
    let stack = inst.target(i).stack;
    let height = state.target_height(i).unwrap();
    let nearest = state
        .remaining()
        .filter(|&b| b != i && inst.target(b).stack < stack)
        .map(|b| inst.target(b).stack)
        .max()?;
    state.target_at(nearest, height)
}

fn sole_in_stack(state: &SliceState, i: usize) -> bool {
    let stack = state.instance().target(i).stack;
    state
        .remaining()
        .all(|b| b == i || state.instance().target(b).stack != stack)
}

/// True if rule 3 discards the `batch_without` arc in favour of
/// `batch_with` = `batch_without` ∪ {i}: i is accessible and alone in its
/// stack, sits at the same current height as a member to its left with no
/// unretrieved targets between, the joint batch is single-cycle retrievable,
/// and taking it leaves a feasible state.
pub fn dominance_rule_3(
    state: &SliceState,
    batch_with_i: &[usize],
    batch_without_i: &[usize],
) -> bool {
    let extra: Vec<usize> = batch_with_i
        .iter()
        .copied()
        .filter(|b| !batch_without_i.contains(b))
        .collect();
    let [i] = extra[..] else { return false };
    if batch_without_i.iter().any(|b| !batch_with_i.contains(b)) {
        return false;
    }
    if !state.singleton_accessible(i) || !sole_in_stack(state, i) {
        return false;
    }
    let Some(partner) = rule3_partner(state, i) else {
        return false;
    };
    if !batch_without_i.contains(&partner) {
        return false;
    }
    if plan_cycle(state, batch_with_i).is_err() {
        return false;
    }
    let after = state.after(batch_with_i);
    crate::feasibility::state_feasible(&after)
}

/// Per-state context shared by all transition checks of one expansion.
struct StateContext<'a, 'i> {
    state: &'a SliceState<'i>,
    /// `h_current − unretrieved-below count` per remaining target; invariant
    /// under retrievals below, so post-batch feasibility only needs current
    /// stack heights.
    feas_key: Vec<Option<u32>>,
    rule2: Vec<(usize, usize)>,
    rule3: Vec<(usize, usize)>, // (i, partner) with partner bit required
}

impl<'a, 'i> StateContext<'a, 'i> {
    fn new(state: &'a SliceState<'i>, options: &DpOptions) -> Self {
        let inst = state.instance();
        let n = inst.target_count();
        let mut feas_key = vec![None; n];
        for b in state.remaining() {
            let below = inst.targets_below(b) - state.level(b);
            feas_key[b] = Some(state.target_height(b).unwrap() - below);
        }
        let rule2 = if options.rule2 {
            rule2_pairs(state)
        } else {
            Vec::new()
        };
        let rule3 = if options.rule3 {
            state
                .remaining()
                .filter(|&i| state.singleton_accessible(i) && sole_in_stack(state, i))
                .filter_map(|i| rule3_partner(state, i).map(|p| (i, p)))
                .collect()
        } else {
            Vec::new()
        };
        StateContext {
            state,
            feas_key,
            rule2,
            rule3,
        }
    }

    /// Would retrieving `batch` leave every remaining target reachable?
    /// Equivalent to a full feasibility check of the successor state, using
    /// the precomputed keys instead of rebuilding it.
    fn leaves_feasible(&self, batch: u64) -> bool {
        let inst = self.state.instance();
        let m = inst.stack_count();
        let mut removed = vec![0u32; m];
        for b in 0..inst.target_count() {
            if batch >> b & 1 == 1 {
                removed[inst.target(b).stack as usize - 1] += 1;
            }
        }
        // prefix_min[t] = min over stacks 1..=t+1 of the successor height
        let mut prefix_min = vec![u32::MAX; m];
        let mut run = u32::MAX;
        for t in 0..m {
            run = run.min(self.state.stack_heights()[t] - removed[t]);
            prefix_min[t] = run;
        }
        self.state.remaining().all(|b| {
            if batch >> b & 1 == 1 {
                return true;
            }
            let s = inst.target(b).stack as usize;
            let key = self.feas_key[b].unwrap();
            s == 1 || prefix_min[s - 2] + 1 >= key
        })
    }

    fn rule2_prunes(&self, batch: u64) -> bool {
        self.rule2.iter().any(|&(_, lower)| batch == 1 << lower)
    }

    fn rule3_prunes(&self, batch: u64, scratch: &mut Vec<usize>) -> bool {
        for &(i, partner) in &self.rule3 {
            if batch >> partner & 1 == 0 || batch >> i & 1 == 1 {
                continue;
            }
            let joint = batch | 1 << i;
            scratch.clear();
            scratch
                .extend((0..self.state.instance().target_count()).filter(|b| joint >> b & 1 == 1));
            if plan_cycle(self.state, scratch).is_ok() && self.leaves_feasible(joint) {
                return true;
            }
        }
        false
    }
}

/// Transitions generated from one state, plus the pruning tallies.
struct Expansion {
    arcs: Vec<(u64, u32)>, // (successor mask, cycle cost)
    rule1_forced: u64,
    rule2_pruned: u64,
    rule3_pruned: u64,
    infeasible_pruned: u64,
}

fn expand_state(instance: &Instance, mask: u64, options: &DpOptions) -> Expansion {
    let state = SliceState::from_mask(instance, mask);
    let ctx = StateContext::new(&state, options);
    let mut exp = Expansion {
        arcs: Vec::new(),
        rule1_forced: 0,
        rule2_pruned: 0,
        rule3_pruned: 0,
        infeasible_pruned: 0,
    };

    let consider = |batch: u64, energy: u64, exp: &mut Expansion| {
        if options.prune_infeasible && !ctx.leaves_feasible(batch) {
            exp.infeasible_pruned += 1;
            return;
        }
        debug_assert!(energy <= u32::MAX as u64);
        exp.arcs.push((mask | batch, energy as u32));
    };

    if options.rule1 {
        if let Some(i) = dominance_rule_1(&state) {
            exp.rule1_forced = 1;
            let plan = plan_cycle(&state, &[i]).expect("forced target is accessible");
            consider(1 << i, plan.energy, &mut exp);
            return exp;
        }
    }

    let mut scratch = Vec::new();
    for_each_batch(&state, |members, _anchor, _level, energy| {
        let batch = members.iter().fold(0u64, |m, &b| m | 1 << b);
        if options.rule2 && ctx.rule2_prunes(batch) {
            exp.rule2_pruned += 1;
            return;
        }
        if options.rule3 && ctx.rule3_prunes(batch, &mut scratch) {
            exp.rule3_pruned += 1;
            return;
        }
        consider(batch, energy, &mut exp);
    });
    exp
}

/// Exact minimum-energy retrieval by staged relaxation over all 2^n
/// retrieved-sets. Errors on infeasible input; on timeout returns stats with
/// no solution.
pub fn solve_dp(instance: &Instance, options: &DpOptions) -> Result<DpOutcome, DpError> {
    let n = instance.target_count();
    if n > options.max_targets || n > DEFAULT_DP_CAP {
        return Err(DpError::TooManyTargets {
            count: n,
            max: options.max_targets.min(DEFAULT_DP_CAP),
        });
    }
    if options.time_limit.is_zero() {
        return Err(DpError::ZeroTimeLimit);
    }
    if let Some(violation) = feasibility_violation(instance) {
        return Err(DpError::Infeasible(violation));
    }

    let start = Instant::now();
    let full: u64 = (1u64 << n) - 1;
    let mut stats = DpStats {
        total_states: 1u64 << n,
        ..DpStats::default()
    };
    let mut dist: Vec<u32> = vec![u32::MAX; 1 << n];
    let mut pred: Vec<u32> = vec![u32::MAX; 1 << n];
    dist[0] = 0;

    'stages: for stage in 0..n as u32 {
        let mut reached: Vec<u64> = Vec::new();
        for_each_mask_of_popcount(n as u32, stage, |mask| {
            if dist[mask as usize] != u32::MAX {
                reached.push(mask);
            }
        });

        let expand = |mask: u64| {
            (start.elapsed() <= options.time_limit)
                .then(|| (mask, expand_state(instance, mask, options)))
        };
        let expansions: Option<Vec<(u64, Expansion)>> = if options.parallel {
            reached.par_iter().map(|&mask| expand(mask)).collect()
        } else {
            reached.iter().map(|&mask| expand(mask)).collect()
        };
        let Some(expansions) = expansions else {
            stats.timed_out = true;
            break 'stages;
        };

        for (mask, exp) in expansions {
            stats.explored_states += 1;
            stats.rule1_forced += exp.rule1_forced;
            stats.rule2_pruned += exp.rule2_pruned;
            stats.rule3_pruned += exp.rule3_pruned;
            stats.infeasible_pruned += exp.infeasible_pruned;
            let base = dist[mask as usize];
            for (succ, cost) in exp.arcs {
                stats.generated_transitions += 1;
                let candidate = base + cost;
                if candidate < dist[succ as usize] {
                    dist[succ as usize] = candidate;
                    pred[succ as usize] = mask as u32;
                }
            }
        }
    }

    stats.runtime_ms = start.elapsed().as_millis() as u64;
    if stats.timed_out {
        return Ok(DpOutcome {
            solution: None,
            stats,
        });
    }
    assert_ne!(
        dist[full as usize],
        u32::MAX,
        "feasible instance must reach the all-retrieved state"
    );

    // Walk predecessors back from the all-retrieved state; each step's batch
    // is the bit difference, re-planned canonically.
    let mut masks = vec![full];
    while *masks.last().unwrap() != 0 {
        masks.push(pred[*masks.last().unwrap() as usize] as u64);
    }
    masks.reverse();
    let mut cycles = Vec::with_capacity(masks.len() - 1);
    for w in masks.windows(2) {
        let state = SliceState::from_mask(instance, w[0]);
        let members: Vec<usize> = (0..n).filter(|b| (w[1] ^ w[0]) >> b & 1 == 1).collect();
        let plan = plan_cycle(&state, &members).expect("relaxed arcs carry retrievable batches");
        cycles.push(plan);
    }
    let solution = Solution { cycles };
    debug_assert_eq!(u64::from(dist[full as usize]), solution.total_energy());
    Ok(DpOutcome {
        solution: Some(solution),
        stats,
    })
}

/// Visits every `n`-bit mask with exactly `k` bits set, in ascending order.
fn for_each_mask_of_popcount<F: FnMut(u64)>(n: u32, k: u32, mut f: F) {
    if k > n {
        return;
    }
    if k == 0 {
        f(0);
        return;
    }
    let limit = 1u64 << n;
    let mut mask = (1u64 << k) - 1;
    while mask < limit {
        f(mask);
        // Gosper's hack: next mask with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
}
