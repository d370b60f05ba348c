//! Feasibility: can every target be retrieved eventually?
//!
//! Target `b` is retrieved at its lowest possible height once everything
//! below it in its own stack is gone, i.e. at `h(b) - below(b)`. At that
//! moment every stack left of `s(b)` must offer a riding surface one unit
//! lower, and a stack can always be cleared *down* but never grown. So the
//! slice is feasible exactly when, for every target `b` and every stack
//! `t < s(b)`:
//!
//! ```text
//! h(t) >= h(b) - below(b) - 1
//! ```
//!
//! Sufficiency is witnessed by a concrete schedule (`witness_solution`):
//! take targets stack by stack from the right side inwards, bottom targets
//! first, one cycle each. Left stacks still hold their full height, so the
//! bound above is exactly what each cycle needs.

use crate::instance::Instance;
use crate::sim::{infer_clearances, simulate_cycle};
use crate::solution::{CyclePlan, Solution};
use crate::state::{batch_anchor, SliceState};

/// The first violated requirement, if any: target `b` needs stack `t` to be
/// at least `needed` high, but it only reaches `available`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityViolation {
    pub target: usize,
    pub stack: u32,
    pub needed: u32,
    pub available: u32,
}

impl std::fmt::Display for FeasibilityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "target {} needs stack {} at height {} or more, found {}",
            self.target, self.stack, self.needed, self.available
        )
    }
}

/// Finds the first infeasible (target, stack) pair, scanning targets in
/// index order and stacks left to right.
pub fn feasibility_violation(instance: &Instance) -> Option<FeasibilityViolation> {
    for (b, tg) in instance.targets().iter().enumerate() {
        let lowest = tg.height - instance.targets_below(b);
        for t in 1..tg.stack {
            // The riding surface for the final retrieval of b sits at
            // lowest - 1; stacks shorter than that can never support it.
            if instance.stack_height(t) + 1 < lowest {
                return Some(FeasibilityViolation {
                    target: b,
                    stack: t,
                    needed: lowest - 1,
                    available: instance.stack_height(t),
                });
            }
        }
    }
    None
}

/// True when a complete retrieval exists.
pub fn check_feasibility(instance: &Instance) -> bool {
    feasibility_violation(instance).is_none()
}

/// Builds the right-to-left, bottom-up witness schedule: one cycle per
/// target, rightmost stack first, lowest target of a stack first. Returns
/// `None` when the instance is infeasible.
pub fn witness_solution(instance: &Instance) -> Option<Solution> {
    if !check_feasibility(instance) {
        return None;
    }
    let mut order: Vec<usize> = (0..instance.target_count()).collect();
    order.sort_by_key(|&b| {
        let tg = instance.target(b);
        (std::cmp::Reverse(tg.stack), tg.height)
    });

    let mut state = SliceState::initial(instance);
    let mut cycles = Vec::with_capacity(order.len());
    for b in order {
        let targets = vec![b];
        let clearances = infer_clearances(&state, &targets)
            .expect("witness schedule is accessible on a feasible instance");
        let anchor = batch_anchor(&state, &targets).expect("singleton anchor");
        let (next, energy) = simulate_cycle(&state, &targets, &clearances)
            .expect("witness schedule simulates on a feasible instance");
        cycles.push(CyclePlan {
            targets,
            clearances,
            energy,
            anchor,
        });
        state = next;
    }
    Some(Solution { cycles })
}

/// Feasibility of what remains in `state` (same bound, current heights).
pub fn state_feasible(state: &SliceState) -> bool {
    state_violation(state).is_none()
}

/// First violated requirement among unretrieved targets, at current heights.
pub fn state_violation(state: &SliceState) -> Option<FeasibilityViolation> {
    let inst = state.instance();
    for b in state.remaining() {
        let tg = inst.target(b);
        let below = inst
            .targets_in_stack(tg.stack)
            .into_iter()
            .filter(|&b2| !state.is_retrieved(b2) && inst.target(b2).height < tg.height)
            .count() as u32;
        let lowest = state.target_height(b).expect("unretrieved") - below;
        for t in 1..tg.stack {
            if state.stack_height(t) + 1 < lowest {
                return Some(FeasibilityViolation {
                    target: b,
                    stack: t,
                    needed: lowest - 1,
                    available: state.stack_height(t),
                });
            }
        }
    }
    None
}

/// Convenience used by solvers: feasibility of the instance after
/// additionally retrieving `extra` from `state`.
pub fn feasible_after(state: &SliceState, extra: &[usize]) -> bool {
    state_feasible(&state.after(extra))
}

/// Error type shared by solvers that require a feasible input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Infeasible(pub FeasibilityViolation);

impl std::fmt::Display for Infeasible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "instance is infeasible: {}", self.0)
    }
}

impl std::error::Error for Infeasible {}

/// Shared guard for solver entry points.
pub fn require_feasible(instance: &Instance) -> Result<(), Infeasible> {
    match feasibility_violation(instance) {
        None => Ok(()),
        Some(v) => Err(Infeasible(v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::simulate_solution;
    use crate::testutil::{four_stack_example, instance};

    #[test]
    fn accepts_the_four_stack_example() {
        assert!(check_feasibility(&four_stack_example()));
    }

    #[test]
    fn rejects_a_tall_target_behind_a_short_stack() {
        let inst = instance(&[2, 4], &[(2, 4)]);
        assert_eq!(
            feasibility_violation(&inst),
            Some(FeasibilityViolation {
                target: 0,
                stack: 1,
                needed: 3,
                available: 2
            })
        );
    }

    #[test]
    fn stack_one_targets_are_always_feasible() {
        // Nothing lies left of stack 1, so any pick list there is fine.
        let inst = instance(&[4, 1], &[(1, 1), (1, 2), (1, 3), (1, 4)]);
        assert!(check_feasibility(&inst));
    }

    #[test]
    fn buried_targets_lower_the_bar() {
        // (2,4) alone behind height 2 fails, but with a target below it the
        // final retrieval happens at height 3 and needs only height 2 left.
        let inst = instance(&[2, 4], &[(2, 4), (2, 1)]);
        assert!(check_feasibility(&inst));
    }

    #[test]
    fn witness_simulates_cleanly() {
        let inst = four_stack_example();
        let sol = witness_solution(&inst).unwrap();
        assert_eq!(sol.cycles.len(), 6, "one cycle per target");
        let energy = simulate_solution(&inst, &sol).unwrap();
        assert_eq!(energy, sol.total_energy());
        assert!(witness_solution(&instance(&[2, 4], &[(2, 4)])).is_none());
    }
}
