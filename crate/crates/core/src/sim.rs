//! The cycle simulator: the single source of truth for retrieval semantics.
//!
//! A cycle starts by choosing a clearance level `clr(t)` for every stack,
//! with `0 <= clr(t) <= height(t)`. Every UL strictly above the clearance is
//! lifted and held for the whole cycle; the cycle's energy is the number of
//! lifted ULs. What remains standing is the residual pile of the stack, and
//! it shrinks by one each time a target is retrieved from that stack.
//!
//! The shuttle enters from the side of stack 1 and rides on top of the
//! residual piles. Retrieving a target whose current height is `h` from
//! stack `t` at some step of the cycle requires, at that step:
//!
//! * the residual pile of `t` has exactly `h` ULs — the target itself is the
//!   top of the residual pile, nothing unlifted sits above it;
//! * every stack left of `t` has a residual pile of exactly `h - 1` ULs — the
//!   shuttle's riding surface is level and meets the target from the side.
//!
//! All higher-level reasoning (batch geometry, solvers, exported models) is
//! validated against this simulator in the test suite.

use crate::instance::Instance;
use crate::solution::{CyclePlan, CycleRecord, Solution, SolutionFile};
use crate::state::{batch_anchor, SliceState};
use std::fmt;

/// Which accessibility requirement a retrieval violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// The target is not the top of its stack's residual pile.
    StackTop,
    /// A stack left of the target does not present the riding surface.
    Passage,
}

/// Errors raised by the simulator and the clearance reconstructor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    WrongClearanceCount {
        expected: usize,
        found: usize,
    },
    ClearanceOutOfRange {
        stack: u32,
        clearance: u32,
        height: u32,
    },
    AlreadyRetrieved {
        step: usize,
        target: usize,
    },
    /// An accessibility condition failed at `step` (0-based) of a cycle.
    Blocked {
        step: usize,
        target: usize,
        kind: BlockKind,
        stack: u32,
        required: u32,
        actual: u32,
    },
    /// Two retrievals of one cycle need different clearances from one stack.
    ConflictingNeeds {
        step: usize,
        target: usize,
        stack: u32,
        first: u32,
        second: u32,
    },
    /// A retrieval needs a residual pile taller than the stack currently is.
    UnreachableResidual {
        step: usize,
        target: usize,
        stack: u32,
        needed: u32,
        available: u32,
    },
    /// A solution never retrieves this target.
    Uncovered {
        target: usize,
    },
    /// A cycle's stored energy disagrees with the simulated energy.
    EnergyMismatch {
        cycle: usize,
        stated: u64,
        simulated: u64,
    },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::WrongClearanceCount { expected, found } => {
                write!(f, "expected {expected} clearances, found {found}")
            }
            SimError::ClearanceOutOfRange {
                stack,
                clearance,
                height,
            } => write!(
                f,
                "clearance {clearance} on stack {stack} exceeds its current height {height}"
            ),
            SimError::AlreadyRetrieved { step, target } => {
                write!(f, "step {step}: target {target} is already retrieved")
            }
            SimError::Blocked {
                step,
                target,
                kind,
                stack,
                required,
                actual,
            } => {
                let what = match kind {
                    BlockKind::StackTop => "residual top of its stack",
                    BlockKind::Passage => "riding surface on a stack to its left",
                };
                write!(
                    f,
                    "step {step}: target {target} is blocked ({what}): stack {stack} presents \
                     residual {actual}, needs {required}"
                )
            }
            SimError::ConflictingNeeds {
                step,
                target,
                stack,
                first,
                second,
            } => write!(
                f,
                "step {step}: target {target} needs stack {stack} cleared to {second}, but an \
                 earlier retrieval fixed it at {first}"
            ),
            SimError::UnreachableResidual {
                step,
                target,
                stack,
                needed,
                available,
            } => write!(
                f,
                "step {step}: target {target} needs a residual pile of {needed} on stack \
                 {stack}, which only holds {available}"
            ),
            SimError::Uncovered { target } => {
                write!(f, "solution never retrieves target {target}")
            }
            SimError::EnergyMismatch {
                cycle,
                stated,
                simulated,
            } => write!(
                f,
                "cycle {cycle} states energy {stated}, simulation yields {simulated}"
            ),
        }
    }
}

impl std::error::Error for SimError {}

/// Runs one cycle from `state`, retrieving `order` under `clearances`.
/// Returns the state after the cycle and the cycle's energy.
pub fn simulate_cycle<'a>(
    state: &SliceState<'a>,
    order: &[usize],
    clearances: &[u32],
) -> Result<(SliceState<'a>, u64), SimError> {
    let m = state.instance().stack_count();
    if clearances.len() != m {
        return Err(SimError::WrongClearanceCount {
            expected: m,
            found: clearances.len(),
        });
    }
    let mut energy = 0u64;
    for (t, (&clearance, &height)) in clearances.iter().zip(state.stack_heights()).enumerate() {
        if clearance > height {
            return Err(SimError::ClearanceOutOfRange {
                stack: t as u32 + 1,
                clearance,
                height,
            });
        }
        energy += (height - clearance) as u64;
    }

    let mut residual = clearances.to_vec();
    let mut taken = vec![false; state.instance().target_count()];
    for (step, &b) in order.iter().enumerate() {
        if state.is_retrieved(b) || taken[b] {
            return Err(SimError::AlreadyRetrieved { step, target: b });
        }
        taken[b] = true;
        // Heights cannot change under an unlifted target during the cycle:
        // anything below it is buried, so its start-of-cycle height holds.
        let h = state
            .target_height(b)
            .expect("unretrieved target has a height");
        let stack = state.instance().target(b).stack;
        let s = stack as usize - 1;
        if residual[s] != h {
            return Err(SimError::Blocked {
                step,
                target: b,
                kind: BlockKind::StackTop,
                stack,
                required: h,
                actual: residual[s],
            });
        }
        for (t, &actual) in residual.iter().enumerate().take(s) {
            if actual != h - 1 {
                return Err(SimError::Blocked {
                    step,
                    target: b,
                    kind: BlockKind::Passage,
                    stack: t as u32 + 1,
                    required: h - 1,
                    actual,
                });
            }
        }
        residual[s] -= 1;
    }

    Ok((state.after(order), energy))
}

/// Reconstructs the minimal clearances for retrieving `order` in one cycle:
/// each retrieval pins the residual height of its own stack and of every
/// stack to its left, so the clearance of every stack involved is forced.
/// Stacks never ridden over lift nothing.
pub fn infer_clearances(state: &SliceState, order: &[usize]) -> Result<Vec<u32>, SimError> {
    let m = state.instance().stack_count();
    let mut demanded: Vec<Option<u32>> = vec![None; m];
    let mut removed = vec![0u32; m];
    let mut taken = vec![false; state.instance().target_count()];

    let demand = |demanded: &mut Vec<Option<u32>>,
                  step: usize,
                  target: usize,
                  t: usize,
                  level: u32|
     -> Result<(), SimError> {
        let available = state.stack_heights()[t];
        if level > available {
            return Err(SimError::UnreachableResidual {
                step,
                target,
                stack: t as u32 + 1,
                needed: level,
                available,
            });
        }
        match demanded[t] {
            None => {
                demanded[t] = Some(level);
                Ok(())
            }
            Some(prev) if prev == level => Ok(()),
            Some(prev) => Err(SimError::ConflictingNeeds {
                step,
                target,
                stack: t as u32 + 1,
                first: prev,
                second: level,
            }),
        }
    };

    for (step, &b) in order.iter().enumerate() {
        if state.is_retrieved(b) || taken[b] {
            return Err(SimError::AlreadyRetrieved { step, target: b });
        }
        taken[b] = true;
        let h = state
            .target_height(b)
            .expect("unretrieved target has a height");
        let stack = state.instance().target(b).stack;
        let s = stack as usize - 1;
        // The residual pile at this step equals the clearance minus what the
        // cycle already took from the stack, so the clearance is forced.
        demand(&mut demanded, step, b, s, h + removed[s])?;
        for (t, &gone) in removed.iter().enumerate().take(s) {
            demand(&mut demanded, step, b, t, h - 1 + gone)?;
        }
        removed[s] += 1;
    }

    Ok((0..m)
        .map(|t| demanded[t].unwrap_or_else(|| state.stack_heights()[t]))
        .collect())
}

/// Validates a solution against the simulator: every target retrieved
/// exactly once, every cycle accessible under its clearances, every stored
/// cycle energy correct. Returns the total energy.
pub fn simulate_solution(instance: &Instance, solution: &Solution) -> Result<u64, SimError> {
    let mut state = SliceState::initial(instance);
    let mut total = 0u64;
    for (c, cycle) in solution.cycles.iter().enumerate() {
        let (next, energy) = simulate_cycle(&state, &cycle.targets, &cycle.clearances)?;
        if energy != cycle.energy {
            return Err(SimError::EnergyMismatch {
                cycle: c,
                stated: cycle.energy,
                simulated: energy,
            });
        }
        total += energy;
        state = next;
    }
    if let Some(b) = (0..instance.target_count()).find(|&b| !state.is_retrieved(b)) {
        return Err(SimError::Uncovered { target: b });
    }
    Ok(total)
}

/// Turns a solution file into a concrete plan: missing clearances are
/// reconstructed minimally from the retrieval order, present ones are kept
/// and validated by simulation.
pub fn resolve_solution(instance: &Instance, file: &SolutionFile) -> Result<Solution, SimError> {
    let mut state = SliceState::initial(instance);
    let mut cycles = Vec::new();
    for record in &file.cycles {
        let CycleRecord {
            targets,
            clearances,
        } = record;
        if targets.is_empty() {
            continue;
        }
        let clearances = match clearances {
            Some(c) => c.clone(),
            None => infer_clearances(&state, targets)?,
        };
        let anchor = batch_anchor(&state, targets).expect("non-empty cycle has an anchor");
        let (next, energy) = simulate_cycle(&state, targets, &clearances)?;
        cycles.push(CyclePlan {
            targets: targets.clone(),
            clearances,
            energy,
            anchor,
        });
        state = next;
    }
    if let Some(b) = (0..instance.target_count()).find(|&b| !state.is_retrieved(b)) {
        return Err(SimError::Uncovered { target: b });
    }
    Ok(Solution { cycles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solution::parse_solution_file;
    use crate::testutil::four_stack_example;

    #[test]
    fn runs_the_two_cycle_example() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);

        let (st, e1) = simulate_cycle(&st, &[0, 2, 3, 4, 5], &[4, 3, 2, 3]).unwrap();
        assert_eq!(e1, 3, "one UL lifted from each of stacks 1, 2, 4");
        assert_eq!(st.stack_heights(), &[2, 3, 2, 3]);

        let (st, e2) = simulate_cycle(&st, &[1], &[2, 2, 2, 3]).unwrap();
        assert_eq!(e2, 1, "only the UL above the last target is lifted");
        assert!(st.all_retrieved());
    }

    #[test]
    fn rejects_retrieving_the_right_stack_first() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        // Target 4 at (4,3) first: stack 1 still presents residual 4, not 2.
        let err = simulate_cycle(&st, &[4, 0, 2, 3, 5], &[4, 3, 2, 3]).unwrap_err();
        assert_eq!(
            err,
            SimError::Blocked {
                step: 0,
                target: 4,
                kind: BlockKind::Passage,
                stack: 1,
                required: 2,
                actual: 4,
            }
        );
    }

    #[test]
    fn rejects_bad_clearances_and_duplicates() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        assert!(matches!(
            simulate_cycle(&st, &[0], &[4, 3, 2]),
            Err(SimError::WrongClearanceCount {
                expected: 4,
                found: 3
            })
        ));
        assert!(matches!(
            simulate_cycle(&st, &[0], &[6, 3, 2, 3]),
            Err(SimError::ClearanceOutOfRange {
                stack: 1,
                clearance: 6,
                height: 5
            })
        ));
        assert!(matches!(
            simulate_cycle(&st, &[0, 0], &[4, 4, 2, 4]),
            Err(SimError::AlreadyRetrieved { step: 1, target: 0 })
        ));
        let done = st.after(&[0]);
        assert!(matches!(
            simulate_cycle(&done, &[0], &[4, 4, 2, 4]),
            Err(SimError::AlreadyRetrieved { step: 0, target: 0 })
        ));
    }

    #[test]
    fn reconstructs_forced_clearances() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        let clr = infer_clearances(&st, &[0, 2, 3, 4, 5]).unwrap();
        assert_eq!(clr, vec![4, 3, 2, 3]);
        let (_, energy) = simulate_cycle(&st, &[0, 2, 3, 4, 5], &clr).unwrap();
        assert_eq!(energy, 3);

        // Retrieving top-down inside one stack forces nothing elsewhere.
        let single = crate::testutil::instance(&[3], &[(1, 1), (1, 2), (1, 3)]);
        let st = SliceState::initial(&single);
        assert_eq!(infer_clearances(&st, &[2, 1, 0]).unwrap(), vec![3]);
    }

    #[test]
    fn inference_reports_conflicts() {
        // Targets at heights 3 and 1 of one stack cannot share a cycle: after
        // the first retrieval the pile stands at 2, not 1, and no clearance
        // fixes that (the UL at height 2 is not a target).
        let inst = crate::testutil::instance(&[3], &[(1, 3), (1, 1)]);
        let st = SliceState::initial(&inst);
        let err = infer_clearances(&st, &[0, 1]).unwrap_err();
        assert_eq!(
            err,
            SimError::ConflictingNeeds {
                step: 1,
                target: 1,
                stack: 1,
                first: 3,
                second: 2
            }
        );

        // A demand above the current stack height is unreachable.
        let inst = crate::testutil::instance(&[2, 4], &[(2, 4)]);
        let st = SliceState::initial(&inst);
        let err = infer_clearances(&st, &[0]).unwrap_err();
        assert_eq!(
            err,
            SimError::UnreachableResidual {
                step: 0,
                target: 0,
                stack: 1,
                needed: 3,
                available: 2
            }
        );
    }

    #[test]
    fn validates_whole_solutions() {
        let inst = four_stack_example();
        let text = r#"{"cycles":[{"targets":[0,2,3,4,5]},{"targets":[1]}]}"#;
        let file = parse_solution_file(text).unwrap();
        let sol = resolve_solution(&inst, &file).unwrap();
        assert_eq!(sol.cycles[0].clearances, vec![4, 3, 2, 3]);
        assert_eq!(sol.cycles[1].clearances, vec![2, 2, 2, 3]);
        assert_eq!(sol.total_energy(), 4);
        assert_eq!(simulate_solution(&inst, &sol).unwrap(), 4);
        assert_eq!(sol.cycles[0].anchor, (4, 0), "topmost target of stack 4");
        assert_eq!(sol.cycles[1].anchor, (1, 1));

        let partial = parse_solution_file(r#"{"cycles":[{"targets":[0,2,3,4,5]}]}"#).unwrap();
        assert!(matches!(
            resolve_solution(&inst, &partial),
            Err(SimError::Uncovered { target: 1 })
        ));
    }
}
