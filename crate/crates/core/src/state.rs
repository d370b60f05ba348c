//! Mid-retrieval snapshots of a slice.
//!
//! Retrieving a target removes it from its stack; every UL above it drops by
//! one. The state of a slice is therefore fully determined by the set of
//! already-retrieved targets: current stack heights and current target
//! heights are derived quantities, recomputed here so that two states built
//! from equal retrieved-sets are always identical.

use crate::instance::Instance;

/// A snapshot of the slice after some set of targets has been retrieved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceState<'a> {
    instance: &'a Instance,
    retrieved: Vec<bool>,
    /// Current height of each stack, indexed `0..m` for stacks `1..=m`.
    stack_heights: Vec<u32>,
    /// Current height of each target; `None` once retrieved.
    target_heights: Vec<Option<u32>>,
}

impl<'a> SliceState<'a> {
    /// The initial state: nothing retrieved.
    pub fn initial(instance: &'a Instance) -> Self {
        Self::from_retrieved(instance, &vec![false; instance.target_count()])
    }

    /// Builds the state in which exactly the flagged targets are retrieved.
    pub fn from_retrieved(instance: &'a Instance, retrieved: &[bool]) -> Self {
        assert_eq!(
            retrieved.len(),
            instance.target_count(),
            "retrieved-set size mismatch"
        );
        let mut stack_heights: Vec<u32> = instance.stack_heights().to_vec();
        let mut target_heights: Vec<Option<u32>> = Vec::with_capacity(retrieved.len());
        for (b, tg) in instance.targets().iter().enumerate() {
            if retrieved[b] {
                target_heights.push(None);
                stack_heights[tg.stack as usize - 1] -= 1;
            } else {
                // A target drops one height unit per retrieved target that
                // started below it in the same stack; non-targets never leave.
                let dropped = instance
                    .targets()
                    .iter()
                    .enumerate()
                    .filter(|(b2, t2)| {
                        retrieved[*b2] && t2.stack == tg.stack && t2.height < tg.height
                    })
                    .count() as u32;
                target_heights.push(Some(tg.height - dropped));
            }
        }
        SliceState {
            instance,
            retrieved: retrieved.to_vec(),
            stack_heights,
            target_heights,
        }
    }

    /// Builds the state for a retrieved-set given as a bitmask over target
    /// indices (bit `b` set means target `b` is retrieved). Panics if the
    /// instance has more than 64 targets.
    pub fn from_mask(instance: &'a Instance, mask: u64) -> Self {
        assert!(
            instance.target_count() <= 64,
            "bitmask states support at most 64 targets"
        );
        let retrieved: Vec<bool> = (0..instance.target_count())
            .map(|b| mask >> b & 1 == 1)
            .collect();
        Self::from_retrieved(instance, &retrieved)
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn is_retrieved(&self, b: usize) -> bool {
        self.retrieved[b]
    }

    pub fn retrieved(&self) -> &[bool] {
        &self.retrieved
    }

    pub fn remaining(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.retrieved.len()).filter(move |&b| !self.retrieved[b])
    }

    pub fn remaining_count(&self) -> usize {
        self.retrieved.iter().filter(|&&r| !r).count()
    }

    pub fn all_retrieved(&self) -> bool {
        self.retrieved.iter().all(|&r| r)
    }

    /// Current height of stack `t` (1-based).
    pub fn stack_height(&self, stack: u32) -> u32 {
        self.stack_heights[stack as usize - 1]
    }

    pub fn stack_heights(&self) -> &[u32] {
        &self.stack_heights
    }

    /// Current height of target `b`, or `None` if it has been retrieved.
    pub fn target_height(&self, b: usize) -> Option<u32> {
        self.target_heights[b]
    }

    /// Retrieval level of target `b`: how many targets that started below it
    /// in its stack are already retrieved. Defined for unretrieved targets.
    pub fn level(&self, b: usize) -> u32 {
        let cur = self.target_heights[b].expect("level of a retrieved target");
        self.instance.target(b).height - cur
    }

    /// The unretrieved target currently at `(stack, height)`, if any.
    pub fn target_at(&self, stack: u32, height: u32) -> Option<usize> {
        (0..self.target_heights.len()).find(|&b| {
            !self.retrieved[b]
                && self.instance.target(b).stack == stack
                && self.target_heights[b] == Some(height)
        })
    }

    /// The state after additionally retrieving `batch`.
    pub fn after(&self, batch: &[usize]) -> Self {
        let mut retrieved = self.retrieved.clone();
        for &b in batch {
            assert!(!retrieved[b], "target {b} retrieved twice");
            retrieved[b] = true;
        }
        Self::from_retrieved(self.instance, &retrieved)
    }

    /// True if target `b` could be retrieved on its own from this state:
    /// every stack left of it can present a riding surface one below the
    /// target's current height. (The target's own stack can always be cleared
    /// above it.)
    pub fn singleton_accessible(&self, b: usize) -> bool {
        let Some(h) = self.target_heights[b] else {
            return false;
        };
        let stack = self.instance.target(b).stack;
        (1..stack).all(|t| self.stack_height(t) + 1 >= h)
    }
}

/// The anchor of a batch in `state`: the topmost batch member of the
/// rightmost stack the batch touches, with its retrieval level. `None` for
/// an empty batch.
pub fn batch_anchor(state: &SliceState, batch: &[usize]) -> Option<(usize, u32)> {
    let best = batch.iter().copied().max_by_key(|&b| {
        let tg = state.instance().target(b);
        let h = state
            .target_height(b)
            .expect("anchor of a retrieved target");
        (tg.stack, h)
    })?;
    Some((best, state.level(best)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::four_stack_example;

    #[test]
    fn initial_state_mirrors_instance() {
        let inst = four_stack_example();
        let st = SliceState::initial(&inst);
        assert_eq!(st.stack_heights(), &[5, 4, 2, 4]);
        assert_eq!(st.target_height(1), Some(4));
        assert_eq!(st.level(1), 0);
        assert_eq!(st.remaining_count(), 6);
    }

    #[test]
    fn heights_drop_with_retrievals() {
        let inst = four_stack_example();
        // Retrieve targets 0, 2, 3, 4, 5; only target 1 at (4,4) remains.
        let st = SliceState::from_mask(&inst, 0b111101);
        assert_eq!(st.stack_heights(), &[2, 3, 2, 3]);
        assert_eq!(
            st.target_height(1),
            Some(3),
            "drops by one over retrieved (4,3)"
        );
        assert_eq!(st.level(1), 1);
        assert_eq!(st.target_height(0), None);
        assert!(st.singleton_accessible(1));
    }

    #[test]
    fn equal_retrieved_sets_give_identical_states() {
        let inst = four_stack_example();
        let a = SliceState::from_mask(&inst, 0b100101);
        let b = SliceState::from_retrieved(&inst, &[true, false, true, false, false, true]);
        assert_eq!(a, b);
    }

    #[test]
    fn accessibility_depends_on_left_stacks() {
        // A lone tall target behind a short stack cannot be reached alone.
        let inst = crate::testutil::instance(&[2, 4], &[(2, 4)]);
        let st = SliceState::initial(&inst);
        assert!(
            !st.singleton_accessible(0),
            "stack 1 offers height 2, need 3"
        );
        let inst2 = crate::testutil::instance(&[3, 4], &[(2, 4)]);
        let st2 = SliceState::initial(&inst2);
        assert!(st2.singleton_accessible(0));
    }
}
