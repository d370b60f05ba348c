//! Shared fixtures for unit tests.

use crate::instance::{Instance, Target};

/// The worked four-stack example used throughout the test suite:
/// stacks (5, 4, 2, 4) with six targets. Target indices:
///
/// ```text
/// 0: (1,4)   1: (4,4)   2: (1,3)   3: (2,3)   4: (4,3)   5: (1,2)
/// ```
pub fn four_stack_example() -> Instance {
    Instance::new(
        vec![5, 4, 2, 4],
        vec![
            Target {
                stack: 1,
                height: 4,
            },
            Target {
                stack: 4,
                height: 4,
            },
            Target {
                stack: 1,
                height: 3,
            },
            Target {
                stack: 2,
                height: 3,
            },
            Target {
                stack: 4,
                height: 3,
            },
            Target {
                stack: 1,
                height: 2,
            },
        ],
    )
    .unwrap()
}

/// Builds an instance from `(stacks, targets)` pairs, panicking on invalid input.
pub fn instance(stacks: &[u32], targets: &[(u32, u32)]) -> Instance {
    Instance::new(
        stacks.to_vec(),
        targets
            .iter()
            .map(|&(stack, height)| Target { stack, height })
            .collect(),
    )
    .unwrap()
}
