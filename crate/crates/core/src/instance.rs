//! Problem instances: a slice of stacks and the pick list of targets.
//!
//! A slice is a row of `m` stacks of unit loads (ULs), indexed `1..=m` from
//! the entry side of the aisle. Stack `t` initially holds `h(t)` ULs at
//! heights `1..=h(t)`. A target is a UL that must be retrieved, identified by
//! its initial cell `(stack, height)`. Target indices `0..n` follow the order
//! of the `targets` array in the input file and are used everywhere else in
//! this crate (solutions, exported models, traces).

use serde::{Deserialize, Serialize};
use std::fmt;

/// A target cell in the initial layout. Both coordinates are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Target {
    pub stack: u32,
    pub height: u32,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.stack, self.height)
    }
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    stacks: Vec<u32>,
    targets: Vec<Target>,
}

/// Errors raised while building or parsing an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceError {
    /// The slice must contain at least one stack.
    NoStacks,
    /// Stack heights must be strictly positive.
    EmptyStack { stack: u32 },
    /// A target names a stack outside `1..=m`.
    StackOutOfRange { index: usize, stack: u32 },
    /// A target sits above the top of its stack (or at height 0).
    HeightOutOfRange {
        index: usize,
        target: Target,
        stack_height: u32,
    },
    /// Two targets occupy the same cell.
    DuplicateTarget {
        first: usize,
        second: usize,
        target: Target,
    },
    /// The file is not valid JSON or misses required fields.
    Json(String),
    /// The file declares a format version this build does not understand.
    UnsupportedVersion { found: u32 },
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::NoStacks => write!(f, "instance has no stacks"),
            InstanceError::EmptyStack { stack } => {
                write!(
                    f,
                    "stack {stack} has height 0; stacks must hold at least one UL"
                )
            }
            InstanceError::StackOutOfRange { index, stack } => {
                write!(
                    f,
                    "target {index} names stack {stack}, which is not in the slice"
                )
            }
            InstanceError::HeightOutOfRange {
                index,
                target,
                stack_height,
            } => write!(
                f,
                "target {index} at {target} is outside its stack (height {stack_height})"
            ),
            InstanceError::DuplicateTarget {
                first,
                second,
                target,
            } => write!(f, "targets {first} and {second} both occupy cell {target}"),
            InstanceError::Json(msg) => write!(f, "invalid instance file: {msg}"),
            InstanceError::UnsupportedVersion { found } => {
                write!(
                    f,
                    "unsupported instance format version {found} (expected 1)"
                )
            }
        }
    }
}

impl std::error::Error for InstanceError {}

impl Instance {
    /// Builds an instance, checking all structural invariants.
    pub fn new(stacks: Vec<u32>, targets: Vec<Target>) -> Result<Self, InstanceError> {
        if stacks.is_empty() {
            return Err(InstanceError::NoStacks);
        }
        for (t, &h) in stacks.iter().enumerate() {
            if h == 0 {
                return Err(InstanceError::EmptyStack {
                    stack: t as u32 + 1,
                });
            }
        }
        for (i, tg) in targets.iter().enumerate() {
            if tg.stack == 0 || tg.stack as usize > stacks.len() {
                return Err(InstanceError::StackOutOfRange {
                    index: i,
                    stack: tg.stack,
                });
            }
            let cap = stacks[tg.stack as usize - 1];
            if tg.height == 0 || tg.height > cap {
                return Err(InstanceError::HeightOutOfRange {
                    index: i,
                    target: *tg,
                    stack_height: cap,
                });
            }
        }
        for i in 0..targets.len() {
            for j in i + 1..targets.len() {
                if targets[i] == targets[j] {
                    return Err(InstanceError::DuplicateTarget {
                        first: i,
                        second: j,
                        target: targets[i],
                    });
                }
            }
        }
        Ok(Instance { stacks, targets })
    }

    /// Number of stacks `m` in the slice.
    pub fn stack_count(&self) -> usize {
        self.stacks.len()
    }

    /// Number of targets `n` on the pick list.
    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    /// Initial height of stack `t` (1-based).
    pub fn stack_height(&self, stack: u32) -> u32 {
        self.stacks[stack as usize - 1]
    }

    /// Initial stack heights, indexed `0..m` for stacks `1..=m`.
    pub fn stack_heights(&self) -> &[u32] {
        &self.stacks
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn target(&self, index: usize) -> Target {
        self.targets[index]
    }

    /// Total number of ULs in the slice.
    pub fn total_uls(&self) -> u64 {
        self.stacks.iter().map(|&h| h as u64).sum()
    }

    /// Targets located in `stack`, sorted by increasing height.
    pub fn targets_in_stack(&self, stack: u32) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.targets.len())
            .filter(|&b| self.targets[b].stack == stack)
            .collect();
        ids.sort_by_key(|&b| self.targets[b].height);
        ids
    }

    /// Number of targets initially below target `b` in its own stack.
    pub fn targets_below(&self, b: usize) -> u32 {
        let tb = self.targets[b];
        self.targets
            .iter()
            .filter(|t| t.stack == tb.stack && t.height < tb.height)
            .count() as u32
    }
}

/// On-disk schema for instances (format version 1).
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    version: u32,
    stacks: Vec<u32>,
    targets: Vec<Target>,
}

/// Parses an instance from its JSON representation.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| InstanceError::Json(e.to_string()))?;
    if file.version != 1 {
        return Err(InstanceError::UnsupportedVersion {
            found: file.version,
        });
    }
    Instance::new(file.stacks, file.targets)
}

/// Serializes an instance to JSON. `parse_instance` reproduces the value exactly.
pub fn write_instance(instance: &Instance) -> String {
    let file = InstanceFile {
        version: 1,
        stacks: instance.stacks.clone(),
        targets: instance.targets.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("instance serialization");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::four_stack_example;

    #[test]
    fn parses_the_documented_schema() {
        let text = r#"{"version":1,"stacks":[5,4,2,4],
            "targets":[{"stack":1,"height":4},{"stack":4,"height":4},
                       {"stack":1,"height":3},{"stack":2,"height":3},
                       {"stack":4,"height":3},{"stack":1,"height":2}]}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.stack_count(), 4);
        assert_eq!(inst.target_count(), 6);
        assert_eq!(inst, four_stack_example());
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(matches!(
            Instance::new(vec![], vec![]),
            Err(InstanceError::NoStacks)
        ));
        assert!(matches!(
            Instance::new(vec![3, 0], vec![]),
            Err(InstanceError::EmptyStack { stack: 2 })
        ));
        assert!(matches!(
            Instance::new(
                vec![3],
                vec![Target {
                    stack: 2,
                    height: 1
                }]
            ),
            Err(InstanceError::StackOutOfRange { index: 0, stack: 2 })
        ));
        assert!(matches!(
            Instance::new(
                vec![3],
                vec![Target {
                    stack: 1,
                    height: 4
                }]
            ),
            Err(InstanceError::HeightOutOfRange { index: 0, .. })
        ));
        assert!(matches!(
            Instance::new(
                vec![3],
                vec![
                    Target {
                        stack: 1,
                        height: 2
                    },
                    Target {
                        stack: 1,
                        height: 2
                    }
                ]
            ),
            Err(InstanceError::DuplicateTarget {
                first: 0,
                second: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_instance(r#"{"version":7,"stacks":[1],"targets":[]}"#),
            Err(InstanceError::UnsupportedVersion { found: 7 })
        ));
    }

    #[test]
    fn roundtrips_through_json() {
        let inst = four_stack_example();
        let text = write_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn counts_targets_below() {
        let inst = four_stack_example();
        // Stack 1 holds targets 0, 2, 5 at heights 4, 3, 2.
        assert_eq!(inst.targets_below(0), 2);
        assert_eq!(inst.targets_below(2), 1);
        assert_eq!(inst.targets_below(5), 0);
        assert_eq!(inst.targets_below(1), 1);
        assert_eq!(inst.targets_below(4), 0);
        assert_eq!(inst.targets_below(3), 0);
    }
}
