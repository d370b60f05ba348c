//! Retrieval plans and their on-disk representation.

use serde::{Deserialize, Serialize};

/// One retrieval cycle: the clearance levels chosen at the start of the
/// cycle, the targets retrieved (in order), and the lifting energy paid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclePlan {
    /// Targets retrieved this cycle, in retrieval order (indices into the
    /// instance's target list).
    pub targets: Vec<usize>,
    /// Residual height left unlifted in each stack, indexed `0..m` for
    /// stacks `1..=m`. ULs strictly above the clearance are lifted.
    pub clearances: Vec<u32>,
    /// Number of ULs lifted by this cycle.
    pub energy: u64,
    /// The anchor: the topmost cycle target of the rightmost stack the cycle
    /// touches, together with its retrieval level (targets below it already
    /// retrieved when the cycle starts).
    pub anchor: (usize, u32),
}

/// A complete retrieval plan: every target retrieved exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solution {
    pub cycles: Vec<CyclePlan>,
}

impl Solution {
    pub fn total_energy(&self) -> u64 {
        self.cycles.iter().map(|c| c.energy).sum()
    }
}

/// One cycle as stored on disk. Clearances are optional: when absent, the
/// loader reconstructs the minimal clearances implied by the retrieval order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleRecord {
    pub targets: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clearances: Option<Vec<u32>>,
}

/// On-disk schema for solutions.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct SolutionFile {
    pub cycles: Vec<CycleRecord>,
}

impl From<&Solution> for SolutionFile {
    fn from(sol: &Solution) -> Self {
        SolutionFile {
            cycles: sol
                .cycles
                .iter()
                .map(|c| CycleRecord {
                    targets: c.targets.clone(),
                    clearances: Some(c.clearances.clone()),
                })
                .collect(),
        }
    }
}

/// Parses the JSON form of a solution file.
pub fn parse_solution_file(text: &str) -> Result<SolutionFile, serde_json::Error> {
    serde_json::from_str(text)
}

/// Serializes a solution, including the clearances of every cycle.
pub fn write_solution(sol: &Solution) -> String {
    let mut out =
        serde_json::to_string_pretty(&SolutionFile::from(sol)).expect("solution serialization");
    out.push('\n');
    out
}
