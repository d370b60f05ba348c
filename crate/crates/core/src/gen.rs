//! Seeded random instance generation.
//!
//! The sampling scheme: the number of stacks is uniform in 1..=w, each stack
//! height is uniform in 1..=h, and the d target cells are drawn uniformly
//! without replacement from the occupied cells. Layouts that cannot hold d
//! targets or fail the feasibility check are rejected and resampled from the
//! same stream, so generation is a pure function of (d, w, h, seed).
//!
//! The random source is ChaCha8 seeded with the 64-bit seed — a portable,
//! documented algorithm, so the same tuple reproduces the same instance on
//! any platform.

use crate::feasibility::check_feasibility;
use crate::instance::{Instance, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Default number of rejected layouts tolerated before giving up.
pub const DEFAULT_MAX_REJECTS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    /// Number of targets.
    pub d: u32,
    /// Maximum number of stacks.
    pub w: u32,
    /// Maximum stack height.
    pub h: u32,
    pub seed: u64,
    pub max_rejects: u32,
}

impl GenConfig {
    pub fn new(d: u32, w: u32, h: u32, seed: u64) -> Self {
        GenConfig {
            d,
            w,
            h,
            seed,
            max_rejects: DEFAULT_MAX_REJECTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenError {
    /// Every sampled layout was rejected; the configuration is too tight
    /// (e.g. fewer than d cells can ever exist).
    RejectsExhausted { attempts: u32 },
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::RejectsExhausted { attempts } => {
                write!(f, "no feasible instance after {attempts} attempts")
            }
        }
    }
}

impl std::error::Error for GenError {}

/// Draws a feasible instance with exactly `d` targets, at most `w` stacks,
/// and stack heights at most `h`. Identical configs yield identical
/// instances.
pub fn generate_instance(config: &GenConfig) -> Result<Instance, GenError> {
    assert!(
        config.d >= 1 && config.w >= 1 && config.h >= 1,
        "generator parameters must be at least 1"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let attempts = config.max_rejects.max(1);
    for _ in 0..attempts {
        let stacks: Vec<u32> = (0..rng.random_range(1..=config.w))
            .map(|_| rng.random_range(1..=config.h))
            .collect();
        let cells: usize = stacks.iter().map(|&x| x as usize).sum();
        if cells < config.d as usize {
            continue;
        }
        // Flat cell index: stack 1 bottom-up, then stack 2, and so on.
        let mut targets: Vec<Target> = rand::seq::index::sample(&mut rng, cells, config.d as usize)
            .iter()
            .map(|flat| {
                let mut rest = flat as u32;
                for (idx, &height) in stacks.iter().enumerate() {
                    if rest < height {
                        return Target {
                            stack: idx as u32 + 1,
                            height: rest + 1,
                        };
                    }
                    rest -= height;
                }
                unreachable!("flat index within total cell count")
            })
            .collect();
        targets.sort_by_key(|t| (t.stack, t.height));
        let instance = Instance::new(stacks, targets).expect("sampled cells are always valid");
        if check_feasibility(&instance) {
            return Ok(instance);
        }
    }
    Err(GenError::RejectsExhausted { attempts })
}
