//! Randomized invariants, each exercised over generator-drawn instances.
//!
//! Every property starts from a `(d, w, h, seed)` generator configuration
//! small enough that exhaustive structures (all 2^d retrieval states, all
//! batches of a state) stay cheap, then asserts an invariant the rest of the
//! crate relies on. Shrinking pulls any counterexample down to a minimal
//! configuration automatically.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sacrp_core::feasibility::check_feasibility;
use sacrp_core::geometry::for_each_batch;
use sacrp_core::sim::resolve_solution;
use sacrp_core::solution::parse_solution_file;
use sacrp_core::solution::write_solution;
use sacrp_core::sparse::{cycle_energy, derive_sparse};
use sacrp_core::{
    generate_instance, parse_instance, plan_cycle, simulate_solution, solve_dp, solve_greedy,
    write_instance, DpOptions, GenConfig, Instance, SliceState,
};
use std::collections::BTreeSet;
use std::time::Duration;

/// Configurations that (almost) always admit a feasible draw: at most half
/// the largest possible grid is requested as targets.
fn small_config() -> impl Strategy<Value = GenConfig> {
    (1u32..=6, 2u32..=6, 2u32..=6, 0u64..1_000_000)
        .prop_filter(
            "targets must fit the grid with room to spare",
            |(d, w, h, _)| d * 2 <= w * h,
        )
        .prop_map(|(d, w, h, seed)| GenConfig::new(d, w, h, seed))
}

/// A drawn instance, or `None` for the rare configuration whose layouts all
/// fail the feasibility screen (the property then passes vacuously).
fn drawn(config: &GenConfig) -> Option<Instance> {
    generate_instance(config).ok()
}

fn dp_energy(instance: &Instance, options: &DpOptions) -> u64 {
    solve_dp(instance, options)
        .expect("instances stay under the size cap")
        .solution
        .expect("feasible instances always solve")
        .total_energy()
}

proptest! {
    /// The generator honours its own contract: exactly `d` targets on
    /// distinct in-bounds cells, sorted canonically, on a feasible layout —
    /// and the JSON form is lossless.
    #[test]
    fn generated_instances_are_well_shaped_and_roundtrip(config in small_config()) {
        let Some(instance) = drawn(&config) else { return Ok(()) };
        prop_assert_eq!(instance.target_count() as u32, config.d);
        prop_assert!(instance.stack_count() as u32 <= config.w);
        prop_assert!(instance.stack_heights().iter().all(|&h| (1..=config.h).contains(&h)));
        let cells: BTreeSet<(u32, u32)> =
            instance.targets().iter().map(|t| (t.stack, t.height)).collect();
        prop_assert_eq!(cells.len(), instance.target_count(), "target cells are distinct");
        for t in instance.targets() {
            prop_assert!(t.stack >= 1 && t.stack as usize <= instance.stack_count());
            prop_assert!(t.height >= 1 && t.height <= instance.stack_height(t.stack));
        }
        prop_assert!(
            instance.targets().windows(2).all(|w| (w[0].stack, w[0].height)
                < (w[1].stack, w[1].height)),
            "targets are sorted by stack then height"
        );
        prop_assert!(check_feasibility(&instance));
        let reparsed = parse_instance(&write_instance(&instance)).expect("own output parses");
        prop_assert_eq!(reparsed, instance);
    }

    /// From any retrieval state, every enumerated batch really is a
    /// retrievable cycle, and its energy agrees across all three derivations:
    /// the incremental count kept during enumeration, the cycle planner, and
    /// the closed form.
    #[test]
    fn enumerated_batches_plan_at_the_stated_energy(
        config in small_config(),
        mask_bits in any::<u64>(),
    ) {
        let Some(instance) = drawn(&config) else { return Ok(()) };
        let view = derive_sparse(&instance);
        let mask = mask_bits & ((1u64 << instance.target_count()) - 1);
        let state = SliceState::from_mask(&instance, mask);
        let mut checked = Ok(());
        for_each_batch(&state, |members, anchor, level, energy| {
            if checked.is_err() {
                return;
            }
            let distinct: BTreeSet<usize> = members.iter().copied().collect();
            let sane = !members.is_empty()
                && distinct.len() == members.len()
                && members.iter().all(|&b| !state.is_retrieved(b));
            let planned = plan_cycle(&state, members).map(|p| p.energy);
            let closed = cycle_energy(&view, &state, anchor, level, members);
            if !sane || planned != Ok(energy) || closed != Ok(energy) {
                checked = Err((members.to_vec(), energy, planned, closed));
            }
        });
        prop_assert!(checked.is_ok(), "mask {:#b}: disagreement {:?}", mask, checked);
    }

    /// The exact solver's plan survives the simulator at its claimed energy;
    /// the heuristic's plan does too, and never undercuts the optimum.
    #[test]
    fn solver_outputs_validate_and_respect_the_optimum(config in small_config()) {
        let Some(instance) = drawn(&config) else { return Ok(()) };
        let exact = solve_dp(&instance, &DpOptions::default())
            .expect("under the size cap")
            .solution
            .expect("feasible instances always solve");
        prop_assert_eq!(
            simulate_solution(&instance, &exact).expect("exact plan validates"),
            exact.total_energy()
        );
        let (greedy, _trace) = solve_greedy(&instance).expect("feasible instances always solve");
        prop_assert_eq!(
            simulate_solution(&instance, &greedy).expect("heuristic plan validates"),
            greedy.total_energy()
        );
        prop_assert!(greedy.total_energy() >= exact.total_energy());
    }

    /// Every dominance-rule combination returns the same optimal energy as
    /// the unpruned search.
    #[test]
    fn dominance_rules_preserve_the_optimum(config in small_config()) {
        let Some(instance) = drawn(&config) else { return Ok(()) };
        let base = DpOptions {
            rule1: false,
            rule2: false,
            rule3: false,
            time_limit: Duration::from_secs(60),
            ..DpOptions::default()
        };
        let reference = dp_energy(&instance, &base);
        for bits in 1..8u32 {
            let options = DpOptions {
                rule1: bits & 1 != 0,
                rule2: bits & 2 != 0,
                rule3: bits & 4 != 0,
                ..base.clone()
            };
            prop_assert_eq!(
                dp_energy(&instance, &options),
                reference,
                "rule set {:03b} changed the optimum",
                bits
            );
        }
    }

    /// A state is a function of the retrieved set alone: retrieving any
    /// subset in any order, in any grouping, lands in the identical state.
    #[test]
    fn retrieval_order_never_changes_the_state(
        config in small_config(),
        mask_bits in any::<u64>(),
        perm_seed in any::<u64>(),
        cut_bits in any::<usize>(),
    ) {
        let Some(instance) = drawn(&config) else { return Ok(()) };
        let mask = mask_bits & ((1u64 << instance.target_count()) - 1);
        let mut subset: Vec<usize> =
            (0..instance.target_count()).filter(|b| mask >> b & 1 == 1).collect();
        subset.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let expected = SliceState::from_mask(&instance, mask);

        let cut = cut_bits % (subset.len() + 1);
        let two_chunks = SliceState::initial(&instance)
            .after(&subset[..cut])
            .after(&subset[cut..]);
        prop_assert_eq!(&two_chunks, &expected);

        let one_by_one = subset
            .iter()
            .fold(SliceState::initial(&instance), |state, &b| state.after(&[b]));
        prop_assert_eq!(&one_by_one, &expected);
    }

    /// A solution written to the interchange format and read back resolves
    /// to the same cycles at the same energies.
    #[test]
    fn solutions_roundtrip_through_the_file_format(config in small_config()) {
        let Some(instance) = drawn(&config) else { return Ok(()) };
        let original = solve_dp(&instance, &DpOptions::default())
            .expect("under the size cap")
            .solution
            .expect("feasible instances always solve");
        let text = write_solution(&original);
        let file = parse_solution_file(&text).expect("own output parses");
        let resolved = resolve_solution(&instance, &file).expect("own output resolves");
        prop_assert_eq!(resolved.cycles.len(), original.cycles.len());
        for (new, old) in resolved.cycles.iter().zip(&original.cycles) {
            prop_assert_eq!(&new.targets, &old.targets);
            prop_assert_eq!(new.energy, old.energy);
        }
        prop_assert_eq!(resolved.total_energy(), original.total_energy());
    }
}
