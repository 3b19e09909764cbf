//! Benchmark fixtures shared by the criterion targets.

use timepop::synth::{scaled_history, ScaleConfig};
use timepop::{build_dataset, Dataset};

/// A mid-sized skewed dataset: 1200 users, 800 items, ~120k interactions.
pub fn medium_dataset() -> Dataset {
    let config = ScaleConfig {
        users: 1_200,
        items: 800,
        interactions: 120_000,
    };
    build_dataset(&scaled_history(&config, 17)).expect("synthetic dataset builds")
}
