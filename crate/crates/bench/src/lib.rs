//! Shared fixtures for the criterion benchmarks.

use mlpgg::dynamics::{initialize_profile, InitSpec};
use mlpgg::population::PopulationGraph;
use mlpgg::strategy::{StrategyProfile, StrategySetting};

pub fn lattice(side: usize) -> PopulationGraph {
    PopulationGraph::periodic_lattice(side, side).expect("benchmark lattice")
}

pub fn seeded_profile(
    graph: &PopulationGraph,
    setting: StrategySetting,
    seed: u64,
) -> StrategyProfile {
    initialize_profile(graph, &InitSpec::UniformRandom, setting, seed)
        .expect("benchmark profile")
}
