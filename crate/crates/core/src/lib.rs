//! Simulator for evolutionary dynamics of a three-level public goods game.
//!
//! Players on a population graph (typically a periodic lattice) each take
//! part in pairwise games with their neighbors, local games over closed
//! neighborhoods, and one global game over the whole population, every level
//! with its own profit rate. Strategies are imitated between rounds through
//! a Fermi rule. The crate provides the payoff engine, the synchronous
//! dynamics, a boundary analysis of imitation probabilities, and a parameter
//! sweep harness with reproducible, seed-derived outputs.

pub mod boundary;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod payoff;
pub mod population;
pub mod strategy;

pub use dynamics::{
    InitSpec, SimulationState, StopCriteria, TargetSelection, TerminalStatus, Trajectory,
    UpdateScheme,
};
pub use error::{Error, Result};
pub use experiments::{LatticeDims, ParamGrid, PhaseLabel, PhaseRecord, SweepSpec};
pub use payoff::{GameParams, PayoffVector};
pub use population::{PopulationGraph, Topology, ViableGroups};
pub use strategy::{Level, Strategy, StrategyProfile, StrategySetting};
