//! Evolutionary dynamics: rounds of Fermi imitation with optional mutation,
//! absorption detection, and reproducible trajectories.
//!
//! Two update disciplines are supported. Under the synchronous scheme every
//! player draws one target, decides from the payoffs of the pre-round
//! profile, and all adoptions land at once. Under the random-sequential
//! scheme one randomly drawn player at a time decides from payoffs of the
//! current profile, and a round is one such attempt per member of the
//! population. Phase outcomes can differ between the two near phase
//! boundaries: synchronous rounds roughen cooperator/defector interfaces,
//! which favors the exploiting side. A run is fully determined by (graph,
//! initial profile, parameters, scheme, seed).

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::payoff::{pool_free_payoff, total_payoffs, GameParams, PayoffVector};
use crate::population::PopulationGraph;
use crate::strategy::{Strategy, StrategyProfile, StrategySetting};

/// Beyond this magnitude of `beta * difference` the Fermi probability is 0 or
/// 1 to double precision; clamping keeps the evaluation overflow-safe.
const FERMI_CLAMP: f64 = 700.0;

/// Probability that the focus player imitates the target, given the focus
/// payoff `pi_i`, the target payoff `pi_j`, and selection strength `beta`:
/// `1 / (1 + exp(beta * (pi_i - pi_j)))`.
pub fn imitation_probability(pi_i: f64, pi_j: f64, beta: f64) -> f64 {
    imitation_probability_from_difference(pi_i - pi_j, beta)
}

/// Same rule evaluated from a precomputed payoff difference
/// `pi_i - pi_j`. The dynamics feeds it [`PayoffVector::difference`], whose
/// value is independent of the global profit rate by construction.
pub fn imitation_probability_from_difference(difference: f64, beta: f64) -> f64 {
    let x = beta * difference;
    if x >= FERMI_CLAMP {
        0.0
    } else if x <= -FERMI_CLAMP {
        1.0
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// How the imitation target is drawn each round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSelection {
    /// Uniform over the player's graph neighbors (the default reading).
    #[default]
    Neighbor,
    /// Uniform over the whole population except the player itself; offered
    /// for sensitivity checks.
    Population,
}

/// Update discipline of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateScheme {
    /// All players decide simultaneously from the pre-round payoffs.
    #[default]
    Synchronous,
    /// One uniformly drawn player per attempt decides from current payoffs;
    /// a round is `node_count` attempts. Interfaces stay smoother than
    /// under synchronous rounds, which matters for boundary-driven phase
    /// outcomes at gentle selection strength.
    RandomSequential,
}

/// Stop criteria for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopCriteria {
    /// Hard cap on the number of rounds.
    pub max_rounds: u64,
    /// Stop once the strategy frequency vector is unchanged for this many
    /// consecutive rounds; 0 disables the check.
    pub stability_window: u64,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            max_rounds: 100_000,
            stability_window: 2_000,
        }
    }
}

impl StopCriteria {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(Error::ZeroRoundCap);
        }
        Ok(())
    }
}

/// Why a run terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    /// Monomorphic population with no mutation: a fixed point.
    Absorbed(Strategy),
    RoundCapReached,
    FrequencyStable,
}

/// One round-by-round record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub setting: StrategySetting,
    pub node_count: usize,
    /// Strategy counts per round (round 0 included), in the setting's
    /// canonical strategy order. Each row sums to `node_count`.
    pub frequencies: Vec<Vec<u32>>,
    /// Profiles captured at the configured snapshot rounds.
    pub snapshots: Vec<(u64, StrategyProfile)>,
    pub final_profile: StrategyProfile,
    pub status: TerminalStatus,
}

impl Trajectory {
    /// Number of rounds played (the trajectory holds `rounds() + 1` rows).
    pub fn rounds(&self) -> u64 {
        self.frequencies.len() as u64 - 1
    }

    pub fn final_frequencies(&self) -> &[u32] {
        self.frequencies.last().expect("trajectory has round 0")
    }

    pub fn final_fractions(&self) -> Vec<f64> {
        self.final_frequencies()
            .iter()
            .map(|&c| c as f64 / self.node_count as f64)
            .collect()
    }
}

/// Mutable state of a running simulation. The RNG fully determines every
/// stochastic choice; consumption order within a round is fixed: target
/// draws in node order, then imitation draws in node order, then mutation
/// draws in node order (mutation draws only happen when `mu > 0`).
#[derive(Debug, Clone)]
pub struct SimulationState {
    round: u64,
    profile: StrategyProfile,
    setting: StrategySetting,
    rng: ChaCha8Rng,
}

impl SimulationState {
    pub fn new(profile: StrategyProfile, setting: StrategySetting, seed: u64) -> Self {
        SimulationState {
            round: 0,
            profile,
            setting,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn profile(&self) -> &StrategyProfile {
        &self.profile
    }

    pub fn setting(&self) -> StrategySetting {
        self.setting
    }

    /// Advances one synchronous round and returns the payoffs the round was
    /// decided on (those of the pre-round profile).
    pub fn step(
        &mut self,
        graph: &PopulationGraph,
        params: &GameParams,
        target_selection: TargetSelection,
    ) -> Result<PayoffVector> {
        let payoffs = total_payoffs(graph, &self.profile, params)?;
        let n = graph.node_count();

        let targets: Vec<usize> = (0..n)
            .map(|i| match target_selection {
                TargetSelection::Neighbor => {
                    let neighbors = graph.neighbors(i);
                    neighbors[self.rng.random_range(0..neighbors.len())]
                }
                TargetSelection::Population => {
                    let k = self.rng.random_range(0..n - 1);
                    if k >= i {
                        k + 1
                    } else {
                        k
                    }
                }
            })
            .collect();

        let mut next = self.profile.clone();
        for (i, &j) in targets.iter().enumerate() {
            let p = imitation_probability_from_difference(payoffs.difference(i, j), params.beta);
            if self.rng.random::<f64>() < p {
                next.set(i, self.profile.get(j));
            }
        }

        if params.mu > 0.0 {
            Self::mutate(&mut next, self.setting, params.mu, &mut self.rng);
        }

        self.profile = next;
        self.round += 1;
        Ok(payoffs)
    }

    /// Advances one random-sequential round: `node_count` single-player
    /// update attempts, each deciding from payoffs of the current profile.
    /// Per attempt the RNG yields the focus draw, the target draw, and the
    /// imitation uniform, in that order; mutation draws follow the round as
    /// in [`SimulationState::step`].
    pub fn sequential_round(
        &mut self,
        graph: &PopulationGraph,
        params: &GameParams,
        target_selection: TargetSelection,
    ) -> Result<()> {
        params.validate()?;
        let n = graph.node_count();
        if self.profile.len() != n {
            return Err(Error::ProfileSizeMismatch {
                profile_len: self.profile.len(),
                node_count: n,
            });
        }
        for _ in 0..n {
            let i = self.rng.random_range(0..n);
            let j = match target_selection {
                TargetSelection::Neighbor => {
                    let neighbors = graph.neighbors(i);
                    neighbors[self.rng.random_range(0..neighbors.len())]
                }
                TargetSelection::Population => {
                    let k = self.rng.random_range(0..n - 1);
                    if k >= i {
                        k + 1
                    } else {
                        k
                    }
                }
            };
            let u = self.rng.random::<f64>();
            if self.profile.get(i) == self.profile.get(j) {
                // Adoption would not change anything; the draws above are
                // still consumed so the stream does not depend on payoffs.
                continue;
            }
            let phi_i = pool_free_payoff(graph, &self.profile, params, i)?;
            let phi_j = pool_free_payoff(graph, &self.profile, params, j)?;
            if u < imitation_probability_from_difference(phi_i - phi_j, params.beta) {
                self.profile.set(i, self.profile.get(j));
            }
        }
        if params.mu > 0.0 {
            let mut next = self.profile.clone();
            Self::mutate(&mut next, self.setting, params.mu, &mut self.rng);
            self.profile = next;
        }
        self.round += 1;
        Ok(())
    }

    fn mutate(
        profile: &mut StrategyProfile,
        setting: StrategySetting,
        mu: f64,
        rng: &mut ChaCha8Rng,
    ) {
        let space = setting.strategies();
        for i in 0..profile.len() {
            if rng.random::<f64>() < mu {
                profile.set(i, space[rng.random_range(0..space.len())]);
            }
        }
    }
}

/// Runs the dynamics until absorption (monomorphic with `mu = 0`), a stable
/// frequency plateau, or the round cap. Frequencies are recorded every round
/// starting at round 0; profiles are snapshotted at the listed rounds.
#[allow(clippy::too_many_arguments)]
pub fn run(
    graph: &PopulationGraph,
    initial: StrategyProfile,
    setting: StrategySetting,
    params: &GameParams,
    scheme: UpdateScheme,
    target_selection: TargetSelection,
    stop: &StopCriteria,
    snapshot_rounds: &[u64],
    seed: u64,
) -> Result<Trajectory> {
    params.validate()?;
    stop.validate()?;
    if initial.len() != graph.node_count() {
        return Err(Error::ProfileSizeMismatch {
            profile_len: initial.len(),
            node_count: graph.node_count(),
        });
    }

    let mut state = SimulationState::new(initial, setting, seed);
    let mut frequencies = vec![state.profile.counts(setting)];
    let mut snapshots = Vec::new();
    if snapshot_rounds.contains(&0) {
        snapshots.push((0, state.profile.clone()));
    }

    let absorbed = |profile: &StrategyProfile| -> Option<Strategy> {
        if params.mu == 0.0 {
            profile.monomorphic()
        } else {
            None
        }
    };

    if let Some(strategy) = absorbed(&state.profile) {
        return Ok(Trajectory {
            setting,
            node_count: graph.node_count(),
            frequencies,
            snapshots,
            final_profile: state.profile,
            status: TerminalStatus::Absorbed(strategy),
        });
    }

    let mut stable_streak = 0u64;
    let status = loop {
        match scheme {
            UpdateScheme::Synchronous => {
                state.step(graph, params, target_selection)?;
            }
            UpdateScheme::RandomSequential => {
                state.sequential_round(graph, params, target_selection)?;
            }
        }
        let counts = state.profile.counts(setting);
        if Some(&counts) == frequencies.last() {
            stable_streak += 1;
        } else {
            stable_streak = 0;
        }
        frequencies.push(counts);
        if snapshot_rounds.contains(&state.round) {
            snapshots.push((state.round, state.profile.clone()));
        }

        if let Some(strategy) = absorbed(&state.profile) {
            break TerminalStatus::Absorbed(strategy);
        }
        if stop.stability_window > 0 && stable_streak >= stop.stability_window {
            break TerminalStatus::FrequencyStable;
        }
        if state.round >= stop.max_rounds {
            break TerminalStatus::RoundCapReached;
        }
    };

    Ok(Trajectory {
        setting,
        node_count: graph.node_count(),
        frequencies,
        snapshots,
        final_profile: state.profile,
        status,
    })
}

/// How the initial strategy profile is drawn.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// Every player draws uniformly from the active strategy space.
    #[default]
    UniformRandom,
    /// Exact per-strategy counts from the given fractions (largest-remainder
    /// rounding), placed by a seeded shuffle.
    FixedFraction { fractions: BTreeMap<String, f64> },
    /// Explicit per-node labels, node order.
    Explicit { labels: Vec<String> },
}

fn seeded_shuffle(items: &mut [Strategy], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Builds a reproducible initial profile for `graph` under `setting`.
pub fn initialize_profile(
    graph: &PopulationGraph,
    spec: &InitSpec,
    setting: StrategySetting,
    seed: u64,
) -> Result<StrategyProfile> {
    let n = graph.node_count();
    let space = setting.strategies();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec {
        InitSpec::UniformRandom => {
            let strategies = (0..n)
                .map(|_| space[rng.random_range(0..space.len())])
                .collect();
            Ok(StrategyProfile::new(strategies))
        }
        InitSpec::FixedFraction { fractions } => {
            let mut per_strategy = vec![0.0; space.len()];
            let mut sum = 0.0;
            for (label, &fraction) in fractions {
                let strategy = Strategy::parse(label)?;
                let idx = setting.strategy_index(strategy).ok_or_else(|| {
                    Error::StrategyNotInSetting {
                        label: label.clone(),
                        setting: setting.name().to_string(),
                    }
                })?;
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(Error::ParamOutOfRange {
                        name: "fraction",
                        value: fraction,
                        expected: "[0, 1]",
                    });
                }
                per_strategy[idx] += fraction;
                sum += fraction;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::FractionSumMismatch(sum));
            }
            // Largest-remainder apportionment; ties resolved by canonical
            // strategy order so the assignment is deterministic.
            let ideal: Vec<f64> = per_strategy.iter().map(|f| f * n as f64).collect();
            let mut counts: Vec<usize> = ideal.iter().map(|&x| x.floor() as usize).collect();
            let assigned: usize = counts.iter().sum();
            let mut order: Vec<usize> = (0..space.len()).collect();
            order.sort_by(|&a, &b| {
                let ra = ideal[a] - counts[a] as f64;
                let rb = ideal[b] - counts[b] as f64;
                rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
            });
            for k in 0..(n - assigned) {
                counts[order[k % space.len()]] += 1;
            }
            let mut strategies = Vec::with_capacity(n);
            for (idx, &count) in counts.iter().enumerate() {
                strategies.extend(std::iter::repeat_n(space[idx], count));
            }
            seeded_shuffle(&mut strategies, &mut rng);
            Ok(StrategyProfile::new(strategies))
        }
        InitSpec::Explicit { labels } => {
            if labels.len() != n {
                return Err(Error::ProfileSizeMismatch {
                    profile_len: labels.len(),
                    node_count: n,
                });
            }
            let profile = StrategyProfile::from_labels(labels)?;
            for s in profile.iter() {
                if setting.strategy_index(s).is_none() {
                    return Err(Error::StrategyNotInSetting {
                        label: s.label().to_string(),
                        setting: setting.name().to_string(),
                    });
                }
            }
            Ok(profile)
        }
    }
}
