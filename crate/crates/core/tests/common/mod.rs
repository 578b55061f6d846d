//! Test-side oracles, independent of the production payoff path.
#![allow(dead_code)] // each test binary uses a different subset
//!
//! The brute-force oracle enumerates every game instance of the three-level
//! model and applies the payoff rule literally, game by game. The
//! closed-form oracle evaluates the per-level cooperator/defector formulas
//! that hold for binary profiles on degree-regular lattices at sigma = 1.
//! Both exist so the production engine has something to be checked against
//! that cannot share its bugs.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mlpgg::payoff::GameParams;
use mlpgg::population::PopulationGraph;
use mlpgg::strategy::{Level, StrategyProfile, StrategySetting};

/// Per-player payoffs computed by literal enumeration of game instances.
pub struct OraclePayoffs {
    pub pairwise: Vec<f64>,
    pub local: Vec<f64>,
    pub global: Vec<f64>,
    /// Sum over game instances of `(r - 1) * total contribution`, the
    /// surplus the games inject on top of the endowments.
    pub injected_surplus: f64,
}

impl OraclePayoffs {
    pub fn total(&self, node: usize) -> f64 {
        self.pairwise[node] + self.local[node] + self.global[node]
    }
}

fn stake(profile: &StrategyProfile, level: Level, games: usize, sigma: f64, node: usize) -> f64 {
    if profile.get(node).cooperates(level) {
        sigma / (3.0 * games as f64)
    } else {
        0.0
    }
}

/// One game instance evaluated literally: every member keeps its unstaked
/// endowment and receives an equal share of the multiplied pot.
fn play_game(
    members: &[usize],
    endowment: impl Fn(usize) -> f64,
    contribution: impl Fn(usize) -> f64,
    rate: f64,
    out: &mut [f64],
    injected: &mut f64,
) {
    let pot: f64 = members.iter().map(|&m| contribution(m)).sum();
    let share = rate * pot / members.len() as f64;
    for &m in members {
        out[m] += endowment(m) - contribution(m) + share;
    }
    *injected += (rate - 1.0) * pot;
}

pub fn oracle_payoffs(
    graph: &PopulationGraph,
    profile: &StrategyProfile,
    params: &GameParams,
) -> OraclePayoffs {
    let n = graph.node_count();
    let mut pairwise = vec![0.0; n];
    let mut local = vec![0.0; n];
    let mut global = vec![0.0; n];
    let mut injected = 0.0;

    // Pairwise games: one per edge.
    for i in 0..n {
        for &j in graph.neighbors(i) {
            if j < i {
                continue;
            }
            play_game(
                &[i, j],
                |m| 1.0 / (3.0 * graph.degree(m) as f64),
                |m| stake(profile, Level::Pairwise, graph.degree(m), params.sigma, m),
                params.r_p,
                &mut pairwise,
                &mut injected,
            );
        }
    }

    // Local games: one per closed neighborhood.
    for center in 0..n {
        let members = graph.closed_neighborhood(center).unwrap();
        play_game(
            &members,
            |m| 1.0 / (3.0 * (graph.degree(m) + 1) as f64),
            |m| {
                stake(
                    profile,
                    Level::Local,
                    graph.degree(m) + 1,
                    params.sigma,
                    m,
                )
            },
            params.r_l,
            &mut local,
            &mut injected,
        );
    }

    // The single global game.
    let everyone: Vec<usize> = (0..n).collect();
    play_game(
        &everyone,
        |_| 1.0 / 3.0,
        |m| stake(profile, Level::Global, 1, params.sigma, m),
        params.r_g,
        &mut global,
        &mut injected,
    );

    OraclePayoffs {
        pairwise,
        local,
        global,
        injected_surplus: injected,
    }
}

/// Per-level payoffs of a binary profile on a 4-regular lattice at
/// sigma = 1, from the cooperator/defector closed forms: payoffs are linear
/// in the cooperator counts of the relevant scopes.
pub fn closed_form_levels(
    graph: &PopulationGraph,
    profile: &StrategyProfile,
    params: &GameParams,
) -> Vec<[f64; 3]> {
    assert!(
        (0..graph.node_count()).all(|i| graph.degree(i) == 4),
        "closed forms assume the 4-regular lattice"
    );
    assert_eq!(params.sigma, 1.0, "closed forms are exact at sigma = 1");
    let n = graph.node_count();
    let coop = |m: usize| profile.get(m).cooperates(Level::Pairwise);
    let coop_count_closed = |m: usize| -> usize {
        let mut count = usize::from(coop(m));
        count += graph.neighbors(m).iter().filter(|&&k| coop(k)).count();
        count
    };
    let o_p = 1.0 / 12.0;
    let o_l = 1.0 / 15.0;
    let global_cooperators = (0..n).filter(|&m| coop(m)).count();

    (0..n)
        .map(|i| {
            let n_c_closed = coop_count_closed(i) as f64;
            let pairwise = if coop(i) {
                (params.r_p / 2.0) * (5.0 + n_c_closed - 2.0) * o_p
            } else {
                1.0 / 3.0 + (params.r_p / 2.0) * n_c_closed * o_p
            };
            let local_sum: f64 = graph
                .closed_neighborhood(i)
                .unwrap()
                .into_iter()
                .map(|c| params.r_l * coop_count_closed(c) as f64 * o_l / 5.0)
                .sum();
            let local = if coop(i) { local_sum } else { 1.0 / 3.0 + local_sum };
            let global_share = params.r_g * global_cooperators as f64 / (3.0 * n as f64);
            let global = if coop(i) {
                global_share
            } else {
                1.0 / 3.0 + global_share
            };
            [pairwise, local, global]
        })
        .collect()
}

/// Reproducible random profile over the given setting.
pub fn random_profile(
    node_count: usize,
    setting: StrategySetting,
    rng: &mut ChaCha8Rng,
) -> StrategyProfile {
    let space = setting.strategies();
    StrategyProfile::new(
        (0..node_count)
            .map(|_| space[rng.random_range(0..space.len())])
            .collect(),
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random lattice between 5x5 and 30x30.
pub fn random_lattice(rng: &mut ChaCha8Rng) -> PopulationGraph {
    let width = rng.random_range(5..=30);
    let height = rng.random_range(5..=30);
    PopulationGraph::periodic_lattice(width, height).unwrap()
}
