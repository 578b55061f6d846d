//! Payoff evaluation for the three-level public goods game.
//!
//! Every game instance pools its members' contributions, multiplies the pot
//! by the level's profit rate, and shares the proceeds equally among all
//! members; each member additionally keeps the unstaked part of its per-game
//! endowment. A player's payoff at a level is the sum of its shares over all
//! games of that level, and its total payoff is the sum over the three
//! levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::PopulationGraph;
use crate::strategy::{ContributionSchedule, Level, StrategyProfile};

/// Profit rates and dynamics parameters of one game configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameParams {
    /// Profit rate of pairwise games.
    pub r_p: f64,
    /// Profit rate of local games.
    pub r_l: f64,
    /// Profit rate of the global game.
    pub r_g: f64,
    /// Fraction of the per-game endowment a cooperator stakes.
    pub sigma: f64,
    /// Selection strength of the imitation rule.
    pub beta: f64,
    /// Per-player mutation probability applied after imitation.
    pub mu: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            r_p: 1.6,
            r_l: 4.0,
            r_g: 5.0,
            sigma: 1.0,
            beta: 0.5,
            mu: 0.0,
        }
    }
}

impl GameParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("r_p", self.r_p), ("r_l", self.r_l), ("r_g", self.r_g)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::ParamOutOfRange {
                    name: match name {
                        "r_p" => "r_p",
                        "r_l" => "r_l",
                        _ => "r_g",
                    },
                    value,
                    expected: ">= 0",
                });
            }
        }
        crate::strategy::validate_sigma(self.sigma)?;
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "beta",
                value: self.beta,
                expected: ">= 0",
            });
        }
        if !(self.mu >= 0.0 && self.mu <= 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "mu",
                value: self.mu,
                expected: "[0, 1]",
            });
        }
        Ok(())
    }

    pub fn rate(&self, level: Level) -> f64 {
        match level {
            Level::Pairwise => self.r_p,
            Level::Local => self.r_l,
            Level::Global => self.r_g,
        }
    }

    pub fn with_r_g(self, r_g: f64) -> Self {
        GameParams { r_g, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        GameParams { beta, ..self }
    }
}

/// Per-player payoffs with their per-level decomposition.
///
/// The global game pays every player the same pooled share on top of its own
/// retained endowment. That share is stored once instead of being folded into
/// each player's value, so [`PayoffVector::difference`] cancels it exactly:
/// two payoff vectors computed from the same profile but different global
/// profit rates (or pool assumptions) produce bit-identical differences, and
/// therefore bit-identical imitation probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffVector {
    pairwise: Vec<f64>,
    local: Vec<f64>,
    global_retained: Vec<f64>,
    global_pool_share: f64,
}

impl PayoffVector {
    pub fn len(&self) -> usize {
        self.pairwise.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairwise.is_empty()
    }

    /// Total payoff of one player, always evaluated as
    /// `(pairwise + local) + global` so the decomposition identity holds
    /// bit-exactly.
    pub fn total(&self, node: usize) -> f64 {
        (self.pairwise[node] + self.local[node]) + self.level(node, Level::Global)
    }

    pub fn level(&self, node: usize, level: Level) -> f64 {
        match level {
            Level::Pairwise => self.pairwise[node],
            Level::Local => self.local[node],
            Level::Global => self.global_retained[node] + self.global_pool_share,
        }
    }

    /// The pooled share of the global game, identical for every player.
    pub fn global_pool_share(&self) -> f64 {
        self.global_pool_share
    }

    /// Total payoff minus the shared global pool term. Differences of this
    /// quantity equal total-payoff differences with the common term removed
    /// before rounding can smear it.
    pub fn pool_free_total(&self, node: usize) -> f64 {
        (self.pairwise[node] + self.local[node]) + self.global_retained[node]
    }

    /// Exact payoff difference `total(i) - total(j)`: the shared global pool
    /// term cancels algebraically, so the result does not depend on the
    /// global profit rate or on how many players cooperate globally.
    pub fn difference(&self, i: usize, j: usize) -> f64 {
        self.pool_free_total(i) - self.pool_free_total(j)
    }

    pub fn totals(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.total(i)).collect()
    }

    /// Replaces the pooled global share, keeping everything else. Used by the
    /// boundary analysis to impose an assumed global cooperator count.
    pub(crate) fn with_global_pool_share(mut self, share: f64) -> Self {
        self.global_pool_share = share;
        self
    }
}

/// One public goods game instance over an explicit group. Returns each
/// member's payoff in group order: retained endowment plus an equal share of
/// the multiplied pot. `contributions` and `endowments` are indexed by node.
pub fn game_payoff(
    group: &[usize],
    contributions: &[f64],
    endowments: &[f64],
    profit_rate: f64,
) -> Result<Vec<f64>> {
    if group.len() < 2 {
        return Err(Error::GroupTooSmall(group.len()));
    }
    if !(profit_rate.is_finite() && profit_rate >= 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "profit_rate",
            value: profit_rate,
            expected: ">= 0",
        });
    }
    let mut pot = 0.0;
    for &m in group {
        let (c, e) = (contributions[m], endowments[m]);
        if c.is_nan() || c < 0.0 {
            return Err(Error::ParamOutOfRange {
                name: "contribution",
                value: c,
                expected: ">= 0",
            });
        }
        if c > e {
            return Err(Error::ContributionExceedsEndowment {
                node: m,
                contribution: c,
                endowment: e,
            });
        }
        pot += c;
    }
    let share = profit_rate * pot / group.len() as f64;
    Ok(group
        .iter()
        .map(|&m| endowments[m] - contributions[m] + share)
        .collect())
}

struct PlayerStakes {
    contribution: Vec<[f64; 3]>,
    endowment: Vec<[f64; 3]>,
}

fn player_stakes(
    graph: &PopulationGraph,
    profile: &StrategyProfile,
    sigma: f64,
) -> Result<PlayerStakes> {
    let n = graph.node_count();
    if profile.len() != n {
        return Err(Error::ProfileSizeMismatch {
            profile_len: profile.len(),
            node_count: n,
        });
    }
    let mut contribution = Vec::with_capacity(n);
    let mut endowment = Vec::with_capacity(n);
    for node in 0..n {
        let degree = graph.degree(node);
        let schedule = ContributionSchedule::new(profile.get(node), degree, degree + 1, sigma)?;
        contribution.push([
            schedule.contribution_pairwise,
            schedule.contribution_local,
            schedule.contribution_global,
        ]);
        endowment.push([
            schedule.endowment_pairwise,
            schedule.endowment_local,
            schedule.endowment_global,
        ]);
    }
    Ok(PlayerStakes {
        contribution,
        endowment,
    })
}

const P: usize = 0;
const L: usize = 1;
const G: usize = 2;

/// Evaluates every game instance once and credits each member its share:
/// one pairwise game per edge, one local game per closed neighborhood, and
/// the single global game. Accumulation order is fixed (edges by ascending
/// endpoints, then neighborhoods by center), so results are reproducible.
pub fn total_payoffs(
    graph: &PopulationGraph,
    profile: &StrategyProfile,
    params: &GameParams,
) -> Result<PayoffVector> {
    params.validate()?;
    let stakes = player_stakes(graph, profile, params.sigma)?;
    let n = graph.node_count();

    let mut pairwise = vec![0.0; n];
    for i in 0..n {
        for &j in graph.neighbors(i) {
            if j <= i {
                continue;
            }
            let pot = stakes.contribution[i][P] + stakes.contribution[j][P];
            let share = params.r_p * pot / 2.0;
            pairwise[i] += stakes.endowment[i][P] - stakes.contribution[i][P] + share;
            pairwise[j] += stakes.endowment[j][P] - stakes.contribution[j][P] + share;
        }
    }

    let mut local = vec![0.0; n];
    for center in 0..n {
        let mut pot = stakes.contribution[center][L];
        for &m in graph.neighbors(center) {
            pot += stakes.contribution[m][L];
        }
        let share = params.r_l * pot / (graph.degree(center) + 1) as f64;
        local[center] += stakes.endowment[center][L] - stakes.contribution[center][L] + share;
        for &m in graph.neighbors(center) {
            local[m] += stakes.endowment[m][L] - stakes.contribution[m][L] + share;
        }
    }

    let mut pool = 0.0;
    for node in 0..n {
        pool += stakes.contribution[node][G];
    }
    let global_pool_share = params.r_g * pool / n as f64;
    let global_retained = (0..n)
        .map(|node| stakes.endowment[node][G] - stakes.contribution[node][G])
        .collect();

    Ok(PayoffVector {
        pairwise,
        local,
        global_retained,
        global_pool_share,
    })
}

/// Payoff of one player at one level, summed over the viable groups of that
/// level. Agrees with the matching component of [`total_payoffs`].
pub fn level_payoff(
    graph: &PopulationGraph,
    profile: &StrategyProfile,
    params: &GameParams,
    node: usize,
    level: Level,
) -> Result<f64> {
    params.validate()?;
    if node >= graph.node_count() {
        return Err(Error::InvalidNode {
            index: node,
            node_count: graph.node_count(),
        });
    }
    let stakes = player_stakes(graph, profile, params.sigma)?;
    let payoff = match level {
        Level::Pairwise => {
            let mut sum = 0.0;
            for &j in graph.neighbors(node) {
                let pot = stakes.contribution[node][P] + stakes.contribution[j][P];
                sum += stakes.endowment[node][P] - stakes.contribution[node][P]
                    + params.r_p * pot / 2.0;
            }
            sum
        }
        Level::Local => {
            let mut sum = 0.0;
            for center in graph.closed_neighborhood(node)? {
                let members = graph.closed_neighborhood(center)?;
                let pot: f64 = members.iter().map(|&m| stakes.contribution[m][L]).sum();
                sum += stakes.endowment[node][L] - stakes.contribution[node][L]
                    + params.r_l * pot / members.len() as f64;
            }
            sum
        }
        Level::Global => {
            let pool: f64 = (0..graph.node_count())
                .map(|m| stakes.contribution[m][G])
                .sum();
            stakes.endowment[node][G] - stakes.contribution[node][G]
                + params.r_g * pool / graph.node_count() as f64
        }
    };
    Ok(payoff)
}

/// Pool-free total of a single player, computed fresh from the current
/// profile without touching the rest of the population: its pairwise and
/// local levels plus its retained global endowment. Equals
/// [`PayoffVector::pool_free_total`] up to summation order, at a cost
/// bounded by the squared degree instead of the population size, which is
/// what the sequential update discipline needs per decision.
pub fn pool_free_payoff(
    graph: &PopulationGraph,
    profile: &StrategyProfile,
    params: &GameParams,
    node: usize,
) -> Result<f64> {
    params.validate()?;
    if node >= graph.node_count() {
        return Err(Error::InvalidNode {
            index: node,
            node_count: graph.node_count(),
        });
    }
    if profile.len() != graph.node_count() {
        return Err(Error::ProfileSizeMismatch {
            profile_len: profile.len(),
            node_count: graph.node_count(),
        });
    }
    let sigma = params.sigma;
    let pairwise_stake = |m: usize| -> f64 {
        if profile.get(m).cooperates(Level::Pairwise) {
            sigma / (3.0 * graph.degree(m) as f64)
        } else {
            0.0
        }
    };
    let local_stake = |m: usize| -> f64 {
        if profile.get(m).cooperates(Level::Local) {
            sigma / (3.0 * (graph.degree(m) + 1) as f64)
        } else {
            0.0
        }
    };

    let own_pairwise = pairwise_stake(node);
    let own_pairwise_endowment = 1.0 / (3.0 * graph.degree(node) as f64);
    let mut pairwise = 0.0;
    for &j in graph.neighbors(node) {
        let pot = own_pairwise + pairwise_stake(j);
        pairwise += own_pairwise_endowment - own_pairwise + params.r_p * pot / 2.0;
    }

    let own_local = local_stake(node);
    let own_local_endowment = 1.0 / (3.0 * (graph.degree(node) + 1) as f64);
    let mut local = 0.0;
    for center in graph.closed_neighborhood(node)? {
        let mut pot = local_stake(center);
        for &m in graph.neighbors(center) {
            pot += local_stake(m);
        }
        local += own_local_endowment - own_local
            + params.r_l * pot / (graph.degree(center) + 1) as f64;
    }

    let global_retained = if profile.get(node).cooperates(Level::Global) {
        1.0 / 3.0 - sigma / 3.0
    } else {
        1.0 / 3.0
    };
    Ok((pairwise + local) + global_retained)
}

/// Payoff map of the plain single-game public goods game where every player
/// stakes out of a full unit endowment: `1 - c_i + (r/n) * sum(c)`. The
/// multi-level engine degenerates to a scaled copy of this at the global
/// level, which the tests cross-check.
pub fn pgg_reference_payoff(contributions: &[f64], profit_rate: f64) -> Result<Vec<f64>> {
    if contributions.len() < 2 {
        return Err(Error::GroupTooSmall(contributions.len()));
    }
    for &c in contributions {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::ParamOutOfRange {
                name: "contribution",
                value: c,
                expected: "[0, 1]",
            });
        }
    }
    let pot: f64 = contributions.iter().sum();
    let share = profit_rate * pot / contributions.len() as f64;
    Ok(contributions.iter().map(|&c| 1.0 - c + share).collect())
}
