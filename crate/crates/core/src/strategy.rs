//! Player strategies and the contribution schedule that turns a discrete
//! cooperate/defect choice into per-game contributions.
//!
//! Two strategy settings exist. Under the binary setting a player either
//! cooperates or defects in every game it plays. Under the level-based
//! setting the choice is made independently for the pairwise, local, and
//! global levels, giving 8 types labeled `CCC` through `DDD` (letters in
//! pairwise, local, global order).

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The three scales at which games are played.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Pairwise,
    Local,
    Global,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Pairwise, Level::Local, Level::Global];
}

/// A player's strategy: one cooperate/defect flag applied at every level,
/// or one flag per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Binary(bool),
    LevelBased {
        pairwise: bool,
        local: bool,
        global: bool,
    },
}

impl Strategy {
    pub const C: Strategy = Strategy::Binary(true);
    pub const D: Strategy = Strategy::Binary(false);

    pub fn level_based(pairwise: bool, local: bool, global: bool) -> Self {
        Strategy::LevelBased {
            pairwise,
            local,
            global,
        }
    }

    /// Whether this strategy cooperates at the given level. A binary
    /// strategy answers the same at every level, so `Binary(c)` behaves
    /// exactly like `LevelBased(c, c, c)` in every payoff computation.
    pub fn cooperates(&self, level: Level) -> bool {
        match *self {
            Strategy::Binary(c) => c,
            Strategy::LevelBased {
                pairwise,
                local,
                global,
            } => match level {
                Level::Pairwise => pairwise,
                Level::Local => local,
                Level::Global => global,
            },
        }
    }

    /// Number of levels at which this strategy cooperates (0 to 3).
    pub fn cooperation_count(&self) -> usize {
        Level::ALL.iter().filter(|&&l| self.cooperates(l)).count()
    }

    /// The label used in CSV outputs and snapshot legends: `C`/`D` for
    /// binary strategies, three letters like `CCD` for level-based ones.
    pub fn label(&self) -> &'static str {
        match *self {
            Strategy::Binary(true) => "C",
            Strategy::Binary(false) => "D",
            Strategy::LevelBased {
                pairwise,
                local,
                global,
            } => {
                const LABELS: [&str; 8] = [
                    "CCC", "CCD", "CDC", "CDD", "DCC", "DCD", "DDC", "DDD",
                ];
                let idx =
                    (!pairwise as usize) << 2 | (!local as usize) << 1 | !global as usize;
                LABELS[idx]
            }
        }
    }

    /// Parses a strategy label: one letter (`C`, `D`) for binary strategies
    /// or three letters in pairwise/local/global order for level-based ones.
    pub fn parse(label: &str) -> Result<Strategy> {
        let flag = |ch: char| -> Result<bool> {
            match ch {
                'C' => Ok(true),
                'D' => Ok(false),
                other => Err(Error::InvalidStrategyLabel {
                    label: label.to_string(),
                    reason: format!("unexpected character {other:?}, expected 'C' or 'D'"),
                }),
            }
        };
        let chars: Vec<char> = label.chars().collect();
        match chars.as_slice() {
            [c] => Ok(Strategy::Binary(flag(*c)?)),
            [p, l, g] => Ok(Strategy::LevelBased {
                pairwise: flag(*p)?,
                local: flag(*l)?,
                global: flag(*g)?,
            }),
            _ => Err(Error::InvalidStrategyLabel {
                label: label.to_string(),
                reason: "expected 1 letter (binary) or 3 letters (level-based)".to_string(),
            }),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::parse(s)
    }
}

impl Serialize for Strategy {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let label = String::deserialize(deserializer)?;
        Strategy::parse(&label).map_err(D::Error::custom)
    }
}

/// Which strategy space is active in a run: 2 binary types or 8
/// level-based types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategySetting {
    Binary,
    LevelBased,
}

const BINARY_SPACE: [Strategy; 2] = [Strategy::C, Strategy::D];

const LEVEL_BASED_SPACE: [Strategy; 8] = [
    Strategy::LevelBased { pairwise: true, local: true, global: true },
    Strategy::LevelBased { pairwise: true, local: true, global: false },
    Strategy::LevelBased { pairwise: true, local: false, global: true },
    Strategy::LevelBased { pairwise: true, local: false, global: false },
    Strategy::LevelBased { pairwise: false, local: true, global: true },
    Strategy::LevelBased { pairwise: false, local: true, global: false },
    Strategy::LevelBased { pairwise: false, local: false, global: true },
    Strategy::LevelBased { pairwise: false, local: false, global: false },
];

impl StrategySetting {
    /// The active strategy space in canonical order (`C,D` or `CCC..DDD`).
    /// This order fixes CSV column order and mutation indexing.
    pub fn strategies(&self) -> &'static [Strategy] {
        match self {
            StrategySetting::Binary => &BINARY_SPACE,
            StrategySetting::LevelBased => &LEVEL_BASED_SPACE,
        }
    }

    /// Index of `strategy` within the canonical order, or `None` if it does
    /// not belong to this setting's space.
    pub fn strategy_index(&self, strategy: Strategy) -> Option<usize> {
        self.strategies().iter().position(|&s| s == strategy)
    }

    pub fn space_size(&self) -> usize {
        self.strategies().len()
    }

    pub fn name(&self) -> &'static str {
        match self {
            StrategySetting::Binary => "binary",
            StrategySetting::LevelBased => "level_based",
        }
    }
}

impl fmt::Display for StrategySetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub(crate) fn validate_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::ParamOutOfRange {
            name: "sigma",
            value: sigma,
            expected: "(0, 1]",
        });
    }
    Ok(())
}

/// Per-game contribution of a strategy at one level.
///
/// Each player holds one unit of endowment, split into thirds across the
/// three levels and then evenly across the games of a level. A cooperator
/// stakes the fraction `sigma` of its per-game endowment, a defector stakes
/// nothing, so the contribution is `sigma / (3 * games_at_level)` or 0.
pub fn contribution(
    strategy: Strategy,
    level: Level,
    games_at_level: usize,
    sigma: f64,
) -> Result<f64> {
    validate_sigma(sigma)?;
    if games_at_level == 0 {
        return Err(Error::ParamOutOfRange {
            name: "games_at_level",
            value: 0.0,
            expected: ">= 1",
        });
    }
    if strategy.cooperates(level) {
        Ok(sigma / (3.0 * games_at_level as f64))
    } else {
        Ok(0.0)
    }
}

/// A player's per-game endowments and contributions at every level, fixed by
/// its strategy, its game counts, and `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContributionSchedule {
    /// Per-game endowment at each level: `1 / (3 * games_at_level)`.
    pub endowment_pairwise: f64,
    pub endowment_local: f64,
    pub endowment_global: f64,
    /// Per-game contribution at each level (0 when defecting there).
    pub contribution_pairwise: f64,
    pub contribution_local: f64,
    pub contribution_global: f64,
    pub sigma: f64,
}

impl ContributionSchedule {
    /// Endowment share assigned to each level before the per-game split.
    pub const PER_LEVEL_ENDOWMENT: f64 = 1.0 / 3.0;

    pub fn new(
        strategy: Strategy,
        pairwise_games: usize,
        local_games: usize,
        sigma: f64,
    ) -> Result<Self> {
        let schedule = ContributionSchedule {
            endowment_pairwise: 1.0 / (3.0 * pairwise_games as f64),
            endowment_local: 1.0 / (3.0 * local_games as f64),
            endowment_global: Self::PER_LEVEL_ENDOWMENT,
            contribution_pairwise: contribution(strategy, Level::Pairwise, pairwise_games, sigma)?,
            contribution_local: contribution(strategy, Level::Local, local_games, sigma)?,
            contribution_global: contribution(strategy, Level::Global, 1, sigma)?,
            sigma,
        };
        Ok(schedule)
    }

    pub fn endowment(&self, level: Level) -> f64 {
        match level {
            Level::Pairwise => self.endowment_pairwise,
            Level::Local => self.endowment_local,
            Level::Global => self.endowment_global,
        }
    }

    pub fn contribution(&self, level: Level) -> f64 {
        match level {
            Level::Pairwise => self.contribution_pairwise,
            Level::Local => self.contribution_local,
            Level::Global => self.contribution_global,
        }
    }
}

/// Assignment of one strategy to every player, indexed by node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyProfile(Vec<Strategy>);

impl StrategyProfile {
    pub fn new(strategies: Vec<Strategy>) -> Self {
        StrategyProfile(strategies)
    }

    /// Every player assigned the same strategy.
    pub fn uniform(strategy: Strategy, node_count: usize) -> Self {
        StrategyProfile(vec![strategy; node_count])
    }

    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        labels
            .iter()
            .map(|l| Strategy::parse(l.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(StrategyProfile)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, node: usize) -> Strategy {
        self.0[node]
    }

    pub fn set(&mut self, node: usize, strategy: Strategy) {
        self.0[node] = strategy;
    }

    pub fn iter(&self) -> impl Iterator<Item = Strategy> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Strategy] {
        &self.0
    }

    /// Counts per strategy type in the setting's canonical order.
    /// Panics if the profile contains a strategy outside the setting.
    pub fn counts(&self, setting: StrategySetting) -> Vec<u32> {
        let mut counts = vec![0u32; setting.space_size()];
        for s in &self.0 {
            let idx = setting
                .strategy_index(*s)
                .unwrap_or_else(|| panic!("strategy {s} not in {setting} space"));
            counts[idx] += 1;
        }
        counts
    }

    /// The single strategy present, if the profile is monomorphic.
    pub fn monomorphic(&self) -> Option<Strategy> {
        let first = *self.0.first()?;
        self.0.iter().all(|&s| s == first).then_some(first)
    }
}
