//! Boundary analysis: imitation probabilities of a focus player toward each
//! of its four neighbors inside a hand-specified 5x5 strategy patch.
//!
//! The patch is embedded in a periodic lattice. Cells outside the patch that
//! still matter for the focus player's and its neighbors' payoffs (games
//! reach three steps out) are assigned by an explicit fill rule, and the
//! pooled share of the global game is imposed from an assumed global
//! cooperator fraction rather than the embedded profile. Because imitation
//! probabilities are computed from payoff differences, neither the global
//! profit rate nor that assumed fraction can change them; the invariance
//! report verifies this numerically.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::imitation_probability_from_difference;
use crate::error::{Error, Result};
use crate::payoff::{total_payoffs, GameParams, PayoffVector};
use crate::population::PopulationGraph;
use crate::strategy::{Strategy, StrategyProfile};

/// Side length of a patch.
pub const PATCH_SIZE: usize = 5;

/// Tolerance for the invariance assertions.
pub const INVARIANCE_TOLERANCE: f64 = 1e-12;

/// Global cooperator fractions swept by the invariance report.
pub const DEFAULT_GLOBAL_COOP_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Strategy assigned to lattice cells not covered by the patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillRule {
    AllC,
    AllD,
    /// Cooperators at the given fraction, spread deterministically over the
    /// fill cells in row-major order (cell k cooperates when the running
    /// count `floor((k+1) * f)` increments).
    Fraction(f64),
}

/// First-order neighbor directions, in the adjacency order of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Left,
        Direction::Right,
        Direction::Up,
        Direction::Down,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A 5x5 strategy patch centered on the focus player, plus the assumptions
/// needed to evaluate payoffs around it.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSpec {
    pub id: String,
    /// `cells[row][col]`, row 0 on top; the focus sits at `cells[2][2]`.
    pub cells: [[Strategy; PATCH_SIZE]; PATCH_SIZE],
    pub fill_rule: FillRule,
    /// Fraction of the population assumed to cooperate in the global game.
    pub global_coop_fraction: f64,
}

impl PatchSpec {
    /// Parses a patch from 5 row strings. Binary rows are 5 letters like
    /// `"CCDDD"`; level-based rows are 5 whitespace-separated labels like
    /// `"CCD CCD DDD DDD DDD"`.
    pub fn from_rows<S: AsRef<str>>(
        id: impl Into<String>,
        rows: &[S],
        fill_rule: FillRule,
        global_coop_fraction: f64,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidPatch {
            id: id.clone(),
            reason,
        };
        if rows.len() != PATCH_SIZE {
            return Err(invalid(format!(
                "expected {PATCH_SIZE} rows, got {}",
                rows.len()
            )));
        }
        if !(0.0..=1.0).contains(&global_coop_fraction) {
            return Err(invalid(format!(
                "global_coop_fraction {global_coop_fraction} outside [0, 1]"
            )));
        }
        if let FillRule::Fraction(f) = fill_rule {
            if !(0.0..=1.0).contains(&f) {
                return Err(invalid(format!("fill fraction {f} outside [0, 1]")));
            }
        }
        let mut cells = [[Strategy::D; PATCH_SIZE]; PATCH_SIZE];
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref().trim();
            let tokens: Vec<String> = if row.contains(char::is_whitespace) {
                row.split_whitespace().map(str::to_string).collect()
            } else {
                row.chars().map(String::from).collect()
            };
            if tokens.len() != PATCH_SIZE {
                return Err(invalid(format!(
                    "row {}: expected {PATCH_SIZE} cells, got {}",
                    r + 1,
                    tokens.len()
                )));
            }
            for (c, token) in tokens.iter().enumerate() {
                cells[r][c] = Strategy::parse(token).map_err(|e| {
                    invalid(format!("row {}, column {}: {e}", r + 1, c + 1))
                })?;
            }
        }
        Ok(PatchSpec {
            id,
            cells,
            fill_rule,
            global_coop_fraction,
        })
    }

    pub fn focus_strategy(&self) -> Strategy {
        self.cells[PATCH_SIZE / 2][PATCH_SIZE / 2]
    }

    pub fn with_global_coop_fraction(&self, fraction: f64) -> Self {
        PatchSpec {
            global_coop_fraction: fraction,
            ..self.clone()
        }
    }
}

fn fill_strategy(rule: FillRule, fill_index: usize) -> Strategy {
    match rule {
        FillRule::AllC => Strategy::C,
        FillRule::AllD => Strategy::D,
        FillRule::Fraction(f) => {
            let before = (fill_index as f64 * f).floor();
            let after = ((fill_index + 1) as f64 * f).floor();
            Strategy::Binary(after > before)
        }
    }
}

fn embedding_side(population_size: usize) -> Result<usize> {
    let side = (population_size as f64).sqrt().round() as usize;
    if side < PATCH_SIZE || side * side != population_size {
        return Err(Error::InvalidEmbedding(population_size));
    }
    Ok(side)
}

/// Embeds the patch in a `side x side` periodic lattice: fill cells follow
/// the fill rule, the patch overwrites the 5x5 block centered on the lattice
/// center. Returns the graph, the profile, and the focus node index.
pub fn embed_patch(
    spec: &PatchSpec,
    population_size: usize,
) -> Result<(PopulationGraph, StrategyProfile, usize)> {
    let side = embedding_side(population_size)?;
    let graph = PopulationGraph::periodic_lattice(side, side)?;
    let center = side / 2;
    let origin = center - PATCH_SIZE / 2;

    let in_patch = |row: usize, col: usize| -> Option<(usize, usize)> {
        let r = row.checked_sub(origin)?;
        let c = col.checked_sub(origin)?;
        (r < PATCH_SIZE && c < PATCH_SIZE).then_some((r, c))
    };

    let mut strategies = Vec::with_capacity(population_size);
    let mut fill_index = 0usize;
    for row in 0..side {
        for col in 0..side {
            match in_patch(row, col) {
                Some((r, c)) => strategies.push(spec.cells[r][c]),
                None => {
                    strategies.push(fill_strategy(spec.fill_rule, fill_index));
                    fill_index += 1;
                }
            }
        }
    }
    let focus = center * side + center;
    Ok((graph, StrategyProfile::new(strategies), focus))
}

/// Payoffs of the focus player and its four first-order neighbors under the
/// patch assumptions.
#[derive(Debug, Clone)]
pub struct PatchPayoffs {
    payoffs: PayoffVector,
    focus: usize,
    neighbors: [usize; 4],
}

impl PatchPayoffs {
    pub fn focus_payoff(&self) -> f64 {
        self.payoffs.total(self.focus)
    }

    pub fn neighbor_payoff(&self, direction: Direction) -> f64 {
        self.payoffs.total(self.neighbor_index(direction))
    }

    /// Exact payoff difference focus minus neighbor (shared global pool term
    /// cancelled).
    pub fn focus_minus_neighbor(&self, direction: Direction) -> f64 {
        self.payoffs
            .difference(self.focus, self.neighbor_index(direction))
    }

    fn neighbor_index(&self, direction: Direction) -> usize {
        self.neighbors[Direction::ALL.iter().position(|&d| d == direction).unwrap()]
    }
}

/// Evaluates the embedded patch with the full payoff engine, then replaces
/// the pooled global share with the one implied by the assumed cooperator
/// fraction: `r_g * round(f * n) * (sigma / 3) / n`.
pub fn patch_payoffs(
    spec: &PatchSpec,
    params: &GameParams,
    population_size: usize,
) -> Result<PatchPayoffs> {
    params.validate()?;
    let (graph, profile, focus) = embed_patch(spec, population_size)?;
    let assumed_cooperators = (spec.global_coop_fraction * population_size as f64).round();
    let pool_share =
        params.r_g * (assumed_cooperators * (params.sigma / 3.0)) / population_size as f64;
    let payoffs = total_payoffs(&graph, &profile, params)?.with_global_pool_share(pool_share);
    let n = graph.neighbors(focus);
    Ok(PatchPayoffs {
        payoffs,
        focus,
        neighbors: [n[0], n[1], n[2], n[3]],
    })
}

/// One neighbor row of an imitation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImitationRow {
    pub direction: Direction,
    pub neighbor_strategy: Strategy,
    pub focus_payoff: f64,
    pub neighbor_payoff: f64,
    /// Probability that the focus imitates this neighbor when drawn as the
    /// target. Reported for all four neighbors even when the strategies
    /// coincide and adopting would be a no-op.
    pub probability: f64,
}

/// Imitation probabilities of the focus player toward each neighbor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImitationTable {
    pub patch_id: String,
    pub focus_strategy: Strategy,
    pub rows: [ImitationRow; 4],
}

impl ImitationTable {
    pub fn row(&self, direction: Direction) -> &ImitationRow {
        &self.rows[Direction::ALL.iter().position(|&d| d == direction).unwrap()]
    }
}

pub fn imitation_table(
    spec: &PatchSpec,
    params: &GameParams,
    population_size: usize,
) -> Result<ImitationTable> {
    let payoffs = patch_payoffs(spec, params, population_size)?;
    let center = PATCH_SIZE / 2;
    let neighbor_strategy = |direction: Direction| match direction {
        Direction::Left => spec.cells[center][center - 1],
        Direction::Right => spec.cells[center][center + 1],
        Direction::Up => spec.cells[center - 1][center],
        Direction::Down => spec.cells[center + 1][center],
    };
    let rows = Direction::ALL.map(|direction| ImitationRow {
        direction,
        neighbor_strategy: neighbor_strategy(direction),
        focus_payoff: payoffs.focus_payoff(),
        neighbor_payoff: payoffs.neighbor_payoff(direction),
        probability: imitation_probability_from_difference(
            payoffs.focus_minus_neighbor(direction),
            params.beta,
        ),
    });
    Ok(ImitationTable {
        patch_id: spec.id.clone(),
        focus_strategy: spec.focus_strategy(),
        rows,
    })
}

/// One evaluated combination in an invariance report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceRow {
    pub patch_id: String,
    pub direction: Direction,
    pub r_g: f64,
    pub global_coop_fraction: f64,
    pub focus_payoff: f64,
    pub neighbor_payoff: f64,
    pub probability: f64,
    pub pass: bool,
}

/// Element-wise comparison of imitation tables across global profit rates
/// and assumed global cooperator fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub rows: Vec<InvarianceRow>,
    pub tolerance: f64,
}

impl InvarianceReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Recomputes the imitation table for every `r_g` in `rg_values` and every
/// assumed global cooperator fraction, and checks that probabilities and
/// payoff differences match the first combination element-wise. Per-player
/// payoffs do shift with `r_g`, the differences must not. A FAIL row signals
/// an implementation bug, not a model outcome.
pub fn rg_invariance_report(
    spec: &PatchSpec,
    params: &GameParams,
    rg_values: &[f64],
    population_size: usize,
) -> Result<InvarianceReport> {
    if rg_values.len() < 2 {
        return Err(Error::Config(
            "invariance report needs at least two r_g values".to_string(),
        ));
    }
    let mut rows = Vec::new();
    let mut baseline: Option<[(f64, f64); 4]> = None;
    for &r_g in rg_values {
        for &fraction in &DEFAULT_GLOBAL_COOP_FRACTIONS {
            let variant = spec.with_global_coop_fraction(fraction);
            let table = imitation_table(&variant, &params.with_r_g(r_g), population_size)?;
            let observed: [(f64, f64); 4] = std::array::from_fn(|k| {
                let row = &table.rows[k];
                (row.probability, row.focus_payoff - row.neighbor_payoff)
            });
            let reference = *baseline.get_or_insert(observed);
            for (k, row) in table.rows.iter().enumerate() {
                let (p_ref, d_ref) = reference[k];
                let pass = (row.probability - p_ref).abs() <= INVARIANCE_TOLERANCE
                    && ((row.focus_payoff - row.neighbor_payoff) - d_ref).abs()
                        <= INVARIANCE_TOLERANCE;
                rows.push(InvarianceRow {
                    patch_id: spec.id.clone(),
                    direction: row.direction,
                    r_g,
                    global_coop_fraction: fraction,
                    focus_payoff: row.focus_payoff,
                    neighbor_payoff: row.neighbor_payoff,
                    probability: row.probability,
                    pass,
                });
            }
        }
    }
    Ok(InvarianceReport {
        rows,
        tolerance: INVARIANCE_TOLERANCE,
    })
}

fn default_population_size() -> usize {
    100
}

fn default_rg_values() -> Vec<f64> {
    vec![5.0, 20.0, 100.0]
}

fn default_half() -> f64 {
    0.5
}

/// One patch as written in a boundary config file: 5 rows of 5 strategy
/// labels plus the fill rule and global assumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchConfig {
    pub id: String,
    pub rows: Vec<String>,
    pub fill_rule: FillRule,
    #[serde(default = "default_half")]
    pub global_coop_fraction: f64,
}

impl PatchConfig {
    pub fn to_spec(&self) -> Result<PatchSpec> {
        PatchSpec::from_rows(
            self.id.clone(),
            &self.rows,
            self.fill_rule,
            self.global_coop_fraction,
        )
    }
}

/// Config file schema of the `boundary` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(default)]
    pub params: GameParams,
    #[serde(default = "default_population_size")]
    pub population_size: usize,
    /// Global profit rates swept by the invariance report; the first value
    /// also parameterizes the main imitation tables.
    #[serde(default = "default_rg_values")]
    pub rg_values: Vec<f64>,
    pub patches: Vec<PatchConfig>,
}

impl BoundaryConfig {
    pub fn patch_specs(&self) -> Result<Vec<PatchSpec>> {
        self.patches.iter().map(PatchConfig::to_spec).collect()
    }

    pub fn validate(&self) -> Result<Vec<PatchSpec>> {
        self.params.validate()?;
        if self.rg_values.len() < 2 {
            return Err(Error::Config(
                "boundary config needs at least two rg_values".to_string(),
            ));
        }
        if self.patches.is_empty() {
            return Err(Error::Config("boundary config has no patches".to_string()));
        }
        embedding_side(self.population_size)?;
        self.patch_specs()
    }
}

/// CSV rendering of imitation tables: one row per patch and neighbor.
pub fn imitation_table_csv(tables: &[ImitationTable]) -> String {
    let mut out = String::from(
        "patch_id,focus_strategy,direction,neighbor_strategy,focus_payoff,neighbor_payoff,probability\n",
    );
    for table in tables {
        for row in &table.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                table.patch_id,
                table.focus_strategy.label(),
                row.direction,
                row.neighbor_strategy.label(),
                row.focus_payoff,
                row.neighbor_payoff,
                row.probability,
            ));
        }
    }
    out
}

/// CSV rendering of invariance reports, PASS/FAIL per evaluated combination.
pub fn invariance_report_csv(reports: &[InvarianceReport]) -> String {
    let mut out = String::from(
        "patch_id,direction,r_g,global_coop_fraction,focus_payoff,neighbor_payoff,probability,status\n",
    );
    for report in reports {
        for row in &report.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.patch_id,
                row.direction,
                row.r_g,
                row.global_coop_fraction,
                row.focus_payoff,
                row.neighbor_payoff,
                row.probability,
                if row.pass { "PASS" } else { "FAIL" },
            ));
        }
    }
    out
}

/// The patch library shipped with the simulator: straight boundaries seen
/// from both sides, isolated deviants, bulges into the opposite region, and
/// a corner. Each covers one qualitative neighbor environment at the
/// cooperator/defector interface.
pub fn standard_patch_library() -> Vec<PatchSpec> {
    let patch = |id: &str, rows: [&str; 5], fill: FillRule| {
        PatchSpec::from_rows(id, &rows, fill, 0.5).expect("library patch is well-formed")
    };
    vec![
        patch(
            "c_focus_straight_boundary",
            ["CCCDD", "CCCDD", "CCCDD", "CCCDD", "CCCDD"],
            FillRule::AllD,
        ),
        patch(
            "d_focus_straight_boundary",
            ["CCDDD", "CCDDD", "CCDDD", "CCDDD", "CCDDD"],
            FillRule::AllD,
        ),
        patch(
            "isolated_c",
            ["DDDDD", "DDDDD", "DDCDD", "DDDDD", "DDDDD"],
            FillRule::AllD,
        ),
        patch(
            "isolated_d",
            ["CCCCC", "CCCCC", "CCDCC", "CCCCC", "CCCCC"],
            FillRule::AllC,
        ),
        patch(
            "c_focus_corner",
            ["DDDDD", "DDDDD", "CCCDD", "CCCDD", "CCCDD"],
            FillRule::AllD,
        ),
        patch(
            "d_focus_majority_c",
            ["CCCDD", "CCCDD", "CCDDD", "CCCDD", "CCCDD"],
            FillRule::AllD,
        ),
        patch(
            "c_focus_majority_d",
            ["CCDDD", "CCDDD", "CCCDD", "CCDDD", "CCDDD"],
            FillRule::AllD,
        ),
    ]
}
