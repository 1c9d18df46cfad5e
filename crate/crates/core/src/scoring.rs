//! Fantasy points from raw stat lines, per player and per team.
//!
//! The point table is configuration. Milestone and haul bonuses award only
//! the highest threshold crossed. Economy and strike-rate bands are half-open
//! `[min, max)` intervals compared as exact rationals.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_performance, FantasyTeam, PerformanceViolation, PlayerId, PlayerMatchPerformance,
    PlayerPool, PlayerRole, TeamStructureError,
};
use crate::points::{FixedPointError, Multiplier, Points};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("scoring config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("`{field}`: {source}")]
    Granularity {
        field: String,
        source: FixedPointError,
    },
    #[error("`{0}` thresholds must be strictly increasing")]
    NonIncreasingThresholds(&'static str),
    #[error("`{0}` has overlapping ranges")]
    OverlappingBands(&'static str),
    #[error("`{0}` has an empty range (min >= max)")]
    EmptyRange(&'static str),
    #[error("multipliers must satisfy captain ({captain}) >= vice-captain ({vice}) >= 1")]
    MultiplierOrder { captain: f64, vice: f64 },
    #[error("performance for `{player}` is invalid: {violations:?}")]
    InvalidPerformance {
        player: PlayerId,
        violations: Vec<PerformanceViolation>,
    },
    #[error("no performance record for `{0}`")]
    MissingPerformance(PlayerId),
    #[error("no role known for `{0}`")]
    MissingRole(PlayerId),
    #[error(transparent)]
    Team(#[from] TeamStructureError),
}

/// Half-open numeric range in hundredths; `None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RateRange {
    pub min_hundredths: Option<i64>,
    pub max_hundredths: Option<i64>,
}

impl RateRange {
    /// Whether `numerator / denominator` lies in the range.
    fn contains_ratio(&self, numerator: i64, denominator: i64) -> bool {
        debug_assert!(denominator > 0);
        let scaled = numerator * 100;
        let lo = self.min_hundredths.is_none_or(|m| scaled >= m * denominator);
        let hi = self.max_hundredths.is_none_or(|m| scaled < m * denominator);
        lo && hi
    }

    fn overlaps(&self, other: &RateRange) -> bool {
        let lo = self.min_hundredths.unwrap_or(i64::MIN).max(other.min_hundredths.unwrap_or(i64::MIN));
        let hi = self.max_hundredths.unwrap_or(i64::MAX).min(other.max_hundredths.unwrap_or(i64::MAX));
        lo < hi
    }

    fn is_empty(&self) -> bool {
        matches!((self.min_hundredths, self.max_hundredths), (Some(a), Some(b)) if a >= b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Milestone {
    pub threshold: u32,
    pub points: Points,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EconomyBand {
    pub min_legal_balls: u32,
    pub range: RateRange,
    pub points: Points,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrikeRateBand {
    pub min_balls_faced: u32,
    pub range: RateRange,
    pub points: Points,
    pub applies_to_roles: BTreeSet<PlayerRole>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoringSchema {
    pub per_run: Points,
    pub four_bonus: Points,
    pub six_bonus: Points,
    pub milestone_bonuses: Vec<Milestone>,
    pub duck_points: Points,
    pub duck_roles: BTreeSet<PlayerRole>,
    pub per_wicket: Points,
    pub bowled_lbw_bonus: Points,
    pub haul_bonuses: Vec<Milestone>,
    pub per_maiden: Points,
    pub per_catch: Points,
    pub catch_haul_bonus: Option<Milestone>,
    pub per_stumping: Points,
    pub runout_direct: Points,
    pub runout_indirect: Points,
    pub playing_xi_points: Points,
    pub economy_bands: Vec<EconomyBand>,
    pub strike_rate_bands: Vec<StrikeRateBand>,
    pub captain_multiplier: Multiplier,
    pub vice_captain_multiplier: Multiplier,
}

#[derive(Deserialize)]
struct RawMilestone {
    #[serde(alias = "runs_threshold", alias = "wickets_threshold")]
    threshold: u32,
    points: f64,
}

#[derive(Deserialize)]
struct RawRange {
    min: Option<f64>,
    max: Option<f64>,
}

#[derive(Deserialize)]
struct RawDuck {
    points: f64,
    #[serde(default = "non_bowlers")]
    applies_to_roles: Vec<PlayerRole>,
}

fn non_bowlers() -> Vec<PlayerRole> {
    vec![PlayerRole::WicketKeeper, PlayerRole::Batter, PlayerRole::AllRounder]
}

#[derive(Deserialize)]
struct RawEconomyBand {
    min_legal_balls: u32,
    economy_range: RawRange,
    points: f64,
}

#[derive(Deserialize)]
struct RawStrikeRateBand {
    min_balls_faced: u32,
    sr_range: RawRange,
    points: f64,
    #[serde(default = "non_bowlers")]
    applies_to_roles: Vec<PlayerRole>,
}

#[derive(Deserialize)]
struct RawSchema {
    per_run: f64,
    four_bonus: f64,
    six_bonus: f64,
    milestone_bonuses: Vec<RawMilestone>,
    duck_penalty: RawDuck,
    per_wicket: f64,
    bowled_lbw_bonus: f64,
    haul_bonuses: Vec<RawMilestone>,
    per_maiden: f64,
    per_catch: f64,
    catch_haul_bonus: Option<RawMilestone>,
    per_stumping: f64,
    runout_direct: f64,
    runout_indirect: f64,
    playing_xi_points: f64,
    economy_bands: Vec<RawEconomyBand>,
    strike_rate_bands: Vec<RawStrikeRateBand>,
    captain_multiplier: f64,
    vice_captain_multiplier: f64,
}

fn pts(field: &str, v: f64) -> Result<Points, ScoringError> {
    Points::from_half_step(v).map_err(|source| ScoringError::Granularity {
        field: field.to_string(),
        source,
    })
}

fn hundredths(field: &str, v: Option<f64>) -> Result<Option<i64>, ScoringError> {
    v.map(|x| {
        let h = (x * 100.0).round();
        if (x * 100.0 - h).abs() > 1e-6 {
            Err(ScoringError::Granularity {
                field: field.to_string(),
                source: FixedPointError::Granularity {
                    value: x,
                    step: 0.01,
                },
            })
        } else {
            Ok(h as i64)
        }
    })
    .transpose()
}

fn milestones(field: &'static str, raw: Vec<RawMilestone>) -> Result<Vec<Milestone>, ScoringError> {
    let out = raw
        .into_iter()
        .map(|m| {
            Ok(Milestone {
                threshold: m.threshold,
                points: pts(field, m.points)?,
            })
        })
        .collect::<Result<Vec<_>, ScoringError>>()?;
    if out.windows(2).any(|w| w[0].threshold >= w[1].threshold) {
        return Err(ScoringError::NonIncreasingThresholds(field));
    }
    Ok(out)
}

fn check_ranges(field: &'static str, ranges: &[RateRange]) -> Result<(), ScoringError> {
    if ranges.iter().any(RateRange::is_empty) {
        return Err(ScoringError::EmptyRange(field));
    }
    for (i, a) in ranges.iter().enumerate() {
        if ranges[i + 1..].iter().any(|b| a.overlaps(b)) {
            return Err(ScoringError::OverlappingBands(field));
        }
    }
    Ok(())
}

/// Parses a JSON scoring document (see `config/scoring.default.json`).
pub fn parse_scoring_schema(config_text: &str) -> Result<ScoringSchema, ScoringError> {
    let raw: RawSchema = serde_json::from_str(config_text)?;

    let economy_bands = raw
        .economy_bands
        .into_iter()
        .map(|b| {
            Ok(EconomyBand {
                min_legal_balls: b.min_legal_balls,
                range: RateRange {
                    min_hundredths: hundredths("economy_bands", b.economy_range.min)?,
                    max_hundredths: hundredths("economy_bands", b.economy_range.max)?,
                },
                points: pts("economy_bands", b.points)?,
            })
        })
        .collect::<Result<Vec<_>, ScoringError>>()?;
    check_ranges(
        "economy_bands",
        &economy_bands.iter().map(|b| b.range).collect::<Vec<_>>(),
    )?;

    let strike_rate_bands = raw
        .strike_rate_bands
        .into_iter()
        .map(|b| {
            Ok(StrikeRateBand {
                min_balls_faced: b.min_balls_faced,
                range: RateRange {
                    min_hundredths: hundredths("strike_rate_bands", b.sr_range.min)?,
                    max_hundredths: hundredths("strike_rate_bands", b.sr_range.max)?,
                },
                points: pts("strike_rate_bands", b.points)?,
                applies_to_roles: b.applies_to_roles.into_iter().collect(),
            })
        })
        .collect::<Result<Vec<_>, ScoringError>>()?;
    check_ranges(
        "strike_rate_bands",
        &strike_rate_bands.iter().map(|b| b.range).collect::<Vec<_>>(),
    )?;

    let captain_multiplier =
        Multiplier::from_f64(raw.captain_multiplier).map_err(|source| ScoringError::Granularity {
            field: "captain_multiplier".into(),
            source,
        })?;
    let vice_captain_multiplier = Multiplier::from_f64(raw.vice_captain_multiplier).map_err(
        |source| ScoringError::Granularity {
            field: "vice_captain_multiplier".into(),
            source,
        },
    )?;
    if captain_multiplier < vice_captain_multiplier || vice_captain_multiplier < Multiplier::ONE {
        return Err(ScoringError::MultiplierOrder {
            captain: raw.captain_multiplier,
            vice: raw.vice_captain_multiplier,
        });
    }

    let catch_haul_bonus = raw
        .catch_haul_bonus
        .map(|m| {
            Ok::<_, ScoringError>(Milestone {
                threshold: m.threshold,
                points: pts("catch_haul_bonus", m.points)?,
            })
        })
        .transpose()?;

    Ok(ScoringSchema {
        per_run: pts("per_run", raw.per_run)?,
        four_bonus: pts("four_bonus", raw.four_bonus)?,
        six_bonus: pts("six_bonus", raw.six_bonus)?,
        milestone_bonuses: milestones("milestone_bonuses", raw.milestone_bonuses)?,
        duck_points: pts("duck_penalty", raw.duck_penalty.points)?,
        duck_roles: raw.duck_penalty.applies_to_roles.into_iter().collect(),
        per_wicket: pts("per_wicket", raw.per_wicket)?,
        bowled_lbw_bonus: pts("bowled_lbw_bonus", raw.bowled_lbw_bonus)?,
        haul_bonuses: milestones("haul_bonuses", raw.haul_bonuses)?,
        per_maiden: pts("per_maiden", raw.per_maiden)?,
        per_catch: pts("per_catch", raw.per_catch)?,
        catch_haul_bonus,
        per_stumping: pts("per_stumping", raw.per_stumping)?,
        runout_direct: pts("runout_direct", raw.runout_direct)?,
        runout_indirect: pts("runout_indirect", raw.runout_indirect)?,
        playing_xi_points: pts("playing_xi_points", raw.playing_xi_points)?,
        economy_bands,
        strike_rate_bands,
        captain_multiplier,
        vice_captain_multiplier,
    })
}

/// The scoring file shipped with the crate (`config/scoring.default.json`).
pub const DEFAULT_SCORING_JSON: &str = include_str!("../config/scoring.default.json");

pub fn default_scoring() -> ScoringSchema {
    parse_scoring_schema(DEFAULT_SCORING_JSON).expect("shipped scoring config is valid")
}

fn highest_crossed(list: &[Milestone], value: u32) -> Option<&Milestone> {
    list.iter().rev().find(|m| value >= m.threshold)
}

/// One named contribution to a player's base score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScoreComponent {
    pub label: &'static str,
    pub points: Points,
}

/// Itemised base score; zero-valued components are omitted.
pub fn score_breakdown(
    perf: &PlayerMatchPerformance,
    role: PlayerRole,
    schema: &ScoringSchema,
) -> Result<Vec<ScoreComponent>, ScoringError> {
    let violations = validate_performance(perf);
    if !violations.is_empty() {
        return Err(ScoringError::InvalidPerformance {
            player: perf.player_id.clone(),
            violations,
        });
    }
    let mut out = Vec::new();
    if !perf.played {
        return Ok(out);
    }
    let mut add = |label, points: Points| {
        if points != Points::ZERO {
            out.push(ScoreComponent { label, points });
        }
    };
    let bat = &perf.batting;
    let bowl = &perf.bowling;
    let field = &perf.fielding;

    add("playing_xi", schema.playing_xi_points);

    add("runs", schema.per_run.times(bat.runs.into()));
    add("fours", schema.four_bonus.times(bat.fours.into()));
    add("sixes", schema.six_bonus.times(bat.sixes.into()));
    if let Some(m) = highest_crossed(&schema.milestone_bonuses, bat.runs) {
        add("milestone", m.points);
    }
    if bat.dismissed && bat.runs == 0 && schema.duck_roles.contains(&role) {
        add("duck", schema.duck_points);
    }
    if bat.balls_faced > 0 {
        let band = schema.strike_rate_bands.iter().find(|b| {
            bat.balls_faced >= b.min_balls_faced
                && b.applies_to_roles.contains(&role)
                && b.range
                    .contains_ratio(i64::from(bat.runs) * 100, i64::from(bat.balls_faced))
        });
        if let Some(b) = band {
            add("strike_rate", b.points);
        }
    }

    add("wickets", schema.per_wicket.times(bowl.wickets.into()));
    add(
        "bowled_lbw",
        schema.bowled_lbw_bonus.times(bowl.bowled_or_lbw_count.into()),
    );
    if let Some(m) = highest_crossed(&schema.haul_bonuses, bowl.wickets) {
        add("wicket_haul", m.points);
    }
    add("maidens", schema.per_maiden.times(bowl.maidens.into()));
    if bowl.legal_balls > 0 {
        let band = schema.economy_bands.iter().find(|b| {
            bowl.legal_balls >= b.min_legal_balls
                && b.range.contains_ratio(
                    i64::from(bowl.runs_conceded) * 6,
                    i64::from(bowl.legal_balls),
                )
        });
        if let Some(b) = band {
            add("economy", b.points);
        }
    }

    add("catches", schema.per_catch.times(field.catches.into()));
    if let Some(m) = &schema.catch_haul_bonus {
        if field.catches >= m.threshold {
            add("catch_haul", m.points);
        }
    }
    add("stumpings", schema.per_stumping.times(field.stumpings.into()));
    add("runout_direct", schema.runout_direct.times(field.runouts_direct.into()));
    add(
        "runout_indirect",
        schema.runout_indirect.times(field.runouts_indirect.into()),
    );
    Ok(out)
}

/// Base (pre-multiplier) fantasy points for one player.
pub fn score_player(
    perf: &PlayerMatchPerformance,
    role: PlayerRole,
    schema: &ScoringSchema,
) -> Result<Points, ScoringError> {
    Ok(score_breakdown(perf, role, schema)?
        .into_iter()
        .map(|c| c.points)
        .sum())
}

/// Where a scorer looks up player roles.
pub trait RoleLookup {
    fn role(&self, id: &PlayerId) -> Option<PlayerRole>;
}

impl RoleLookup for PlayerPool {
    fn role(&self, id: &PlayerId) -> Option<PlayerRole> {
        self.role_of(id)
    }
}

impl RoleLookup for BTreeMap<PlayerId, PlayerRole> {
    fn role(&self, id: &PlayerId) -> Option<PlayerRole> {
        self.get(id).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TeamScore {
    pub total: Points,
    pub per_player: BTreeMap<PlayerId, Points>,
    pub captain_bonus: Points,
    pub vice_captain_bonus: Points,
}

/// Team total from precomputed base scores.
pub fn team_score_from_base(
    team: &FantasyTeam,
    base: &BTreeMap<PlayerId, Points>,
    schema: &ScoringSchema,
) -> Result<TeamScore, ScoringError> {
    team.check()?;
    let mut per_player = BTreeMap::new();
    for id in &team.players {
        let b = *base
            .get(id)
            .ok_or_else(|| ScoringError::MissingPerformance(id.clone()))?;
        per_player.insert(id.clone(), b);
    }
    let c = per_player[&team.captain];
    let vc = per_player[&team.vice_captain];
    let captain_bonus = c.scale(schema.captain_multiplier) - c;
    let vice_captain_bonus = vc.scale(schema.vice_captain_multiplier) - vc;
    let total = per_player.values().copied().sum::<Points>() + captain_bonus + vice_captain_bonus;
    Ok(TeamScore {
        total,
        per_player,
        captain_bonus,
        vice_captain_bonus,
    })
}

pub fn score_team(
    team: &FantasyTeam,
    perfs: &BTreeMap<PlayerId, PlayerMatchPerformance>,
    roles: &impl RoleLookup,
    schema: &ScoringSchema,
) -> Result<TeamScore, ScoringError> {
    team.check()?;
    let mut base = BTreeMap::new();
    for id in &team.players {
        let perf = perfs
            .get(id)
            .ok_or_else(|| ScoringError::MissingPerformance(id.clone()))?;
        let role = roles
            .role(id)
            .ok_or_else(|| ScoringError::MissingRole(id.clone()))?;
        base.insert(id.clone(), score_player(perf, role, schema)?);
    }
    team_score_from_base(team, &base, schema)
}

/// Base points for every player in the pool. Players without a record score 0.
pub fn base_points_table(
    pool: &PlayerPool,
    perfs: &BTreeMap<PlayerId, PlayerMatchPerformance>,
    schema: &ScoringSchema,
) -> Result<BTreeMap<PlayerId, Points>, ScoringError> {
    pool.iter()
        .map(|p| {
            let pts = match perfs.get(&p.player_id) {
                Some(perf) => score_player(perf, p.role, schema)?,
                None => Points::ZERO,
            };
            Ok((p.player_id.clone(), pts))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batter(runs: u32, balls: u32, fours: u32, sixes: u32) -> PlayerMatchPerformance {
        let mut p = PlayerMatchPerformance::zero("b1");
        p.batting.runs = runs;
        p.batting.balls_faced = balls;
        p.batting.fours = fours;
        p.batting.sixes = sixes;
        p
    }

    #[test]
    fn default_multipliers() {
        let s = default_scoring();
        assert_eq!(s.captain_multiplier.to_f64(), 2.0);
        assert_eq!(s.vice_captain_multiplier.to_f64(), 1.5);
    }

    #[test]
    fn vice_above_captain_rejected() {
        let text = DEFAULT_SCORING_JSON.replace(
            "\"vice_captain_multiplier\": 1.5",
            "\"vice_captain_multiplier\": 2.5",
        );
        assert!(matches!(
            parse_scoring_schema(&text),
            Err(ScoringError::MultiplierOrder { .. })
        ));
    }

    #[test]
    fn overlapping_economy_bands_rejected() {
        let text = DEFAULT_SCORING_JSON.replace(
            r#""economy_range": { "min": 5, "max": 6 }"#,
            r#""economy_range": { "min": 4.5, "max": 6 }"#,
        );
        assert!(matches!(
            parse_scoring_schema(&text),
            Err(ScoringError::OverlappingBands("economy_bands"))
        ));
    }

    #[test]
    fn decreasing_milestones_rejected() {
        let text = DEFAULT_SCORING_JSON.replace(
            r#"{ "runs_threshold": 50, "points": 8 }"#,
            r#"{ "runs_threshold": 20, "points": 8 }"#,
        );
        assert!(matches!(
            parse_scoring_schema(&text),
            Err(ScoringError::NonIncreasingThresholds("milestone_bonuses"))
        ));
    }

    #[test]
    fn not_playing_scores_zero() {
        let p = PlayerMatchPerformance::did_not_play("x");
        assert_eq!(
            score_player(&p, PlayerRole::Batter, &default_scoring()).unwrap(),
            Points::ZERO
        );
    }

    #[test]
    fn fifty_off_thirty() {
        // xi 4 + runs 50 + fours 4 + sixes 2*2 + milestone(50) 8 + SR 166.67 in [150,170) 4
        let p = batter(50, 30, 4, 2);
        let got = score_player(&p, PlayerRole::Batter, &default_scoring()).unwrap();
        assert_eq!(got, Points::whole(4 + 50 + 4 + 4 + 8 + 4));
    }

    #[test]
    fn invalid_performance_rejected() {
        let p = batter(10, 5, 3, 0);
        assert!(matches!(
            score_player(&p, PlayerRole::Batter, &default_scoring()),
            Err(ScoringError::InvalidPerformance { .. })
        ));
    }

    #[test]
    fn duck_skips_bowlers() {
        let mut p = batter(0, 3, 0, 0);
        p.batting.dismissed = true;
        let s = default_scoring();
        assert_eq!(score_player(&p, PlayerRole::Batter, &s).unwrap(), Points::whole(2));
        assert_eq!(score_player(&p, PlayerRole::Bowler, &s).unwrap(), Points::whole(4));
    }

    #[test]
    fn economy_band_edges_are_half_open() {
        let s = default_scoring();
        let mut p = PlayerMatchPerformance::zero("w");
        p.bowling.legal_balls = 24;
        p.bowling.runs_conceded = 20; // exactly 5.00 rpo -> [5,6) band, +4
        assert_eq!(score_player(&p, PlayerRole::Bowler, &s).unwrap(), Points::whole(8));
        p.bowling.runs_conceded = 19; // 4.75 -> +6
        assert_eq!(score_player(&p, PlayerRole::Bowler, &s).unwrap(), Points::whole(10));
        p.bowling.legal_balls = 11; // below the 2-over minimum
        assert_eq!(score_player(&p, PlayerRole::Bowler, &s).unwrap(), Points::whole(4));
    }

    #[test]
    fn team_total_applies_multipliers() {
        let s = default_scoring();
        let ids: Vec<PlayerId> = (0..11).map(|i| PlayerId::new(format!("p{i:02}"))).collect();
        let mut base = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            base.insert(id.clone(), Points::whole(i as i64 * 3 + 1));
        }
        let team = FantasyTeam::new(ids.clone(), "p10", "p09");
        let score = team_score_from_base(&team, &base, &s).unwrap();
        let sum: i64 = (0..11).map(|i| i * 3 + 1).sum();
        // C base 31 (+31), VC base 28 (+14)
        assert_eq!(score.total, Points::whole(sum + 31 + 14));
        assert_eq!(score.captain_bonus, Points::whole(31));
        assert_eq!(score.vice_captain_bonus, Points::whole(14));
    }

    #[test]
    fn missing_performance_reported() {
        let ids: Vec<PlayerId> = (0..11).map(|i| PlayerId::new(format!("p{i:02}"))).collect();
        let team = FantasyTeam::new(ids.clone(), "p00", "p01");
        let roles: BTreeMap<PlayerId, PlayerRole> =
            ids.iter().map(|i| (i.clone(), PlayerRole::Batter)).collect();
        let perfs = BTreeMap::new();
        assert!(matches!(
            score_team(&team, &perfs, &roles, &default_scoring()),
            Err(ScoringError::MissingPerformance(_))
        ));
    }
}
