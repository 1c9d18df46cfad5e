//! Lineup legality: role quotas, per-franchise caps, credit budget and pool restriction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FantasyTeam, FranchiseId, PlayerId, PlayerPool, PlayerRole};
use crate::points::Credits;

#[derive(Debug, Error)]
pub enum RulesError {
    #[error("rules config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("rules config is missing field `{0}`")]
    MissingField(String),
    #[error("role {role}: min {min} > max {max}")]
    InconsistentBounds { role: PlayerRole, min: u32, max: u32 },
    #[error("total_players {total} outside the role bounds [{min_sum}, {max_sum}]")]
    TotalOutsideRoleBounds { total: u32, min_sum: u32, max_sum: u32 },
    #[error("max_per_franchise {max} must be below total_players {total}")]
    FranchiseCap { max: u32, total: u32 },
    #[error("credit_budget must be positive")]
    NonPositiveBudget,
    #[error("credit_budget: {0}")]
    Budget(String),
    #[error("team member `{0}` is not in the player pool")]
    UnknownPlayer(PlayerId),
    #[error("no valid team can be built from this pool")]
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleBounds {
    pub min: u32,
    pub max: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoolRestriction {
    #[default]
    PlayingXIOnly,
    FullSquad,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RulesSchema {
    pub total_players: u32,
    pub role_bounds: BTreeMap<PlayerRole, RoleBounds>,
    pub max_per_franchise: u32,
    pub credit_budget: Credits,
    pub pool_restriction: PoolRestriction,
}

impl RulesSchema {
    pub fn bounds(&self, role: PlayerRole) -> RoleBounds {
        self.role_bounds[&role]
    }

    /// Checks the schema invariants.
    pub fn check(&self) -> Result<(), RulesError> {
        let mut min_sum = 0;
        let mut max_sum = 0;
        for role in PlayerRole::ALL {
            let b = self
                .role_bounds
                .get(&role)
                .ok_or_else(|| RulesError::MissingField(format!("role_bounds.{}", role.code())))?;
            if b.min > b.max {
                return Err(RulesError::InconsistentBounds {
                    role,
                    min: b.min,
                    max: b.max,
                });
            }
            min_sum += b.min;
            max_sum += b.max;
        }
        if self.total_players < min_sum || self.total_players > max_sum {
            return Err(RulesError::TotalOutsideRoleBounds {
                total: self.total_players,
                min_sum,
                max_sum,
            });
        }
        if self.max_per_franchise >= self.total_players {
            return Err(RulesError::FranchiseCap {
                max: self.max_per_franchise,
                total: self.total_players,
            });
        }
        if self.credit_budget.halves() == 0 {
            return Err(RulesError::NonPositiveBudget);
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rules serialize")
    }
}

#[derive(Deserialize)]
struct RawRules {
    total_players: Option<u32>,
    role_bounds: Option<BTreeMap<String, RawBounds>>,
    max_per_franchise: Option<u32>,
    credit_budget: Option<f64>,
    #[serde(default)]
    pool_restriction: Option<PoolRestriction>,
}

#[derive(Deserialize)]
struct RawBounds {
    min: Option<u32>,
    max: Option<u32>,
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, RulesError> {
    v.ok_or_else(|| RulesError::MissingField(name.to_string()))
}

/// Parses a JSON rules document.
///
/// ```json
/// {"total_players": 11,
///  "role_bounds": {"WK": {"min": 1, "max": 4}, "BAT": {"min": 3, "max": 6},
///                  "AR": {"min": 1, "max": 4}, "BOWL": {"min": 3, "max": 6}},
///  "max_per_franchise": 7, "credit_budget": 100, "pool_restriction": "PlayingXIOnly"}
/// ```
pub fn parse_rules(config_text: &str) -> Result<RulesSchema, RulesError> {
    let raw: RawRules = serde_json::from_str(config_text)?;
    let total_players = required(raw.total_players, "total_players")?;
    let raw_bounds = required(raw.role_bounds, "role_bounds")?;
    let mut role_bounds = BTreeMap::new();
    for (key, b) in raw_bounds {
        let role: PlayerRole = key
            .parse()
            .map_err(|_| RulesError::MissingField(format!("role_bounds.{key} (unknown role)")))?;
        let min = required(b.min, &format!("role_bounds.{key}.min"))?;
        let max = required(b.max, &format!("role_bounds.{key}.max"))?;
        role_bounds.insert(role, RoleBounds { min, max });
    }
    let max_per_franchise = required(raw.max_per_franchise, "max_per_franchise")?;
    let budget = required(raw.credit_budget, "credit_budget")?;
    if budget <= 0.0 {
        return Err(RulesError::NonPositiveBudget);
    }
    let credit_budget = Credits::from_f64(budget).map_err(|e| RulesError::Budget(e.to_string()))?;
    let schema = RulesSchema {
        total_players,
        role_bounds,
        max_per_franchise,
        credit_budget,
        pool_restriction: raw.pool_restriction.unwrap_or_default(),
    };
    schema.check()?;
    Ok(schema)
}

/// The rules file shipped with the crate (`config/rules.default.json`).
pub const DEFAULT_RULES_JSON: &str = include_str!("../config/rules.default.json");

pub fn default_rules() -> RulesSchema {
    parse_rules(DEFAULT_RULES_JSON).expect("shipped rules config is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationCode {
    CountViolation,
    DuplicatePlayer,
    CaptainViolation,
    ViceCaptainViolation,
    CaptainEqualsViceCaptain,
    RoleBoundViolation,
    FranchiseQuotaViolation,
    BudgetViolation,
    PoolRestrictionViolation,
    /// Only produced when adapting free-form proposals; never by [`validate_team`].
    UnknownPlayer,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::CountViolation => "CountViolation",
            ViolationCode::DuplicatePlayer => "DuplicatePlayer",
            ViolationCode::CaptainViolation => "CaptainViolation",
            ViolationCode::ViceCaptainViolation => "ViceCaptainViolation",
            ViolationCode::CaptainEqualsViceCaptain => "CaptainEqualsViceCaptain",
            ViolationCode::RoleBoundViolation => "RoleBoundViolation",
            ViolationCode::FranchiseQuotaViolation => "FranchiseQuotaViolation",
            ViolationCode::BudgetViolation => "BudgetViolation",
            ViolationCode::PoolRestrictionViolation => "PoolRestrictionViolation",
            ViolationCode::UnknownPlayer => "UnknownPlayer",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

/// Reports every rule the team breaks. Fails only when a member is unknown to the pool.
pub fn validate_team(
    team: &FantasyTeam,
    pool: &PlayerPool,
    rules: &RulesSchema,
) -> Result<ValidationReport, RulesError> {
    let mut violations = Vec::new();
    let mut push = |code, detail: String| violations.push(Violation { code, detail });

    let mut members = BTreeSet::new();
    for p in &team.players {
        if !pool.contains(p) {
            return Err(RulesError::UnknownPlayer(p.clone()));
        }
        if !members.insert(p) {
            push(ViolationCode::DuplicatePlayer, format!("`{p}` listed more than once"));
        }
    }
    if members.len() != rules.total_players as usize || team.players.len() != members.len() {
        push(
            ViolationCode::CountViolation,
            format!(
                "{} distinct players, expected {}",
                members.len(),
                rules.total_players
            ),
        );
    }
    if !members.contains(&team.captain) {
        push(
            ViolationCode::CaptainViolation,
            format!("captain `{}` is not in the team", team.captain),
        );
    }
    if !members.contains(&team.vice_captain) {
        push(
            ViolationCode::ViceCaptainViolation,
            format!("vice-captain `{}` is not in the team", team.vice_captain),
        );
    }
    if team.captain == team.vice_captain {
        push(
            ViolationCode::CaptainEqualsViceCaptain,
            format!("`{}` is both captain and vice-captain", team.captain),
        );
    }

    let mut role_counts = [0u32; 4];
    let mut franchise_counts: BTreeMap<&FranchiseId, u32> = BTreeMap::new();
    let mut credits = Credits::default();
    let mut outside_pool = Vec::new();
    for id in &members {
        let player = pool.get(id).expect("membership checked above");
        role_counts[player.role.index()] += 1;
        *franchise_counts.entry(&player.franchise_id).or_default() += 1;
        credits = credits + player.credit_cost;
        if rules.pool_restriction == PoolRestriction::PlayingXIOnly {
            if let Some(xi) = pool.playing_xi() {
                if !xi.contains(*id) {
                    outside_pool.push((*id).clone());
                }
            }
        }
    }
    for role in PlayerRole::ALL {
        let b = rules.bounds(role);
        let n = role_counts[role.index()];
        if n < b.min || n > b.max {
            push(
                ViolationCode::RoleBoundViolation,
                format!("{n} {role} selected, allowed {}-{}", b.min, b.max),
            );
        }
    }
    for (franchise, n) in franchise_counts {
        if n > rules.max_per_franchise {
            push(
                ViolationCode::FranchiseQuotaViolation,
                format!(
                    "{n} players from {franchise}, at most {} allowed",
                    rules.max_per_franchise
                ),
            );
        }
    }
    if credits > rules.credit_budget {
        push(
            ViolationCode::BudgetViolation,
            format!("{credits} credits used, budget {}", rules.credit_budget),
        );
    }
    for id in outside_pool {
        push(
            ViolationCode::PoolRestrictionViolation,
            format!("`{id}` is not in the announced playing XI"),
        );
    }
    Ok(ValidationReport::from_violations(violations))
}

/// Picks the highest-weight member (lowest id on ties) other than `exclude`.
fn best_member<'a>(
    members: &'a [PlayerId],
    exclude: Option<&PlayerId>,
    weight: &impl Fn(&PlayerId) -> f64,
) -> Option<&'a PlayerId> {
    members
        .iter()
        .filter(|m| Some(*m) != exclude)
        .min_by(|a, b| weight(b).total_cmp(&weight(a)).then_with(|| a.cmp(b)))
}

/// Re-assigns C/VC for a membership, keeping the candidate's choices when possible.
fn assign_captaincy(
    members: &[PlayerId],
    captain: &PlayerId,
    vice: &PlayerId,
    weight: &impl Fn(&PlayerId) -> f64,
) -> Option<(PlayerId, PlayerId)> {
    let c = if members.contains(captain) {
        captain.clone()
    } else {
        let keep_vice = (members.contains(vice) && vice != captain).then_some(vice);
        best_member(members, keep_vice, weight)?.clone()
    };
    let v = if members.contains(vice) && *vice != c {
        vice.clone()
    } else {
        best_member(members, Some(&c), weight)?.clone()
    };
    Some((c, v))
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Turns a rule-breaking lineup into a valid one with as few swaps as possible.
///
/// Ordering of candidate repairs: fewest members swapped out, then keeping the
/// original captain and vice-captain, then highest total preference weight,
/// then the lexicographically smallest sorted member list.
pub fn repair_team(
    candidate: &FantasyTeam,
    rules: &RulesSchema,
    pool: &PlayerPool,
    preference: &BTreeMap<PlayerId, f64>,
) -> Result<FantasyTeam, RulesError> {
    if let Ok(report) = validate_team(candidate, pool, rules) {
        if report.ok {
            return Ok(candidate.clone());
        }
    }
    let total = rules.total_players as usize;
    let eligible: Vec<&PlayerId> = pool
        .iter()
        .filter(|p| match (rules.pool_restriction, pool.playing_xi()) {
            (PoolRestriction::PlayingXIOnly, Some(xi)) => xi.contains(&p.player_id),
            _ => true,
        })
        .map(|p| &p.player_id)
        .collect();
    if eligible.len() < total {
        return Err(RulesError::Infeasible);
    }
    for role in PlayerRole::ALL {
        let have = eligible
            .iter()
            .filter(|id| pool.role_of(id) == Some(role))
            .count();
        if have < rules.bounds(role).min as usize {
            return Err(RulesError::Infeasible);
        }
    }

    let weight = |id: &PlayerId| preference.get(id).copied().unwrap_or(0.0);
    let mut keep: Vec<PlayerId> = candidate
        .players
        .iter()
        .filter(|p| eligible.contains(p))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    keep.sort();
    let others: Vec<PlayerId> = eligible
        .iter()
        .filter(|id| !keep.contains(id))
        .map(|id| (*id).clone())
        .collect();

    struct Best {
        keeps_captaincy: u8,
        weight: f64,
        members: Vec<PlayerId>,
        captain: PlayerId,
        vice: PlayerId,
    }

    for removed in 0..=keep.len() {
        let kept = keep.len() - removed;
        if kept > total {
            continue;
        }
        let added = total - kept;
        if added > others.len() {
            continue;
        }
        let mut best: Option<Best> = None;
        combinations(keep.len(), removed, |out_idx| {
            let staying: Vec<&PlayerId> = keep
                .iter()
                .enumerate()
                .filter(|(i, _)| !out_idx.contains(i))
                .map(|(_, p)| p)
                .collect();
            combinations(others.len(), added, |in_idx| {
                let mut members: Vec<PlayerId> = staying.iter().map(|p| (*p).clone()).collect();
                members.extend(in_idx.iter().map(|&i| others[i].clone()));
                members.sort();
                let Some((captain, vice)) = assign_captaincy(
                    &members,
                    &candidate.captain,
                    &candidate.vice_captain,
                    &weight,
                ) else {
                    return;
                };
                let team = FantasyTeam::new(members.clone(), captain.clone(), vice.clone());
                let ok = validate_team(&team, pool, rules).map(|r| r.ok).unwrap_or(false);
                if !ok {
                    return;
                }
                let keeps_captaincy = u8::from(captain == candidate.captain)
                    + u8::from(vice == candidate.vice_captain);
                let w: f64 = members.iter().map(&weight).sum();
                let better = match &best {
                    None => true,
                    Some(b) => keeps_captaincy
                        .cmp(&b.keeps_captaincy)
                        .then_with(|| w.total_cmp(&b.weight))
                        .then_with(|| b.members.cmp(&members))
                        .is_gt(),
                };
                if better {
                    best = Some(Best {
                        keeps_captaincy,
                        weight: w,
                        members,
                        captain,
                        vice,
                    });
                }
            });
        });
        if let Some(b) = best {
            let mut team = FantasyTeam::new(b.members, b.captain, b.vice);
            team.name = candidate.name.clone();
            team.rationale = candidate.rationale.clone();
            return Ok(team);
        }
    }
    Err(RulesError::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Player;

    fn player(id: &str, role: PlayerRole, franchise: &str, credit_halves: u32) -> Player {
        Player {
            player_id: PlayerId::new(id),
            name: id.to_string(),
            role,
            franchise_id: FranchiseId::new(franchise),
            credit_cost: Credits::from_halves(credit_halves),
            batting_hand: Default::default(),
            bowling_style: None,
            description: None,
        }
    }

    /// 2 WK, 5 BAT, 3 AR, 5 BOWL split across two franchises.
    fn pool15() -> PlayerPool {
        use PlayerRole::*;
        let spec = [
            ("a01", WicketKeeper, "A"),
            ("a02", Batter, "A"),
            ("a03", Batter, "A"),
            ("a04", AllRounder, "A"),
            ("a05", Bowler, "A"),
            ("a06", Bowler, "A"),
            ("a07", Batter, "A"),
            ("b01", WicketKeeper, "B"),
            ("b02", Batter, "B"),
            ("b03", Batter, "B"),
            ("b04", AllRounder, "B"),
            ("b05", AllRounder, "B"),
            ("b06", Bowler, "B"),
            ("b07", Bowler, "B"),
            ("b08", Bowler, "B"),
        ];
        PlayerPool::new(spec.iter().map(|(id, r, f)| player(id, *r, f, 16))).unwrap()
    }

    fn ids(v: &[&str]) -> Vec<PlayerId> {
        v.iter().map(|s| PlayerId::new(*s)).collect()
    }

    #[test]
    fn default_config_values() {
        let r = default_rules();
        assert_eq!(r.total_players, 11);
        let b = |role| r.bounds(role);
        assert_eq!(b(PlayerRole::WicketKeeper), RoleBounds { min: 1, max: 4 });
        assert_eq!(b(PlayerRole::Batter), RoleBounds { min: 3, max: 6 });
        assert_eq!(b(PlayerRole::AllRounder), RoleBounds { min: 1, max: 4 });
        assert_eq!(b(PlayerRole::Bowler), RoleBounds { min: 3, max: 6 });
        assert_eq!(r.max_per_franchise, 7);
        assert_eq!(r.credit_budget, Credits::from_halves(200));
        assert_eq!(r.pool_restriction, PoolRestriction::PlayingXIOnly);
    }

    #[test]
    fn inconsistent_bounds_rejected() {
        let text = DEFAULT_RULES_JSON.replace(
            r#""BAT": { "min": 3, "max": 6 }"#,
            r#""BAT": { "min": 7, "max": 6 }"#,
        );
        assert_ne!(text, DEFAULT_RULES_JSON);
        assert!(matches!(
            parse_rules(&text),
            Err(RulesError::InconsistentBounds {
                role: PlayerRole::Batter,
                ..
            })
        ));
    }

    #[test]
    fn missing_budget_rejected() {
        let text = r#"{"total_players": 11, "max_per_franchise": 7,
            "role_bounds": {"WK": {"min":1,"max":4}, "BAT": {"min":3,"max":6},
                            "AR": {"min":1,"max":4}, "BOWL": {"min":3,"max":6}}}"#;
        assert!(matches!(parse_rules(text), Err(RulesError::MissingField(f)) if f == "credit_budget"));
    }

    #[test]
    fn zero_budget_rejected() {
        let text = DEFAULT_RULES_JSON.replace("\"credit_budget\": 100", "\"credit_budget\": 0");
        assert!(matches!(parse_rules(&text), Err(RulesError::NonPositiveBudget)));
    }

    #[test]
    fn ten_players_is_count_violation() {
        let pool = pool15();
        let team = FantasyTeam::new(
            ids(&["a01", "a02", "a03", "a04", "a05", "a06", "b02", "b04", "b06", "b07"]),
            "a01",
            "a02",
        );
        let report = validate_team(&team, &pool, &default_rules()).unwrap();
        assert!(!report.ok);
        assert!(report.has(ViolationCode::CountViolation));
    }

    #[test]
    fn eight_from_one_franchise() {
        let pool = pool15();
        let team = FantasyTeam::new(
            ids(&["b01", "b02", "b03", "b04", "b05", "b06", "b07", "b08", "a01", "a02", "a05"]),
            "b01",
            "b02",
        );
        let report = validate_team(&team, &pool, &default_rules()).unwrap();
        assert_eq!(report.codes(), vec![ViolationCode::FranchiseQuotaViolation]);
    }

    #[test]
    fn all_violations_reported_together() {
        let pool = pool15();
        let mut rules = default_rules();
        rules.credit_budget = Credits::from_halves(100);
        let team = FantasyTeam::new(
            ids(&["b01", "b02", "b03", "b04", "b05", "b06", "b07", "b08", "a01", "a02", "a02"]),
            "b01",
            "b01",
        );
        let codes = validate_team(&team, &pool, &rules).unwrap().codes();
        for c in [
            ViolationCode::DuplicatePlayer,
            ViolationCode::CountViolation,
            ViolationCode::CaptainEqualsViceCaptain,
            ViolationCode::FranchiseQuotaViolation,
            ViolationCode::BudgetViolation,
        ] {
            assert!(codes.contains(&c), "missing {c}");
        }
    }

    #[test]
    fn unknown_player_is_an_error() {
        let pool = pool15();
        let team = FantasyTeam::new(
            ids(&["a01", "a02", "a03", "a04", "a05", "a06", "b02", "b04", "b06", "b07", "zz"]),
            "a01",
            "a02",
        );
        assert!(matches!(
            validate_team(&team, &pool, &default_rules()),
            Err(RulesError::UnknownPlayer(p)) if p.as_str() == "zz"
        ));
    }

    #[test]
    fn playing_xi_restriction() {
        let pool = pool15().with_playing_xi(ids(&[
            "a01", "a02", "a03", "a04", "a05", "a06", "b02", "b04", "b06", "b07", "b08",
        ]));
        let team = FantasyTeam::new(
            ids(&["a01", "a02", "a03", "a04", "a05", "a06", "b02", "b04", "b06", "b07", "b05"]),
            "a01",
            "a02",
        );
        let report = validate_team(&team, &pool, &default_rules()).unwrap();
        assert_eq!(report.codes(), vec![ViolationCode::PoolRestrictionViolation]);
        let mut full = default_rules();
        full.pool_restriction = PoolRestriction::FullSquad;
        assert!(validate_team(&team, &pool, &full).unwrap().ok);
    }

    #[test]
    fn repair_fixed_point() {
        let pool = pool15();
        let team = FantasyTeam::new(
            ids(&["a01", "a02", "a03", "a04", "a05", "a06", "b02", "b04", "b06", "b07", "b08"]),
            "a04",
            "b04",
        );
        let out = repair_team(&team, &default_rules(), &pool, &BTreeMap::new()).unwrap();
        assert_eq!(out, team);
    }

    #[test]
    fn repair_swaps_in_keeper_for_lowest_weight() {
        // Candidate has no WK; b01 is the only keeper not yet in it (a01 excluded from pool).
        let pool = PlayerPool::new(pool15().iter().filter(|p| p.player_id.as_str() != "a01").cloned())
            .unwrap();
        let members = ["a02", "a03", "a04", "a05", "a06", "b02", "b04", "b05", "b06", "b07", "b08"];
        let team = FantasyTeam::new(ids(&members), "a04", "b04");
        let mut pref = BTreeMap::new();
        for (i, m) in members.iter().enumerate() {
            pref.insert(PlayerId::new(*m), 10.0 + i as f64);
        }
        pref.insert(PlayerId::new("a04"), 100.0);
        pref.insert(PlayerId::new("b04"), 100.0);
        // a02/a03 are the cheapest but batters are at their minimum of 3.
        let out = repair_team(&team, &default_rules(), &pool, &pref).unwrap();
        assert!(validate_team(&out, &pool, &default_rules()).unwrap().ok);

        // Oracle: enumerate every single swap and keep the valid ones.
        let rules = default_rules();
        let mut valid_swaps = Vec::new();
        for out_id in &members {
            for in_p in pool.iter() {
                if members.contains(&in_p.player_id.as_str()) {
                    continue;
                }
                let mut m: Vec<PlayerId> = ids(&members)
                    .into_iter()
                    .filter(|p| p.as_str() != *out_id)
                    .collect();
                m.push(in_p.player_id.clone());
                let t = FantasyTeam::new(m, "a04", "b04");
                if validate_team(&t, &pool, &rules).unwrap().ok {
                    valid_swaps.push((out_id.to_string(), in_p.player_id.to_string()));
                }
            }
        }
        assert!(valid_swaps.iter().all(|(_, i)| i == "b01"));
        let expected_out = valid_swaps
            .iter()
            .min_by(|a, b| {
                pref[&PlayerId::new(a.0.as_str())].total_cmp(&pref[&PlayerId::new(b.0.as_str())])
            })
            .unwrap();
        assert_eq!(expected_out.0, "a05");
        assert!(out.contains(&PlayerId::new("b01")));
        assert!(!out.contains(&PlayerId::new("a05")));
        assert_eq!(out.players.len(), 11);
        assert_eq!(out.captain.as_str(), "a04");
        assert_eq!(out.vice_captain.as_str(), "b04");
    }

    #[test]
    fn repair_with_ten_player_pool_is_infeasible() {
        let pool = PlayerPool::new(pool15().iter().take(10).cloned()).unwrap();
        let team = FantasyTeam::new(pool.ids().cloned().collect::<Vec<_>>(), "a01", "a02");
        assert!(matches!(
            repair_team(&team, &default_rules(), &pool, &BTreeMap::new()),
            Err(RulesError::Infeasible)
        ));
    }
}
