//! Core vocabulary: players, matches, per-match stat lines and fantasy teams.

pub(crate) mod io;
mod performance;
pub(crate) mod team;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::points::Credits;

pub use io::{read_performances, read_players, write_performances, write_players, CsvError};
pub use performance::{
    validate_performance, Batting, Bowling, DismissalKind, Fielding, PerformanceViolation,
    PlayerMatchPerformance,
};
pub use team::{canonical_signature, FantasyTeam, Signature, TeamStructureError, SIGNATURE_LEN};

/// Opaque, stable player identifier. Reasoning paths never key on display names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Self {
        PlayerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        PlayerId(s.to_string())
    }
}

impl From<String> for PlayerId {
    fn from(s: String) -> Self {
        PlayerId(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FranchiseId(String);

impl FranchiseId {
    pub fn new(id: impl Into<String>) -> Self {
        FranchiseId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FranchiseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FranchiseId {
    fn from(s: &str) -> Self {
        FranchiseId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PlayerRole {
    #[serde(rename = "WK")]
    WicketKeeper,
    #[serde(rename = "BAT")]
    Batter,
    #[serde(rename = "AR")]
    AllRounder,
    #[serde(rename = "BOWL")]
    Bowler,
}

impl PlayerRole {
    pub const ALL: [PlayerRole; 4] = [
        PlayerRole::WicketKeeper,
        PlayerRole::Batter,
        PlayerRole::AllRounder,
        PlayerRole::Bowler,
    ];

    pub fn code(self) -> &'static str {
        match self {
            PlayerRole::WicketKeeper => "WK",
            PlayerRole::Batter => "BAT",
            PlayerRole::AllRounder => "AR",
            PlayerRole::Bowler => "BOWL",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PlayerRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown player role `{0}` (expected WK, BAT, AR or BOWL)")]
pub struct UnknownRole(pub String);

impl FromStr for PlayerRole {
    type Err = UnknownRole;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "WK" => Ok(PlayerRole::WicketKeeper),
            "BAT" => Ok(PlayerRole::Batter),
            "AR" => Ok(PlayerRole::AllRounder),
            "BOWL" => Ok(PlayerRole::Bowler),
            other => Err(UnknownRole(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BattingHand {
    Left,
    Right,
    #[default]
    Unknown,
}

impl FromStr for BattingHand {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "l" | "left" | "lhb" => BattingHand::Left,
            "r" | "right" | "rhb" => BattingHand::Right,
            _ => BattingHand::Unknown,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Player {
    pub player_id: PlayerId,
    pub name: String,
    pub role: PlayerRole,
    pub franchise_id: FranchiseId,
    pub credit_cost: Credits,
    #[serde(default)]
    pub batting_hand: BattingHand,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bowling_style: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Franchise {
    pub franchise_id: FranchiseId,
    pub name: String,
    pub short_code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Venue {
    pub name: String,
    pub city: String,
    pub latitude: f64,
    pub longitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TossDecision {
    Bat,
    Bowl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Toss {
    pub winner: FranchiseId,
    pub decision: TossDecision,
}

/// Half-open UTC interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchContextError {
    #[error("home and away franchise are both `{0}`")]
    SameFranchise(FranchiseId),
    #[error("playing XI for `{franchise}` has {count} distinct players, expected 11")]
    PlayingXiSize { franchise: FranchiseId, count: usize },
    #[error("playing XI given for `{0}`, which is not playing this match")]
    PlayingXiForeign(FranchiseId),
    #[error("innings windows must be ordered and non-overlapping")]
    InningsWindows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchContext {
    pub match_id: String,
    pub season: i32,
    pub tournament: String,
    pub home: Franchise,
    pub away: Franchise,
    pub venue: Venue,
    pub scheduled_start: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toss: Option<Toss>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub playing_xi: Option<BTreeMap<FranchiseId, Vec<PlayerId>>>,
    pub innings_windows: [TimeWindow; 2],
}

impl MatchContext {
    /// Default T20 innings windows: `[start, start+100m)` and `[start+115m, start+215m)`.
    pub fn default_innings_windows(start: DateTime<Utc>) -> [TimeWindow; 2] {
        let m = chrono::Duration::minutes;
        [
            TimeWindow {
                start,
                end: start + m(100),
            },
            TimeWindow {
                start: start + m(115),
                end: start + m(215),
            },
        ]
    }

    pub fn validate(&self) -> Result<(), MatchContextError> {
        if self.home.franchise_id == self.away.franchise_id {
            return Err(MatchContextError::SameFranchise(self.home.franchise_id.clone()));
        }
        if let Some(xi) = &self.playing_xi {
            for (franchise, players) in xi {
                if *franchise != self.home.franchise_id && *franchise != self.away.franchise_id {
                    return Err(MatchContextError::PlayingXiForeign(franchise.clone()));
                }
                let distinct: BTreeSet<_> = players.iter().collect();
                if players.len() != 11 || distinct.len() != 11 {
                    return Err(MatchContextError::PlayingXiSize {
                        franchise: franchise.clone(),
                        count: distinct.len(),
                    });
                }
            }
            for f in [&self.home.franchise_id, &self.away.franchise_id] {
                if !xi.contains_key(f) {
                    return Err(MatchContextError::PlayingXiSize {
                        franchise: f.clone(),
                        count: 0,
                    });
                }
            }
        }
        let [first, second] = &self.innings_windows;
        if first.start >= first.end || second.start >= second.end || first.end > second.start {
            return Err(MatchContextError::InningsWindows);
        }
        Ok(())
    }

    /// All 22 playing-XI ids, home side first, each side in listed order.
    pub fn playing_xi_ids(&self) -> Option<Vec<PlayerId>> {
        let xi = self.playing_xi.as_ref()?;
        let mut ids = xi.get(&self.home.franchise_id)?.clone();
        ids.extend(xi.get(&self.away.franchise_id)?.iter().cloned());
        Some(ids)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonAggregate {
    pub season: i32,
    pub matches: u32,
    pub runs: u32,
    pub balls_faced: u32,
    pub strike_rate: f64,
    pub wickets: u32,
    pub legal_balls: u32,
    pub runs_conceded: u32,
    pub economy: f64,
    pub catches: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CareerProfile {
    pub player_id: PlayerId,
    pub per_season_aggregates: Vec<SeasonAggregate>,
    pub description: String,
    pub strengths: Vec<String>,
    pub weaknesses: Vec<String>,
    pub career_rating: u8,
}

/// Aggregate over a subset of matches, used for form splits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStats {
    pub matches: u32,
    pub runs: u32,
    pub balls_faced: u32,
    pub wickets: u32,
    pub legal_balls: u32,
    pub runs_conceded: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSplits {
    pub overall: SplitStats,
    pub home: SplitStats,
    pub away: SplitStats,
    pub batting_first: SplitStats,
    pub batting_second: SplitStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormAssessment {
    pub player_id: PlayerId,
    /// Requested window size K and the match ids actually inside it.
    pub window_size: usize,
    pub window_matches: Vec<String>,
    pub splits: FormSplits,
    pub summary: String,
    pub form_rating: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContestEntry {
    pub entry_id: String,
    pub team: FantasyTeam,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<crate::points::Points>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoolError {
    #[error("player id must be non-empty")]
    EmptyId,
    #[error("duplicate player id `{0}` in pool")]
    DuplicateId(PlayerId),
    #[error("player `{0}` has a non-positive credit cost")]
    NonPositiveCredit(PlayerId),
}

/// The players a team may be drawn from, plus the announced playing XIs when known.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlayerPool {
    players: BTreeMap<PlayerId, Player>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    playing_xi: Option<BTreeSet<PlayerId>>,
}

impl PlayerPool {
    pub fn new(players: impl IntoIterator<Item = Player>) -> Result<Self, PoolError> {
        let mut map = BTreeMap::new();
        for p in players {
            if p.player_id.as_str().is_empty() {
                return Err(PoolError::EmptyId);
            }
            if p.credit_cost.halves() == 0 {
                return Err(PoolError::NonPositiveCredit(p.player_id));
            }
            if map.contains_key(&p.player_id) {
                return Err(PoolError::DuplicateId(p.player_id));
            }
            map.insert(p.player_id.clone(), p);
        }
        Ok(PlayerPool {
            players: map,
            playing_xi: None,
        })
    }

    pub fn with_playing_xi(mut self, xi: impl IntoIterator<Item = PlayerId>) -> Self {
        self.playing_xi = Some(xi.into_iter().collect());
        self
    }

    /// Restricts the pool to the given ids (e.g. the 22 of a match).
    pub fn restricted_to(&self, ids: &[PlayerId]) -> PlayerPool {
        let players = ids
            .iter()
            .filter_map(|id| self.players.get(id).map(|p| (id.clone(), p.clone())))
            .collect();
        PlayerPool {
            players,
            playing_xi: self.playing_xi.clone(),
        }
    }

    pub fn get(&self, id: &PlayerId) -> Option<&Player> {
        self.players.get(id)
    }

    pub fn contains(&self, id: &PlayerId) -> bool {
        self.players.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    /// Players in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &Player> {
        self.players.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &PlayerId> {
        self.players.keys()
    }

    pub fn playing_xi(&self) -> Option<&BTreeSet<PlayerId>> {
        self.playing_xi.as_ref()
    }

    pub fn role_of(&self, id: &PlayerId) -> Option<PlayerRole> {
        self.players.get(id).map(|p| p.role)
    }
}
