use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PlayerId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DismissalKind {
    Bowled,
    Lbw,
    Caught,
    RunOut,
    Stumped,
    HitWicket,
    Other,
}

impl FromStr for DismissalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "bowled" | "b" => DismissalKind::Bowled,
            "lbw" => DismissalKind::Lbw,
            "caught" | "c" => DismissalKind::Caught,
            "run_out" | "runout" | "run out" => DismissalKind::RunOut,
            "stumped" | "st" => DismissalKind::Stumped,
            "hit_wicket" | "hit wicket" => DismissalKind::HitWicket,
            "other" => DismissalKind::Other,
            other => return Err(format!("unknown dismissal kind `{other}`")),
        })
    }
}

impl fmt::Display for DismissalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DismissalKind::Bowled => "bowled",
            DismissalKind::Lbw => "lbw",
            DismissalKind::Caught => "caught",
            DismissalKind::RunOut => "run_out",
            DismissalKind::Stumped => "stumped",
            DismissalKind::HitWicket => "hit_wicket",
            DismissalKind::Other => "other",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batting {
    pub runs: u32,
    pub balls_faced: u32,
    pub fours: u32,
    pub sixes: u32,
    pub dismissed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dismissal_kind: Option<DismissalKind>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bowling {
    pub legal_balls: u32,
    pub maidens: u32,
    pub runs_conceded: u32,
    pub wickets: u32,
    pub bowled_or_lbw_count: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fielding {
    pub catches: u32,
    pub stumpings: u32,
    pub runouts_direct: u32,
    pub runouts_indirect: u32,
}

/// One player's raw stat line for one match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerMatchPerformance {
    pub player_id: PlayerId,
    pub played: bool,
    pub batting: Batting,
    pub bowling: Bowling,
    pub fielding: Fielding,
}

impl PlayerMatchPerformance {
    /// An all-zero line for a player who was in the XI.
    pub fn zero(player_id: impl Into<PlayerId>) -> Self {
        PlayerMatchPerformance {
            player_id: player_id.into(),
            played: true,
            batting: Batting::default(),
            bowling: Bowling::default(),
            fielding: Fielding::default(),
        }
    }

    pub fn did_not_play(player_id: impl Into<PlayerId>) -> Self {
        PlayerMatchPerformance {
            played: false,
            ..Self::zero(player_id)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PerformanceViolation {
    /// 4·fours + 6·sixes exceeds runs.
    BoundaryRunsExceedTotal,
    /// More bowled/LBW dismissals than wickets.
    DismissalKindExceedsWickets,
    /// More maidens than complete overs bowled.
    MaidensExceedOvers,
    /// A dismissal kind was recorded for a batter who was not out.
    DismissalKindWithoutDismissal,
    /// Non-zero stats for a player who was not in the XI.
    StatsWithoutPlaying,
}

impl PerformanceViolation {
    pub fn code(self) -> &'static str {
        match self {
            PerformanceViolation::BoundaryRunsExceedTotal => "BoundaryRunsExceedTotal",
            PerformanceViolation::DismissalKindExceedsWickets => "DismissalKindExceedsWickets",
            PerformanceViolation::MaidensExceedOvers => "MaidensExceedOvers",
            PerformanceViolation::DismissalKindWithoutDismissal => "DismissalKindWithoutDismissal",
            PerformanceViolation::StatsWithoutPlaying => "StatsWithoutPlaying",
        }
    }
}

impl fmt::Display for PerformanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Every violated invariant of a stat line; empty means the line is scoreable.
pub fn validate_performance(perf: &PlayerMatchPerformance) -> Vec<PerformanceViolation> {
    let mut out = Vec::new();
    let bat = &perf.batting;
    let bowl = &perf.bowling;
    if 4 * u64::from(bat.fours) + 6 * u64::from(bat.sixes) > u64::from(bat.runs) {
        out.push(PerformanceViolation::BoundaryRunsExceedTotal);
    }
    if bowl.bowled_or_lbw_count > bowl.wickets {
        out.push(PerformanceViolation::DismissalKindExceedsWickets);
    }
    if bowl.maidens > bowl.legal_balls / 6 {
        out.push(PerformanceViolation::MaidensExceedOvers);
    }
    if !bat.dismissed && bat.dismissal_kind.is_some() {
        out.push(PerformanceViolation::DismissalKindWithoutDismissal);
    }
    if !perf.played {
        let f = &perf.fielding;
        let any = bat.runs + bat.balls_faced + bowl.legal_balls + bowl.wickets
            + f.catches
            + f.stumpings
            + f.runouts_direct
            + f.runouts_indirect
            > 0
            || bat.dismissed;
        if any {
            out.push(PerformanceViolation::StatsWithoutPlaying);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_line_is_clean() {
        assert!(validate_performance(&PlayerMatchPerformance::zero("p1")).is_empty());
        assert!(validate_performance(&PlayerMatchPerformance::did_not_play("p1")).is_empty());
    }

    #[test]
    fn boundary_runs_bound() {
        let mut p = PlayerMatchPerformance::zero("p1");
        p.batting.runs = 10;
        p.batting.fours = 3;
        assert_eq!(
            validate_performance(&p),
            vec![PerformanceViolation::BoundaryRunsExceedTotal]
        );
        p.batting.runs = 12;
        assert!(validate_performance(&p).is_empty());
    }

    #[test]
    fn bowled_lbw_bound() {
        let mut p = PlayerMatchPerformance::zero("p1");
        p.bowling.legal_balls = 24;
        p.bowling.wickets = 2;
        p.bowling.bowled_or_lbw_count = 3;
        assert_eq!(
            validate_performance(&p),
            vec![PerformanceViolation::DismissalKindExceedsWickets]
        );
    }

    #[test]
    fn every_violation_reported() {
        let mut p = PlayerMatchPerformance::zero("p1");
        p.batting.runs = 1;
        p.batting.sixes = 1;
        p.bowling.maidens = 1;
        p.bowling.legal_balls = 5;
        assert_eq!(
            validate_performance(&p),
            vec![
                PerformanceViolation::BoundaryRunsExceedTotal,
                PerformanceViolation::MaidensExceedOvers
            ]
        );
    }
}
