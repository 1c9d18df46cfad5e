//! Post-match evaluation of generated teams against the contest field and the Dream Team.

mod ablation;
mod baseline;
mod report;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ablation::{run_ablation, AblationCell, AblationReport, AblationRow, BaselineGenerator, FanCricGenerator, TeamGenerator, ABLATION_NS};
pub use baseline::{baseline_example, prompt_engineering_baseline, resolve_names, BaselineResult};
pub use report::{evaluation_report, ReportFormat};

use crate::analytics::{dream_team_from_base, score_entries, AnalyticsError, ContestEntrySet, DreamTeam, ScoreDistribution, Weighting};
use crate::model::{FantasyTeam, PlayerId, PlayerMatchPerformance, PlayerPool};
use crate::points::Points;
use crate::rules::RulesSchema;
use crate::scoring::{base_points_table, score_team, team_score_from_base, RoleLookup, ScoringError, ScoringSchema};

/// Percentile at or above which an entry counts as a win (top 66.7% of the field).
pub const DEFAULT_WIN_FLOOR: f64 = 33.3;

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("no rows to aggregate")]
    NoRows,
    #[error("scoring: {0}")]
    Scoring(#[from] ScoringError),
    #[error("analytics: {0}")]
    Analytics(#[from] AnalyticsError),
    #[error("win floor {0} outside [0, 100]")]
    BadWinFloor(f64),
    #[error("generator `{generator}` at n={n}: {message}")]
    Generation { generator: String, n: usize, message: String },
    #[error("generator `{generator}` returned {got} teams for n={n}")]
    WrongTeamCount { generator: String, n: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub team_label: String,
    pub total_points: f64,
    pub percentile: f64,
    pub c_in_dt: u8,
    pub vc_in_dt: u8,
    pub players_in_dt: u8,
    pub win: bool,
}

pub fn is_win(percentile: f64, win_floor: f64) -> bool {
    percentile >= win_floor
}

fn check_floor(win_floor: f64) -> Result<(), EvaluationError> {
    if (0.0..=100.0).contains(&win_floor) {
        Ok(())
    } else {
        Err(EvaluationError::BadWinFloor(win_floor))
    }
}

fn row_for(label: &str, team: &FantasyTeam, total: Points, dt: &FantasyTeam, field: &ScoreDistribution, win_floor: f64) -> Result<EvaluationRow, EvaluationError> {
    let percentile = field.percentile_rank(total)?;
    let dt_members: BTreeSet<&PlayerId> = dt.players.iter().collect();
    let team_members: BTreeSet<&PlayerId> = team.players.iter().collect();
    Ok(EvaluationRow {
        team_label: label.to_string(),
        total_points: total.to_f64(),
        percentile,
        c_in_dt: u8::from(team.captain == dt.captain),
        vc_in_dt: u8::from(team.vice_captain == dt.vice_captain),
        players_in_dt: team_members.intersection(&dt_members).count() as u8,
        win: is_win(percentile, win_floor),
    })
}

/// Scores one team and places it against the field and the Dream Team.
pub fn evaluate_team(
    label: &str,
    team: &FantasyTeam,
    dt: &FantasyTeam,
    perfs: &BTreeMap<PlayerId, PlayerMatchPerformance>,
    roles: &impl RoleLookup,
    schema: &ScoringSchema,
    field: &ScoreDistribution,
    win_floor: f64,
) -> Result<EvaluationRow, EvaluationError> {
    check_floor(win_floor)?;
    dt.check().map_err(ScoringError::from)?;
    let total = score_team(team, perfs, roles, schema)?.total;
    row_for(label, team, total, dt, field, win_floor)
}

/// Everything needed to evaluate many teams for one finished match.
#[derive(Debug, Clone)]
pub struct Evaluator {
    base: BTreeMap<PlayerId, Points>,
    schema: ScoringSchema,
    dream: DreamTeam,
    field: ScoreDistribution,
    win_floor: f64,
}

impl Evaluator {
    /// Scores the contest, solves the Dream Team and fixes the win floor.
    pub fn new(
        pool: &PlayerPool,
        perfs: &BTreeMap<PlayerId, PlayerMatchPerformance>,
        rules: &RulesSchema,
        schema: &ScoringSchema,
        contest: &ContestEntrySet,
        weighting: Weighting,
        win_floor: f64,
    ) -> Result<Self, EvaluationError> {
        check_floor(win_floor)?;
        let base = base_points_table(pool, perfs, schema)?;
        let dream = dream_team_from_base(pool, &base, rules, schema)?;
        let points = score_entries(contest, &base, schema)?;
        let field = ScoreDistribution::from_entries(contest, &points, weighting)?;
        if field.is_empty() {
            return Err(AnalyticsError::EmptySet.into());
        }
        Ok(Evaluator {
            base,
            schema: schema.clone(),
            dream,
            field,
            win_floor,
        })
    }

    pub fn dream_team(&self) -> &DreamTeam {
        &self.dream
    }

    pub fn field(&self) -> &ScoreDistribution {
        &self.field
    }

    pub fn win_floor(&self) -> f64 {
        self.win_floor
    }

    pub fn evaluate(&self, label: &str, team: &FantasyTeam) -> Result<EvaluationRow, EvaluationError> {
        let total = team_score_from_base(team, &self.base, &self.schema)?.total;
        row_for(label, team, total, &self.dream.team, &self.field, self.win_floor)
    }

    /// Rows labelled by team name, or `team N` when unnamed.
    pub fn evaluate_all(&self, teams: &[FantasyTeam]) -> Result<Vec<EvaluationRow>, EvaluationError> {
        teams
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let label = t.name.clone().unwrap_or_else(|| format!("team {}", i + 1));
                self.evaluate(&label, t)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub n_teams: usize,
    pub points_avg: f64,
    pub percentile_avg: f64,
    pub c_in_dt_avg: f64,
    pub vc_in_dt_avg: f64,
    pub players_in_dt_avg: f64,
    pub win_pct: f64,
    pub highest_percentile: f64,
}

impl AggregateReport {
    /// Mean of the captain and vice-captain hit rates, the combined column of ablation grids.
    pub fn c_vc_in_dt_avg(&self) -> f64 {
        (self.c_in_dt_avg + self.vc_in_dt_avg) / 2.0
    }
}

/// Mean with the terms summed in ascending order, so any row order gives the same bits.
fn mean(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn aggregate_report(rows: &[EvaluationRow]) -> Result<AggregateReport, EvaluationError> {
    if rows.is_empty() {
        return Err(EvaluationError::NoRows);
    }
    let col = |f: fn(&EvaluationRow) -> f64| mean(rows.iter().map(f).collect());
    let wins = rows.iter().filter(|r| r.win).count();
    Ok(AggregateReport {
        n_teams: rows.len(),
        points_avg: col(|r| r.total_points),
        percentile_avg: col(|r| r.percentile),
        c_in_dt_avg: col(|r| r.c_in_dt as f64),
        vc_in_dt_avg: col(|r| r.vc_in_dt as f64),
        players_in_dt_avg: col(|r| r.players_in_dt as f64),
        win_pct: 100.0 * wins as f64 / rows.len() as f64,
        highest_percentile: rows.iter().map(|r| r.percentile).fold(f64::NEG_INFINITY, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(points: f64, pct: f64, c: u8, vc: u8, p: u8) -> EvaluationRow {
        EvaluationRow {
            team_label: String::new(),
            total_points: points,
            percentile: pct,
            c_in_dt: c,
            vc_in_dt: vc,
            players_in_dt: p,
            win: is_win(pct, DEFAULT_WIN_FLOOR),
        }
    }

    #[test]
    fn single_row_is_its_own_average() {
        let r = row(522.5, 55.6, 0, 0, 7);
        let a = aggregate_report(std::slice::from_ref(&r)).unwrap();
        assert_eq!(a.points_avg, 522.5);
        assert_eq!(a.percentile_avg, 55.6);
        assert_eq!(a.highest_percentile, 55.6);
        assert_eq!(a.players_in_dt_avg, 7.0);
        assert_eq!(a.win_pct, 100.0);
    }

    #[test]
    fn empty_rows_rejected() {
        assert!(matches!(aggregate_report(&[]), Err(EvaluationError::NoRows)));
    }

    #[test]
    fn win_floor_boundary() {
        assert!(!is_win(27.9, DEFAULT_WIN_FLOOR));
        assert!(is_win(33.3, DEFAULT_WIN_FLOOR));
        assert!(is_win(39.9, DEFAULT_WIN_FLOOR));
    }
}
