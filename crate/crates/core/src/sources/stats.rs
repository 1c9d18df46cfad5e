//! Historical per-match player statistics with a time cutoff.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::ops::Deref;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use super::SourceError;
use crate::model::io::{parse_performance_record, Columns, PERFORMANCE_COLUMNS};
use crate::model::{
    CsvError, FormSplits, FranchiseId, PlayerId, PlayerMatchPerformance, SeasonAggregate, SplitStats,
};

pub const MATCH_COLUMNS: [&str; 8] = [
    "match_id",
    "match_date",
    "season",
    "venue",
    "home",
    "away",
    "batting_first",
    "winner",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub match_id: String,
    pub match_date: DateTime<Utc>,
    /// Side the player appeared for, when the file records it.
    pub franchise_id: Option<FranchiseId>,
    pub perf: PlayerMatchPerformance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub match_id: String,
    pub match_date: DateTime<Utc>,
    pub season: i32,
    pub venue: String,
    pub home: FranchiseId,
    pub away: FranchiseId,
    pub batting_first: FranchiseId,
    /// `None` for no result.
    pub winner: Option<FranchiseId>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamRecord {
    pub wins: u32,
    pub losses: u32,
    pub no_result: u32,
    pub batting_first_wins: u32,
    pub batting_first_losses: u32,
    pub batting_second_wins: u32,
    pub batting_second_losses: u32,
}

/// ISO-8601 date or date-time. Bare dates mean midnight UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    if let Ok(t) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S") {
        return Some(t.and_utc());
    }
    if let Ok(t) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M") {
        return Some(t.and_utc());
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).unwrap().and_utc())
}

fn date_field(cols: &Columns, rec: &csv::StringRecord, row: usize, name: &str) -> Result<DateTime<Utc>, CsvError> {
    let raw = cols.str(rec, row, name)?;
    parse_timestamp(raw).ok_or_else(|| CsvError::Field {
        row,
        column: name.into(),
        message: format!("expected an ISO-8601 date, got `{raw}`"),
    })
}

/// Per-match performance rows, sorted by player then date.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistoricalStatStore {
    rows: Vec<StatRow>,
    by_player: BTreeMap<PlayerId, (usize, usize)>,
    matches: BTreeMap<String, MatchRecord>,
}

impl HistoricalStatStore {
    pub fn new(mut rows: Vec<StatRow>, matches: impl IntoIterator<Item = MatchRecord>) -> Result<Self, SourceError> {
        let mut seen = BTreeSet::new();
        for (i, r) in rows.iter().enumerate() {
            if !seen.insert((r.match_id.clone(), r.perf.player_id.clone())) {
                return Err(SourceError::DuplicateRow {
                    match_id: r.match_id.clone(),
                    player_id: r.perf.player_id.clone(),
                    row: i + 2,
                });
            }
        }
        rows.sort_by(|a, b| {
            (&a.perf.player_id, a.match_date, &a.match_id).cmp(&(&b.perf.player_id, b.match_date, &b.match_id))
        });
        let mut by_player = BTreeMap::new();
        let mut start = 0;
        for i in 1..=rows.len() {
            if i == rows.len() || rows[i].perf.player_id != rows[start].perf.player_id {
                by_player.insert(rows[start].perf.player_id.clone(), (start, i));
                start = i;
            }
        }
        let matches = matches.into_iter().map(|m| (m.match_id.clone(), m)).collect();
        Ok(HistoricalStatStore {
            rows,
            by_player,
            matches,
        })
    }

    pub fn with_matches(self, matches: impl IntoIterator<Item = MatchRecord>) -> Self {
        let mut s = self;
        s.matches.extend(matches.into_iter().map(|m| (m.match_id.clone(), m)));
        s
    }

    pub fn rows(&self) -> &[StatRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn players(&self) -> impl Iterator<Item = &PlayerId> {
        self.by_player.keys()
    }

    /// Rows for one player, oldest first.
    pub fn player_rows(&self, id: &PlayerId) -> &[StatRow] {
        match self.by_player.get(id) {
            Some(&(a, b)) => &self.rows[a..b],
            None => &[],
        }
    }

    pub fn matches(&self) -> &BTreeMap<String, MatchRecord> {
        &self.matches
    }

    fn season_of(&self, row: &StatRow) -> i32 {
        self.matches
            .get(&row.match_id)
            .map(|m| m.season)
            .unwrap_or_else(|| row.match_date.year())
    }

    /// Totals per season over matches the player took part in.
    pub fn season_aggregates(&self, id: &PlayerId) -> Vec<SeasonAggregate> {
        let mut by_season: BTreeMap<i32, SeasonAggregate> = BTreeMap::new();
        for r in self.player_rows(id).iter().filter(|r| r.perf.played) {
            let season = self.season_of(r);
            let a = by_season.entry(season).or_insert_with(|| SeasonAggregate {
                season,
                matches: 0,
                runs: 0,
                balls_faced: 0,
                strike_rate: 0.0,
                wickets: 0,
                legal_balls: 0,
                runs_conceded: 0,
                economy: 0.0,
                catches: 0,
            });
            let p = &r.perf;
            a.matches += 1;
            a.runs += p.batting.runs;
            a.balls_faced += p.batting.balls_faced;
            a.wickets += p.bowling.wickets;
            a.legal_balls += p.bowling.legal_balls;
            a.runs_conceded += p.bowling.runs_conceded;
            a.catches += p.fielding.catches;
        }
        by_season
            .into_values()
            .map(|mut a| {
                if a.balls_faced > 0 {
                    a.strike_rate = 100.0 * a.runs as f64 / a.balls_faced as f64;
                }
                if a.legal_balls > 0 {
                    a.economy = 6.0 * a.runs_conceded as f64 / a.legal_balls as f64;
                }
                a
            })
            .collect()
    }

    /// Split totals over the player's last `k` played matches; window ids newest first.
    ///
    /// Home/away and batting-order splits need the row's franchise and the
    /// match record; rows lacking either only count towards `overall`.
    pub fn recent_form(&self, id: &PlayerId, k: usize) -> (Vec<String>, FormSplits) {
        let mut splits = FormSplits::default();
        let mut window = Vec::new();
        for r in self.player_rows(id).iter().rev().filter(|r| r.perf.played).take(k) {
            window.push(r.match_id.clone());
            add(&mut splits.overall, &r.perf);
            let (Some(side), Some(m)) = (&r.franchise_id, self.matches.get(&r.match_id)) else {
                continue;
            };
            if *side == m.home {
                add(&mut splits.home, &r.perf);
            } else if *side == m.away {
                add(&mut splits.away, &r.perf);
            }
            if *side == m.batting_first {
                add(&mut splits.batting_first, &r.perf);
            } else if *side == m.home || *side == m.away {
                add(&mut splits.batting_second, &r.perf);
            }
        }
        (window, splits)
    }

    /// Win/loss record of a franchise over the stored matches.
    pub fn team_record(&self, franchise: &FranchiseId) -> TeamRecord {
        let mut t = TeamRecord::default();
        for m in self.matches.values() {
            if m.home != *franchise && m.away != *franchise {
                continue;
            }
            let first = m.batting_first == *franchise;
            match &m.winner {
                None => t.no_result += 1,
                Some(w) if w == franchise => {
                    t.wins += 1;
                    if first {
                        t.batting_first_wins += 1;
                    } else {
                        t.batting_second_wins += 1;
                    }
                }
                Some(_) => {
                    t.losses += 1;
                    if first {
                        t.batting_first_losses += 1;
                    } else {
                        t.batting_second_losses += 1;
                    }
                }
            }
        }
        t
    }
}

fn add(s: &mut SplitStats, p: &PlayerMatchPerformance) {
    s.matches += 1;
    s.runs += p.batting.runs;
    s.balls_faced += p.batting.balls_faced;
    s.wickets += p.bowling.wickets;
    s.legal_balls += p.bowling.legal_balls;
    s.runs_conceded += p.bowling.runs_conceded;
}

/// Reads one or more stats CSVs (performance columns plus `match_date`, optional `franchise`).
pub fn load_player_stats<R: Read>(files: impl IntoIterator<Item = R>) -> Result<HistoricalStatStore, SourceError> {
    let mut rows = Vec::new();
    for reader in files {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
        let mut required = PERFORMANCE_COLUMNS.to_vec();
        required.push("match_date");
        let cols = Columns::new(rdr.headers().map_err(CsvError::from)?, &required)?;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(CsvError::from)?;
            let row = i + 2;
            let (match_id, perf) = parse_performance_record(&cols, &rec, row)?;
            let match_date = date_field(&cols, &rec, row, "match_date")?;
            let franchise_id = cols
                .get(&rec, "franchise")
                .filter(|s| !s.is_empty())
                .map(FranchiseId::new);
            rows.push(StatRow {
                match_id,
                match_date,
                franchise_id,
                perf,
            });
        }
    }
    HistoricalStatStore::new(rows, Vec::new())
}

/// Reads a match results CSV (see [`MATCH_COLUMNS`]).
pub fn load_match_records<R: Read>(reader: R) -> Result<Vec<MatchRecord>, SourceError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let cols = Columns::new(rdr.headers().map_err(CsvError::from)?, &MATCH_COLUMNS)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(CsvError::from)?;
        let row = i + 2;
        let season_raw = cols.str(&rec, row, "season")?;
        let season = season_raw.parse().map_err(|_| CsvError::Field {
            row,
            column: "season".into(),
            message: format!("expected a year, got `{season_raw}`"),
        })?;
        let fr = |name: &str| cols.str(&rec, row, name).map(FranchiseId::new);
        let winner = cols.str(&rec, row, "winner")?;
        out.push(MatchRecord {
            match_id: cols.str(&rec, row, "match_id")?.to_string(),
            match_date: date_field(&cols, &rec, row, "match_date")?,
            season,
            venue: cols.str(&rec, row, "venue")?.to_string(),
            home: fr("home")?,
            away: fr("away")?,
            batting_first: fr("batting_first")?,
            winner: (!winner.is_empty()).then(|| FranchiseId::new(winner)),
        });
    }
    Ok(out)
}

/// A store from which everything at or after the cutoff has been removed.
///
/// Only [`apply_temporal_guard`] builds one, and the agents accept nothing else.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardedStatStore {
    store: HistoricalStatStore,
    cutoff: DateTime<Utc>,
}

impl GuardedStatStore {
    pub fn cutoff(&self) -> DateTime<Utc> {
        self.cutoff
    }
}

impl Deref for GuardedStatStore {
    type Target = HistoricalStatStore;

    fn deref(&self) -> &HistoricalStatStore {
        &self.store
    }
}

pub fn apply_temporal_guard(store: &HistoricalStatStore, cutoff: DateTime<Utc>) -> GuardedStatStore {
    let rows: Vec<StatRow> = store.rows.iter().filter(|r| r.match_date < cutoff).cloned().collect();
    let matches: Vec<MatchRecord> = store
        .matches
        .values()
        .filter(|m| m.match_date < cutoff)
        .cloned()
        .collect();
    let store = HistoricalStatStore::new(rows, matches).expect("subset of a valid store");
    GuardedStatStore { store, cutoff }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    const HEADER: &str = "match_id,player_id,runs,balls,fours,sixes,dismissed,dismissal_kind,legal_balls,maidens,runs_conceded,wickets,bowled_lbw,catches,stumpings,ro_direct,ro_indirect,match_date,franchise";

    fn csv_of(rows: &[&str]) -> String {
        let mut s = String::from(HEADER);
        s.push('\n');
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    #[test]
    fn empty_file_gives_empty_store() {
        let s = load_player_stats([csv_of(&[]).as_bytes()]).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn duplicate_rows_rejected() {
        let text = csv_of(&[
            "m1,p1,10,8,1,0,1,caught,0,0,0,0,0,0,0,0,0,2023-04-01,A",
            "m1,p1,12,8,1,0,1,caught,0,0,0,0,0,0,0,0,0,2023-04-01,A",
        ]);
        assert!(matches!(
            load_player_stats([text.as_bytes()]),
            Err(SourceError::DuplicateRow { row: 3, .. })
        ));
    }

    #[test]
    fn schema_errors_name_row_and_column() {
        let text = csv_of(&["m1,p1,ten,8,1,0,1,caught,0,0,0,0,0,0,0,0,0,2023-04-01,A"]);
        let err = load_player_stats([text.as_bytes()]).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("runs"), "{err}");
        let text = csv_of(&["m1,p1,1,8,0,0,1,caught,0,0,0,0,0,0,0,0,0,yesterday,A"]);
        assert!(load_player_stats([text.as_bytes()]).is_err());
    }

    #[test]
    fn three_match_aggregates() {
        let text = csv_of(&[
            "m3,p1,30,20,2,1,1,caught,12,0,20,1,0,1,0,0,0,2023-04-20,A",
            "m1,p1,10,10,1,0,1,bowled,24,0,30,2,1,0,0,0,0,2023-04-01,A",
            "m2,p1,20,10,2,0,0,,0,0,0,0,0,1,0,0,0,2023-04-10,A",
        ]);
        let s = load_player_stats([text.as_bytes()]).unwrap();
        let rows = s.player_rows(&PlayerId::new("p1"));
        assert_eq!(rows.iter().map(|r| r.match_id.as_str()).collect::<Vec<_>>(), ["m1", "m2", "m3"]);
        let agg = s.season_aggregates(&PlayerId::new("p1"));
        assert_eq!(agg.len(), 1);
        let a = &agg[0];
        assert_eq!((a.matches, a.runs, a.balls_faced, a.wickets, a.catches), (3, 60, 40, 3, 2));
        assert_eq!(a.strike_rate, 150.0);
        assert_eq!(a.economy, 6.0 * 50.0 / 36.0);
    }

    #[test]
    fn guard_cutoffs() {
        let text = csv_of(&[
            "m1,p1,10,10,1,0,1,bowled,0,0,0,0,0,0,0,0,0,2023-04-01,A",
            "m2,p1,20,10,2,0,0,,0,0,0,0,0,1,0,0,0,2023-05-16,A",
        ]);
        let s = load_player_stats([text.as_bytes()]).unwrap();
        let early = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
        let late = Utc.with_ymd_and_hms(2030, 1, 1, 0, 0, 0).unwrap();
        let mid = Utc.with_ymd_and_hms(2023, 5, 16, 0, 0, 0).unwrap();
        assert!(apply_temporal_guard(&s, early).is_empty());
        assert_eq!(*apply_temporal_guard(&s, late), s);
        let g = apply_temporal_guard(&s, mid);
        assert_eq!(g.len(), 1);
        assert_eq!(g.rows()[0].match_id, "m1");
    }

    #[test]
    fn team_record_and_splits() {
        let matches = "match_id,match_date,season,venue,home,away,batting_first,winner\n\
m1,2023-04-01,2023,V,A,B,A,A\n\
m2,2023-04-05,2023,V,B,A,B,A\n\
m3,2023-04-09,2023,V,A,C,C,C\n\
m4,2023-04-12,2023,V,A,B,A,\n";
        let recs = load_match_records(matches.as_bytes()).unwrap();
        let text = csv_of(&[
            "m1,p1,10,10,0,0,1,bowled,0,0,0,0,0,0,0,0,0,2023-04-01,A",
            "m2,p1,20,10,0,0,1,bowled,0,0,0,0,0,0,0,0,0,2023-04-05,A",
            "m3,p1,30,10,0,0,1,bowled,0,0,0,0,0,0,0,0,0,2023-04-09,A",
        ]);
        let s = load_player_stats([text.as_bytes()]).unwrap().with_matches(recs);
        let t = s.team_record(&FranchiseId::new("A"));
        assert_eq!((t.wins, t.losses, t.no_result), (2, 1, 1));
        assert_eq!((t.batting_first_wins, t.batting_second_wins, t.batting_second_losses), (1, 1, 1));
        let (window, sp) = s.recent_form(&PlayerId::new("p1"), 2);
        assert_eq!(window, ["m3", "m2"]);
        assert_eq!((sp.overall.runs, sp.home.runs, sp.away.runs), (50, 30, 20));
        assert_eq!((sp.batting_first.runs, sp.batting_second.runs), (0, 50));
    }
}
