//! Flat-file formats for players and performances.
//!
//! Players: `player_id,name,role,franchise,credit,hand,style`
//!
//! Performances: `match_id,player_id,runs,balls,fours,sixes,dismissed,dismissal_kind,
//! legal_balls,maidens,runs_conceded,wickets,bowled_lbw,catches,stumpings,ro_direct,ro_indirect`
//!
//! A performance row means the player was in the XI. An optional trailing
//! `played` column (0/1) overrides that.

use std::io::{Read, Write};

use csv::StringRecord;
use thiserror::Error;

use super::{
    Batting, BattingHand, Bowling, DismissalKind, Fielding, FranchiseId, Player, PlayerId,
    PlayerMatchPerformance,
};
use crate::points::Credits;

pub const PLAYER_COLUMNS: [&str; 7] = [
    "player_id", "name", "role", "franchise", "credit", "hand", "style",
];

pub const PERFORMANCE_COLUMNS: [&str; 17] = [
    "match_id",
    "player_id",
    "runs",
    "balls",
    "fours",
    "sixes",
    "dismissed",
    "dismissal_kind",
    "legal_balls",
    "maidens",
    "runs_conceded",
    "wickets",
    "bowled_lbw",
    "catches",
    "stumpings",
    "ro_direct",
    "ro_indirect",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: {message}")]
    Field {
        row: usize,
        column: String,
        message: String,
    },
}

/// Column-name → index lookup over a header record.
pub(crate) struct Columns {
    names: Vec<String>,
}

impl Columns {
    pub(crate) fn new(header: &StringRecord, required: &[&str]) -> Result<Self, CsvError> {
        let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
        for r in required {
            if !names.iter().any(|n| n == r) {
                return Err(CsvError::MissingColumn(r.to_string()));
            }
        }
        Ok(Columns { names })
    }

    pub(crate) fn has(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub(crate) fn get<'r>(&self, rec: &'r StringRecord, name: &str) -> Option<&'r str> {
        let idx = self.names.iter().position(|n| n == name)?;
        rec.get(idx).map(str::trim)
    }

    pub(crate) fn str<'r>(
        &self,
        rec: &'r StringRecord,
        row: usize,
        name: &str,
    ) -> Result<&'r str, CsvError> {
        self.get(rec, name).ok_or_else(|| CsvError::Field {
            row,
            column: name.to_string(),
            message: "missing value".into(),
        })
    }

    pub(crate) fn count(&self, rec: &StringRecord, row: usize, name: &str) -> Result<u32, CsvError> {
        let raw = self.str(rec, row, name)?;
        if raw.is_empty() {
            return Ok(0);
        }
        raw.parse().map_err(|_| CsvError::Field {
            row,
            column: name.to_string(),
            message: format!("expected a non-negative integer, got `{raw}`"),
        })
    }

    pub(crate) fn flag(&self, rec: &StringRecord, row: usize, name: &str) -> Result<bool, CsvError> {
        let raw = self.str(rec, row, name)?;
        match raw.to_ascii_lowercase().as_str() {
            "1" | "true" | "y" | "yes" => Ok(true),
            "0" | "false" | "n" | "no" | "" => Ok(false),
            _ => Err(CsvError::Field {
                row,
                column: name.to_string(),
                message: format!("expected a boolean, got `{raw}`"),
            }),
        }
    }
}

pub fn read_players<R: Read>(reader: R) -> Result<Vec<Player>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let cols = Columns::new(rdr.headers()?, &PLAYER_COLUMNS[..5])?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let role_raw = cols.str(&rec, row, "role")?;
        let role = role_raw.parse().map_err(|e: super::UnknownRole| CsvError::Field {
            row,
            column: "role".into(),
            message: e.to_string(),
        })?;
        let credit_raw = cols.str(&rec, row, "credit")?;
        let credit_cost = credit_raw
            .parse::<f64>()
            .map_err(|e| e.to_string())
            .and_then(|v| Credits::from_f64(v).map_err(|e| e.to_string()))
            .map_err(|message| CsvError::Field {
                row,
                column: "credit".into(),
                message,
            })?;
        let hand = cols
            .get(&rec, "hand")
            .map(|h| h.parse().unwrap_or_default())
            .unwrap_or(BattingHand::Unknown);
        let style = cols
            .get(&rec, "style")
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        let description = cols
            .get(&rec, "description")
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        out.push(Player {
            player_id: PlayerId::new(cols.str(&rec, row, "player_id")?),
            name: cols.str(&rec, row, "name")?.to_string(),
            role,
            franchise_id: FranchiseId::new(cols.str(&rec, row, "franchise")?),
            credit_cost,
            batting_hand: hand,
            bowling_style: style,
            description,
        });
    }
    Ok(out)
}

pub fn write_players<W: Write>(writer: W, players: &[Player]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PLAYER_COLUMNS)?;
    for p in players {
        let hand = match p.batting_hand {
            BattingHand::Left => "left",
            BattingHand::Right => "right",
            BattingHand::Unknown => "",
        };
        w.write_record([
            p.player_id.as_str(),
            &p.name,
            p.role.code(),
            p.franchise_id.as_str(),
            &p.credit_cost.to_string(),
            hand,
            p.bowling_style.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Parses the performance columns of one record. Shared with the stats loader.
pub(crate) fn parse_performance_record(
    cols: &Columns,
    rec: &StringRecord,
    row: usize,
) -> Result<(String, PlayerMatchPerformance), CsvError> {
    let match_id = cols.str(rec, row, "match_id")?.to_string();
    let kind_raw = cols.str(rec, row, "dismissal_kind")?;
    let dismissal_kind = if kind_raw.is_empty() {
        None
    } else {
        Some(
            kind_raw
                .parse::<DismissalKind>()
                .map_err(|message| CsvError::Field {
                    row,
                    column: "dismissal_kind".into(),
                    message,
                })?,
        )
    };
    let played = if cols.has("played") {
        cols.flag(rec, row, "played")?
    } else {
        true
    };
    let perf = PlayerMatchPerformance {
        player_id: PlayerId::new(cols.str(rec, row, "player_id")?),
        played,
        batting: Batting {
            runs: cols.count(rec, row, "runs")?,
            balls_faced: cols.count(rec, row, "balls")?,
            fours: cols.count(rec, row, "fours")?,
            sixes: cols.count(rec, row, "sixes")?,
            dismissed: cols.flag(rec, row, "dismissed")?,
            dismissal_kind,
        },
        bowling: Bowling {
            legal_balls: cols.count(rec, row, "legal_balls")?,
            maidens: cols.count(rec, row, "maidens")?,
            runs_conceded: cols.count(rec, row, "runs_conceded")?,
            wickets: cols.count(rec, row, "wickets")?,
            bowled_or_lbw_count: cols.count(rec, row, "bowled_lbw")?,
        },
        fielding: Fielding {
            catches: cols.count(rec, row, "catches")?,
            stumpings: cols.count(rec, row, "stumpings")?,
            runouts_direct: cols.count(rec, row, "ro_direct")?,
            runouts_indirect: cols.count(rec, row, "ro_indirect")?,
        },
    };
    Ok((match_id, perf))
}

/// Reads `(match_id, performance)` pairs in file order.
pub fn read_performances<R: Read>(
    reader: R,
) -> Result<Vec<(String, PlayerMatchPerformance)>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let cols = Columns::new(rdr.headers()?, &PERFORMANCE_COLUMNS)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        out.push(parse_performance_record(&cols, &rec?, i + 2)?);
    }
    Ok(out)
}

pub(crate) fn performance_fields(match_id: &str, p: &PlayerMatchPerformance) -> Vec<String> {
    let b = &p.batting;
    let w = &p.bowling;
    let f = &p.fielding;
    vec![
        match_id.to_string(),
        p.player_id.to_string(),
        b.runs.to_string(),
        b.balls_faced.to_string(),
        b.fours.to_string(),
        b.sixes.to_string(),
        u8::from(b.dismissed).to_string(),
        b.dismissal_kind.map(|k| k.to_string()).unwrap_or_default(),
        w.legal_balls.to_string(),
        w.maidens.to_string(),
        w.runs_conceded.to_string(),
        w.wickets.to_string(),
        w.bowled_or_lbw_count.to_string(),
        f.catches.to_string(),
        f.stumpings.to_string(),
        f.runouts_direct.to_string(),
        f.runouts_indirect.to_string(),
    ]
}

pub fn write_performances<W: Write>(
    writer: W,
    rows: &[(String, PlayerMatchPerformance)],
) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = PERFORMANCE_COLUMNS.to_vec();
    header.push("played");
    w.write_record(&header)?;
    for (match_id, p) in rows {
        let mut fields = performance_fields(match_id, p);
        fields.push(u8::from(p.played).to_string());
        w.write_record(&fields)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PlayerRole;

    #[test]
    fn players_roundtrip() {
        let csv = "player_id,name,role,franchise,credit,hand,style\n\
                   P1,Quinton de Kock,WK,LSG,9.5,left,\n\
                   P2,Marcus Stoinis,AR,LSG,9,right,medium\n";
        let players = read_players(csv.as_bytes()).unwrap();
        assert_eq!(players.len(), 2);
        assert_eq!(players[0].role, PlayerRole::WicketKeeper);
        assert_eq!(players[0].credit_cost.halves(), 19);
        assert_eq!(players[1].bowling_style.as_deref(), Some("medium"));
        let mut buf = Vec::new();
        write_players(&mut buf, &players).unwrap();
        assert_eq!(read_players(buf.as_slice()).unwrap(), players);
    }

    #[test]
    fn bad_role_reports_row_and_column() {
        let csv = "player_id,name,role,franchise,credit\nP1,X,KEEPER,LSG,9\n";
        match read_players(csv.as_bytes()) {
            Err(CsvError::Field { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "role");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn performance_header_is_checked() {
        let csv = "match_id,player_id,runs\nM1,P1,3\n";
        assert!(matches!(
            read_performances(csv.as_bytes()),
            Err(CsvError::MissingColumn(c)) if c == "balls"
        ));
    }

    #[test]
    fn performances_roundtrip() {
        let mut p = PlayerMatchPerformance::zero("P7");
        p.batting.runs = 50;
        p.batting.balls_faced = 30;
        p.batting.dismissed = true;
        p.batting.dismissal_kind = Some(DismissalKind::Caught);
        let rows = vec![
            ("M1".to_string(), p),
            ("M1".to_string(), PlayerMatchPerformance::did_not_play("P8")),
        ];
        let mut buf = Vec::new();
        write_performances(&mut buf, &rows).unwrap();
        assert_eq!(read_performances(buf.as_slice()).unwrap(), rows);
    }
}
