//! Plain-text, CSV and JSON renderings of evaluation and ablation results.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{AblationReport, AggregateReport, EvaluationRow};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format `{other}` (text, csv, json)")),
        }
    }
}

/// Up to two decimals, trailing zeros dropped.
fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w).expect("writing CSV to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV is UTF-8")
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn evaluation_report(rows: &[EvaluationRow], aggregate: &AggregateReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => pretty(&json!({"rows": rows, "aggregate": aggregate})),
        ReportFormat::Csv => csv_string(|w| {
            w.write_record(["team", "total_points", "percentile", "c_in_dt", "vc_in_dt", "players_in_dt", "win"])?;
            for r in rows {
                w.write_record([
                    r.team_label.clone(),
                    num(r.total_points),
                    num(r.percentile),
                    r.c_in_dt.to_string(),
                    r.vc_in_dt.to_string(),
                    r.players_in_dt.to_string(),
                    if r.win { "Y" } else { "N" }.to_string(),
                ])?;
            }
            w.write_record([
                "average".to_string(),
                num(aggregate.points_avg),
                num(aggregate.percentile_avg),
                num(aggregate.c_in_dt_avg),
                num(aggregate.vc_in_dt_avg),
                num(aggregate.players_in_dt_avg),
                format!("{}%", num(aggregate.win_pct)),
            ])
        }),
        ReportFormat::Text => {
            let width = rows.iter().map(|r| r.team_label.chars().count()).max().unwrap_or(0).max(8);
            let mut out = String::new();
            let _ = writeln!(out, "{:<width$}  {:>16}  {:>4}  {:>4}  {:>4}  {:>4}", "team", "points (pct)", "C", "VC", "P", "win");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{:<width$}  {:>16}  {:>4}  {:>4}  {:>4}  {:>4}",
                    r.team_label,
                    format!("{}({})", num(r.total_points), num(r.percentile)),
                    r.c_in_dt,
                    r.vc_in_dt,
                    r.players_in_dt,
                    if r.win { "Y" } else { "N" }
                );
            }
            let _ = writeln!(
                out,
                "{:<width$}  {:>16}  {:>4}  {:>4}  {:>4}  {:>4}",
                "average",
                format!("{}({})", num(aggregate.points_avg), num(aggregate.percentile_avg)),
                num(aggregate.c_in_dt_avg),
                num(aggregate.vc_in_dt_avg),
                num(aggregate.players_in_dt_avg),
                format!("{}%", num(aggregate.win_pct))
            );
            let _ = writeln!(out, "highest percentile: {}", num(aggregate.highest_percentile));
            out
        }
    }
}

impl AblationReport {
    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => pretty(&serde_json::to_value(self).expect("report serializes")),
            ReportFormat::Csv => csv_string(|w| {
                w.write_record(["n", "generator", "points_avg", "rank_avg", "c_vc_in_dt", "players_in_dt", "win_pct", "highest_rank"])?;
                for row in &self.rows {
                    for cell in &row.cells {
                        let mut rec = vec![row.n.to_string(), cell.generator.clone()];
                        rec.extend(Self::metric_values(&cell.aggregate).iter().map(|v| num(*v)));
                        w.write_record(rec)?;
                    }
                }
                Ok(())
            }),
            ReportFormat::Text => {
                let mut out = String::new();
                if self.generators.len() > 1 {
                    let _ = writeln!(out, "{} ({})", self.generators[0], self.generators[1..].join(", "));
                }
                let _ = write!(out, "{:<4}", "n");
                for m in Self::METRICS {
                    let _ = write!(out, "  {m:<18}");
                }
                out.push('\n');
                for row in &self.rows {
                    let _ = write!(out, "{:<4}", row.n);
                    for k in 0..Self::METRICS.len() {
                        let vals: Vec<String> = row
                            .cells
                            .iter()
                            .map(|c| {
                                let v = num(Self::metric_values(&c.aggregate)[k]);
                                if k == 4 {
                                    format!("{v}%")
                                } else {
                                    v
                                }
                            })
                            .collect();
                        let text = match vals.split_first() {
                            Some((first, rest)) if !rest.is_empty() => format!("{first} ({})", rest.join(", ")),
                            Some((first, _)) => first.clone(),
                            None => String::new(),
                        };
                        let _ = write!(out, "  {text:<18}");
                    }
                    out.truncate(out.trim_end().len());
                    out.push('\n');
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_trim() {
        assert_eq!(num(512.9), "512.9");
        assert_eq!(num(70.0), "70");
        assert_eq!(num(528.55), "528.55");
        assert_eq!(num(0.126), "0.13");
        assert_eq!(num(-0.001), "0");
    }

    #[test]
    fn formats_parse() {
        assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
