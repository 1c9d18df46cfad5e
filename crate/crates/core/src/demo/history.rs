//! Seeded two-season history for the demo squads.
//!
//! Rows dated on or after the demo match day are included on purpose so the
//! temporal guard has something to remove.

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{match_performances, MATCH_ID};
use crate::model::{Batting, Bowling, DismissalKind, Fielding, FranchiseId, PlayerMatchPerformance};
use crate::sources::{MatchRecord, StatRow};

pub const HISTORY_SEED: u64 = 2023;

const OTHERS: [&str; 8] = ["CSK", "GT", "RR", "RCB", "KKR", "DC", "PBKS", "SRH"];

/// Per-player generator parameters.
struct Skill {
    id: &'static str,
    bat_mean: f64,
    strike_rate: f64,
    /// Mean overs per match; zero for non-bowlers.
    overs: f64,
    wicket_per_over: f64,
    economy: f64,
    catch_rate: f64,
    keeper: bool,
    regular: bool,
}

const fn sk(id: &'static str, bat_mean: f64, strike_rate: f64, overs: f64, wicket_per_over: f64, economy: f64, regular: bool) -> Skill {
    Skill {
        id,
        bat_mean,
        strike_rate,
        overs,
        wicket_per_over,
        economy,
        catch_rate: 0.25,
        keeper: false,
        regular,
    }
}

const fn wk(id: &'static str, bat_mean: f64, strike_rate: f64) -> Skill {
    Skill {
        id,
        bat_mean,
        strike_rate,
        overs: 0.0,
        wicket_per_over: 0.0,
        economy: 0.0,
        catch_rate: 0.6,
        keeper: true,
        regular: true,
    }
}

fn squad(franchise: &str) -> Vec<Skill> {
    match franchise {
        "LSG" => vec![
            wk("lsg-dekock", 33.0, 135.0),
            sk("lsg-mankad", 14.0, 128.0, 1.0, 0.15, 9.0, false),
            sk("lsg-stoinis", 24.0, 148.0, 2.5, 0.28, 9.2, true),
            wk("lsg-pooran", 27.0, 160.0),
            sk("lsg-hooda", 18.0, 128.0, 1.0, 0.15, 8.0, true),
            sk("lsg-badoni", 17.0, 132.0, 0.0, 0.0, 0.0, true),
            sk("lsg-krunal", 18.0, 122.0, 3.5, 0.2, 7.2, true),
            sk("lsg-bishnoi", 3.0, 90.0, 4.0, 0.3, 7.6, true),
            sk("lsg-mohsin", 2.0, 80.0, 3.5, 0.33, 7.4, true),
            sk("lsg-thakur", 2.0, 80.0, 3.5, 0.3, 9.5, false),
            sk("lsg-naveen", 3.0, 90.0, 4.0, 0.3, 8.2, false),
            sk("lsg-mishra", 4.0, 95.0, 3.0, 0.28, 7.7, false),
            sk("lsg-avesh", 2.0, 85.0, 3.5, 0.3, 9.0, true),
        ],
        _ => vec![
            sk("mi-rohit", 27.0, 130.0, 0.0, 0.0, 0.0, true),
            wk("mi-ishan", 29.0, 136.0),
            sk("mi-surya", 34.0, 175.0, 0.0, 0.0, 0.0, true),
            sk("mi-green", 26.0, 150.0, 3.0, 0.2, 9.4, true),
            sk("mi-david", 20.0, 170.0, 0.0, 0.0, 0.0, true),
            sk("mi-wadhera", 19.0, 140.0, 0.0, 0.0, 0.0, false),
            wk("mi-vinod", 10.0, 125.0),
            sk("mi-jordan", 4.0, 110.0, 3.5, 0.22, 10.2, false),
            sk("mi-chawla", 3.0, 100.0, 4.0, 0.3, 7.9, true),
            sk("mi-behrendorff", 2.0, 80.0, 4.0, 0.3, 8.8, true),
            sk("mi-tilak", 28.0, 145.0, 0.0, 0.0, 0.0, true),
            sk("mi-arjun", 5.0, 100.0, 2.0, 0.2, 9.0, false),
        ],
    }
}

fn gen_perf(rng: &mut ChaCha8Rng, s: &Skill) -> PlayerMatchPerformance {
    let mut p = PlayerMatchPerformance::zero(s.id);
    // Lower-order players often do not bat at all.
    let bats = s.bat_mean >= 10.0 || rng.random::<f64>() < 0.35;
    if bats {
        let u: f64 = rng.random::<f64>().max(1e-9);
        let runs = ((-s.bat_mean * u.ln()).floor() as u32).min(120);
        let balls = if runs == 0 {
            rng.random_range(1..6)
        } else {
            let raw = runs as f64 * 100.0 / s.strike_rate * (0.8 + 0.4 * rng.random::<f64>());
            (raw.round() as u32).max(1)
        };
        let fours = ((runs as f64 * 0.5 / 4.0) * rng.random::<f64>()).floor() as u32;
        let sixes = (((runs - 4 * fours) as f64 * 0.4 / 6.0) * rng.random::<f64>()).floor() as u32;
        let dismissed = rng.random::<f64>() < 0.75;
        let kind = dismissed.then(|| match rng.random_range(0..10) {
            0..=5 => DismissalKind::Caught,
            6 | 7 => DismissalKind::Bowled,
            8 => DismissalKind::Lbw,
            _ => DismissalKind::RunOut,
        });
        p.batting = Batting {
            runs,
            balls_faced: balls,
            fours,
            sixes,
            dismissed,
            dismissal_kind: kind,
        };
    }
    if s.overs > 0.0 {
        let overs = (s.overs + rng.random_range(-1.0..1.0)).round().clamp(1.0, 4.0) as u32;
        let runs_conceded = (s.economy * overs as f64 * (0.7 + 0.6 * rng.random::<f64>())).round() as u32;
        let wickets = (0..overs).filter(|_| rng.random::<f64>() < s.wicket_per_over).count() as u32;
        let bowled_or_lbw_count = (0..wickets).filter(|_| rng.random::<f64>() < 0.3).count() as u32;
        let maidens = u32::from(rng.random::<f64>() < 0.04);
        p.bowling = Bowling {
            legal_balls: overs * 6,
            maidens,
            runs_conceded,
            wickets,
            bowled_or_lbw_count,
        };
    }
    let catches = (0..2).filter(|_| rng.random::<f64>() < s.catch_rate / 2.0).count() as u32;
    let stumpings = u32::from(s.keeper && rng.random::<f64>() < 0.08);
    let runouts_direct = u32::from(rng.random::<f64>() < 0.03);
    let runouts_indirect = u32::from(rng.random::<f64>() < 0.05);
    p.fielding = Fielding {
        catches,
        stumpings,
        runouts_direct,
        runouts_indirect,
    };
    p
}

fn home_ground(franchise: &str) -> String {
    match franchise {
        "LSG" => "Ekana Cricket Stadium".into(),
        "MI" => "Wankhede Stadium".into(),
        other => format!("{other} home ground"),
    }
}

/// Eleven of the squad for one game: regulars first, the rest filled at random.
fn pick_xi<'s>(rng: &mut ChaCha8Rng, squad: &'s [Skill]) -> Vec<&'s Skill> {
    let mut keyed: Vec<(f64, &Skill)> = squad
        .iter()
        .map(|s| (rng.random::<f64>() + if s.regular { 1.0 } else { 0.0 }, s))
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(b.1.id)));
    keyed.into_iter().take(11).map(|(_, s)| s).collect()
}

struct Fixture {
    match_id: String,
    date: NaiveDate,
    season: i32,
    home: String,
    away: String,
}

fn schedule() -> Vec<Fixture> {
    let mut out = Vec::new();
    for (season, start, rounds) in [(2022, (2022, 3, 28), 14), (2023, (2023, 4, 1), 12)] {
        let start = NaiveDate::from_ymd_opt(start.0, start.1, start.2).unwrap();
        for r in 0..rounds {
            let date = start + Duration::days(4 * r as i64);
            let lsg_opp = if r == 3 || r == 9 {
                "MI"
            } else {
                OTHERS[(r + season as usize) % 8]
            };
            let pair = |ours: &str, opp: &str| {
                if r % 2 == 0 {
                    (ours.to_string(), opp.to_string())
                } else {
                    (opp.to_string(), ours.to_string())
                }
            };
            let (home, away) = pair("LSG", lsg_opp);
            out.push(Fixture {
                match_id: format!("ipl-{season}-r{r:02}-lsg"),
                date,
                season,
                home,
                away,
            });
            if lsg_opp != "MI" {
                let mut k = (r + 3 + season as usize) % 8;
                if OTHERS[k] == lsg_opp {
                    k = (k + 1) % 8;
                }
                let (home, away) = pair("MI", OTHERS[k]);
                out.push(Fixture {
                    match_id: format!("ipl-{season}-r{r:02}-mi"),
                    date,
                    season,
                    home,
                    away,
                });
            }
        }
    }
    let late = NaiveDate::from_ymd_opt(2023, 5, 20).unwrap();
    out.push(Fixture {
        match_id: "ipl-2023-68".into(),
        date: late,
        season: 2023,
        home: "KKR".into(),
        away: "LSG".into(),
    });
    out.push(Fixture {
        match_id: "ipl-2023-69".into(),
        date: late + Duration::days(1),
        season: 2023,
        home: "MI".into(),
        away: "SRH".into(),
    });
    out
}

/// Stat rows and match results for LSG and MI in 2022 and 2023, including the demo
/// match itself and two later games.
pub fn synthetic_history(seed: u64) -> (Vec<StatRow>, Vec<MatchRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut matches = Vec::new();
    for fx in schedule() {
        let when = fx.date.and_hms_opt(0, 0, 0).unwrap().and_utc();
        let batting_first = if rng.random::<bool>() { &fx.home } else { &fx.away };
        let winner = match rng.random_range(0..20) {
            0 => None,
            1..=10 => Some(fx.home.clone()),
            _ => Some(fx.away.clone()),
        };
        matches.push(MatchRecord {
            match_id: fx.match_id.clone(),
            match_date: when,
            season: fx.season,
            venue: home_ground(&fx.home),
            home: FranchiseId::new(&fx.home),
            away: FranchiseId::new(&fx.away),
            batting_first: FranchiseId::new(batting_first),
            winner: winner.map(FranchiseId::new),
        });
        for side in [&fx.home, &fx.away] {
            if side != "LSG" && side != "MI" {
                continue;
            }
            let squad = squad(side);
            for s in pick_xi(&mut rng, &squad) {
                rows.push(StatRow {
                    match_id: fx.match_id.clone(),
                    match_date: when,
                    franchise_id: Some(FranchiseId::new(side)),
                    perf: gen_perf(&mut rng, s),
                });
            }
        }
    }
    // The demo match itself: must never reach the agents.
    let day = NaiveDate::from_ymd_opt(2023, 5, 16).unwrap().and_hms_opt(0, 0, 0).unwrap().and_utc();
    matches.push(MatchRecord {
        match_id: MATCH_ID.into(),
        match_date: day,
        season: 2023,
        venue: home_ground("LSG"),
        home: FranchiseId::new("LSG"),
        away: FranchiseId::new("MI"),
        batting_first: FranchiseId::new("LSG"),
        winner: Some(FranchiseId::new("LSG")),
    });
    for p in match_performances() {
        let side = if p.player_id.as_str().starts_with("lsg-") { "LSG" } else { "MI" };
        rows.push(StatRow {
            match_id: MATCH_ID.into(),
            match_date: day,
            franchise_id: Some(FranchiseId::new(side)),
            perf: p,
        });
    }
    matches.sort_by(|a, b| (a.match_date, &a.match_id).cmp(&(b.match_date, &b.match_id)));
    rows.sort_by(|a, b| (a.match_date, &a.match_id, &a.perf.player_id).cmp(&(b.match_date, &b.match_id, &b.perf.player_id)));
    (rows, matches)
}

pub(crate) fn stats_csv(rows: &[StatRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = crate::model::io::PERFORMANCE_COLUMNS.to_vec();
    header.extend(["match_date", "franchise", "played"]);
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut fields = crate::model::io::performance_fields(&r.match_id, &r.perf);
        fields.push(r.match_date.format("%Y-%m-%d").to_string());
        fields.push(r.franchise_id.as_ref().map(|f| f.to_string()).unwrap_or_default());
        fields.push(u8::from(r.perf.played).to_string());
        w.write_record(&fields).expect("in-memory write");
    }
    w.into_inner().expect("flush to memory")
}
