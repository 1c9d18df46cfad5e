//! A self-contained demo match: roster, scorecard, seeded history, a crowd of
//! contest entries, source fixtures and a deterministic stand-in analyst model.
//!
//! Everything under `data/demo` and `fixtures/` is produced by [`write_all`].

mod analyst;
mod history;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub use analyst::{AnalystBackend, AnalystOptions};
pub use history::{synthetic_history, HISTORY_SEED};

use crate::analytics::{load_entries, ContestEntrySet, IngestOptions};
use crate::evaluation::{prompt_engineering_baseline, ABLATION_NS};
use crate::llm::{ChatBackend, ModelConfig, RecordingBackend};
use crate::model::{
    read_performances, read_players, write_performances, write_players, Batting, BattingHand, Bowling,
    DismissalKind, FantasyTeam, Fielding, Franchise, FranchiseId, MatchContext, Player, PlayerId,
    PlayerMatchPerformance, PlayerPool, PlayerRole, Toss, TossDecision, Venue,
};
use crate::pipeline::{odds_query, pitch_query, run_pipeline, tips_query, PipelineConfig, PipelineError, PipelineSources, PromptSet, RULES_QUERY};
use crate::points::Credits;
use crate::rules::{default_rules, repair_team, RulesSchema};
use crate::scoring::{default_scoring, ScoringSchema};
use crate::sources::{
    load_match_records, load_player_stats, slug_for, weather_fixture_name, FixtureSearch, FixtureWeather,
    HistoricalStatStore, MatchRecord, SourceError,
};

pub const MATCH_ID: &str = "ipl-2023-63";
pub const CONTEST_SIZE: usize = 2000;
pub const CONTEST_SEED: u64 = 1605;

/// Root of the crate, where `data/` and `fixtures/` live.
pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data_dir() -> PathBuf {
    crate_dir().join("data").join("demo")
}

pub fn fixtures_dir() -> PathBuf {
    crate_dir().join("fixtures")
}

/// Time stamped on fixture-served weather and search answers (the morning of the match).
pub fn fetched_at() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2023, 5, 16, 9, 0, 0).unwrap()
}

struct Entry(&'static str, &'static str, PlayerRole, &'static str, f64, BattingHand, Option<&'static str>);

fn roster_table() -> Vec<Entry> {
    use BattingHand::{Left as L, Right as R};
    use PlayerRole::{AllRounder as AR, Batter as BAT, Bowler as BOWL, WicketKeeper as WK};
    vec![
        Entry("lsg-dekock", "Quinton de Kock", WK, "LSG", 9.0, L, None),
        Entry("lsg-mankad", "Prerak Mankad", AR, "LSG", 7.0, R, Some("right-arm medium")),
        Entry("lsg-stoinis", "Marcus Stoinis", AR, "LSG", 9.0, R, Some("right-arm medium")),
        Entry("lsg-pooran", "Nicholas Pooran", WK, "LSG", 9.0, L, None),
        Entry("lsg-hooda", "Deepak Hooda", AR, "LSG", 7.5, R, Some("right-arm offbreak")),
        Entry("lsg-badoni", "Ayush Badoni", BAT, "LSG", 7.0, R, None),
        Entry("lsg-krunal", "Krunal Pandya", AR, "LSG", 8.5, L, Some("slow left-arm orthodox")),
        Entry("lsg-bishnoi", "Ravi Bishnoi", BOWL, "LSG", 8.5, R, Some("legbreak googly")),
        Entry("lsg-mohsin", "Mohsin Khan", BOWL, "LSG", 8.0, L, Some("left-arm fast medium")),
        Entry("lsg-thakur", "Yash Thakur", BOWL, "LSG", 8.0, R, Some("right-arm fast medium")),
        Entry("lsg-naveen", "Naveen-ul-Haq", BOWL, "LSG", 8.0, R, Some("right-arm fast medium")),
        Entry("lsg-mishra", "Amit Mishra", BOWL, "LSG", 7.0, R, Some("legbreak googly")),
        Entry("lsg-avesh", "Avesh Khan", BOWL, "LSG", 8.0, R, Some("right-arm fast medium")),
        Entry("mi-rohit", "Rohit Sharma", BAT, "MI", 9.5, R, None),
        Entry("mi-ishan", "Ishan Kishan", WK, "MI", 8.5, L, None),
        Entry("mi-surya", "Suryakumar Yadav", BAT, "MI", 9.5, R, None),
        Entry("mi-green", "Cameron Green", AR, "MI", 9.0, R, Some("right-arm fast medium")),
        Entry("mi-david", "Tim David", BAT, "MI", 8.5, R, None),
        Entry("mi-wadhera", "Nehal Wadhera", BAT, "MI", 7.5, L, None),
        Entry("mi-vinod", "Vishnu Vinod", WK, "MI", 6.5, R, None),
        Entry("mi-jordan", "Chris Jordan", BOWL, "MI", 7.5, R, Some("right-arm fast medium")),
        Entry("mi-chawla", "Piyush Chawla", BOWL, "MI", 8.0, L, Some("legbreak googly")),
        Entry("mi-behrendorff", "Jason Behrendorff", BOWL, "MI", 8.5, R, Some("left-arm fast medium")),
        Entry("mi-madhwal", "Akash Madhwal", BOWL, "MI", 7.0, R, Some("right-arm medium fast")),
        Entry("mi-tilak", "Tilak Varma", BAT, "MI", 8.5, L, None),
        Entry("mi-arjun", "Arjun Tendulkar", BOWL, "MI", 7.0, L, Some("left-arm medium")),
    ]
}

/// All 26 squad players of both sides.
pub fn roster() -> Vec<Player> {
    roster_table()
        .into_iter()
        .map(|Entry(id, name, role, fr, credit, hand, style)| Player {
            player_id: PlayerId::new(id),
            name: name.to_string(),
            role,
            franchise_id: FranchiseId::new(fr),
            credit_cost: Credits::from_f64(credit).expect("half-credit values"),
            batting_hand: hand,
            bowling_style: style.map(str::to_string),
            description: None,
        })
        .collect()
}

pub const LSG_XI: [&str; 11] = [
    "lsg-dekock", "lsg-mankad", "lsg-stoinis", "lsg-pooran", "lsg-hooda", "lsg-badoni",
    "lsg-krunal", "lsg-bishnoi", "lsg-mohsin", "lsg-thakur", "lsg-naveen",
];

pub const MI_XI: [&str; 11] = [
    "mi-rohit", "mi-ishan", "mi-surya", "mi-green", "mi-david", "mi-wadhera",
    "mi-vinod", "mi-jordan", "mi-chawla", "mi-behrendorff", "mi-madhwal",
];

/// First appearance in this match, so no history exists.
pub const DEBUTANT: &str = "mi-madhwal";

pub fn playing_xi() -> Vec<PlayerId> {
    LSG_XI.iter().chain(MI_XI.iter()).map(|s| PlayerId::new(*s)).collect()
}

pub fn match_context() -> MatchContext {
    let start = Utc.with_ymd_and_hms(2023, 5, 16, 14, 0, 0).unwrap();
    let lsg = FranchiseId::new("LSG");
    let mi = FranchiseId::new("MI");
    let mut xi = BTreeMap::new();
    xi.insert(lsg.clone(), LSG_XI.iter().map(|s| PlayerId::new(*s)).collect());
    xi.insert(mi.clone(), MI_XI.iter().map(|s| PlayerId::new(*s)).collect());
    MatchContext {
        match_id: MATCH_ID.into(),
        season: 2023,
        tournament: "IPL".into(),
        home: Franchise {
            franchise_id: lsg.clone(),
            name: "Lucknow Super Giants".into(),
            short_code: "LSG".into(),
        },
        away: Franchise {
            franchise_id: mi,
            name: "Mumbai Indians".into(),
            short_code: "MI".into(),
        },
        venue: Venue {
            name: "Ekana Cricket Stadium".into(),
            city: "Lucknow".into(),
            latitude: 26.81,
            longitude: 81.02,
        },
        scheduled_start: start,
        toss: Some(Toss {
            winner: lsg,
            decision: TossDecision::Bat,
        }),
        playing_xi: Some(xi),
        innings_windows: MatchContext::default_innings_windows(start),
    }
}

fn bat(runs: u32, balls: u32, fours: u32, sixes: u32, out: Option<DismissalKind>) -> Batting {
    Batting {
        runs,
        balls_faced: balls,
        fours,
        sixes,
        dismissed: out.is_some(),
        dismissal_kind: out,
    }
}

fn bowl(legal_balls: u32, maidens: u32, runs_conceded: u32, wickets: u32, bowled_or_lbw_count: u32) -> Bowling {
    Bowling {
        legal_balls,
        maidens,
        runs_conceded,
        wickets,
        bowled_or_lbw_count,
    }
}

fn field(catches: u32, stumpings: u32, runouts_direct: u32, runouts_indirect: u32) -> Fielding {
    Fielding {
        catches,
        stumpings,
        runouts_direct,
        runouts_indirect,
    }
}

/// The scorecard of the demo match (LSG 177/3, MI 172/5).
pub fn match_performances() -> Vec<PlayerMatchPerformance> {
    use DismissalKind::{Bowled, Caught, Lbw};
    let none = Bowling::default;
    let nf = Fielding::default;
    let rows = vec![
        ("lsg-dekock", bat(16, 15, 2, 0, Some(Caught)), none(), field(1, 0, 0, 0)),
        ("lsg-mankad", bat(7, 7, 1, 0, Some(Caught)), none(), nf()),
        ("lsg-stoinis", bat(89, 47, 4, 8, None), bowl(6, 0, 8, 1, 0), field(1, 0, 0, 0)),
        ("lsg-pooran", bat(8, 8, 0, 1, None), none(), field(2, 0, 0, 0)),
        ("lsg-hooda", bat(5, 7, 0, 0, Some(Lbw)), bowl(6, 0, 10, 0, 0), nf()),
        ("lsg-badoni", Batting::default(), none(), field(1, 0, 0, 1)),
        ("lsg-krunal", bat(49, 42, 1, 2, None), bowl(18, 0, 19, 0, 0), nf()),
        ("lsg-bishnoi", Batting::default(), bowl(24, 0, 26, 2, 1), nf()),
        ("lsg-mohsin", Batting::default(), bowl(24, 0, 26, 1, 0), field(1, 0, 0, 0)),
        ("lsg-thakur", Batting::default(), bowl(24, 0, 46, 1, 0), nf()),
        ("lsg-naveen", Batting::default(), bowl(18, 0, 37, 0, 0), nf()),
        ("mi-rohit", bat(37, 25, 1, 3, Some(Caught)), none(), nf()),
        ("mi-ishan", bat(59, 39, 8, 1, Some(Caught)), none(), field(1, 0, 0, 0)),
        ("mi-surya", bat(7, 9, 1, 0, Some(Bowled)), none(), nf()),
        ("mi-green", bat(4, 6, 0, 0, None), bowl(24, 0, 40, 0, 0), nf()),
        ("mi-david", bat(32, 19, 0, 3, None), none(), field(1, 0, 0, 0)),
        ("mi-wadhera", bat(16, 20, 1, 0, Some(Caught)), none(), nf()),
        ("mi-vinod", bat(2, 3, 0, 0, Some(Caught)), none(), nf()),
        ("mi-jordan", Batting::default(), bowl(24, 0, 44, 0, 0), nf()),
        ("mi-chawla", Batting::default(), bowl(12, 0, 26, 1, 0), field(1, 0, 0, 0)),
        ("mi-behrendorff", Batting::default(), bowl(24, 0, 30, 2, 0), nf()),
        ("mi-madhwal", Batting::default(), bowl(24, 0, 37, 0, 0), field(1, 0, 0, 0)),
    ];
    rows.into_iter()
        .map(|(id, batting, bowling, fielding)| PlayerMatchPerformance {
            player_id: PlayerId::new(id),
            played: true,
            batting,
            bowling,
            fielding,
        })
        .collect()
}

/// Unnormalised pick weight of each XI player in the crowd.
fn popularity() -> BTreeMap<PlayerId, f64> {
    [
        ("lsg-dekock", 6.0), ("lsg-mankad", 1.5), ("lsg-stoinis", 5.0), ("lsg-pooran", 6.5),
        ("lsg-hooda", 2.0), ("lsg-badoni", 2.5), ("lsg-krunal", 5.5), ("lsg-bishnoi", 6.0),
        ("lsg-mohsin", 3.0), ("lsg-thakur", 2.5), ("lsg-naveen", 4.0), ("mi-rohit", 7.0),
        ("mi-ishan", 6.5), ("mi-surya", 8.0), ("mi-green", 7.0), ("mi-david", 4.5),
        ("mi-wadhera", 2.5), ("mi-vinod", 1.0), ("mi-jordan", 2.5), ("mi-chawla", 5.5),
        ("mi-behrendorff", 5.0), ("mi-madhwal", 1.5),
    ]
    .into_iter()
    .map(|(id, w)| (PlayerId::new(id), w))
    .collect()
}

fn pick_weighted(rng: &mut ChaCha8Rng, items: &[(PlayerId, f64)]) -> PlayerId {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let mut x = rng.random::<f64>() * total;
    for (id, w) in items {
        if x < *w {
            return id.clone();
        }
        x -= w;
    }
    items.last().expect("non-empty").0.clone()
}

/// A crowd of `count` valid entries over the demo XI, with some exact repeats.
pub fn contest_entries(count: usize, seed: u64) -> Vec<FantasyTeam> {
    let pool = PlayerPool::new(roster()).expect("unique ids").restricted_to(&playing_xi()).with_playing_xi(playing_xi());
    let rules = default_rules();
    let weights = popularity();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<FantasyTeam> = Vec::with_capacity(count);
    while out.len() < count {
        if !out.is_empty() && rng.random::<f64>() < 0.12 {
            let k = rng.random_range(0..out.len());
            let mut copy = out[k].clone();
            let n = copy.players.len();
            copy.players.rotate_left(rng.random_range(0..n));
            out.push(copy);
            continue;
        }
        // Weighted sampling without replacement (exponential keys).
        let mut keyed: Vec<(f64, PlayerId)> = weights
            .iter()
            .map(|(id, w)| (-rng.random::<f64>().max(f64::MIN_POSITIVE).ln() / w, id.clone()))
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let players: Vec<PlayerId> = keyed.into_iter().take(11).map(|(_, id)| id).collect();
        let sq: Vec<(PlayerId, f64)> = players.iter().map(|p| (p.clone(), weights[p] * weights[p])).collect();
        let captain = pick_weighted(&mut rng, &sq);
        let rest: Vec<(PlayerId, f64)> = sq.into_iter().filter(|(p, _)| *p != captain).collect();
        let vice = pick_weighted(&mut rng, &rest);
        let candidate = FantasyTeam::new(players, captain, vice);
        let team = repair_team(&candidate, &rules, &pool, &weights).expect("demo XI admits valid teams");
        out.push(team);
    }
    out
}

pub fn entry_lines(teams: &[FantasyTeam]) -> String {
    let mut s = String::new();
    for (i, t) in teams.iter().enumerate() {
        let members: Vec<&str> = t.players.iter().map(PlayerId::as_str).collect();
        s.push_str(&format!("e{:05},{},{},{}\n", i + 1, members.join(";"), t.captain, t.vice_captain));
    }
    s
}

/// Hourly forecast body covering both innings of the demo match.
pub fn weather_body() -> String {
    let mut time = Vec::new();
    let mut temp = Vec::new();
    let mut wind = Vec::new();
    let mut cloud = Vec::new();
    let mut hum = Vec::new();
    let mut dew = Vec::new();
    for day in [16, 17] {
        for h in 0..24u32 {
            let hour_of_day = h as f64;
            let warmth = (std::f64::consts::PI * (hour_of_day - 4.0) / 12.0).sin();
            time.push(format!("2023-05-{day}T{h:02}:00"));
            temp.push(((31.0 + 7.0 * warmth) * 10.0).round() / 10.0);
            wind.push(((9.0 + 4.0 * warmth.max(0.0)) * 10.0).round() / 10.0);
            cloud.push(if (12..18).contains(&h) { 35.0 } else { 15.0 });
            hum.push(((48.0 - 18.0 * warmth) * 10.0).round() / 10.0);
            dew.push(((19.0 + 1.5 * warmth) * 10.0).round() / 10.0);
        }
    }
    let body = json!({
        "latitude": 26.81,
        "longitude": 81.02,
        "timezone": "GMT",
        "hourly": {
            "time": time,
            "temperature_2m": temp,
            "wind_speed_10m": wind,
            "cloud_cover": cloud,
            "relative_humidity_2m": hum,
            "dew_point_2m": dew,
        }
    });
    let mut s = serde_json::to_string_pretty(&body).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn weather_file_name(ctx: &MatchContext) -> String {
    let w = &ctx.innings_windows;
    weather_fixture_name(ctx.venue.latitude, ctx.venue.longitude, w[0].start.date_naive(), w[1].end.date_naive())
}

/// `(query, answer, sources)` for every search the pipeline makes on the demo match.
pub fn search_answers(ctx: &MatchContext) -> Vec<(String, String, Vec<String>)> {
    vec![
        (
            odds_query(ctx),
            "Bookmakers have the game close to even. Lucknow Super Giants are quoted at 1.87 and \
             Mumbai Indians at 1.95 for the match at the Ekana Cricket Stadium. Lucknow won their \
             last home game on this ground."
                .to_string(),
            vec!["https://odds.example/ipl-2023/lsg-mi".to_string()],
        ),
        (
            pitch_query(ctx),
            "The Ekana surface has been slow and low all season. Spinners get grip as the ball \
             gets older and first-innings totals around 160 have been competitive. Evening dew \
             has played only a small part in recent games."
                .to_string(),
            vec!["https://pitch.example/ekana".to_string()],
        ),
        (
            tips_query(ctx),
            "- Back the all-rounders: Marcus Stoinis and Cameron Green bat in the top six and bowl.\n\
             - Top-order batsmen face the most balls on a slow ground.\n\
             - Ravi Bishnoi and Piyush Chawla suit the slow surface.\n"
                .to_string(),
            vec!["https://tips.example/lsg-vs-mi".to_string()],
        ),
        (
            RULES_QUERY.to_string(),
            "Pick 11 players within 100 credits. Take 1 to 4 wicket-keepers, 3 to 6 batters, 1 to 4 \
             all-rounders and 3 to 6 bowlers, with at most 7 players from one side. The captain earns \
             double points and the vice-captain one and a half times."
                .to_string(),
            vec!["https://rules.example/fantasy-cricket".to_string()],
        ),
    ]
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<(), crate::model::CsvError>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing CSV to memory");
    buf
}

fn write_matches(records: &[MatchRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(crate::sources::MATCH_COLUMNS).expect("in-memory write");
    for m in records {
        w.write_record([
            m.match_id.clone(),
            m.match_date.format("%Y-%m-%d").to_string(),
            m.season.to_string(),
            m.venue.clone(),
            m.home.to_string(),
            m.away.to_string(),
            m.batting_first.to_string(),
            m.winner.as_ref().map(|f| f.to_string()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("flush to memory")
}

/// Writes players, match, scorecard, history, results and contest entries into `dir`.
pub fn write_demo_data(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("players.csv"), csv_bytes(|b| write_players(b, &roster())))?;
    let mut ctx = serde_json::to_string_pretty(&match_context()).map_err(io::Error::other)?;
    ctx.push('\n');
    fs::write(dir.join("match.json"), ctx)?;
    let perfs: Vec<(String, PlayerMatchPerformance)> =
        match_performances().into_iter().map(|p| (MATCH_ID.to_string(), p)).collect();
    fs::write(dir.join("perfs.csv"), csv_bytes(|b| write_performances(b, &perfs)))?;
    let (rows, matches) = synthetic_history(HISTORY_SEED);
    fs::write(dir.join("stats.csv"), history::stats_csv(&rows))?;
    fs::write(dir.join("matches.csv"), write_matches(&matches))?;
    fs::write(dir.join("entries.txt"), entry_lines(&contest_entries(CONTEST_SIZE, CONTEST_SEED)))?;
    Ok(())
}

/// Three entries scoring 0, 10 and 20 points.
pub fn write_tiny_contest(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let roles = [
        PlayerRole::WicketKeeper,
        PlayerRole::Batter,
        PlayerRole::Batter,
        PlayerRole::Batter,
        PlayerRole::AllRounder,
        PlayerRole::AllRounder,
        PlayerRole::Bowler,
        PlayerRole::Bowler,
        PlayerRole::Bowler,
        PlayerRole::Bowler,
        PlayerRole::Batter,
        PlayerRole::Bowler,
        PlayerRole::Bowler,
    ];
    let players: Vec<Player> = roles
        .iter()
        .enumerate()
        .map(|(i, &role)| Player {
            player_id: PlayerId::new(format!("p{:02}", i + 1)),
            name: format!("Player {}", i + 1),
            role,
            franchise_id: FranchiseId::new(if i % 2 == 0 { "AAA" } else { "BBB" }),
            credit_cost: Credits::from_halves(16),
            batting_hand: BattingHand::Unknown,
            bowling_style: None,
            description: None,
        })
        .collect();
    fs::write(dir.join("players.csv"), csv_bytes(|b| write_players(b, &players)))?;
    // p12 and p13 bowl in the XI and make six off eight balls each: 4 + 6 = 10 points.
    let perfs: Vec<(String, PlayerMatchPerformance)> = ["p12", "p13"]
        .into_iter()
        .map(|id| {
            let mut p = PlayerMatchPerformance::zero(id);
            p.batting = bat(6, 8, 0, 0, None);
            ("tiny-1".to_string(), p)
        })
        .collect();
    fs::write(dir.join("perfs.csv"), csv_bytes(|b| write_performances(b, &perfs)))?;
    let ids = |v: &[usize]| v.iter().map(|i| format!("p{i:02}")).collect::<Vec<_>>().join(";");
    let lines = format!(
        "t1,{},p01,p02\nt2,{},p01,p02\nt3,{},p01,p02\n",
        ids(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11]),
        ids(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12]),
        ids(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 13]),
    );
    fs::write(dir.join("entries.txt"), lines)
}

/// Writes the weather and search fixtures for the demo match under `dir`.
pub fn write_source_fixtures(dir: &Path) -> io::Result<()> {
    let ctx = match_context();
    let weather = dir.join("weather");
    fs::create_dir_all(&weather)?;
    fs::write(weather.join(weather_file_name(&ctx)), weather_body())?;
    let search = dir.join("search");
    fs::create_dir_all(&search)?;
    let mut answers = search_answers(&ctx);
    answers.sort();
    let mut index = String::from("query\tslug\tsources\n");
    for (query, answer, sources) in answers {
        let slug = slug_for(&query);
        fs::write(search.join(format!("{slug}.txt")), answer)?;
        index.push_str(&format!("{query}\t{slug}\t{}\n", sources.join(" ")));
    }
    fs::write(search.join("index.tsv"), index)
}

/// Loaded demo match: everything the pipeline, the baseline and the evaluator need.
pub struct DemoSet {
    pub pool: PlayerPool,
    pub context: MatchContext,
    pub perfs: BTreeMap<PlayerId, PlayerMatchPerformance>,
    pub stats: HistoricalStatStore,
    pub entries: ContestEntrySet,
    pub rules: RulesSchema,
    pub scoring: ScoringSchema,
}

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("{path}: {message}")]
    Load { path: PathBuf, message: String },
    #[error("source: {0}")]
    Source(#[from] SourceError),
    #[error("pipeline: {0}")]
    Pipeline(#[from] PipelineError),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

fn load_err(path: &Path, e: impl std::fmt::Display) -> DemoError {
    DemoError::Load {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

impl DemoSet {
    /// Reads the files written by [`write_demo_data`].
    pub fn load(dir: &Path) -> Result<Self, DemoError> {
        let open = |name: &str| {
            let p = dir.join(name);
            fs::File::open(&p).map_err(|e| load_err(&p, e)).map(|f| (p, f))
        };
        let (p, f) = open("players.csv")?;
        let pool = PlayerPool::new(read_players(f).map_err(|e| load_err(&p, e))?).map_err(|e| load_err(&p, e))?;
        let p = dir.join("match.json");
        let context: MatchContext =
            serde_json::from_str(&fs::read_to_string(&p).map_err(|e| load_err(&p, e))?).map_err(|e| load_err(&p, e))?;
        let (p, f) = open("perfs.csv")?;
        let perfs = read_performances(f)
            .map_err(|e| load_err(&p, e))?
            .into_iter()
            .map(|(_, perf)| (perf.player_id.clone(), perf))
            .collect();
        let (_, f) = open("stats.csv")?;
        let stats = load_player_stats([f])?;
        let (_, f) = open("matches.csv")?;
        let stats = stats.with_matches(load_match_records(f)?);
        let (p, f) = open("entries.txt")?;
        let entries = load_entries(io::BufReader::new(f), &IngestOptions::default()).map_err(|e| load_err(&p, e))?;
        Ok(DemoSet {
            pool,
            context,
            perfs,
            stats,
            entries,
            rules: default_rules(),
            scoring: default_scoring(),
        })
    }

    /// The committed demo data.
    pub fn committed() -> Result<Self, DemoError> {
        Self::load(&data_dir())
    }
}

/// Fixture-served weather and search for a fixture root holding `weather/` and `search/`.
pub struct FixtureSources {
    pub weather: FixtureWeather,
    pub search: FixtureSearch,
}

impl FixtureSources {
    pub fn new(root: &Path) -> Self {
        FixtureSources {
            weather: FixtureWeather::new(root.join("weather"), fetched_at()),
            search: FixtureSearch::new(root.join("search"), fetched_at()),
        }
    }

    pub fn with_stats<'a>(&'a self, stats: &'a HistoricalStatStore) -> PipelineSources<'a> {
        PipelineSources {
            weather: &self.weather,
            search: &self.search,
            stats,
        }
    }
}

/// Records LLM fixtures for the pipeline at every ablation size and for the baseline.
pub fn write_llm_fixtures(root: &Path, demo: &DemoSet) -> Result<(), DemoError> {
    let analyst = AnalystBackend::new(&demo.pool, &demo.context, demo.rules.clone(), AnalystOptions::default());
    let recorder = RecordingBackend::new(analyst, root.join("llm"));
    let sources = FixtureSources::new(root);
    let prompts = PromptSet::embedded();
    for n in ABLATION_NS {
        let cfg = PipelineConfig::default().with_n(n);
        run_pipeline(&cfg, demo.context.clone(), &demo.pool, &demo.rules, &sources.with_stats(&demo.stats), &recorder, &prompts)?;
        prompt_engineering_baseline(&demo.context, &demo.pool, &demo.rules, n, &recorder, &ModelConfig::default(), &prompts, 3)?;
    }
    Ok(())
}

/// Regenerates the demo data, the tiny contest and every fixture under `crate_root`.
pub fn write_all(crate_root: &Path) -> Result<(), DemoError> {
    let data = crate_root.join("data");
    write_demo_data(&data.join("demo"))?;
    write_tiny_contest(&data.join("tiny"))?;
    let fixtures = crate_root.join("fixtures");
    write_source_fixtures(&fixtures)?;
    let demo = DemoSet::load(&data.join("demo"))?;
    write_llm_fixtures(&fixtures, &demo)
}

/// Convenience for examples: a chat backend over the committed LLM fixtures.
pub fn fixture_backend() -> impl ChatBackend {
    crate::llm::MockBackend::new(fixtures_dir().join("llm"))
}
