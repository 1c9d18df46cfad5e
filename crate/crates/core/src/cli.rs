//! The `fancric` command line. Each subcommand is a thin adapter over the library.
//!
//! Exit codes: 0 on success, 1 on a domain error, 2 on a usage error.
//! Errors go to stderr as `error[CODE]: message`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::analytics::{
    dream_team, load_entries, pick_frequencies, score_entries, summarize, wisdom_of_crowds_team, AnalyticsError,
    ContestEntrySet, IngestOptions, SummaryOptions, Weighting,
};
use crate::demo::{self, FixtureSources};
use crate::evaluation::{
    aggregate_report, evaluation_report, prompt_engineering_baseline, run_ablation, BaselineGenerator,
    EvaluationError, Evaluator, FanCricGenerator, ReportFormat, TeamGenerator, ABLATION_NS, DEFAULT_WIN_FLOOR,
};
use crate::http::ReqwestTransport;
use crate::llm::{ChatBackend, LiveBackend, MockBackend, ModelConfig, Throttled, API_KEY_ENV, REVIEWER, WORKER};
use crate::model::{read_performances, read_players, FantasyTeam, MatchContext, PlayerId, PlayerMatchPerformance, PlayerPool};
use crate::pipeline::{call_budget, run_pipeline, PipelineConfig, PipelineError, PipelineSources, PromptSet, Transcript, TranscriptRecord};
use crate::points::Points;
use crate::rules::{default_rules, parse_rules, validate_team, RulesError, RulesSchema};
use crate::scoring::{default_scoring, parse_scoring_schema, score_breakdown, score_team, ScoringSchema};
use crate::sources::{
    load_match_records, load_player_stats, HistoricalStatStore, LiveWeather, SearchClient, TavilySearch, WeatherClient,
};

#[derive(Debug, Parser)]
#[command(name = "fancric", version, about = "Fantasy cricket team generation and contest analytics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    Mock,
    Replay,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON file of defaults; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    #[arg(long, global = true)]
    pub scoring: Option<PathBuf>,
    #[arg(long, global = true)]
    pub players: Option<PathBuf>,
    /// Historical per-match stats CSV.
    #[arg(long, global = true)]
    pub stats: Option<PathBuf>,
    /// Historical match results CSV.
    #[arg(long, global = true)]
    pub matches: Option<PathBuf>,
    /// Raw contest entries or an ingested store.
    #[arg(long, global = true)]
    pub entries: Option<PathBuf>,
    /// Scorecard of the finished match.
    #[arg(long, global = true)]
    pub perfs: Option<PathBuf>,
    /// Match context JSON.
    #[arg(long = "match", global = true)]
    pub match_file: Option<PathBuf>,
    /// Root holding `llm/`, `weather/` and `search/` fixtures.
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    /// Directory of `.tmpl` overrides.
    #[arg(long, global = true)]
    pub prompts: Option<PathBuf>,
    /// Recorded transcript served in replay mode.
    #[arg(long, global = true)]
    pub transcript: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long = "win-floor", global = true)]
    pub win_floor: Option<f64>,
    #[arg(long, global = true)]
    pub format: Option<ReportFormat>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub concurrency: Option<usize>,
    #[arg(long = "worker-model", global = true)]
    pub worker_model: Option<String>,
    #[arg(long = "reviewer-model", global = true)]
    pub reviewer_model: Option<String>,
    /// Chat-completions endpoint root for live mode
    #[arg(long = "llm-base-url", global = true)]
    pub llm_base_url: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deduplicate contest entries; writes the store to --out.
    Ingest {
        /// More entry files merged into --entries.
        #[arg(long)]
        shard: Vec<PathBuf>,
        /// Abort when malformed lines exceed this fraction.
        #[arg(long, default_value_t = 0.05)]
        max_malformed: f64,
    },
    /// Score the field and summarise its distribution.
    Stats {
        #[arg(long, default_value_t = 25.0)]
        bin_width: f64,
        /// Count each distinct team once.
        #[arg(long)]
        unique: bool,
        /// Also write the histogram CSV here.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// The most-picked valid team of the field.
    Woc,
    /// The highest-scoring valid team in hindsight.
    DreamTeam,
    /// Score one team against the scorecard.
    Score {
        #[arg(long)]
        team: PathBuf,
    },
    /// Check a team against the rules.
    Validate {
        #[arg(long)]
        team: PathBuf,
    },
    /// Run the agent pipeline.
    Generate {
        /// Write the run transcript as JSON lines.
        #[arg(long)]
        save_transcript: Option<PathBuf>,
    },
    /// Run the single-prompt baseline.
    Baseline {
        #[arg(long)]
        save_transcript: Option<PathBuf>,
    },
    /// Place generated teams against the field and the Dream Team.
    Evaluate {
        #[arg(long)]
        teams: PathBuf,
    },
    /// Generate and evaluate over a grid of team counts for both generators.
    Ablate {
        #[arg(long, value_delimiter = ',')]
        ns: Vec<usize>,
    },
    /// Inspect or reuse a recorded transcript (--transcript).
    Transcript {
        #[command(subcommand)]
        action: TranscriptAction,
    },
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum TranscriptAction {
    /// One line per record: step, agent, kind, label.
    Dump,
    /// Rerun the pipeline answering every LLM call from the transcript.
    Replay,
    /// Write the exchanges as mock fixtures under --out.
    Export,
}

/// Defaults read from `--config`. Relative paths resolve against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    rules: Option<PathBuf>,
    scoring: Option<PathBuf>,
    players: Option<PathBuf>,
    stats: Option<PathBuf>,
    matches: Option<PathBuf>,
    entries: Option<PathBuf>,
    perfs: Option<PathBuf>,
    #[serde(rename = "match")]
    match_file: Option<PathBuf>,
    fixtures: Option<PathBuf>,
    prompts: Option<PathBuf>,
    transcript: Option<PathBuf>,
    mode: Option<Mode>,
    n: Option<usize>,
    win_floor: Option<f64>,
    format: Option<ReportFormat>,
    concurrency: Option<usize>,
    worker_model: Option<String>,
    reviewer_model: Option<String>,
    llm_base_url: Option<String>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub exit: i32,
    pub message: String,
}

impl CliError {
    fn usage(code: &'static str, message: impl Into<String>) -> Self {
        CliError { code, exit: 2, message: message.into() }
    }

    fn domain(code: &'static str, message: impl Into<String>) -> Self {
        CliError { code, exit: 1, message: message.into() }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::domain("IO_ERROR", format!("{}: {e}", path.display()))
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        let code = match e {
            AnalyticsError::TooManyMalformed { .. } => "MALFORMED_INPUT",
            AnalyticsError::BadStore { .. } => "BAD_STORE",
            AnalyticsError::EmptySet => "EMPTY_CONTEST",
            AnalyticsError::BadBinWidth => return CliError::usage("BAD_BIN_WIDTH", e.to_string()),
            AnalyticsError::Rules(RulesError::Infeasible) => "INFEASIBLE",
            _ => "ANALYTICS_ERROR",
        };
        CliError::domain(code, e.to_string())
    }
}

impl From<RulesError> for CliError {
    fn from(e: RulesError) -> Self {
        let code = match e {
            RulesError::UnknownPlayer(_) => "UNKNOWN_PLAYER",
            RulesError::Infeasible => "INFEASIBLE",
            _ => "RULES_ERROR",
        };
        CliError::domain(code, e.to_string())
    }
}

impl From<EvaluationError> for CliError {
    fn from(e: EvaluationError) -> Self {
        match e {
            EvaluationError::BadWinFloor(_) => CliError::usage("BAD_WIN_FLOOR", e.to_string()),
            EvaluationError::Generation { .. } | EvaluationError::WrongTeamCount { .. } => {
                CliError::domain("GENERATION_FAILED", e.to_string())
            }
            _ => CliError::domain("EVALUATION_ERROR", e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let code = match e.root() {
            PipelineError::InvalidN(_) => return CliError::usage("INVALID_N", e.to_string()),
            PipelineError::MissingPlayingXi => "MISSING_PLAYING_XI",
            PipelineError::Context(_) => "BAD_MATCH_CONTEXT",
            PipelineError::Prompt(_) => "PROMPT_ERROR",
            PipelineError::Source { .. } => "SOURCE_UNAVAILABLE",
            PipelineError::Llm { .. } | PipelineError::PlayersFailed { .. } => "LLM_ERROR",
            PipelineError::CannotProduceValidSlate { .. } => "CANNOT_PRODUCE_VALID_SLATE",
            PipelineError::Rules(_) => "RULES_ERROR",
            _ => "PIPELINE_ERROR",
        };
        CliError::domain(code, e.to_string())
    }
}

/// Flags merged over the config file merged over the built-in demo defaults.
#[derive(Debug, Clone)]
struct Settings {
    rules: Option<PathBuf>,
    scoring: Option<PathBuf>,
    players: PathBuf,
    stats: PathBuf,
    matches: PathBuf,
    entries: PathBuf,
    perfs: PathBuf,
    match_file: PathBuf,
    fixtures: PathBuf,
    prompts: Option<PathBuf>,
    transcript: Option<PathBuf>,
    mode: Mode,
    n: usize,
    win_floor: f64,
    format: ReportFormat,
    out: Option<PathBuf>,
    concurrency: usize,
    worker_model: Option<String>,
    reviewer_model: Option<String>,
    llm_base_url: Option<String>,
}

impl Settings {
    fn resolve(g: &GlobalArgs) -> Result<Self, CliError> {
        let file = match &g.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::usage("CONFIG_ERROR", format!("{}: {e}", p.display())))?;
                let mut c: ConfigFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::usage("CONFIG_ERROR", format!("{}: {e}", p.display())))?;
                let base = p.parent().unwrap_or(Path::new("."));
                for slot in [
                    &mut c.rules,
                    &mut c.scoring,
                    &mut c.players,
                    &mut c.stats,
                    &mut c.matches,
                    &mut c.entries,
                    &mut c.perfs,
                    &mut c.match_file,
                    &mut c.fixtures,
                    &mut c.prompts,
                    &mut c.transcript,
                ] {
                    if let Some(path) = slot.as_mut() {
                        if path.is_relative() {
                            *path = base.join(&*path);
                        }
                    }
                }
                c
            }
            None => ConfigFile::default(),
        };
        let data = demo::data_dir();
        let pick = |flag: &Option<PathBuf>, cfg: Option<PathBuf>, default: &str| {
            flag.clone().or(cfg).unwrap_or_else(|| data.join(default))
        };
        let s = Settings {
            rules: g.rules.clone().or(file.rules),
            scoring: g.scoring.clone().or(file.scoring),
            players: pick(&g.players, file.players, "players.csv"),
            stats: pick(&g.stats, file.stats, "stats.csv"),
            matches: pick(&g.matches, file.matches, "matches.csv"),
            entries: pick(&g.entries, file.entries, "entries.txt"),
            perfs: pick(&g.perfs, file.perfs, "perfs.csv"),
            match_file: pick(&g.match_file, file.match_file, "match.json"),
            fixtures: g.fixtures.clone().or(file.fixtures).unwrap_or_else(demo::fixtures_dir),
            prompts: g.prompts.clone().or(file.prompts),
            transcript: g.transcript.clone().or(file.transcript),
            mode: g.mode.or(file.mode).unwrap_or(Mode::Mock),
            n: g.n.or(file.n).unwrap_or(10),
            win_floor: g.win_floor.or(file.win_floor).unwrap_or(DEFAULT_WIN_FLOOR),
            format: g.format.or(file.format).unwrap_or_default(),
            out: g.out.clone(),
            concurrency: g.concurrency.or(file.concurrency).unwrap_or(4),
            worker_model: g.worker_model.clone().or(file.worker_model),
            reviewer_model: g.reviewer_model.clone().or(file.reviewer_model),
            llm_base_url: g.llm_base_url.clone().or(file.llm_base_url),
        };
        if s.concurrency == 0 {
            return Err(CliError::usage("BAD_CONCURRENCY", "--concurrency must be at least 1"));
        }
        Ok(s)
    }

    fn rules(&self) -> Result<RulesSchema, CliError> {
        match &self.rules {
            None => Ok(default_rules()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
                parse_rules(&text).map_err(|e| CliError::domain("BAD_RULES", format!("{}: {e}", p.display())))
            }
        }
    }

    fn scoring(&self) -> Result<ScoringSchema, CliError> {
        match &self.scoring {
            None => Ok(default_scoring()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
                parse_scoring_schema(&text).map_err(|e| CliError::domain("BAD_SCORING", format!("{}: {e}", p.display())))
            }
        }
    }

    fn context(&self) -> Result<MatchContext, CliError> {
        let p = &self.match_file;
        let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::domain("BAD_MATCH_CONTEXT", format!("{}: {e}", p.display())))
    }

    /// The player pool, restricted to the playing XI when a readable match file names one
    /// drawn from this pool.
    fn pool(&self) -> Result<PlayerPool, CliError> {
        let p = &self.players;
        let f = fs::File::open(p).map_err(|e| io_err(p, e))?;
        let players = read_players(f).map_err(|e| CliError::domain("BAD_PLAYERS", format!("{}: {e}", p.display())))?;
        let pool = PlayerPool::new(players).map_err(|e| CliError::domain("BAD_PLAYERS", format!("{}: {e}", p.display())))?;
        if self.match_file.exists() {
            if let Some(xi) = self.context()?.playing_xi_ids() {
                if xi.iter().all(|id| pool.contains(id)) {
                    return Ok(pool.with_playing_xi(xi));
                }
            }
        }
        Ok(pool)
    }

    fn perfs(&self) -> Result<BTreeMap<PlayerId, PlayerMatchPerformance>, CliError> {
        let p = &self.perfs;
        let f = fs::File::open(p).map_err(|e| io_err(p, e))?;
        let rows = read_performances(f).map_err(|e| CliError::domain("BAD_PERFORMANCES", format!("{}: {e}", p.display())))?;
        Ok(rows.into_iter().map(|(_, perf)| (perf.player_id.clone(), perf)).collect())
    }

    fn entries(&self, options: &IngestOptions) -> Result<ContestEntrySet, CliError> {
        read_entries(&self.entries, options)
    }

    fn stats(&self) -> Result<HistoricalStatStore, CliError> {
        let p = &self.stats;
        let f = fs::File::open(p).map_err(|e| io_err(p, e))?;
        let store = load_player_stats([f]).map_err(|e| CliError::domain("BAD_STATS", format!("{}: {e}", p.display())))?;
        let p = &self.matches;
        if !p.exists() {
            return Ok(store);
        }
        let f = fs::File::open(p).map_err(|e| io_err(p, e))?;
        let matches = load_match_records(f).map_err(|e| CliError::domain("BAD_STATS", format!("{}: {e}", p.display())))?;
        Ok(store.with_matches(matches))
    }

    fn prompt_set(&self) -> Result<PromptSet, CliError> {
        match &self.prompts {
            None => Ok(PromptSet::embedded()),
            Some(dir) => PromptSet::with_overrides(dir).map_err(CliError::from),
        }
    }

    fn models(&self) -> ModelConfig {
        let mut m = ModelConfig::default();
        for (tag, name) in [(WORKER, &self.worker_model), (REVIEWER, &self.reviewer_model)] {
            if let (Some(slot), Some(name)) = (m.slots.get_mut(tag), name) {
                slot.model = name.clone();
            }
        }
        if let Some(url) = &self.llm_base_url {
            m.base_url = url.clone();
        }
        m.max_concurrency = self.concurrency;
        m
    }

    fn pipeline_config(&self, n: usize) -> PipelineConfig {
        PipelineConfig {
            concurrency: self.concurrency,
            models: self.models(),
            ..PipelineConfig::default()
        }
        .with_n(n)
    }

    fn transcript_file(&self) -> Result<Transcript, CliError> {
        let p = self
            .transcript
            .as_ref()
            .ok_or_else(|| CliError::usage("MISSING_TRANSCRIPT", "this command needs --transcript"))?;
        let f = fs::File::open(p).map_err(|e| io_err(p, e))?;
        Transcript::read_jsonl(BufReader::new(f)).map_err(|e| CliError::domain("BAD_TRANSCRIPT", format!("{}: {e}", p.display())))
    }
}

fn read_entries(path: &Path, options: &IngestOptions) -> Result<ContestEntrySet, CliError> {
    let f = fs::File::open(path).map_err(|e| io_err(path, e))?;
    Ok(load_entries(BufReader::new(f), options)?)
}

/// Model and data-source backends for one mode.
struct Backends {
    llm: Box<dyn ChatBackend>,
    weather: Box<dyn WeatherClient>,
    search: Box<dyn SearchClient>,
}

impl Backends {
    fn for_mode(s: &Settings, mode: Mode) -> Result<Self, CliError> {
        let fixture_sources = || {
            let FixtureSources { weather, search } = FixtureSources::new(&s.fixtures);
            (Box::new(weather) as Box<dyn WeatherClient>, Box::new(search) as Box<dyn SearchClient>)
        };
        match mode {
            Mode::Mock => {
                let dir = s.fixtures.join("llm");
                if !dir.is_dir() {
                    return Err(CliError::usage("MISSING_FIXTURES", format!("no fixture directory at {}", dir.display())));
                }
                let (weather, search) = fixture_sources();
                Ok(Backends { llm: Box::new(MockBackend::new(dir)), weather, search })
            }
            Mode::Replay => {
                let (weather, search) = fixture_sources();
                Ok(Backends { llm: Box::new(s.transcript_file()?.replay_backend()), weather, search })
            }
            Mode::Live => {
                let transport = Arc::new(
                    ReqwestTransport::new(Duration::from_secs(60)).map_err(|e| CliError::domain("NETWORK_ERROR", e.to_string()))?,
                );
                let llm = LiveBackend::from_env(transport.clone(), s.models())
                    .map_err(|e| CliError::usage("MISSING_API_KEY", format!("{e} (set {API_KEY_ENV})")))?;
                let search = TavilySearch::from_env(transport.clone()).map_err(|e| CliError::usage("MISSING_API_KEY", e.to_string()))?;
                Ok(Backends {
                    llm: Box::new(Throttled::new(llm, s.concurrency)),
                    weather: Box::new(LiveWeather::new(transport, LiveWeather::DEFAULT_URL)),
                    search: Box::new(search),
                })
            }
        }
    }

    fn sources<'a>(&'a self, stats: &'a HistoricalStatStore) -> PipelineSources<'a> {
        PipelineSources {
            weather: self.weather.as_ref(),
            search: self.search.as_ref(),
            stats,
        }
    }
}

/// Parses the arguments, runs one subcommand and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let _ = writeln!(err, "error[USAGE]: invalid arguments");
            let _ = write!(err, "{}", e.render());
            return 2;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {}", e.code, e.message);
            e.exit
        }
    }
}

/// Output goes to `--out` when given, otherwise to `out`.
fn emit(s: &Settings, out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match &s.out {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::domain("IO_ERROR", e.to_string())),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let s = Settings::resolve(&cli.global)?;
    match &cli.command {
        Command::Ingest { shard, max_malformed } => cmd_ingest(&s, shard, *max_malformed, out),
        Command::Stats { bin_width, unique, histogram } => cmd_stats(&s, *bin_width, *unique, histogram.as_deref(), out),
        Command::Woc => cmd_woc(&s, out),
        Command::DreamTeam => cmd_dream_team(&s, out),
        Command::Score { team } => cmd_score(&s, team, out),
        Command::Validate { team } => cmd_validate(&s, team, out),
        Command::Generate { save_transcript } => cmd_generate(&s, save_transcript.as_deref(), out),
        Command::Baseline { save_transcript } => cmd_baseline(&s, save_transcript.as_deref(), out),
        Command::Evaluate { teams } => cmd_evaluate(&s, teams, out),
        Command::Ablate { ns } => cmd_ablate(&s, ns, out),
        Command::Transcript { action } => cmd_transcript(&s, *action, out),
    }
}

fn cmd_ingest(s: &Settings, shards: &[PathBuf], max_malformed: f64, out: &mut dyn Write) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&max_malformed) {
        return Err(CliError::usage("BAD_THRESHOLD", "--max-malformed must be in [0, 1]"));
    }
    let options = IngestOptions {
        max_malformed_fraction: max_malformed,
        ..IngestOptions::default()
    };
    let mut set = s.entries(&options)?;
    for p in shards {
        set = set.merge(read_entries(p, &options)?);
    }
    if let Some(p) = &s.out {
        let f = fs::File::create(p).map_err(|e| io_err(p, e))?;
        set.write_store(io::BufWriter::new(f)).map_err(|e| io_err(p, e))?;
    }
    let report = match s.format {
        ReportFormat::Json => pretty(&json!({
            "raw_entries": set.raw_count(),
            "unique_teams": set.unique_count(),
            "duplicates": set.raw_count() - set.unique_count() as u64,
            "malformed": set.malformed(),
            "source_digest": set.source_digest(),
        })),
        ReportFormat::Csv => {
            let mut buf = Vec::new();
            set.write_malformed_report(&mut buf).map_err(|e| CliError::domain("IO_ERROR", e.to_string()))?;
            String::from_utf8(buf).expect("report is UTF-8")
        }
        ReportFormat::Text => {
            let mut t = format!(
                "raw entries: {}\nunique teams: {}\nduplicates: {}\nmalformed lines: {}\nsource digest: {}\n",
                set.raw_count(),
                set.unique_count(),
                set.raw_count() - set.unique_count() as u64,
                set.malformed().len(),
                set.source_digest()
            );
            for m in set.malformed().iter().take(10) {
                t.push_str(&format!("  line {}: {}\n", m.line, m.reason));
            }
            t
        }
    };
    out.write_all(report.as_bytes()).map_err(|e| CliError::domain("IO_ERROR", e.to_string()))
}

fn cmd_stats(s: &Settings, bin_width: f64, unique: bool, histogram: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let bin = Points::from_decimal(bin_width).ok().filter(|b| *b > Points::ZERO).ok_or_else(|| {
        CliError::usage("BAD_BIN_WIDTH", "--bin-width must be a positive multiple of 0.25")
    })?;
    let pool = s.pool()?;
    let perfs = s.perfs()?;
    let schema = s.scoring()?;
    let set = s.entries(&IngestOptions::default())?;
    let base = crate::scoring::base_points_table(&pool, &perfs, &schema)
        .map_err(|e| CliError::domain("SCORING_ERROR", e.to_string()))?;
    let points = score_entries(&set, &base, &schema)?;
    let weighting = if unique { Weighting::Unique } else { Weighting::Multiplicity };
    let summary = summarize(&set, &points, &SummaryOptions { bin_width: bin, weighting })?;
    if let Some(p) = histogram {
        fs::write(p, summary.histogram_csv()).map_err(|e| io_err(p, e))?;
    }
    let text = match s.format {
        ReportFormat::Text => summary.to_text(),
        ReportFormat::Csv => summary.histogram_csv(),
        ReportFormat::Json => pretty(&serde_json::to_value(&summary).expect("summary serializes")),
    };
    emit(s, out, &text)
}

fn team_text(title: &str, team: &FantasyTeam, pool: &PlayerPool, points: Option<&BTreeMap<PlayerId, Points>>) -> String {
    let mut t = format!("{title}\n");
    for id in &team.players {
        let tag = if *id == team.captain {
            " (C)"
        } else if *id == team.vice_captain {
            " (VC)"
        } else {
            ""
        };
        let (name, role, franchise) = match pool.get(id) {
            Some(p) => (p.name.as_str(), p.role.code(), p.franchise_id.as_str()),
            None => ("?", "?", "?"),
        };
        let pts = points.and_then(|m| m.get(id)).map(|p| format!("  {p}")).unwrap_or_default();
        t.push_str(&format!("  {:<4} {:<5} {id}{tag}  {name}{pts}\n", role, franchise));
    }
    t
}

fn team_csv(teams: &[FantasyTeam]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["team", "name", "captain", "vice_captain", "players"]).expect("in-memory CSV");
    for (i, t) in teams.iter().enumerate() {
        let players: Vec<&str> = t.players.iter().map(|p| p.as_str()).collect();
        w.write_record([
            (i + 1).to_string().as_str(),
            t.name.as_deref().unwrap_or(""),
            t.captain.as_str(),
            t.vice_captain.as_str(),
            players.join(";").as_str(),
        ])
        .expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV is UTF-8")
}

fn cmd_woc(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let pool = s.pool()?;
    let rules = s.rules()?;
    let set = s.entries(&IngestOptions::default())?;
    let freqs = pick_frequencies(&set);
    let team = wisdom_of_crowds_team(&freqs, &rules, &pool)?;
    let text = match s.format {
        ReportFormat::Json => pretty(&json!({ "team": team, "frequencies": freqs })),
        ReportFormat::Csv => {
            let mut t = String::from("player_id,in_team,as_captain,as_vice_captain\n");
            for (id, c) in &freqs.counts {
                t.push_str(&format!("{id},{},{},{}\n", c.in_team, c.as_captain, c.as_vice_captain));
            }
            t
        }
        ReportFormat::Text => {
            let mut t = team_text("Wisdom-of-crowds team", &team, &pool, None);
            let total = set.raw_count().max(1) as f64;
            t.push_str("pick rates (in team / captain / vice-captain)\n");
            for id in &team.players {
                let c = freqs.get(id);
                t.push_str(&format!(
                    "  {id}: {:.1}% / {:.1}% / {:.1}%\n",
                    100.0 * c.in_team as f64 / total,
                    100.0 * c.as_captain as f64 / total,
                    100.0 * c.as_vice_captain as f64 / total
                ));
            }
            t
        }
    };
    emit(s, out, &text)
}

fn cmd_dream_team(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let pool = s.pool()?;
    let dt = dream_team(&pool, &s.perfs()?, &s.rules()?, &s.scoring()?)?;
    let text = match s.format {
        ReportFormat::Json => pretty(&serde_json::to_value(&dt).expect("dream team serializes")),
        ReportFormat::Csv => team_csv(std::slice::from_ref(&dt.team)),
        ReportFormat::Text => {
            let mut t = team_text("Dream Team", &dt.team, &pool, Some(&dt.score.per_player));
            t.push_str(&format!(
                "captain bonus: {}\nvice-captain bonus: {}\ntotal: {}\n",
                dt.score.captain_bonus, dt.score.vice_captain_bonus, dt.score.total
            ));
            t
        }
    };
    emit(s, out, &text)
}

/// Teams from JSON (one team, an array, or an object with `teams`) or from entry lines
/// `id,p1;p2;...,captain,vice_captain`.
fn read_teams(path: &Path) -> Result<Vec<FantasyTeam>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let bad = |m: String| CliError::domain("BAD_TEAM_FILE", format!("{}: {m}", path.display()));
    let trimmed = text.trim_start();
    let teams = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let v: serde_json::Value = serde_json::from_str(trimmed).map_err(|e| bad(e.to_string()))?;
        let list = match v {
            serde_json::Value::Object(ref o) if o.contains_key("teams") => o["teams"].clone(),
            serde_json::Value::Object(_) => serde_json::Value::Array(vec![v]),
            arr => arr,
        };
        serde_json::from_value::<Vec<FantasyTeam>>(list).map_err(|e| bad(e.to_string()))?
    } else {
        let mut teams = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(bad(format!("line {}: expected id,players,captain,vice_captain", i + 1)));
            }
            let mut t = FantasyTeam::new(f[1].split(';').map(PlayerId::new), PlayerId::new(f[2]), PlayerId::new(f[3]));
            t.name = Some(f[0].to_string());
            teams.push(t);
        }
        teams
    };
    if teams.is_empty() {
        return Err(bad("no teams".into()));
    }
    Ok(teams)
}

fn cmd_validate(s: &Settings, team_file: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let pool = s.pool()?;
    let rules = s.rules()?;
    let teams = read_teams(team_file)?;
    let mut reports = Vec::new();
    for t in &teams {
        reports.push(validate_team(t, &pool, &rules)?);
    }
    let failed = reports.iter().filter(|r| !r.ok).count();
    let text = match s.format {
        ReportFormat::Json => pretty(&json!(reports)),
        ReportFormat::Csv => {
            let mut t = String::from("team,code,detail\n");
            for (i, r) in reports.iter().enumerate() {
                for v in &r.violations {
                    t.push_str(&format!("{},{},\"{}\"\n", i + 1, v.code, v.detail.replace('"', "\"\"")));
                }
            }
            t
        }
        ReportFormat::Text => {
            let mut t = String::new();
            for (i, r) in reports.iter().enumerate() {
                if r.ok {
                    t.push_str(&format!("team {}: ok\n", i + 1));
                }
                for v in &r.violations {
                    t.push_str(&format!("team {}: {}: {}\n", i + 1, v.code, v.detail));
                }
            }
            t
        }
    };
    emit(s, out, &text)?;
    if failed > 0 {
        let codes: Vec<&str> = reports.iter().flat_map(|r| r.violations.iter().map(|v| v.code.as_str())).collect();
        return Err(CliError::domain("INVALID_TEAM", format!("{failed} team(s) break the rules: {}", codes.join(", "))));
    }
    Ok(())
}

fn cmd_score(s: &Settings, team_file: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let pool = s.pool()?;
    let perfs = s.perfs()?;
    let schema = s.scoring()?;
    let teams = read_teams(team_file)?;
    let scoring_err = |e: crate::scoring::ScoringError| CliError::domain("SCORING_ERROR", e.to_string());
    let mut scores = Vec::new();
    for t in &teams {
        scores.push(score_team(t, &perfs, &pool, &schema).map_err(scoring_err)?);
    }
    let text = match s.format {
        ReportFormat::Json => pretty(&json!(scores)),
        ReportFormat::Csv => {
            let mut t = String::from("team,player_id,base_points\n");
            for (i, sc) in scores.iter().enumerate() {
                for (id, p) in &sc.per_player {
                    t.push_str(&format!("{},{id},{p}\n", i + 1));
                }
            }
            t
        }
        ReportFormat::Text => {
            let mut t = String::new();
            for (i, (team, sc)) in teams.iter().zip(&scores).enumerate() {
                let title = team.name.clone().unwrap_or_else(|| format!("team {}", i + 1));
                t.push_str(&team_text(&title, team, &pool, Some(&sc.per_player)));
                for id in [&team.captain, &team.vice_captain] {
                    if let (Some(perf), Some(role)) = (perfs.get(id), pool.role_of(id)) {
                        let parts = score_breakdown(perf, role, &schema).map_err(scoring_err)?;
                        let items: Vec<String> = parts.iter().map(|c| format!("{} {}", c.label, c.points)).collect();
                        t.push_str(&format!("  {id}: {}\n", items.join(", ")));
                    }
                }
                t.push_str(&format!(
                    "captain bonus: {}\nvice-captain bonus: {}\ntotal: {}\n",
                    sc.captain_bonus, sc.vice_captain_bonus, sc.total
                ));
            }
            t
        }
    };
    emit(s, out, &text)
}

fn teams_output(s: &Settings, teams: &[FantasyTeam], pool: &PlayerPool, calls: usize, budget: Option<usize>) -> String {
    match s.format {
        ReportFormat::Json => pretty(&json!({ "teams": teams, "llm_calls": calls, "call_budget": budget })),
        ReportFormat::Csv => team_csv(teams),
        ReportFormat::Text => {
            let mut t = String::new();
            for (i, team) in teams.iter().enumerate() {
                let title = format!("Team {}: {}", i + 1, team.name.as_deref().unwrap_or("(unnamed)"));
                t.push_str(&team_text(&title, team, pool, None));
                if let Some(r) = &team.rationale {
                    t.push_str(&format!("  rationale: {r}\n"));
                }
            }
            match budget {
                Some(b) => t.push_str(&format!("llm calls: {calls} (budget {b})\n")),
                None => t.push_str(&format!("llm calls: {calls}\n")),
            }
            t
        }
    }
}

fn save_transcript(path: Option<&Path>, transcript: &Transcript) -> Result<(), CliError> {
    if let Some(p) = path {
        let f = fs::File::create(p).map_err(|e| io_err(p, e))?;
        transcript.write_jsonl(io::BufWriter::new(f)).map_err(|e| io_err(p, e))?;
    }
    Ok(())
}

fn generation_inputs(s: &Settings) -> Result<(MatchContext, PlayerPool, RulesSchema, HistoricalStatStore, PromptSet), CliError> {
    let context = s.context()?;
    let pool = s.pool()?;
    let rules = s.rules()?;
    let stats = s.stats()?;
    let prompts = s.prompt_set()?;
    Ok((context, pool, rules, stats, prompts))
}

fn cmd_generate(s: &Settings, save: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let (context, pool, rules, stats, prompts) = generation_inputs(s)?;
    let backends = Backends::for_mode(s, s.mode)?;
    let cfg = s.pipeline_config(s.n);
    let result = run_pipeline(&cfg, context, &pool, &rules, &backends.sources(&stats), backends.llm.as_ref(), &prompts)?;
    save_transcript(save, &result.transcript)?;
    let budget = call_budget(cfg.n, cfg.max_review_iters, cfg.team_attempts);
    emit(s, out, &teams_output(s, &result.teams, &pool, result.transcript.llm_calls(), Some(budget)))
}

fn cmd_baseline(s: &Settings, save: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let (context, pool, rules, _, prompts) = generation_inputs(s)?;
    let backends = Backends::for_mode(s, s.mode)?;
    let cfg = s.pipeline_config(s.n);
    let result = prompt_engineering_baseline(&context, &pool, &rules, s.n, backends.llm.as_ref(), &cfg.models, &prompts, cfg.team_attempts)?;
    save_transcript(save, &result.transcript)?;
    emit(s, out, &teams_output(s, &result.teams, &pool, result.transcript.llm_calls(), None))
}

fn evaluator(s: &Settings, pool: &PlayerPool, rules: &RulesSchema) -> Result<Evaluator, CliError> {
    let perfs = s.perfs()?;
    let schema = s.scoring()?;
    let contest = s.entries(&IngestOptions::default())?;
    Ok(Evaluator::new(pool, &perfs, rules, &schema, &contest, Weighting::Multiplicity, s.win_floor)?)
}

fn cmd_evaluate(s: &Settings, teams_file: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let pool = s.pool()?;
    let rules = s.rules()?;
    let teams = read_teams(teams_file)?;
    for t in &teams {
        validate_team(t, &pool, &rules)?;
    }
    let ev = evaluator(s, &pool, &rules)?;
    let rows = ev.evaluate_all(&teams)?;
    let agg = aggregate_report(&rows)?;
    emit(s, out, &evaluation_report(&rows, &agg, s.format))
}

fn cmd_ablate(s: &Settings, ns: &[usize], out: &mut dyn Write) -> Result<(), CliError> {
    let ns: Vec<usize> = if ns.is_empty() { ABLATION_NS.to_vec() } else { ns.to_vec() };
    let (context, pool, rules, stats, prompts) = generation_inputs(s)?;
    let backends = Backends::for_mode(s, s.mode)?;
    let cfg = s.pipeline_config(s.n);
    let fancric = FanCricGenerator {
        config: cfg.clone(),
        context: &context,
        pool: &pool,
        rules: &rules,
        sources: backends.sources(&stats),
        llm: backends.llm.as_ref(),
        prompts: &prompts,
    };
    let baseline = BaselineGenerator {
        context: &context,
        pool: &pool,
        rules: &rules,
        llm: backends.llm.as_ref(),
        models: cfg.models.clone(),
        prompts: &prompts,
        team_attempts: cfg.team_attempts,
    };
    let ev = evaluator(s, &pool, &rules)?;
    let generators: [&dyn TeamGenerator; 2] = [&fancric, &baseline];
    let report = run_ablation(&ns, &generators, &ev)?;
    emit(s, out, &report.render(s.format))
}

fn cmd_transcript(s: &Settings, action: TranscriptAction, out: &mut dyn Write) -> Result<(), CliError> {
    let transcript = s.transcript_file()?;
    match action {
        TranscriptAction::Dump => {
            let text = match s.format {
                ReportFormat::Json => pretty(&serde_json::to_value(&transcript).expect("transcript serializes")),
                _ => {
                    let mut t = String::new();
                    for r in &transcript.records {
                        let (kind, detail) = match r {
                            TranscriptRecord::Step { note, .. } => ("step", note.as_str()),
                            TranscriptRecord::Fetch { kind, key, .. } => (kind.as_str(), key.as_str()),
                            TranscriptRecord::Exchange { label, .. } => ("llm", label.as_str()),
                        };
                        t.push_str(&format!("{:>4} {:<12} {:<8} {detail}\n", r.step(), r.agent().as_str(), kind));
                    }
                    t.push_str(&format!("llm calls: {}\n", transcript.llm_calls()));
                    t
                }
            };
            emit(s, out, &text)
        }
        TranscriptAction::Replay => {
            let (context, pool, rules, stats, prompts) = generation_inputs(s)?;
            let backends = Backends::for_mode(s, Mode::Replay)?;
            // One naming exchange per team, so the recording fixes the slate size.
            let named = transcript
                .records
                .iter()
                .filter(|r| matches!(r, TranscriptRecord::Exchange { label, .. } if label.starts_with("name:")))
                .count();
            let cfg = s.pipeline_config(if named > 0 { named } else { s.n });
            let result = run_pipeline(&cfg, context, &pool, &rules, &backends.sources(&stats), backends.llm.as_ref(), &prompts)?;
            let same = result.transcript == transcript;
            let mut text = teams_output(s, &result.teams, &pool, result.transcript.llm_calls(), None);
            if s.format == ReportFormat::Text {
                text.push_str(if same { "transcript reproduced exactly\n" } else { "transcript differs from the recording\n" });
            }
            emit(s, out, &text)?;
            if !same {
                return Err(CliError::domain("REPLAY_DIVERGED", "the replayed run did not reproduce the recorded transcript"));
            }
            Ok(())
        }
        TranscriptAction::Export => {
            let dir = s
                .out
                .as_ref()
                .ok_or_else(|| CliError::usage("MISSING_OUT", "transcript export needs --out <dir>"))?;
            let store = crate::llm::FixtureStore::new(dir);
            let n = transcript
                .replay_into(&store)
                .map_err(|e| CliError::domain("FIXTURE_ERROR", e.to_string()))?;
            out.write_all(format!("exported {n} fixture(s) to {}\n", dir.display()).as_bytes())
                .map_err(|e| CliError::domain("IO_ERROR", e.to_string()))
        }
    }
}
