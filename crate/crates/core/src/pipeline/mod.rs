//! Supervisor-driven team generation over a shared blackboard.
//!
//! Agents run in a fixed precedence (research, career profiles, form,
//! strategy, selection with a bounded review loop). Every LLM call goes
//! through the gateway's structured-output path and is logged in the
//! transcript.

mod agents;
mod blackboard;
mod prompts;
mod route;
mod selector;
mod transcript;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use agents::{odds_query, pitch_query, tips_query, RULES_QUERY};
pub use blackboard::{Blackboard, OddsQuote, PitchReport, Provenance, Slot, SlotStates, StrategyBrief};
pub use prompts::{PromptSet, Template, TEMPLATE_NAMES};
pub use route::{route_next, AgentId, Route};
pub use selector::{parse_team, proposal_violations};
pub use transcript::{ReplayBackend, Transcript, TranscriptRecord};

use crate::llm::{complete_structured, ChatBackend, ChatMessage, LlmError, ModelConfig, PayloadDescriptor};
use crate::model::{FantasyTeam, MatchContext, MatchContextError, PlayerId, PlayerPool};
use crate::rules::{RulesError, RulesSchema, Violation};
use crate::sources::{apply_temporal_guard, GuardedStatStore, HistoricalStatStore, SearchClient, SourceError, WeatherClient};

/// Dream11 allows at most this many teams per user and contest.
pub const MAX_TEAMS: usize = 20;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("slot `{0}` written twice")]
    SlotAlreadyFilled(&'static str),
    #[error("slot `{0}` is empty")]
    SlotEmpty(&'static str),
    #[error("supervisor stuck: {0}")]
    StuckState(String),
    #[error("n must be in 1..={MAX_TEAMS}, got {0}")]
    InvalidN(usize),
    #[error("match context: {0}")]
    Context(#[from] MatchContextError),
    #[error("the pipeline needs both playing XIs")]
    MissingPlayingXi,
    #[error("prompt: {0}")]
    Prompt(String),
    #[error("{slot}: {source}")]
    Source {
        slot: &'static str,
        #[source]
        source: SourceError,
    },
    #[error("{label}: {source}")]
    Llm {
        label: String,
        #[source]
        source: LlmError,
    },
    #[error("{agent:?} failed for {} player(s): {}", failures.len(), failures.iter().map(|(p, e)| format!("{p} ({e})")).collect::<Vec<_>>().join(", "))]
    PlayersFailed {
        agent: AgentId,
        failures: Vec<(PlayerId, String)>,
    },
    #[error("rules: {0}")]
    Rules(#[from] RulesError),
    #[error("no valid slate: team {team} still breaks {} after {attempts} attempt(s)", codes(violations))]
    CannotProduceValidSlate {
        team: usize,
        attempts: u32,
        violations: Vec<Violation>,
        transcript: Box<Transcript>,
    },
    #[error("{agent:?} aborted at step {}: {cause}", partial.step)]
    Aborted {
        agent: AgentId,
        cause: Box<PipelineError>,
        partial: Box<Blackboard>,
        transcript: Box<Transcript>,
    },
}

fn codes(v: &[Violation]) -> String {
    v.iter().map(|v| v.code.as_str()).collect::<Vec<_>>().join(", ")
}

impl PipelineError {
    /// The innermost error, looking through [`PipelineError::Aborted`].
    pub fn root(&self) -> &PipelineError {
        match self {
            PipelineError::Aborted { cause, .. } => cause.root(),
            other => other,
        }
    }

    /// Slot name for fetch failures.
    pub fn slot(&self) -> Option<&'static str> {
        match self.root() {
            PipelineError::Source { slot, .. } => Some(slot),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub n: usize,
    pub max_review_iters: u32,
    /// Fix re-prompts allowed per invalid proposed team.
    pub team_attempts: u32,
    /// Size K of the recent-form window.
    pub form_window: usize,
    /// Parallel per-player LLM calls.
    pub concurrency: usize,
    /// Attempts for one structured reply.
    pub structured_attempts: u32,
    pub models: ModelConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n: 10,
            max_review_iters: 2,
            team_attempts: 3,
            form_window: 10,
            concurrency: 4,
            structured_attempts: 3,
            models: ModelConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }
}

/// Upper bound on LLM calls in one run when every structured reply parses first time.
///
/// Researcher 2 (odds, pitch), profiler and form 22 each, strategizer 1,
/// selector 1 proposal plus up to `team_attempts` fixes per team, reviewer and
/// revision per round, one naming call per team.
pub fn call_budget(n: usize, max_review_iters: u32, team_attempts: u32) -> usize {
    2 + 2 * 22 + 1 + (1 + n * team_attempts as usize) + 2 * max_review_iters as usize + n
}

/// Everything agents read besides the blackboard.
pub struct PipelineSources<'a> {
    pub weather: &'a dyn WeatherClient,
    pub search: &'a dyn SearchClient,
    /// Unguarded history; the pipeline cuts it at the match day before any agent sees it.
    pub stats: &'a HistoricalStatStore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub teams: Vec<FantasyTeam>,
    pub transcript: Transcript,
    pub blackboard_final: Blackboard,
}

/// Stat rows from the match day onwards are hidden.
pub fn stats_cutoff(context: &MatchContext) -> DateTime<Utc> {
    context
        .scheduled_start
        .date_naive()
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists")
        .and_utc()
}

/// Read-only state shared by every agent in a run.
pub(crate) struct Env<'a> {
    pub cfg: &'a PipelineConfig,
    pub prompts: &'a PromptSet,
    pub llm: &'a dyn ChatBackend,
    pub weather: &'a dyn WeatherClient,
    pub search: &'a dyn SearchClient,
    pub stats: GuardedStatStore,
    pub pool: PlayerPool,
    pub rules: &'a RulesSchema,
}

impl Env<'_> {
    /// One structured LLM call with a semantic check on top of the shape check.
    ///
    /// A failed check re-prompts like a shape failure and uses up the same
    /// attempt budget.
    pub fn ask<T>(
        &self,
        log: &mut Vec<TranscriptRecord>,
        step: u32,
        agent: AgentId,
        label: &str,
        tag: &str,
        messages: Vec<ChatMessage>,
        descriptor: &PayloadDescriptor,
        check: impl Fn(&Value) -> Result<T, String>,
    ) -> Result<T, PipelineError> {
        let llm_err = |source| PipelineError::Llm {
            label: label.to_string(),
            source,
        };
        let mut request = self.cfg.models.request(tag, messages);
        let mut remaining = self.cfg.structured_attempts;
        let mut responses = Vec::new();
        loop {
            let outcome = match complete_structured(self.llm, &request, descriptor, remaining) {
                Ok(o) => o,
                Err(LlmError::MalformedAfterRetries {
                    attempts,
                    last_error,
                    responses: r,
                }) => {
                    responses.extend(r);
                    return Err(llm_err(LlmError::MalformedAfterRetries {
                        attempts: self.cfg.structured_attempts - remaining + attempts,
                        last_error,
                        responses,
                    }));
                }
                Err(e) => return Err(llm_err(e)),
            };
            remaining -= outcome.attempts;
            let last = outcome.exchanges.last().map(|(_, r)| r.content.clone()).unwrap_or_default();
            for (req, resp) in outcome.exchanges {
                responses.push(resp.content.clone());
                log.push(TranscriptRecord::Exchange {
                    step,
                    agent,
                    label: label.to_string(),
                    fingerprint: req.fingerprint(),
                    request: req,
                    response: resp,
                });
            }
            match check(&outcome.value) {
                Ok(v) => return Ok(v),
                Err(e) if remaining == 0 => {
                    return Err(llm_err(LlmError::MalformedAfterRetries {
                        attempts: self.cfg.structured_attempts,
                        last_error: e,
                        responses,
                    }))
                }
                Err(e) => {
                    // Continue the conversation from the last attempt.
                    request = log_last_request(log).clone();
                    request.messages.push(ChatMessage::assistant(last.clone()));
                    request.messages.push(ChatMessage::user(format!(
                        "Your previous reply could not be used: {e}. Reply with a single JSON object with the fields {}.",
                        descriptor.describe()
                    )));
                }
            }
        }
    }

    pub fn render(&self, template: &str, vars: &BTreeMap<&str, String>) -> Result<Vec<ChatMessage>, PipelineError> {
        self.prompts.render(template, vars)
    }
}

fn log_last_request(log: &[TranscriptRecord]) -> &crate::llm::ChatRequest {
    log.iter()
        .rev()
        .find_map(|r| match r {
            TranscriptRecord::Exchange { request, .. } => Some(request),
            _ => None,
        })
        .expect("an exchange was just logged")
}

/// Runs `f` over `items` on at most `workers` threads; results keep input order.
pub(crate) fn fan_out<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = workers.clamp(1, items.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let done = std::sync::Mutex::new(Vec::with_capacity(items.len()));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                done.lock().unwrap().push((i, r));
            });
        }
    });
    for (i, r) in done.into_inner().unwrap() {
        slots[i] = Some(r);
    }
    slots.into_iter().map(|r| r.expect("every item ran")).collect()
}

/// Generates `config.n` named, rule-valid teams for one match.
pub fn run_pipeline(
    config: &PipelineConfig,
    context: MatchContext,
    pool: &PlayerPool,
    rules: &RulesSchema,
    sources: &PipelineSources<'_>,
    llm: &dyn ChatBackend,
    prompts: &PromptSet,
) -> Result<GenerationResult, PipelineError> {
    if config.n == 0 || config.n > MAX_TEAMS {
        return Err(PipelineError::InvalidN(config.n));
    }
    context.validate()?;
    let xi = context.playing_xi_ids().ok_or(PipelineError::MissingPlayingXi)?;
    for id in &xi {
        if !pool.contains(id) {
            return Err(RulesError::UnknownPlayer(id.clone()).into());
        }
    }
    let env = Env {
        cfg: config,
        prompts,
        llm,
        weather: sources.weather,
        search: sources.search,
        stats: apply_temporal_guard(sources.stats, stats_cutoff(&context)),
        pool: pool.restricted_to(&xi).with_playing_xi(xi.iter().cloned()),
        rules,
    };
    let mut board = Blackboard::new(context);
    let mut transcript = Transcript::default();
    let max_steps = 5 + config.max_review_iters + 1;
    loop {
        let route = route_next(&board.slot_states(), config.max_review_iters)?;
        let Route::Agent(agent) = route else { break };
        if board.step >= max_steps {
            return Err(PipelineError::StuckState(format!("no result after {max_steps} steps")));
        }
        board.step += 1;
        let mut log = Vec::new();
        let outcome = run_agent(agent, &env, &mut board, &mut log);
        transcript.extend(log);
        if let Err(cause) = outcome {
            return Err(match cause {
                PipelineError::CannotProduceValidSlate {
                    team,
                    attempts,
                    violations,
                    ..
                } => PipelineError::CannotProduceValidSlate {
                    team,
                    attempts,
                    violations,
                    transcript: Box::new(transcript),
                },
                cause => PipelineError::Aborted {
                    agent,
                    cause: Box::new(cause),
                    partial: Box::new(board),
                    transcript: Box::new(transcript),
                },
            });
        }
    }
    let teams = board.final_teams.require("final_teams")?.clone();
    Ok(GenerationResult {
        teams,
        transcript,
        blackboard_final: board,
    })
}

fn run_agent(agent: AgentId, env: &Env<'_>, board: &mut Blackboard, log: &mut Vec<TranscriptRecord>) -> Result<(), PipelineError> {
    let step = board.step;
    let mut note = |text: String| {
        log.push(TranscriptRecord::Step { step, agent, note: text });
    };
    match agent {
        AgentId::Researcher => {
            note("research weather, odds and pitch".into());
            agents::run_researcher(env, board, log)
        }
        AgentId::CareerProfiler => {
            note(format!("profile {} players", env.pool.len()));
            agents::run_career_profiler(env, board, log)
        }
        AgentId::FormAssessor => {
            note(format!("assess form over the last {} matches", env.cfg.form_window));
            agents::run_form_assessor(env, board, log)
        }
        AgentId::Strategizer => {
            note("build strategy brief".into());
            agents::run_strategizer(env, board, log)
        }
        AgentId::Selector => {
            note(format!("selector visit, {} review round(s) done", board.review_iterations));
            selector::run_selector(env, board, log)
        }
        other => Err(PipelineError::StuckState(format!("{other:?} is not routable"))),
    }
}
