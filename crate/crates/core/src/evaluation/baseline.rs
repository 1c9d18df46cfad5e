//! Single-prompt generator used as the comparison point for the agent pipeline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::llm::{complete_structured, ChatBackend, ChatMessage, FieldKind, LlmError, ModelConfig, PayloadDescriptor, WORKER};
use crate::model::{FantasyTeam, MatchContext, PlayerId, PlayerPool};
use crate::pipeline::{parse_team, proposal_violations, AgentId, PipelineError, PromptSet, Transcript, TranscriptRecord, MAX_TEAMS};
use crate::rules::RulesSchema;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub teams: Vec<FantasyTeam>,
    pub transcript: Transcript,
}

/// Format example appended to the prompt.
pub fn baseline_example() -> String {
    let players: Vec<String> = (1..=11).map(|i| format!("\"<player {i}>\"")).collect();
    format!(
        "reply as JSON: {{\"teams\": [{{\"players\": [{}], \"captain\": \"<player>\", \"vice_captain\": \"<player>\"}}]}}",
        players.join(", ")
    )
}

/// Maps display names back to ids; case and surrounding space are ignored.
/// Ids are accepted as they are; anything else is kept verbatim and later fails validation.
pub fn resolve_names(team: &FantasyTeam, pool: &PlayerPool) -> FantasyTeam {
    let by_name: BTreeMap<String, &PlayerId> = pool
        .iter()
        .map(|p| (p.name.trim().to_lowercase(), &p.player_id))
        .collect();
    let resolve = |raw: &PlayerId| -> PlayerId {
        if pool.contains(raw) {
            return raw.clone();
        }
        by_name
            .get(&raw.as_str().trim().to_lowercase())
            .map(|id| (*id).clone())
            .unwrap_or_else(|| raw.clone())
    };
    let mut out = FantasyTeam::new(
        team.players.iter().map(resolve),
        resolve(&team.captain),
        resolve(&team.vice_captain),
    );
    out.name = team.name.clone();
    out.rationale = team.rationale.clone();
    out
}

fn names(ids: &[PlayerId], pool: &PlayerPool) -> String {
    ids.iter()
        .map(|id| pool.get(id).map(|p| p.name.clone()).unwrap_or_else(|| id.to_string()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn log_exchanges(t: &mut Transcript, label: &str, exchanges: Vec<(crate::llm::ChatRequest, crate::llm::ChatResponse)>) {
    for (request, response) in exchanges {
        t.push(TranscriptRecord::Exchange {
            step: 1,
            agent: AgentId::Baseline,
            label: label.to_string(),
            fingerprint: request.fingerprint(),
            request,
            response,
        });
    }
}

/// One chat call with the plain analyst prompt, then per-team re-requests for invalid lineups.
pub fn prompt_engineering_baseline(
    context: &MatchContext,
    pool: &PlayerPool,
    rules: &RulesSchema,
    n: usize,
    llm: &dyn ChatBackend,
    models: &ModelConfig,
    prompts: &PromptSet,
    team_attempts: u32,
) -> Result<BaselineResult, PipelineError> {
    if n == 0 || n > MAX_TEAMS {
        return Err(PipelineError::InvalidN(n));
    }
    let xi = context.playing_xi.as_ref().ok_or(PipelineError::MissingPlayingXi)?;
    let side = |f| xi.get(f).ok_or(PipelineError::MissingPlayingXi);
    let home = side(&context.home.franchise_id)?;
    let away = side(&context.away.franchise_id)?;
    let mut ids = home.clone();
    ids.extend(away.iter().cloned());
    let pool = pool.restricted_to(&ids).with_playing_xi(ids.iter().cloned());

    let mut vars = BTreeMap::new();
    vars.insert("team_a", context.home.name.clone());
    vars.insert("team_b", context.away.name.clone());
    vars.insert("city", context.venue.city.clone());
    vars.insert("n", n.to_string());
    vars.insert("players_a", names(home, &pool));
    vars.insert("players_b", names(away, &pool));
    vars.insert("example", baseline_example());
    let messages = prompts.render("baseline", &vars)?;
    let request = models.request(WORKER, messages);

    let llm_err = |label: &str, source| PipelineError::Llm {
        label: label.to_string(),
        source,
    };
    let mut transcript = Transcript::default();
    transcript.push(TranscriptRecord::Step {
        step: 1,
        agent: AgentId::Baseline,
        note: format!("single-prompt generation of {n} team(s)"),
    });
    let desc = PayloadDescriptor::new("teams").field("teams", FieldKind::Array { min_len: n });
    let outcome = complete_structured(llm, &request, &desc, 3).map_err(|e| llm_err("baseline", e))?;
    let reply = outcome.exchanges.last().map(|(_, r)| r.content.clone()).unwrap_or_default();
    let conversation = outcome.exchanges.last().map(|(q, _)| q.clone()).unwrap_or(request);
    log_exchanges(&mut transcript, "baseline", outcome.exchanges);
    let raw: Vec<&Value> = outcome.value["teams"].as_array().expect("validated array").iter().take(n).collect();

    let fix_desc = PayloadDescriptor::new("team")
        .field("players", FieldKind::Array { min_len: 0 })
        .field("captain", FieldKind::Text)
        .field("vice_captain", FieldKind::Text);
    let mut teams = Vec::with_capacity(n);
    for (i, v) in raw.into_iter().enumerate() {
        let mut team = parse_team(v).map(|t| resolve_names(&t, &pool));
        let mut attempts = 0;
        loop {
            let problem = match &team {
                Ok(t) => {
                    let v = proposal_violations(t, &pool, rules);
                    if v.is_empty() {
                        break;
                    }
                    v.iter().map(|v| format!("{}: {}", v.code, v.detail)).collect::<Vec<_>>().join("; ")
                }
                Err(e) => e.clone(),
            };
            if attempts == team_attempts {
                let violations = match &team {
                    Ok(t) => proposal_violations(t, &pool, rules),
                    Err(_) => Vec::new(),
                };
                return Err(PipelineError::CannotProduceValidSlate {
                    team: i + 1,
                    attempts,
                    violations,
                    transcript: Box::new(transcript),
                });
            }
            attempts += 1;
            let mut req = conversation.clone();
            req.messages.push(ChatMessage::assistant(reply.clone()));
            req.messages.push(ChatMessage::user(format!(
                "Team {} is not valid ({problem}). Reply with one replacement team as a single JSON object {{\"players\": [...], \"captain\": \"...\", \"vice_captain\": \"...\"}} using the player names given above.",
                i + 1
            )));
            let label = format!("baseline_fix:{}", i + 1);
            let out = complete_structured(llm, &req, &fix_desc, 3).map_err(|e: LlmError| llm_err(&label, e))?;
            team = parse_team(&out.value).map(|t| resolve_names(&t, &pool));
            log_exchanges(&mut transcript, &label, out.exchanges);
        }
        let mut t = team.expect("loop exits only on a valid team");
        t.name = Some(format!("baseline {}", i + 1));
        teams.push(t);
    }
    Ok(BaselineResult { teams, transcript })
}
