//! Selector with the reviewer loop: propose, fix, review, revise, name.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::agents::{last_fingerprint, pretty, ratings_table, RULES_QUERY};
use super::{fan_out, AgentId, Blackboard, Env, PipelineError, Provenance, TranscriptRecord};
use crate::llm::{FieldKind, PayloadDescriptor, REVIEWER, WORKER};
use crate::model::{FantasyTeam, PlayerId, PlayerPool};
use crate::rules::{validate_team, RulesSchema, Violation, ViolationCode};
use crate::sources::search_answer;

/// Reads `{"players": [...], "captain": "...", "vice_captain": "..."}`.
///
/// Only the JSON types are checked here; rule problems are left to
/// [`proposal_violations`] so they can be fed back to the model.
pub fn parse_team(v: &Value) -> Result<FantasyTeam, String> {
    let players = v["players"]
        .as_array()
        .ok_or("team `players` must be an array")?
        .iter()
        .map(|p| p.as_str().map(PlayerId::new).ok_or("team `players` must hold id strings"))
        .collect::<Result<Vec<_>, _>>()?;
    let id = |field: &str| -> Result<PlayerId, String> {
        v[field]
            .as_str()
            .map(PlayerId::new)
            .ok_or_else(|| format!("team `{field}` must be an id string"))
    };
    Ok(FantasyTeam::new(players, id("captain")?, id("vice_captain")?))
}

/// Every rule the proposal breaks; ids outside the pool are reported as `UnknownPlayer`.
pub fn proposal_violations(team: &FantasyTeam, pool: &PlayerPool, rules: &RulesSchema) -> Vec<Violation> {
    let unknown: Vec<Violation> = team
        .players
        .iter()
        .chain([&team.captain, &team.vice_captain])
        .filter(|p| !pool.contains(p))
        .map(|p| Violation {
            code: ViolationCode::UnknownPlayer,
            detail: format!("`{p}` is not one of the available players"),
        })
        .collect();
    if !unknown.is_empty() {
        return unknown;
    }
    validate_team(team, pool, rules)
        .map(|r| r.violations)
        .unwrap_or_else(|e| {
            vec![Violation {
                code: ViolationCode::UnknownPlayer,
                detail: e.to_string(),
            }]
        })
}

fn violation_text(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("- {}: {}", v.code, v.detail))
        .collect::<Vec<_>>()
        .join("\n")
}

fn team_json(t: &FantasyTeam) -> Value {
    json!({"players": t.players, "captain": t.captain, "vice_captain": t.vice_captain})
}

fn teams_payload(n: usize) -> PayloadDescriptor {
    PayloadDescriptor::new("teams").field("teams", FieldKind::Array { min_len: n })
}

fn parse_slate(v: &Value, n: usize) -> Result<Vec<FantasyTeam>, String> {
    let teams = v["teams"].as_array().ok_or("`teams` must be an array")?;
    if teams.len() != n {
        return Err(format!("expected exactly {n} teams, got {}", teams.len()));
    }
    teams
        .iter()
        .enumerate()
        .map(|(i, t)| parse_team(t).map_err(|e| format!("team {}: {e}", i + 1)))
        .collect()
}

pub(crate) fn run_selector(env: &Env<'_>, board: &mut Blackboard, log: &mut Vec<TranscriptRecord>) -> Result<(), PipelineError> {
    let max = env.cfg.max_review_iters;
    if !board.proposed_teams.is_filled() {
        propose(env, board, log)?;
        if max == 0 {
            finalize(env, board, log)?;
        }
        return Ok(());
    }
    if board.review_iterations < max {
        review_round(env, board, log)?;
        board.review_iterations += 1;
        if board.review_iterations < max {
            return Ok(());
        }
    }
    finalize(env, board, log)
}

fn rules_json(rules: &RulesSchema) -> Value {
    serde_json::to_value(rules).expect("rules serialize")
}

fn propose(env: &Env<'_>, board: &mut Blackboard, log: &mut Vec<TranscriptRecord>) -> Result<(), PipelineError> {
    let agent = AgentId::Selector;
    let step = board.step;
    let n = env.cfg.n;
    log.push(TranscriptRecord::Fetch {
        step,
        agent,
        kind: "search".into(),
        key: RULES_QUERY.into(),
    });
    // Advisory only: the binding rules are the parsed schema.
    let rules_text = search_answer(RULES_QUERY, env.search)
        .map(|a| a.answer)
        .unwrap_or_else(|_| "(unavailable)".to_string());
    let strategy = board.strategy.require("strategy")?;
    let players = ratings_table(env, board)?;
    let rules = rules_json(env.rules);

    let mut vars = BTreeMap::new();
    vars.insert("n", n.to_string());
    vars.insert("rules_text", rules_text);
    vars.insert(
        "input",
        pretty(&json!({"rules": rules, "strategy": strategy, "players": players})),
    );
    let mut teams = env.ask(
        log,
        step,
        agent,
        "propose",
        WORKER,
        env.render("selector_propose", &vars)?,
        &teams_payload(n),
        |v| parse_slate(v, n),
    )?;

    let fix_desc = PayloadDescriptor::new("team")
        .field("players", FieldKind::Array { min_len: 0 })
        .field("captain", FieldKind::Text)
        .field("vice_captain", FieldKind::Text);
    for (i, team) in teams.iter_mut().enumerate() {
        let mut violations = proposal_violations(team, &env.pool, env.rules);
        let mut attempts = 0;
        while !violations.is_empty() {
            if attempts == env.cfg.team_attempts {
                return Err(PipelineError::CannotProduceValidSlate {
                    team: i + 1,
                    attempts,
                    violations,
                    transcript: Box::default(),
                });
            }
            attempts += 1;
            let mut vars = BTreeMap::new();
            vars.insert("index", (i + 1).to_string());
            vars.insert("violations", violation_text(&violations));
            vars.insert(
                "input",
                pretty(&json!({"team": team_json(team), "rules": rules, "players": players})),
            );
            *team = env.ask(
                log,
                step,
                agent,
                &format!("fix:{}", i + 1),
                WORKER,
                env.render("selector_fix", &vars)?,
                &fix_desc,
                parse_team,
            )?;
            violations = proposal_violations(team, &env.pool, env.rules);
        }
    }
    let prov = Provenance::new(agent, [last_fingerprint(log)]);
    board.proposed_teams.rewrite(teams, prov, step);
    Ok(())
}

fn review_round(env: &Env<'_>, board: &mut Blackboard, log: &mut Vec<TranscriptRecord>) -> Result<(), PipelineError> {
    let step = board.step;
    let n = env.cfg.n;
    let current = board.proposed_teams.require("proposed_teams")?.clone();
    let strategy = board.strategy.require("strategy")?;
    let players = ratings_table(env, board)?;
    let slate: Vec<Value> = current.iter().map(team_json).collect();

    let mut vars = BTreeMap::new();
    vars.insert("n", n.to_string());
    vars.insert(
        "input",
        pretty(&json!({"teams": slate, "strategy": strategy, "players": players})),
    );
    let desc = PayloadDescriptor::new("review").field("feedback", FieldKind::Array { min_len: n });
    let feedback = env.ask(
        log,
        step,
        AgentId::Reviewer,
        &format!("review:{}", board.review_iterations + 1),
        REVIEWER,
        env.render("reviewer", &vars)?,
        &desc,
        |v| {
            let items = v["feedback"].as_array().ok_or("`feedback` must be an array")?;
            if items.len() != n {
                return Err(format!("expected feedback for exactly {n} teams, got {}", items.len()));
            }
            items
                .iter()
                .map(|f| f.as_str().map(str::to_string).ok_or_else(|| "`feedback` must hold strings".to_string()))
                .collect::<Result<Vec<_>, _>>()
        },
    )?;
    board
        .review_feedback
        .rewrite(feedback.clone(), Provenance::new(AgentId::Reviewer, [last_fingerprint(log)]), step);

    let mut vars = BTreeMap::new();
    vars.insert("n", n.to_string());
    vars.insert(
        "input",
        pretty(&json!({"teams": slate, "feedback": feedback, "rules": rules_json(env.rules), "players": players})),
    );
    let revised = env.ask(
        log,
        step,
        AgentId::Selector,
        &format!("revise:{}", board.review_iterations + 1),
        WORKER,
        env.render("selector_revise", &vars)?,
        &teams_payload(n),
        |v| parse_slate(v, n),
    )?;
    let mut kept = Vec::new();
    let next: Vec<FantasyTeam> = revised
        .into_iter()
        .zip(current)
        .enumerate()
        .map(|(i, (new, old))| {
            if proposal_violations(&new, &env.pool, env.rules).is_empty() {
                new
            } else {
                kept.push(i + 1);
                old
            }
        })
        .collect();
    if !kept.is_empty() {
        log.push(TranscriptRecord::Step {
            step,
            agent: AgentId::Selector,
            note: format!("revision broke the rules for team(s) {kept:?}; kept the previous version"),
        });
    }
    board
        .proposed_teams
        .rewrite(next, Provenance::new(AgentId::Selector, [last_fingerprint(log)]), step);
    Ok(())
}

fn finalize(env: &Env<'_>, board: &mut Blackboard, log: &mut Vec<TranscriptRecord>) -> Result<(), PipelineError> {
    let agent = AgentId::Selector;
    let step = board.step;
    let teams = board.proposed_teams.require("proposed_teams")?.clone();
    let players = ratings_table(env, board)?;
    let recommendations = &board.strategy.require("strategy")?.recommendations;
    let cards: BTreeMap<&str, &Value> = players
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|c| c["player_id"].as_str().map(|id| (id, c)))
        .collect();
    let desc = PayloadDescriptor::new("team_name")
        .field("rationale", FieldKind::Text)
        .field("name", FieldKind::Text);
    let indexed: Vec<(usize, &FantasyTeam)> = teams.iter().enumerate().collect();
    let outcomes = fan_out(&indexed, env.cfg.concurrency, |&(i, team)| {
        let mut vars = BTreeMap::new();
        vars.insert("index", (i + 1).to_string());
        let members: Vec<&Value> = team.players.iter().filter_map(|p| cards.get(p.as_str()).copied()).collect();
        vars.insert(
            "input",
            pretty(&json!({
                "players": members,
                "captain": team.captain,
                "vice_captain": team.vice_captain,
                "recommendations": recommendations,
            })),
        );
        let mut records = Vec::new();
        let named = env.ask(
            &mut records,
            step,
            agent,
            &format!("name:{}", i + 1),
            WORKER,
            env.render("selector_name", &vars)?,
            &desc,
            |v| {
                let field = |f: &str| match v[f].as_str().map(str::trim) {
                    Some(s) if !s.is_empty() => Ok(s.to_string()),
                    _ => Err(format!("`{f}` must be a non-empty string")),
                };
                let mut t = team.clone();
                t.rationale = Some(field("rationale")?);
                t.name = Some(field("name")?);
                Ok(t)
            },
        )?;
        Ok::<_, PipelineError>((named, records))
    });
    let mut finals = Vec::with_capacity(teams.len());
    for o in outcomes {
        let (team, records) = o?;
        log.extend(records);
        finals.push(team);
    }
    for (i, t) in finals.iter().enumerate() {
        let v = proposal_violations(t, &env.pool, env.rules);
        if !v.is_empty() {
            return Err(PipelineError::CannotProduceValidSlate {
                team: i + 1,
                attempts: 0,
                violations: v,
                transcript: Box::default(),
            });
        }
    }
    let prov = Provenance::new(agent, [last_fingerprint(log)]);
    board.final_teams.fill("final_teams", finals, prov, step)
}
