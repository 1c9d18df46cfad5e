//! Researcher, Career Profiler, Form Assessor and Strategizer.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{fan_out, AgentId, Blackboard, Env, OddsQuote, PipelineError, PitchReport, Provenance, StrategyBrief, TranscriptRecord};
use crate::llm::{FieldKind, PayloadDescriptor, WORKER};
use crate::model::{CareerProfile, FormAssessment, FranchiseId, MatchContext, Player, PlayerId};
use crate::sources::{fetch_innings_weather, search_answer, weather_fixture_name, SearchAnswer, SourceError};

pub fn odds_query(ctx: &MatchContext) -> String {
    format!(
        "betting odds {} vs {} {} {}",
        ctx.home.name, ctx.away.name, ctx.tournament, ctx.season
    )
}

pub fn pitch_query(ctx: &MatchContext) -> String {
    format!("pitch report {}, {}", ctx.venue.name, ctx.venue.city)
}

pub fn tips_query(ctx: &MatchContext) -> String {
    format!(
        "fantasy cricket team tips {} vs {} {} {}",
        ctx.home.short_code, ctx.away.short_code, ctx.tournament, ctx.season
    )
}

pub const RULES_QUERY: &str = "Dream11 cricket team selection rules";

/// Player card shown to the agents: ids and attributes, never the display name.
pub(crate) fn player_card(p: &Player) -> Value {
    json!({
        "player_id": p.player_id,
        "role": p.role.code(),
        "franchise": p.franchise_id,
        "credits": p.credit_cost.to_f64(),
        "batting_hand": p.batting_hand,
        "bowling_style": p.bowling_style,
        "description": p.description,
    })
}

pub(crate) fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

pub(crate) fn last_fingerprint(log: &[TranscriptRecord]) -> String {
    log.iter()
        .rev()
        .find_map(|r| match r {
            TranscriptRecord::Exchange { fingerprint, .. } => Some(format!("llm:{fingerprint}")),
            _ => None,
        })
        .unwrap_or_default()
}

fn fetch(log: &mut Vec<TranscriptRecord>, step: u32, agent: AgentId, kind: &str, key: &str) {
    log.push(TranscriptRecord::Fetch {
        step,
        agent,
        kind: kind.into(),
        key: key.into(),
    });
}

fn source_err(slot: &'static str) -> impl Fn(SourceError) -> PipelineError {
    move |source| PipelineError::Source { slot, source }
}

fn text_list(v: &Value, what: &str) -> Result<Vec<String>, String> {
    v.as_array()
        .ok_or_else(|| format!("`{what}` must be an array"))?
        .iter()
        .map(|s| {
            s.as_str()
                .map(|s| s.trim().to_string())
                .ok_or_else(|| format!("`{what}` must hold strings"))
        })
        .collect()
}

fn non_empty(v: &Value, field: &str) -> Result<String, String> {
    let s = v[field].as_str().unwrap_or_default().trim();
    if s.is_empty() {
        return Err(format!("`{field}` must be a non-empty string"));
    }
    Ok(s.to_string())
}

fn same_player(v: &Value, id: &PlayerId) -> Result<(), String> {
    match v["player_id"].as_str() {
        Some(s) if s == id.as_str() => Ok(()),
        other => Err(format!("`player_id` must be `{id}`, got {other:?}")),
    }
}

fn sides(ctx: &MatchContext) -> [FranchiseId; 2] {
    [ctx.home.franchise_id.clone(), ctx.away.franchise_id.clone()]
}

pub(crate) fn run_researcher(env: &Env<'_>, board: &mut Blackboard, log: &mut Vec<TranscriptRecord>) -> Result<(), PipelineError> {
    let agent = AgentId::Researcher;
    let step = board.step;
    let ctx = board.match_context.require("match_context")?.clone();

    if !board.weather.is_filled() {
        let w = &ctx.innings_windows;
        let key = weather_fixture_name(
            ctx.venue.latitude,
            ctx.venue.longitude,
            w[0].start.date_naive(),
            w[1].end.date_naive(),
        );
        fetch(log, step, agent, "weather", &key);
        let snaps = fetch_innings_weather(ctx.venue.latitude, ctx.venue.longitude, w, env.weather)
            .map_err(source_err("weather"))?;
        board
            .weather
            .fill("weather", snaps, Provenance::new(agent, [format!("weather:{key}")]), step)?;
    }

    if !board.odds.is_filled() {
        let query = odds_query(&ctx);
        fetch(log, step, agent, "search", &query);
        let answer = search_answer(&query, env.search).map_err(source_err("odds"))?;
        let ids = sides(&ctx);
        let mut vars = BTreeMap::new();
        vars.insert("home", ctx.home.name.clone());
        vars.insert("away", ctx.away.name.clone());
        vars.insert("venue", ctx.venue.name.clone());
        vars.insert("search_answer", answer.answer.clone());
        vars.insert(
            "input",
            pretty(&json!({
                "franchises": [
                    {"franchise_id": ids[0], "name": ctx.home.name, "short_code": ctx.home.short_code},
                    {"franchise_id": ids[1], "name": ctx.away.name, "short_code": ctx.away.short_code},
                ],
            })),
        );
        let desc = PayloadDescriptor::new("odds").field("odds", FieldKind::Array { min_len: 2 });
        let source = answer.sources.first().cloned().unwrap_or_else(|| query.clone());
        let quotes = env.ask(
            log,
            step,
            agent,
            "odds",
            WORKER,
            env.render("researcher_odds", &vars)?,
            &desc,
            |v| parse_odds(v, &ids, &source, &answer),
        )?;
        let prov = Provenance::new(agent, [format!("search:{query}"), last_fingerprint(log)]);
        board.odds.fill("odds", quotes, prov, step)?;
    }

    if !board.pitch.is_filled() {
        let query = pitch_query(&ctx);
        fetch(log, step, agent, "search", &query);
        let answer = search_answer(&query, env.search).map_err(source_err("pitch"))?;
        let mut vars = BTreeMap::new();
        vars.insert("venue", format!("{}, {}", ctx.venue.name, ctx.venue.city));
        vars.insert("search_answer", answer.answer.clone());
        vars.insert("input", pretty(&json!({"venue": ctx.venue, "sources": answer.sources})));
        let desc = PayloadDescriptor::new("pitch").field("summary", FieldKind::Text);
        let summary = env.ask(
            log,
            step,
            agent,
            "pitch",
            WORKER,
            env.render("researcher_pitch", &vars)?,
            &desc,
            |v| non_empty(v, "summary"),
        )?;
        let prov = Provenance::new(agent, [format!("search:{query}"), last_fingerprint(log)]);
        board.pitch.fill("pitch", PitchReport { summary, answer }, prov, step)?;
    }
    Ok(())
}

fn parse_odds(v: &Value, ids: &[FranchiseId; 2], source: &str, answer: &SearchAnswer) -> Result<Vec<OddsQuote>, String> {
    let mut found: BTreeMap<&FranchiseId, f64> = BTreeMap::new();
    for q in v["odds"].as_array().into_iter().flatten() {
        let fid = q["franchise_id"].as_str().unwrap_or_default();
        let Some(id) = ids.iter().find(|f| f.as_str() == fid) else {
            return Err(format!("unknown franchise_id `{fid}`"));
        };
        let odds = q["decimal_odds"]
            .as_f64()
            .ok_or_else(|| format!("decimal_odds for `{fid}` must be a number"))?;
        if !(odds > 1.0 && odds.is_finite()) {
            return Err(format!("decimal_odds for `{fid}` must exceed 1.0, got {odds}"));
        }
        if found.insert(id, odds).is_some() {
            return Err(format!("franchise `{fid}` quoted twice"));
        }
    }
    ids.iter()
        .map(|id| {
            let odds = found.get(id).ok_or_else(|| format!("no odds for `{id}`"))?;
            Ok(OddsQuote {
                franchise_id: id.clone(),
                decimal_odds: *odds,
                source: source.to_string(),
                fetched_at: answer.fetched_at,
            })
        })
        .collect()
}

type PlayerOutcome<T> = Result<(T, Vec<TranscriptRecord>), (PlayerId, String)>;

fn collect_players<T>(
    agent: AgentId,
    outcomes: Vec<PlayerOutcome<T>>,
    log: &mut Vec<TranscriptRecord>,
) -> Result<Vec<T>, PipelineError> {
    let mut values = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok((v, records)) => {
                log.extend(records);
                values.push(v);
            }
            Err(f) => failures.push(f),
        }
    }
    if failures.is_empty() {
        Ok(values)
    } else {
        Err(PipelineError::PlayersFailed { agent, failures })
    }
}

fn xi(board: &Blackboard) -> Result<Vec<PlayerId>, PipelineError> {
    board
        .match_context
        .require("match_context")?
        .playing_xi_ids()
        .ok_or(PipelineError::MissingPlayingXi)
}

pub(crate) fn run_career_profiler(env: &Env<'_>, board: &mut Blackboard, log: &mut Vec<TranscriptRecord>) -> Result<(), PipelineError> {
    let agent = AgentId::CareerProfiler;
    let step = board.step;
    let ids = xi(board)?;
    let desc = PayloadDescriptor::new("career_profile")
        .field("player_id", FieldKind::Text)
        .field("description", FieldKind::Text)
        .field("strengths", FieldKind::Array { min_len: 0 })
        .field("weaknesses", FieldKind::Array { min_len: 0 })
        .field(
            "career_rating",
            FieldKind::Integer {
                min: Some(1),
                max: Some(10),
            },
        );
    let outcomes = fan_out(&ids, env.cfg.concurrency, |id| -> PlayerOutcome<CareerProfile> {
        let fail = |e: PipelineError| (id.clone(), e.to_string());
        let player = env.pool.get(id).expect("pool holds the XI");
        let aggregates = env.stats.season_aggregates(id);
        let debutant = aggregates.is_empty();
        let mut vars = BTreeMap::new();
        vars.insert("player_id", id.to_string());
        vars.insert("debutant", if debutant { "yes" } else { "no" }.to_string());
        vars.insert(
            "input",
            pretty(&json!({"player": player_card(player), "debutant": debutant, "per_season_aggregates": aggregates})),
        );
        let mut records = Vec::new();
        let messages = env.render("career_profiler", &vars).map_err(fail)?;
        let profile = env
            .ask(&mut records, step, agent, &format!("career:{id}"), WORKER, messages, &desc, |v| {
                same_player(v, id)?;
                Ok(CareerProfile {
                    player_id: id.clone(),
                    per_season_aggregates: aggregates.clone(),
                    description: non_empty(v, "description")?,
                    strengths: text_list(&v["strengths"], "strengths")?,
                    weaknesses: text_list(&v["weaknesses"], "weaknesses")?,
                    career_rating: v["career_rating"].as_i64().unwrap_or_default() as u8,
                })
            })
            .map_err(fail)?;
        Ok((profile, records))
    });
    let profiles = collect_players(agent, outcomes, log)?;
    let prov = Provenance::new(agent, [format!("stats:before:{}", env.stats.cutoff().to_rfc3339())]);
    let map = profiles.into_iter().map(|p| (p.player_id.clone(), p)).collect();
    board.career_profiles.fill("career_profiles", map, prov, step)
}

pub(crate) fn run_form_assessor(env: &Env<'_>, board: &mut Blackboard, log: &mut Vec<TranscriptRecord>) -> Result<(), PipelineError> {
    let agent = AgentId::FormAssessor;
    let step = board.step;
    let ids = xi(board)?;
    let profiles = board.career_profiles.require("career_profiles")?;
    let k = env.cfg.form_window.max(1);
    let desc = PayloadDescriptor::new("form_assessment")
        .field("player_id", FieldKind::Text)
        .field("summary", FieldKind::Text)
        .field(
            "form_rating",
            FieldKind::Integer {
                min: Some(1),
                max: Some(10),
            },
        );
    let outcomes = fan_out(&ids, env.cfg.concurrency, |id| -> PlayerOutcome<FormAssessment> {
        let fail = |e: PipelineError| (id.clone(), e.to_string());
        let (window, splits) = env.stats.recent_form(id, k);
        let career = profiles.get(id).map(|p| p.career_rating);
        let mut vars = BTreeMap::new();
        vars.insert("player_id", id.to_string());
        vars.insert("window_size", k.to_string());
        vars.insert(
            "input",
            pretty(&json!({
                "player_id": id,
                "role": env.pool.role_of(id).map(|r| r.code()),
                "career_rating": career,
                "window_matches": window,
                "splits": splits,
            })),
        );
        let mut records = Vec::new();
        let messages = env.render("form_assessor", &vars).map_err(fail)?;
        let form = env
            .ask(&mut records, step, agent, &format!("form:{id}"), WORKER, messages, &desc, |v| {
                same_player(v, id)?;
                Ok(FormAssessment {
                    player_id: id.clone(),
                    window_size: k,
                    window_matches: window.clone(),
                    splits: splits.clone(),
                    summary: non_empty(v, "summary")?,
                    form_rating: v["form_rating"].as_i64().unwrap_or_default() as u8,
                })
            })
            .map_err(fail)?;
        Ok((form, records))
    });
    let forms = collect_players(agent, outcomes, log)?;
    let prov = Provenance::new(agent, [format!("stats:before:{}", env.stats.cutoff().to_rfc3339())]);
    let map = forms.into_iter().map(|f| (f.player_id.clone(), f)).collect();
    board.form.fill("form", map, prov, step)
}

/// Tips are the non-empty lines of the answer, bullet markers stripped.
pub(crate) fn answer_lines(answer: &str) -> Vec<String> {
    answer
        .lines()
        .map(|l| l.trim().trim_start_matches(['-', '*', '•']).trim().to_string())
        .filter(|l| !l.is_empty())
        .collect()
}

pub(crate) fn ratings_table(env: &Env<'_>, board: &Blackboard) -> Result<Value, PipelineError> {
    let profiles = board.career_profiles.require("career_profiles")?;
    let form = board.form.require("form")?;
    Ok(Value::Array(
        env.pool
            .iter()
            .map(|p| {
                let mut card = player_card(p);
                card["career_rating"] = json!(profiles.get(&p.player_id).map(|c| c.career_rating));
                card["form_rating"] = json!(form.get(&p.player_id).map(|f| f.form_rating));
                card["strengths"] = json!(profiles.get(&p.player_id).map(|c| &c.strengths));
                card
            })
            .collect(),
    ))
}

pub(crate) fn run_strategizer(env: &Env<'_>, board: &mut Blackboard, log: &mut Vec<TranscriptRecord>) -> Result<(), PipelineError> {
    let agent = AgentId::Strategizer;
    let step = board.step;
    let ctx = board.match_context.require("match_context")?.clone();
    let ids = sides(&ctx);
    let team_records: BTreeMap<FranchiseId, _> = ids.iter().map(|f| (f.clone(), env.stats.team_record(f))).collect();

    let query = tips_query(&ctx);
    fetch(log, step, agent, "search", &query);
    let tips = match search_answer(&query, env.search) {
        Ok(a) => answer_lines(&a.answer),
        Err(SourceError::EmptyAnswer(_)) => Vec::new(),
        Err(e) => return Err(PipelineError::Source { slot: "strategy", source: e }),
    };

    let mut vars = BTreeMap::new();
    vars.insert("home", format!("{} ({})", ctx.home.name, ctx.home.franchise_id));
    vars.insert("away", format!("{} ({})", ctx.away.name, ctx.away.franchise_id));
    vars.insert(
        "tips",
        if tips.is_empty() {
            "(none found)".to_string()
        } else {
            tips.iter().map(|t| format!("- {t}")).collect::<Vec<_>>().join("\n")
        },
    );
    vars.insert(
        "input",
        pretty(&json!({
            "toss": ctx.toss,
            "weather": board.weather.require("weather")?,
            "pitch": board.pitch.require("pitch")?.summary,
            "odds": board.odds.require("odds")?,
            "team_records": team_records,
            "players": ratings_table(env, board)?,
        })),
    );
    let desc = PayloadDescriptor::new("strategy")
        .field("team_strengths", FieldKind::Object)
        .field("team_weaknesses", FieldKind::Object)
        .field("recommendations", FieldKind::Array { min_len: 1 });
    let parse_map = |v: &Value, what: &str| -> Result<BTreeMap<FranchiseId, Vec<String>>, String> {
        let mut out = BTreeMap::new();
        for (k, list) in v.as_object().into_iter().flatten() {
            let Some(id) = ids.iter().find(|f| f.as_str() == k) else {
                return Err(format!("`{what}` key `{k}` is not a franchise id of this match"));
            };
            out.insert(id.clone(), text_list(list, what)?);
        }
        Ok(out)
    };
    let brief = env.ask(
        log,
        step,
        agent,
        "strategy",
        WORKER,
        env.render("strategizer", &vars)?,
        &desc,
        |v| {
            let recommendations: Vec<String> = text_list(&v["recommendations"], "recommendations")?
                .into_iter()
                .filter(|r| !r.is_empty())
                .collect();
            if recommendations.is_empty() {
                return Err("`recommendations` must hold at least one non-empty string".into());
            }
            Ok(StrategyBrief {
                team_records: team_records.clone(),
                team_strengths: parse_map(&v["team_strengths"], "team_strengths")?,
                team_weaknesses: parse_map(&v["team_weaknesses"], "team_weaknesses")?,
                tips: tips.clone(),
                recommendations,
            })
        },
    )?;
    let prov = Provenance::new(agent, [format!("search:{query}"), last_fingerprint(log)]);
    board.strategy.fill("strategy", brief, prov, step)
}
