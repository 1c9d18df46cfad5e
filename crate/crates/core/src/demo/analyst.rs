//! A rule-based stand-in for the chat model, used to record the demo fixtures.
//!
//! It reads the task line and the JSON input block of each prompt and answers
//! from the numbers it is given, so its replies are deterministic.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::llm::{ChatBackend, ChatRequest, ChatResponse, ChatRole, LlmError, TokenUsage};
use crate::model::{FantasyTeam, FranchiseId, MatchContext, PlayerId, PlayerPool};
use crate::rules::{repair_team, RulesSchema};

const NAMES: [&str; 20] = [
    "Power Play Pros",
    "Spin Kings",
    "Top Order Titans",
    "Balanced Blasters",
    "Death Over Demons",
    "All-Round Aces",
    "Pace Brigade",
    "Boundary Hunters",
    "Ekana Edge",
    "Middle Order Marvels",
    "Slow Pitch Specialists",
    "Dew Point Dashers",
    "Captain's Call",
    "Late Order Lifters",
    "Seam and Spin",
    "Home Turf XI",
    "Wankhede Raiders",
    "Chase Masters",
    "Toss Winners",
    "Final Over Finishers",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AnalystOptions {
    /// Fixed `(career, form)` ratings for chosen players.
    pub anchors: BTreeMap<PlayerId, (u8, u8)>,
    /// `(team number, captain, name)`: that team is captained by the player and carries the name.
    pub anchor_team: Option<(usize, PlayerId, String)>,
    /// Team number (1-based) first proposed with only ten players.
    pub invalid_team: Option<usize>,
}

impl Default for AnalystOptions {
    fn default() -> Self {
        let stoinis = PlayerId::new("lsg-stoinis");
        AnalystOptions {
            anchors: [(stoinis.clone(), (7, 8))].into_iter().collect(),
            anchor_team: Some((1, stoinis, "Strategic Strikers".into())),
            invalid_team: None,
        }
    }
}

pub struct AnalystBackend {
    pool: PlayerPool,
    rules: RulesSchema,
    by_name: BTreeMap<String, PlayerId>,
    sides: [FranchiseId; 2],
    options: AnalystOptions,
}

type Reply = Result<String, LlmError>;

fn bad(msg: impl Into<String>) -> LlmError {
    LlmError::Protocol(msg.into())
}

fn fenced(preface: &str, v: &Value) -> String {
    format!("{preface}\n```json\n{}\n```", serde_json::to_string_pretty(v).expect("JSON values serialize"))
}

fn between<'a>(text: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = text.find(open)? + open.len();
    let len = text[start..].find(close)?;
    Some(&text[start..start + len])
}

fn number_after(text: &str, marker: &str) -> Option<usize> {
    let rest = &text[text.find(marker)? + marker.len()..];
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok()
}

/// Uniform value in [0, 1) fixed by the key.
fn jitter(key: &str) -> f64 {
    let h = Sha256::digest(key.as_bytes());
    u32::from_be_bytes([h[0], h[1], h[2], h[3]]) as f64 / (u32::MAX as f64 + 1.0)
}

fn u(v: &Value, k: &str) -> f64 {
    v[k].as_f64().unwrap_or(0.0)
}

/// 1–10 rating from raw totals; no matches gives a neutral 5.
fn rate(matches: f64, runs: f64, balls: f64, wickets: f64, legal_balls: f64, runs_conceded: f64) -> u8 {
    if matches <= 0.0 {
        return 5;
    }
    let bat = if balls > 0.0 {
        runs / matches / 3.5 + (runs * 100.0 / balls - 130.0) / 25.0
    } else {
        0.0
    };
    let bowl = if legal_balls > 0.0 {
        wickets / matches * 4.0 + (8.5 - runs_conceded * 6.0 / legal_balls) * 0.5
    } else {
        0.0
    };
    let (hi, lo) = if bat >= bowl { (bat, bowl) } else { (bowl, bat) };
    (hi + 0.3 * lo.max(0.0)).round().clamp(1.0, 10.0) as u8
}

fn team_value(t: &FantasyTeam) -> Value {
    json!({"players": t.players, "captain": t.captain, "vice_captain": t.vice_captain})
}

fn team_from(v: &Value) -> Result<FantasyTeam, LlmError> {
    crate::pipeline::parse_team(v).map_err(bad)
}

/// Ratings table sent with selector prompts: id → (career + form, card).
struct Table {
    score: BTreeMap<PlayerId, f64>,
    cards: BTreeMap<PlayerId, Value>,
}

impl Table {
    fn from_input(input: &Value) -> Result<Self, LlmError> {
        let mut score = BTreeMap::new();
        let mut cards = BTreeMap::new();
        for c in input["players"].as_array().ok_or_else(|| bad("input has no player table"))? {
            let id = PlayerId::new(c["player_id"].as_str().ok_or_else(|| bad("card without player_id"))?);
            score.insert(id.clone(), u(c, "career_rating") + u(c, "form_rating"));
            cards.insert(id, c.clone());
        }
        Ok(Table { score, cards })
    }

    fn s(&self, id: &PlayerId) -> f64 {
        self.score.get(id).copied().unwrap_or(0.0)
    }

    fn role(&self, id: &PlayerId) -> &str {
        self.cards.get(id).and_then(|c| c["role"].as_str()).unwrap_or("")
    }

    /// Ids ordered by `key` descending, ties by id.
    fn ranked(&self, ids: impl IntoIterator<Item = PlayerId>, key: impl Fn(&PlayerId) -> f64) -> Vec<PlayerId> {
        let mut v: Vec<PlayerId> = ids.into_iter().collect();
        v.sort_by(|a, b| key(b).total_cmp(&key(a)).then_with(|| a.cmp(b)));
        v
    }
}

/// One reviewer suggestion for a team.
struct Advice {
    text: String,
    captain: Option<(PlayerId, PlayerId)>,
    swap: Option<(PlayerId, PlayerId)>,
}

impl AnalystBackend {
    pub fn new(pool: &PlayerPool, context: &MatchContext, rules: RulesSchema, options: AnalystOptions) -> Self {
        let xi = context.playing_xi_ids().unwrap_or_else(|| pool.ids().cloned().collect());
        let pool = pool.restricted_to(&xi).with_playing_xi(xi.iter().cloned());
        let by_name = pool.iter().map(|p| (p.name.to_lowercase(), p.player_id.clone())).collect();
        AnalystBackend {
            pool,
            rules,
            by_name,
            sides: [context.home.franchise_id.clone(), context.away.franchise_id.clone()],
            options,
        }
    }

    fn repair(&self, team: &FantasyTeam, pref: &BTreeMap<PlayerId, f64>) -> Result<FantasyTeam, LlmError> {
        repair_team(team, &self.rules, &self.pool, pref).map_err(|e| bad(e.to_string()))
    }

    fn anchor_for(&self, index: usize) -> Option<&PlayerId> {
        self.options
            .anchor_team
            .as_ref()
            .filter(|(i, _, _)| *i == index)
            .map(|(_, p, _)| p)
    }

    fn is_anchor_captain(&self, id: &PlayerId) -> bool {
        self.options.anchor_team.as_ref().is_some_and(|(_, p, _)| p == id)
    }

    /// Drops the last member that is neither captain nor vice-captain.
    fn break_team(team: &mut FantasyTeam) {
        if let Some(pos) = team.players.iter().rposition(|p| *p != team.captain && *p != team.vice_captain) {
            team.players.remove(pos);
        }
    }

    fn odds(&self, user: &str, input: &Value) -> Reply {
        let answer = between(user, "\"\"\"\n", "\n\"\"\"").unwrap_or("");
        let mut quotes = Vec::new();
        for f in input["franchises"].as_array().ok_or_else(|| bad("no franchises"))? {
            let name = f["name"].as_str().unwrap_or_default();
            let odds = answer
                .find(name)
                .and_then(|at| {
                    answer[at + name.len()..]
                        .split(|c: char| c.is_whitespace() || c == ',')
                        .map(|w| w.trim_end_matches('.'))
                        .find(|w| w.contains('.') || w.parse::<f64>().is_ok())
                        .and_then(|w| w.parse::<f64>().ok())
                })
                .filter(|x| *x > 1.0)
                .unwrap_or(2.0);
            quotes.push(json!({"franchise_id": f["franchise_id"], "decimal_odds": odds}));
        }
        Ok(fenced("Odds read from the market text:", &json!({"odds": quotes})))
    }

    fn pitch(&self, user: &str) -> Reply {
        let answer = between(user, "\"\"\"\n", "\n\"\"\"").unwrap_or("").trim();
        let sentences: Vec<&str> = answer.split_inclusive(". ").take(2).collect();
        let summary = sentences.concat().trim().to_string();
        let summary = if summary.is_empty() { "No pitch information found.".to_string() } else { summary };
        Ok(fenced("Pitch summary:", &json!({"summary": summary})))
    }

    fn career(&self, input: &Value) -> Reply {
        let card = &input["player"];
        let id = PlayerId::new(card["player_id"].as_str().ok_or_else(|| bad("no player id"))?);
        let role = card["role"].as_str().unwrap_or("");
        let seasons = input["per_season_aggregates"].as_array().cloned().unwrap_or_default();
        let sum = |k: &str| seasons.iter().map(|s| u(s, k)).sum::<f64>();
        let (m, runs, balls, wk, lb, rc) = (sum("matches"), sum("runs"), sum("balls_faced"), sum("wickets"), sum("legal_balls"), sum("runs_conceded"));
        let mut rating = rate(m, runs, balls, wk, lb, rc);
        if let Some((c, _)) = self.options.anchors.get(&id) {
            rating = *c;
        }
        let sr = if balls > 0.0 { runs * 100.0 / balls } else { 0.0 };
        let econ = if lb > 0.0 { rc * 6.0 / lb } else { 0.0 };
        let mut strengths = Vec::new();
        let mut weaknesses = Vec::new();
        let description = if m == 0.0 {
            weaknesses.push("No top-level record yet".to_string());
            format!("{role} with no recorded matches; rated from the player card alone.")
        } else {
            if sr >= 140.0 {
                strengths.push("Scores quickly".to_string());
            }
            if m > 0.0 && runs / m >= 22.0 {
                strengths.push("Consistent run scorer".to_string());
            }
            if lb > 0.0 && wk / m >= 0.9 {
                strengths.push("Regular wicket taker".to_string());
            }
            if lb > 0.0 && econ < 7.8 {
                strengths.push("Keeps the scoring rate down".to_string());
            }
            if balls > 0.0 && sr < 115.0 && runs / m >= 8.0 {
                weaknesses.push("Slow scoring".to_string());
            }
            if lb > 0.0 && econ > 9.0 {
                weaknesses.push("Expensive with the ball".to_string());
            }
            if m < 8.0 {
                weaknesses.push("Small sample of matches".to_string());
            }
            format!(
                "{role} with {m} matches over {} season(s): {runs} runs at strike rate {sr:.1}, {wk} wickets at economy {econ:.2}.",
                seasons.len()
            )
        };
        Ok(fenced(
            "Career profile:",
            &json!({"player_id": id, "description": description, "strengths": strengths, "weaknesses": weaknesses, "career_rating": rating}),
        ))
    }

    fn form(&self, input: &Value) -> Reply {
        let id = PlayerId::new(input["player_id"].as_str().ok_or_else(|| bad("no player id"))?);
        let o = &input["splits"]["overall"];
        let (m, runs, balls) = (u(o, "matches"), u(o, "runs"), u(o, "balls_faced"));
        let mut rating = rate(m, runs, balls, u(o, "wickets"), u(o, "legal_balls"), u(o, "runs_conceded"));
        if let Some((_, f)) = self.options.anchors.get(&id) {
            rating = *f;
        }
        let summary = if m == 0.0 {
            "No recent matches; neutral form.".to_string()
        } else {
            format!(
                "{} runs and {} wickets in the last {m} matches.",
                runs,
                u(o, "wickets")
            )
        };
        Ok(fenced("Form assessment:", &json!({"player_id": id, "summary": summary, "form_rating": rating})))
    }

    fn strategy(&self, user: &str, input: &Value) -> Reply {
        let table = Table::from_input(input)?;
        let mut strengths = serde_json::Map::new();
        let mut weaknesses = serde_json::Map::new();
        for side in &self.sides {
            let ids: Vec<PlayerId> = table
                .cards
                .iter()
                .filter(|(_, c)| c["franchise"].as_str() == Some(side.as_str()))
                .map(|(id, _)| id.clone())
                .collect();
            let ranked = table.ranked(ids.clone(), |p| table.s(p));
            let top: Vec<&str> = ranked.iter().take(2).map(PlayerId::as_str).collect();
            strengths.insert(side.to_string(), json!([format!("{} are in the best form on the side", top.join(" and "))]));
            let bowlers = table.ranked(ids.into_iter().filter(|p| table.role(p) == "BOWL"), |p| -table.s(p));
            let rec = &input["team_records"][side.as_str()];
            let mut weak = vec![format!(
                "Won {} of {} recorded games",
                u(rec, "wins"),
                u(rec, "wins") + u(rec, "losses")
            )];
            if let Some(b) = bowlers.first() {
                weak.push(format!("Bowling leans on {b}, the lowest-rated bowler"));
            }
            weaknesses.insert(side.to_string(), json!(weak));
        }
        let odds: Vec<(String, f64)> = input["odds"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|q| (q["franchise_id"].as_str().unwrap_or_default().to_string(), u(q, "decimal_odds")))
            .collect();
        let mut recs = vec![
            "Prioritise all-rounders and top-order batsmen, who get the most chances to score.".to_string(),
            format!("Emphasise top-order batsmen from {} given home conditions.", self.sides[0]),
        ];
        if let [(a, x), (b, y)] = odds.as_slice() {
            if (x - y).abs() < 0.3 {
                recs.push(format!("With odds nearly equal ({a} {x}, {b} {y}), pick players from both sides."));
            }
        }
        let pitch = input["pitch"].as_str().unwrap_or("").to_lowercase();
        if pitch.contains("spin") || pitch.contains("slow") {
            recs.push("Expect spinners to find grip on a slow pitch.".to_string());
        }
        if user.to_lowercase().contains("all-rounder") {
            recs.push("Online tips also favour all-rounders.".to_string());
        }
        Ok(fenced(
            "Strategy brief:",
            &json!({"team_strengths": strengths, "team_weaknesses": weaknesses, "recommendations": recs}),
        ))
    }

    fn propose_one(&self, table: &Table, index: usize) -> Result<FantasyTeam, LlmError> {
        let pref: BTreeMap<PlayerId, f64> = table
            .score
            .keys()
            .map(|id| (id.clone(), table.s(id) + 4.0 * jitter(&format!("{index}:{id}"))))
            .collect();
        let ranked = table.ranked(pref.keys().cloned(), |p| pref[p]);
        let k = (index - 1) % 3;
        let mut players: Vec<PlayerId> = ranked.iter().take(11).cloned().collect();
        let (captain, vice) = match self.anchor_for(index) {
            Some(a) => {
                if !players.contains(a) {
                    players[10] = a.clone();
                }
                let vice = ranked.iter().find(|p| *p != a).expect("pool has more than one player").clone();
                (a.clone(), vice)
            }
            None => (ranked[k].clone(), ranked[k + 1].clone()),
        };
        let mut team = self.repair(&FantasyTeam::new(players, captain, vice), &pref)?;
        if self.options.invalid_team == Some(index) {
            Self::break_team(&mut team);
        }
        Ok(team)
    }

    fn propose(&self, user: &str, input: &Value) -> Reply {
        let n = number_after(user, "Build ").ok_or_else(|| bad("no team count"))?;
        let table = Table::from_input(input)?;
        let teams = (1..=n)
            .map(|i| self.propose_one(&table, i).map(|t| team_value(&t)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(fenced("Proposed teams:", &json!({"teams": teams})))
    }

    fn fix(&self, input: &Value) -> Reply {
        let table = Table::from_input(input)?;
        let team = team_from(&input["team"])?;
        let fixed = self.repair(&team, &table.score)?;
        Ok(fenced("Corrected team:", &team_value(&fixed)))
    }

    fn advise(&self, table: &Table, team: &FantasyTeam) -> Advice {
        let mut text = Vec::new();
        let mut captain = None;
        let mut swap = None;
        let ranked = table.ranked(team.players.iter().cloned(), |p| table.s(p));
        if self.is_anchor_captain(&team.captain) {
            text.push(format!("Captain {} is the in-form all-rounder; keep the captaincy as it is.", team.captain));
        } else if let Some(best) = ranked.first() {
            if *best != team.captain && table.s(best) >= table.s(&team.captain) + 2.0 {
                let vice = if *best == team.vice_captain { team.captain.clone() } else { team.vice_captain.clone() };
                text.push(format!("Make {best} captain; {} has the weaker ratings.", team.captain));
                captain = Some((best.clone(), vice));
            } else {
                text.push(format!("Captain {} is a sound choice.", team.captain));
            }
        }
        let weakest = ranked
            .iter()
            .rev()
            .find(|p| **p != team.captain && **p != team.vice_captain)
            .cloned();
        if let Some(w) = weakest {
            let role = table.role(&w).to_string();
            let outside = table.ranked(
                table.score.keys().filter(|p| !team.contains(p) && table.role(p) == role).cloned(),
                |p| table.s(p),
            );
            if let Some(b) = outside.first() {
                if table.s(b) >= table.s(&w) + 3.0 {
                    text.push(format!("Swap {w} for {b}, a better-rated {role}."));
                    swap = Some((w, b.clone()));
                }
            }
        }
        if swap.is_none() && captain.is_none() {
            text.push("The balance between both sides looks right.".to_string());
        }
        Advice {
            text: text.join(" "),
            captain,
            swap,
        }
    }

    fn slate(input: &Value) -> Result<Vec<FantasyTeam>, LlmError> {
        input["teams"]
            .as_array()
            .ok_or_else(|| bad("no teams"))?
            .iter()
            .map(team_from)
            .collect()
    }

    fn review(&self, input: &Value) -> Reply {
        let table = Table::from_input(input)?;
        let feedback: Vec<String> = Self::slate(input)?
            .iter()
            .enumerate()
            .map(|(i, t)| format!("Team {}: {}", i + 1, self.advise(&table, t).text))
            .collect();
        Ok(fenced("Review:", &json!({"feedback": feedback})))
    }

    fn revise(&self, input: &Value) -> Reply {
        let table = Table::from_input(input)?;
        let teams: Vec<Value> = Self::slate(input)?
            .into_iter()
            .map(|mut t| {
                let advice = self.advise(&table, &t);
                if let Some((out, inn)) = advice.swap {
                    for p in t.players.iter_mut() {
                        if *p == out {
                            *p = inn.clone();
                        }
                    }
                }
                if let Some((c, v)) = advice.captain {
                    t.captain = c;
                    t.vice_captain = v;
                }
                team_value(&t)
            })
            .collect();
        Ok(fenced("Revised teams:", &json!({"teams": teams})))
    }

    fn name(&self, user: &str, input: &Value) -> Reply {
        let index = number_after(user, "Team ").ok_or_else(|| bad("no team index"))?;
        let captain = PlayerId::new(input["captain"].as_str().unwrap_or_default());
        let vice = input["vice_captain"].as_str().unwrap_or_default();
        let cards = input["players"].as_array().cloned().unwrap_or_default();
        let card = |id: &str| cards.iter().find(|c| c["player_id"].as_str() == Some(id)).cloned().unwrap_or(Value::Null);
        let (c, v) = (card(captain.as_str()), card(vice));
        let count = |role: &str| cards.iter().filter(|c| c["role"].as_str() == Some(role)).count();
        let name = match &self.options.anchor_team {
            Some((i, p, name)) if *i == index && *p == captain => name.clone(),
            _ => NAMES[(index - 1) % NAMES.len()].to_string(),
        };
        let first_rec = input["recommendations"][0].as_str().unwrap_or("balance both sides");
        let rationale = format!(
            "Captain {captain} (career {}, form {}) and vice-captain {vice} (career {}, form {}) carry the side. \
             The team has {} all-rounders and {} top-order batsmen, following the brief: {first_rec}",
            c["career_rating"], c["form_rating"], v["career_rating"], v["form_rating"],
            count("AR"),
            count("BAT") + count("WK"),
        );
        Ok(fenced("Team summary:", &json!({"rationale": rationale, "name": name})))
    }

    fn baseline_team(&self, ids: &[PlayerId], index: usize) -> Result<FantasyTeam, LlmError> {
        let pref: BTreeMap<PlayerId, f64> = ids
            .iter()
            .map(|id| {
                let credit = self.pool.get(id).map(|p| p.credit_cost.to_f64()).unwrap_or(0.0);
                (id.clone(), credit + 3.0 * jitter(&format!("b{index}:{id}")))
            })
            .collect();
        let mut ranked: Vec<PlayerId> = ids.to_vec();
        ranked.sort_by(|a, b| pref[b].total_cmp(&pref[a]).then_with(|| a.cmp(b)));
        let k = (index - 1) % 2;
        let candidate = FantasyTeam::new(ranked.iter().take(11).cloned(), ranked[k].clone(), ranked[k + 1].clone());
        self.repair(&candidate, &pref)
    }

    fn named(&self, t: &FantasyTeam) -> Value {
        let name = |id: &PlayerId| self.pool.get(id).map(|p| p.name.clone()).unwrap_or_else(|| id.to_string());
        json!({
            "players": t.players.iter().map(name).collect::<Vec<_>>(),
            "captain": name(&t.captain),
            "vice_captain": name(&t.vice_captain),
        })
    }

    fn baseline(&self, req: &ChatRequest, prompt: &str) -> Reply {
        let list = between(prompt, "following 22 players ", " which can participate").ok_or_else(|| bad("no player list"))?;
        let ids = list
            .split(", ")
            .map(|n| self.by_name.get(&n.trim().to_lowercase()).cloned().ok_or_else(|| bad(format!("unknown player `{n}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if req.messages.len() > 2 {
            let index = number_after(req.last_user_text(), "Team ").ok_or_else(|| bad("no team index"))?;
            let team = self.baseline_team(&ids, index)?;
            return Ok(fenced("Replacement team:", &self.named(&team)));
        }
        let n = number_after(prompt, "please generate ").ok_or_else(|| bad("no team count"))?;
        let teams = (1..=n)
            .map(|i| {
                let mut t = self.baseline_team(&ids, i)?;
                if self.options.invalid_team == Some(i) {
                    Self::break_team(&mut t);
                }
                Ok(self.named(&t))
            })
            .collect::<Result<Vec<_>, LlmError>>()?;
        Ok(fenced("Here are the teams.", &json!({"teams": teams})))
    }

    fn dispatch(&self, req: &ChatRequest) -> Reply {
        let user = req
            .messages
            .iter()
            .find(|m| m.role == ChatRole::User)
            .map(|m| m.content.as_str())
            .ok_or_else(|| bad("no user message"))?;
        if user.starts_with("You are a cricket analyst.") {
            return self.baseline(req, user);
        }
        let task = user
            .lines()
            .find_map(|l| l.strip_prefix("Task: "))
            .ok_or_else(|| bad("no task line"))?
            .trim();
        let input: Value = between(user, "```json\n", "\n```")
            .map(serde_json::from_str)
            .transpose()
            .map_err(|e| bad(format!("input block: {e}")))?
            .unwrap_or(Value::Null);
        match task {
            "researcher_odds" => self.odds(user, &input),
            "researcher_pitch" => self.pitch(user),
            "career_profiler" => self.career(&input),
            "form_assessor" => self.form(&input),
            "strategizer" => self.strategy(user, &input),
            "selector_propose" => self.propose(user, &input),
            "selector_fix" => self.fix(&input),
            "reviewer" => self.review(&input),
            "selector_revise" => self.revise(&input),
            "selector_name" => self.name(user, &input),
            other => Err(bad(format!("unknown task `{other}`"))),
        }
    }
}

impl ChatBackend for AnalystBackend {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let content = self.dispatch(request)?;
        Ok(ChatResponse {
            token_usage: TokenUsage {
                prompt: request.messages.iter().map(|m| m.content.split_whitespace().count() as u32).sum(),
                completion: content.split_whitespace().count() as u32,
            },
            content,
            model_used: format!("analyst:{}", request.model_tag),
            latency_ms: 0,
        })
    }
}
