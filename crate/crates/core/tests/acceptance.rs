//! Acceptance suite. Runs every criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use fancric::analytics::{
    dream_team, dream_team_from_base, ingest_entries, ks_normal_statistic, pick_frequencies, score_entries, summarize,
    wisdom_of_crowds_team, ContestEntrySet, IngestOptions, ScoreDistribution, SummaryOptions, Weighting,
};
use fancric::demo::{self, fixture_backend, fixtures_dir, DemoSet, FixtureSources};
use fancric::evaluation::{
    aggregate_report, is_win, run_ablation, AblationReport, BaselineGenerator, EvaluationRow, Evaluator,
    FanCricGenerator, ReportFormat, TeamGenerator, ABLATION_NS,
};
use fancric::llm::ModelConfig;
use fancric::model::{Batting, Bowling, FantasyTeam, Fielding, PlayerId, PlayerMatchPerformance, PlayerRole};
use fancric::pipeline::{call_budget, run_pipeline, PipelineConfig, PromptSet};
use fancric::points::Points;
use fancric::rules::{default_rules, validate_team, RulesSchema};
use fancric::scoring::{default_scoring, score_player, score_team};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Published tables

struct PublishedRow {
    points: f64,
    percentile: f64,
    c: u8,
    vc: u8,
    p: u8,
    win: bool,
}

struct PublishedTable {
    rows: Vec<PublishedRow>,
    avg_points: f64,
    avg_percentile: f64,
    avg_c: f64,
    avg_vc: f64,
    avg_p: f64,
    win_pct: f64,
}

fn published_source() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../paper.md")
}

/// `507(47.8)` into (507, 47.8).
fn points_and_pct(field: &str) -> Option<(f64, f64)> {
    let (a, b) = field.trim().split_once('(')?;
    Some((a.trim().parse().ok()?, b.trim().trim_end_matches(')').parse().ok()?))
}

fn parse_table(text: &str, caption: &str) -> Result<PublishedTable, String> {
    let start = text.find(caption).ok_or_else(|| format!("`{caption}` not found"))?;
    let mut rows = Vec::new();
    for line in text[start..].lines().skip(1) {
        let fields: Vec<&str> = line.split('\t').map(str::trim).filter(|f| !f.is_empty()).collect();
        let Some(pos) = fields.iter().position(|f| points_and_pct(f).is_some()) else {
            continue;
        };
        let (points, percentile) = points_and_pct(fields[pos]).unwrap();
        let num = |i: usize| -> Result<f64, String> {
            fields
                .get(pos + i)
                .and_then(|f| f.trim_end_matches('%').parse().ok())
                .ok_or_else(|| format!("bad row `{line}`"))
        };
        if line.starts_with("\tAverage") || line.starts_with("Average") || fields[0].starts_with("Average") {
            return Ok(PublishedTable {
                rows,
                avg_points: points,
                avg_percentile: percentile,
                avg_c: num(1)?,
                avg_vc: num(2)?,
                avg_p: num(3)?,
                win_pct: num(4)?,
            });
        }
        let win = match fields.last().copied() {
            Some("Y") => true,
            Some("N") => false,
            _ => return Err(format!("no Y/N in `{line}`")),
        };
        rows.push(PublishedRow {
            points,
            percentile,
            c: num(1)? as u8,
            vc: num(2)? as u8,
            p: num(3)? as u8,
            win,
        });
    }
    Err(format!("no average line after `{caption}`"))
}

fn published_tables() -> Result<(PublishedTable, PublishedTable), String> {
    let path = published_source();
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((parse_table(&text, "Table 1:")?, parse_table(&text, "Table 2:")?))
}

fn rows_of(t: &PublishedTable) -> Vec<EvaluationRow> {
    t.rows
        .iter()
        .enumerate()
        .map(|(i, r)| EvaluationRow {
            team_label: format!("row {}", i + 1),
            total_points: r.points,
            percentile: r.percentile,
            c_in_dt: r.c,
            vc_in_dt: r.vc,
            players_in_dt: r.p,
            win: is_win(r.percentile, 33.3),
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let (t1, t2) = published_tables()?;
    let mut notes = Vec::new();
    // Expected values: (points, players, c, vc, win %).
    for (name, table, expect) in [("table 1", &t1, (512.9, 6.4, 0.1, 0.1, 70.0)), ("table 2", &t2, (528.55, 6.1, 0.1, 0.1, 80.0))] {
        ensure(table.rows.len() == 10, || format!("{name}: {} rows parsed", table.rows.len()))?;
        let a = aggregate_report(&rows_of(table)).map_err(|e| e.to_string())?;
        ensure((a.points_avg - expect.0).abs() <= 0.005, || format!("{name}: points_avg {}", a.points_avg))?;
        ensure((a.players_in_dt_avg - expect.1).abs() < 1e-9, || format!("{name}: players_in_dt_avg {}", a.players_in_dt_avg))?;
        ensure((a.c_in_dt_avg - expect.2).abs() < 1e-9, || format!("{name}: c_avg {}", a.c_in_dt_avg))?;
        ensure((a.vc_in_dt_avg - expect.3).abs() < 1e-9, || format!("{name}: vc_avg {}", a.vc_in_dt_avg))?;
        ensure((a.win_pct - expect.4).abs() < 1e-9, || format!("{name}: win_pct {}", a.win_pct))?;
        // The published average line agrees with the same numbers at its printed precision.
        ensure((a.points_avg - table.avg_points).abs() <= 0.005, || format!("{name}: published average {}", table.avg_points))?;
        ensure((a.percentile_avg - table.avg_percentile).abs() <= 0.05, || format!("{name}: percentile avg {} vs {}", a.percentile_avg, table.avg_percentile))?;
        ensure(
            (a.c_in_dt_avg - table.avg_c).abs() < 1e-9
                && (a.vc_in_dt_avg - table.avg_vc).abs() < 1e-9
                && (a.players_in_dt_avg - table.avg_p).abs() < 1e-9
                && (a.win_pct - table.win_pct).abs() < 1e-9,
            || format!("{name}: published hit-rate/win averages disagree"),
        )?;
        notes.push(format!("{name} {:.2}/{:.1}/{:.1}/{:.1}/{:.0}%", a.points_avg, a.players_in_dt_avg, a.c_in_dt_avg, a.vc_in_dt_avg, a.win_pct));
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{} in {elapsed:?}", notes.join(", ")))
}

fn criterion_2() -> Outcome {
    let (t1, t2) = published_tables()?;
    let mut pairs = 0;
    for r in t1.rows.iter().chain(&t2.rows) {
        ensure(is_win(r.percentile, 33.3) == r.win, || format!("{} classified {}", r.percentile, !r.win))?;
        pairs += 1;
    }
    ensure(pairs == 20, || format!("{pairs} pairs parsed"))?;
    for (p, w) in [(27.9, false), (39.9, true), (14.7, false), (96.3, true)] {
        ensure(is_win(p, 33.3) == w, || format!("{p} misclassified"))?;
    }
    Ok(format!("{pairs} pairs reproduced at floor 33.3"))
}

// ---------------------------------------------------------------------------
// Dream Team

fn random_base(rng: &mut impl Rng, players: &[fancric::model::Player]) -> BTreeMap<PlayerId, Points> {
    players
        .iter()
        .map(|p| (p.player_id.clone(), Points::from_quarters(2 * rng.random_range(-20..=300i64))))
        .collect()
}

/// Random players with at least two of each role, so most pools admit a lineup.
fn mixed_players(rng: &mut impl Rng, n: usize) -> Vec<fancric::model::Player> {
    let mut players = random_players(rng, n);
    let mut roles: Vec<PlayerRole> = ROLES.iter().flat_map(|r| [*r, *r]).collect();
    roles.extend((roles.len()..n).map(|_| ROLES[rng.random_range(0..4)]));
    roles.shuffle(rng);
    for (p, r) in players.iter_mut().zip(roles) {
        p.role = r;
    }
    players
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let schema = default_scoring();
    let (ch, vh) = (schema.captain_multiplier.halves(), schema.vice_captain_multiplier.halves());
    let mut feasible = 0;
    let mut pools = 0;
    while feasible < 50 && pools < 200 {
        let i = pools;
        pools += 1;
        let players = mixed_players(&mut rng, 14);
        let rules = if i % 2 == 0 { default_rules() } else { random_rules(&mut rng) };
        let mut pool = pool_of(&players);
        let mut xi_set = None;
        if i % 3 == 0 {
            let mut ids: Vec<PlayerId> = players.iter().map(|p| p.player_id.clone()).collect();
            ids.shuffle(&mut rng);
            ids.truncate(13);
            pool = pool.with_playing_xi(ids.clone());
            xi_set = Some(ids.into_iter().collect::<BTreeSet<_>>());
        }
        let base = random_base(&mut rng, &players);
        let oracle = brute_force_best(&players, &base, &rules, xi_set.as_ref(), ch, vh);
        let got = dream_team_from_base(&pool, &base, &rules, &schema);
        match (oracle, got) {
            (None, Err(_)) => {}
            (None, Ok(dt)) => return Err(format!("pool {i}: solver found {} on an infeasible pool", dt.score.total)),
            (Some(best), Err(e)) => return Err(format!("pool {i}: oracle best {best}q, solver failed: {e}")),
            (Some(best), Ok(dt)) => {
                feasible += 1;
                let members: Vec<&fancric::model::Player> =
                    dt.team.players.iter().map(|id| players.iter().find(|p| p.player_id == *id).unwrap()).collect();
                let v = naive_violations(&members, &dt.team.captain, &dt.team.vice_captain, &rules, xi_set.as_ref());
                ensure(v.is_empty(), || format!("pool {i}: solver team breaks {v:?}"))?;
                ensure(dt.score.total.quarters() == best, || format!("pool {i}: solver {} vs oracle {}q", dt.score.total, best))?;
            }
        }
    }
    ensure(feasible >= 50, || format!("only {feasible} feasible pools"))?;

    // A full 22-player match.
    let mut players = Vec::new();
    for (side, tag) in ["HOME", "AWAY"].iter().zip(["h", "a"]) {
        let roles = [
            PlayerRole::WicketKeeper,
            PlayerRole::WicketKeeper,
            PlayerRole::Batter,
            PlayerRole::Batter,
            PlayerRole::Batter,
            PlayerRole::Batter,
            PlayerRole::AllRounder,
            PlayerRole::AllRounder,
            PlayerRole::Bowler,
            PlayerRole::Bowler,
            PlayerRole::Bowler,
        ];
        for (j, role) in roles.into_iter().enumerate() {
            players.push(player(&format!("{tag}{j:02}"), role, side, rng.random_range(14..=21)));
        }
    }
    let pool = pool_of(&players);
    let perfs: BTreeMap<PlayerId, PlayerMatchPerformance> =
        players.iter().map(|p| (p.player_id.clone(), random_performance(&mut rng, &p.player_id))).collect();
    let rules = default_rules();
    let started = Instant::now();
    let dt = dream_team(&pool, &perfs, &rules, &schema).map_err(|e| e.to_string())?;
    let solve = started.elapsed();
    ensure(solve < Duration::from_secs(10), || format!("22-player solve took {solve:?}"))?;
    let mut beaten = 0;
    let mut margin = i64::MAX;
    for _ in 0..10_000 {
        let t = random_valid_team(&mut rng, &players, &rules, None).ok_or("could not sample a valid entry")?;
        let s = score_team(&t, &perfs, &pool, &schema).map_err(|e| e.to_string())?.total;
        ensure(s <= dt.score.total, || format!("random entry scores {s} above Dream Team {}", dt.score.total))?;
        margin = margin.min((dt.score.total - s).quarters());
        beaten += 1;
    }
    Ok(format!(
        "{feasible}/{pools} feasible 14-player pools match brute force; 22-player solve {solve:?}, beats {beaten} random entries (closest gap {})",
        Points::from_quarters(margin)
    ))
}

// ---------------------------------------------------------------------------
// Rules oracle

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = 0u64;
    let mut valid = 0u64;
    for i in 0..20 {
        let players = random_players(&mut rng, 16);
        let rules: RulesSchema = if i == 0 { default_rules() } else { random_rules(&mut rng) };
        let mut pool = pool_of(&players);
        let mut xi = None;
        if i % 2 == 1 {
            let mut ids: Vec<PlayerId> = players.iter().map(|p| p.player_id.clone()).collect();
            ids.shuffle(&mut rng);
            ids.truncate(14);
            pool = pool.with_playing_xi(ids.clone());
            xi = Some(ids.into_iter().collect::<BTreeSet<_>>());
        }
        let mut subsets = Vec::new();
        for_each_subset(16, 11, &mut |idx| subsets.push(idx.to_vec()));
        let result: Result<(u64, u64), String> = subsets
            .par_iter()
            .map(|idx| {
                let members: Vec<&fancric::model::Player> = idx.iter().map(|&j| &players[j]).collect();
                let outsider = (0..16).find(|j| !idx.contains(j)).map(|j| &players[j].player_id).unwrap();
                let mut cands: Vec<&PlayerId> = members.iter().map(|p| &p.player_id).collect();
                cands.push(outsider);
                let mut n = 0;
                let mut ok = 0;
                for c in &cands {
                    for v in &cands {
                        let team = FantasyTeam::new(members.iter().map(|p| p.player_id.clone()), (*c).clone(), (*v).clone());
                        let report = validate_team(&team, &pool, &rules).map_err(|e| e.to_string())?;
                        let got: BTreeSet<_> = report.codes().into_iter().collect();
                        let want = naive_violations(&members, c, v, &rules, xi.as_ref());
                        if got != want {
                            return Err(format!("pool {i}: {idx:?} C {c} VC {v}: engine {got:?}, oracle {want:?}"));
                        }
                        if report.ok != want.is_empty() {
                            return Err(format!("pool {i}: ok flag disagrees"));
                        }
                        n += 1;
                        ok += u64::from(report.ok);
                    }
                }
                Ok((n, ok))
            })
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)));
        let (n, ok) = result?;
        checks += n;
        valid += ok;
    }
    ensure(valid > 0, || "no valid lineup in any pool".into())?;
    Ok(format!("{checks} lineups agree across 20 pools/schemas ({valid} valid)"))
}

// ---------------------------------------------------------------------------
// Analytics

struct Synthetic {
    lines: Vec<(Vec<usize>, usize, usize)>,
    players: Vec<fancric::model::Player>,
    base: BTreeMap<PlayerId, Points>,
}

fn synthetic_contest(rng: &mut impl Rng, entries: usize) -> Synthetic {
    let players = random_players(rng, 22);
    let base = random_base(rng, &players);
    let mut lines: Vec<(Vec<usize>, usize, usize)> = Vec::with_capacity(entries);
    while lines.len() < entries {
        if !lines.is_empty() && rng.random_bool(0.2) {
            let (mut m, c, v) = lines[rng.random_range(0..lines.len())].clone();
            m.shuffle(rng);
            lines.push((m, c, v));
            continue;
        }
        // Skewed picks so pick counts differ clearly.
        let mut idx: Vec<usize> = (0..22).collect();
        let keys: Vec<u32> = (0..22u32).map(|i| rng.random_range(0..(60 + 4 * i))).collect();
        idx.sort_by_key(|i| (keys[*i], *i));
        let m: Vec<usize> = idx[..11].to_vec();
        let c = m[rng.random_range(0..3)];
        let mut v = m[rng.random_range(0..5)];
        while v == c {
            v = m[rng.random_range(0..11)];
        }
        lines.push((m, c, v));
    }
    Synthetic { lines, players, base }
}

fn entry_text(s: &Synthetic) -> String {
    let mut t = String::new();
    for (i, (m, c, v)) in s.lines.iter().enumerate() {
        let ids: Vec<&str> = m.iter().map(|j| s.players[*j].player_id.as_str()).collect();
        t.push_str(&format!("e{i},{},{},{}\n", ids.join(";"), s.players[*c].player_id, s.players[*v].player_id));
    }
    t
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let schema = default_scoring();
    let syn = synthetic_contest(&mut rng, 10_000);
    let set = ingest_entries(entry_text(&syn).as_bytes(), &IngestOptions::default()).map_err(|e| e.to_string())?;
    ensure(set.raw_count() == 10_000, || format!("raw count {}", set.raw_count()))?;

    // Oracle totals per raw line and per distinct team.
    let q = |j: usize| syn.base[&syn.players[j].player_id].quarters();
    let mut raw_totals = Vec::new();
    let mut distinct: BTreeMap<(Vec<usize>, usize, usize), i64> = BTreeMap::new();
    for (m, c, v) in &syn.lines {
        let total = m.iter().map(|&j| q(j)).sum::<i64>() + q(*c) + q(*v) / 2;
        raw_totals.push(total);
        let mut key = m.clone();
        key.sort();
        distinct.insert((key, *c, *v), total);
    }
    ensure(set.unique_count() == distinct.len(), || format!("unique {} vs oracle {}", set.unique_count(), distinct.len()))?;
    let unique_totals: Vec<i64> = distinct.values().copied().collect();

    let base = syn.base.clone();
    let points = score_entries(&set, &base, &schema).map_err(|e| e.to_string())?;
    for (weighting, totals) in [(Weighting::Multiplicity, &raw_totals), (Weighting::Unique, &unique_totals)] {
        let n = totals.len() as f64;
        let mut sorted = totals.clone();
        sorted.sort();
        let dist = ScoreDistribution::from_entries(&set, &points, weighting).map_err(|e| e.to_string())?;
        // Every distinct total, its neighbours and the extremes.
        let mut probes: BTreeSet<i64> = sorted.iter().flat_map(|t| [t - 1, *t, t + 1]).collect();
        probes.insert(sorted[0] - 400);
        probes.insert(sorted[sorted.len() - 1] + 400);
        for p in probes {
            let below = sorted.partition_point(|x| *x < p) as f64;
            let want = 100.0 * below / n;
            let got = dist.percentile_rank(Points::from_quarters(p)).map_err(|e| e.to_string())?;
            ensure(close(got, want), || format!("{weighting:?} percentile at {p}q: {got} vs {want}"))?;
        }
        let s = summarize(&set, &points, &SummaryOptions { bin_width: Points::whole(25), weighting }).map_err(|e| e.to_string())?;
        let xs: Vec<f64> = totals.iter().map(|t| *t as f64 / 4.0).collect();
        let mean = xs.iter().sum::<f64>() / n;
        let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        let median = sorted[(sorted.len() - 1) / 2] as f64 / 4.0;
        ensure(close(s.mean, mean), || format!("{weighting:?} mean {} vs {mean}", s.mean))?;
        ensure(close(s.std, std), || format!("{weighting:?} std {} vs {std}", s.std))?;
        ensure(close(s.median, median), || format!("{weighting:?} median {} vs {median}", s.median))?;
        ensure(s.n as usize == totals.len(), || format!("{weighting:?} n {}", s.n))?;
    }

    // Pick frequencies by tally.
    let freqs = pick_frequencies(&set);
    let mut tally: BTreeMap<&PlayerId, (u64, u64, u64)> = BTreeMap::new();
    for (m, c, v) in &syn.lines {
        for &j in m {
            tally.entry(&syn.players[j].player_id).or_default().0 += 1;
        }
        tally.entry(&syn.players[*c].player_id).or_default().1 += 1;
        tally.entry(&syn.players[*v].player_id).or_default().2 += 1;
    }
    for (id, (t, c, v)) in &tally {
        let got = freqs.get(id);
        ensure(got.in_team == *t && got.as_captain == *c && got.as_vice_captain == *v, || format!("pick counts for {id}"))?;
    }

    // Wisdom of crowds from the tallies: top captain, top other vice-captain, top nine others.
    let rank = |key: &dyn Fn(&(u64, u64, u64)) -> u64| {
        let mut ids: Vec<(&PlayerId, u64)> = syn.players.iter().map(|p| (&p.player_id, tally.get(&p.player_id).map(key).unwrap_or(0))).collect();
        ids.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ids.into_iter().map(|(id, _)| id.clone()).collect::<Vec<_>>()
    };
    let captain = rank(&|t| t.1)[0].clone();
    let vice = rank(&|t| t.2).into_iter().find(|id| *id != captain).unwrap();
    let mut members = vec![captain.clone(), vice.clone()];
    members.extend(rank(&|t| t.0).into_iter().filter(|id| *id != captain && *id != vice).take(9));
    let pool = pool_of(&syn.players);
    // Loose rules so the raw crowd pick stands.
    let loose = fancric::rules::parse_rules(
        r#"{"total_players": 11, "role_bounds": {"WK": {"min": 0, "max": 11}, "BAT": {"min": 0, "max": 11},
            "AR": {"min": 0, "max": 11}, "BOWL": {"min": 0, "max": 11}},
            "max_per_franchise": 10, "credit_budget": 500}"#,
    )
    .map_err(|e| e.to_string())?;
    let woc = wisdom_of_crowds_team(&freqs, &loose, &pool).map_err(|e| e.to_string())?;
    let oracle_members: Vec<&fancric::model::Player> = members.iter().map(|id| pool.get(id).unwrap()).collect();
    if naive_violations(&oracle_members, &captain, &vice, &loose, None).is_empty() {
        ensure(woc.captain == captain && woc.vice_captain == vice, || "crowd captaincy differs".into())?;
        let a: BTreeSet<_> = woc.players.iter().collect();
        let b: BTreeSet<_> = members.iter().collect();
        ensure(a == b, || "crowd members differ".into())?;
    } else {
        return Err("crowd pick unexpectedly breaks the loose rules".into());
    }

    // 1M-row dedup with planted duplicates.
    let (text, unique) = planted_stream(&mut rng, 1_000_000, 150_000);
    let started = Instant::now();
    let big = ingest_entries(text.as_bytes(), &IngestOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure(big.raw_count() == 1_000_000, || format!("raw {}", big.raw_count()))?;
    ensure(big.unique_count() == unique, || format!("unique {} vs planted {unique}", big.unique_count()))?;
    ensure(elapsed < Duration::from_secs(60), || format!("dedup took {elapsed:?}"))?;
    Ok(format!(
        "10k-entry oracles agree ({} distinct); 1M rows dedup to {unique} in {elapsed:?}",
        distinct.len()
    ))
}

/// `rows` entry lines holding exactly `unique` distinct teams, duplicates reordered.
fn planted_stream(rng: &mut impl Rng, rows: usize, unique: usize) -> (String, usize) {
    let ids: Vec<String> = (0..30).map(|i| format!("q{i:02}")).collect();
    let mut seen: HashSet<(Vec<u8>, u8, u8)> = HashSet::new();
    let mut teams: Vec<(Vec<u8>, u8, u8)> = Vec::with_capacity(unique);
    while teams.len() < unique {
        let mut idx: Vec<u8> = (0..30).collect();
        idx.shuffle(rng);
        idx.truncate(11);
        let c = idx[0];
        let v = idx[1];
        let mut key = idx.clone();
        key.sort();
        if seen.insert((key, c, v)) {
            teams.push((idx, c, v));
        }
    }
    let mut order: Vec<usize> = (0..unique).chain((unique..rows).map(|_| rng.random_range(0..unique))).collect();
    order.shuffle(rng);
    let mut text = String::with_capacity(rows * 60);
    for (line, &t) in order.iter().enumerate() {
        let (m, c, v) = &teams[t];
        let mut m = m.clone();
        m.shuffle(rng);
        let members: Vec<&str> = m.iter().map(|j| ids[*j as usize].as_str()).collect();
        text.push_str(&format!("r{line},{},{},{}\n", members.join(";"), ids[*c as usize], ids[*v as usize]));
    }
    (text, unique)
}

// ---------------------------------------------------------------------------
// KS

fn criterion_6() -> Outcome {
    let n = 1000;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let quantiles: Vec<(f64, u64)> = (1..=n).map(|i| (normal.inverse_cdf((i as f64 - 0.5) / n as f64), 1)).collect();
    let base = ks_normal_statistic(&quantiles).map_err(|e| e.to_string())?;
    ensure(base < 0.02, || format!("normal quantiles give {base}"))?;
    // Log of uniform quantiles: a long left tail.
    let skewed: Vec<(f64, u64)> = (1..=n).map(|i| (((i as f64 - 0.5) / n as f64).ln(), 1)).collect();
    let skew = ks_normal_statistic(&skewed).map_err(|e| e.to_string())?;
    ensure(skew >= 5.0 * base, || format!("skewed {skew} vs baseline {base}"))?;
    Ok(format!("normal quantiles {base:.5}, left-skewed {skew:.4} ({:.0}x)", skew / base))
}

// ---------------------------------------------------------------------------
// Scoring

fn perf(bat: (u32, u32, u32, u32, bool), bowl: (u32, u32, u32, u32, u32), field: (u32, u32, u32, u32)) -> PlayerMatchPerformance {
    PlayerMatchPerformance {
        player_id: PlayerId::new("x"),
        played: true,
        batting: Batting {
            runs: bat.0,
            balls_faced: bat.1,
            fours: bat.2,
            sixes: bat.3,
            dismissed: bat.4,
            dismissal_kind: None,
        },
        bowling: Bowling {
            legal_balls: bowl.0,
            maidens: bowl.1,
            runs_conceded: bowl.2,
            wickets: bowl.3,
            bowled_or_lbw_count: bowl.4,
        },
        fielding: Fielding {
            catches: field.0,
            stumpings: field.1,
            runouts_direct: field.2,
            runouts_indirect: field.3,
        },
    }
}

/// Stat lines scored by hand under the default table.
fn hand_scored() -> Vec<(&'static str, PlayerRole, PlayerMatchPerformance, f64)> {
    use PlayerRole::*;
    const NB: (u32, u32, u32, u32, bool) = (0, 0, 0, 0, false);
    const NW: (u32, u32, u32, u32, u32) = (0, 0, 0, 0, 0);
    const NF: (u32, u32, u32, u32) = (0, 0, 0, 0);
    let mut dnp = perf(NB, NW, NF);
    dnp.played = false;
    vec![
        ("did not play", Batter, dnp, 0.0),
        ("golden duck", Batter, perf((0, 1, 0, 0, true), NW, NF), 2.0),
        ("bowler duck", Bowler, perf((0, 2, 0, 0, true), NW, NF), 4.0),
        ("ten-ball duck", AllRounder, perf((0, 10, 0, 0, true), NW, NF), -4.0),
        ("30 off 20", Batter, perf((30, 20, 2, 1, true), NW, NF), 46.0),
        ("49 off 35", Batter, perf((49, 35, 5, 1, true), NW, NF), 66.0),
        ("50 off 50", WicketKeeper, perf((50, 50, 4, 0, true), NW, NF), 66.0),
        ("hundred off 58", Batter, perf((100, 58, 8, 5, false), NW, NF), 144.0),
        ("bowler cameo", Bowler, perf((20, 12, 1, 1, false), NW, NF), 27.0),
        ("12 off 20", Batter, perf((12, 20, 0, 0, true), NW, NF), 14.0),
        ("11 off 20", Batter, perf((11, 20, 0, 0, true), NW, NF), 11.0),
        ("2 for 20", Bowler, perf(NB, (24, 0, 20, 2, 1), NF), 66.0),
        ("3 for 19 with a maiden", Bowler, perf(NB, (24, 1, 19, 3, 2), NF), 117.0),
        ("economy exactly 7", Bowler, perf(NB, (24, 0, 28, 0, 0), NF), 4.0),
        ("economy exactly 10", Bowler, perf(NB, (18, 0, 30, 1, 0), NF), 27.0),
        ("economy 12", Bowler, perf(NB, (12, 0, 24, 0, 0), NF), -2.0),
        ("one expensive over", Bowler, perf(NB, (6, 0, 20, 0, 0), NF), 4.0),
        ("three catches and two run-outs", AllRounder, perf(NB, NW, (3, 0, 1, 1)), 50.0),
        ("two stumpings", WicketKeeper, perf(NB, NW, (1, 2, 0, 0)), 36.0),
        ("five-for and a cameo", AllRounder, perf((15, 9, 1, 0, false), (24, 0, 30, 5, 3), NF), 185.0),
    ]
}

fn criterion_7() -> Outcome {
    let schema = default_scoring();
    let fixtures = hand_scored();
    ensure(fixtures.len() == 20, || format!("{} fixtures", fixtures.len()))?;
    for (name, role, p, want) in &fixtures {
        let got = score_player(p, *role, &schema).map_err(|e| format!("{name}: {e}"))?;
        ensure(got == Points::from_decimal(*want).unwrap(), || format!("{name}: scored {got}, expected {want}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let players = random_players(&mut rng, 22);
    let pool = pool_of(&players);
    let half = default_scoring().captain_multiplier.halves() - default_scoring().vice_captain_multiplier.halves();
    for i in 0..1000 {
        let perfs: BTreeMap<PlayerId, PlayerMatchPerformance> =
            players.iter().map(|p| (p.player_id.clone(), random_performance(&mut rng, &p.player_id))).collect();
        let mut ids: Vec<PlayerId> = players.iter().map(|p| p.player_id.clone()).collect();
        ids.shuffle(&mut rng);
        ids.truncate(11);
        let t = FantasyTeam::new(ids.clone(), ids[0].clone(), ids[1].clone());
        let swapped = FantasyTeam::new(ids.clone(), ids[1].clone(), ids[0].clone());
        let a = score_team(&t, &perfs, &pool, &schema).map_err(|e| e.to_string())?;
        let b = score_team(&swapped, &perfs, &pool, &schema).map_err(|e| e.to_string())?;
        let bc = score_player(&perfs[&ids[0]], pool.role_of(&ids[0]).unwrap(), &schema).unwrap();
        let bv = score_player(&perfs[&ids[1]], pool.role_of(&ids[1]).unwrap(), &schema).unwrap();
        let want = (bc - bv).quarters() * half / 2;
        ensure((a.total - b.total).quarters() == want, || format!("team {i}: delta {} vs {}", a.total - b.total, Points::from_quarters(want)))?;
    }
    Ok("20 hand-scored lines exact; C/VC swap delta holds on 1000 teams".into())
}

// ---------------------------------------------------------------------------
// Pipeline and ablation under mocks

fn run_cli(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["fancric"];
    full.extend_from_slice(args);
    let code = fancric::cli::run(full, &mut out, &mut err);
    (code, out, String::from_utf8_lossy(&err).into_owned())
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for k in 0..2 {
        let tr = dir.path().join(format!("run{k}.jsonl"));
        let (code, out, err) = run_cli(&["generate", "--n", "10", "--format", "json", "--save-transcript", tr.to_str().unwrap()]);
        ensure(code == 0, || format!("generate exited {code}: {err}"))?;
        runs.push((out, std::fs::read(&tr).map_err(|e| e.to_string())?));
    }
    ensure(runs[0].0 == runs[1].0, || "team output differs between runs".into())?;
    ensure(runs[0].1 == runs[1].1, || "transcripts differ between runs".into())?;

    let v: serde_json::Value = serde_json::from_slice(&runs[0].0).map_err(|e| e.to_string())?;
    let teams: Vec<FantasyTeam> = serde_json::from_value(v["teams"].clone()).map_err(|e| e.to_string())?;
    let calls = v["llm_calls"].as_u64().ok_or("no llm_calls")? as usize;
    let cfg = PipelineConfig::default().with_n(10);
    let budget = call_budget(10, cfg.max_review_iters, cfg.team_attempts);
    ensure(teams.len() == 10, || format!("{} teams", teams.len()))?;
    ensure(calls <= budget, || format!("{calls} calls over budget {budget}"))?;

    let demo = DemoSet::committed().map_err(|e| e.to_string())?;
    let xi_pool = demo.pool.clone().with_playing_xi(demo.context.playing_xi_ids().unwrap());
    for (i, t) in teams.iter().enumerate() {
        let r = validate_team(t, &xi_pool, &demo.rules).map_err(|e| e.to_string())?;
        ensure(r.ok, || format!("team {} breaks {:?}", i + 1, r.codes()))?;
    }

    let sources = FixtureSources::new(&fixtures_dir());
    let result = run_pipeline(&cfg, demo.context.clone(), &demo.pool, &demo.rules, &sources.with_stats(&demo.stats), &fixture_backend(), &PromptSet::embedded())
        .map_err(|e| e.to_string())?;
    ensure(result.teams == teams, || "library and CLI runs disagree".into())?;
    let stoinis = PlayerId::new("lsg-stoinis");
    let career = result.blackboard_final.career_profiles.value().and_then(|m| m.get(&stoinis)).map(|p| p.career_rating);
    let form = result.blackboard_final.form.value().and_then(|m| m.get(&stoinis)).map(|f| f.form_rating);
    ensure(career == Some(7) && form == Some(8), || format!("Stoinis career {career:?}, form {form:?}"))?;
    Ok(format!("byte-identical runs, 10 valid teams, {calls}/{budget} calls, Stoinis career 7 form 8"))
}

fn criterion_9() -> Outcome {
    let demo = DemoSet::committed().map_err(|e| e.to_string())?;
    let sources = FixtureSources::new(&fixtures_dir());
    let llm = fixture_backend();
    let prompts = PromptSet::embedded();
    let fancric = FanCricGenerator {
        config: PipelineConfig::default(),
        context: &demo.context,
        pool: &demo.pool,
        rules: &demo.rules,
        sources: sources.with_stats(&demo.stats),
        llm: &llm,
        prompts: &prompts,
    };
    let baseline = BaselineGenerator {
        context: &demo.context,
        pool: &demo.pool,
        rules: &demo.rules,
        llm: &llm,
        models: ModelConfig::default(),
        prompts: &prompts,
        team_attempts: 3,
    };
    let xi_pool = demo.pool.clone().with_playing_xi(demo.context.playing_xi_ids().unwrap());
    let ev = Evaluator::new(&xi_pool, &demo.perfs, &demo.rules, &demo.scoring, &demo.entries, Weighting::Multiplicity, 33.3)
        .map_err(|e| e.to_string())?;
    let generators: [&dyn TeamGenerator; 2] = [&fancric, &baseline];
    let report = run_ablation(&ABLATION_NS, &generators, &ev).map_err(|e| e.to_string())?;

    ensure(report.rows.len() == 5, || format!("{} rows", report.rows.len()))?;
    ensure(report.generators == ["fancric", "baseline"], || format!("generators {:?}", report.generators))?;

    // Field totals expanded per submitted entry, for percentile recomputation.
    let field = expanded_field(&demo.entries, &demo)?;
    let dt = ev.dream_team().team.clone();
    let mut cells = 0;
    for (row, n) in report.rows.iter().zip(ABLATION_NS) {
        ensure(row.n == n && row.cells.len() == 2, || format!("row n={} has {} cells", row.n, row.cells.len()))?;
        for (cell, generator) in row.cells.iter().zip(generators) {
            let teams = generator.generate(n).map_err(|e| e.to_string())?;
            ensure(teams.len() == n && cell.rows.len() == n, || format!("{} n={n}: {} rows", cell.generator, cell.rows.len()))?;
            let mut pts = Vec::new();
            let mut pct = Vec::new();
            let (mut c_hits, mut vc_hits, mut p_hits, mut wins) = (0.0, 0.0, 0.0, 0.0);
            for (t, r) in teams.iter().zip(&cell.rows) {
                let total = score_team(t, &demo.perfs, &demo.pool, &demo.scoring).map_err(|e| e.to_string())?.total;
                let below = field.partition_point(|x| *x < total.quarters());
                let percentile = 100.0 * below as f64 / field.len() as f64;
                let c = u8::from(t.captain == dt.captain);
                let vc = u8::from(t.vice_captain == dt.vice_captain);
                let p = t.players.iter().filter(|id| dt.players.contains(id)).count() as u8;
                ensure(
                    close(r.total_points, total.to_f64()) && close(r.percentile, percentile) && r.c_in_dt == c && r.vc_in_dt == vc && r.players_in_dt == p,
                    || format!("{} n={n}: row {r:?} vs recomputed {total}/{percentile}/{c}/{vc}/{p}", cell.generator),
                )?;
                pts.push(total.to_f64());
                pct.push(percentile);
                c_hits += c as f64;
                vc_hits += vc as f64;
                p_hits += p as f64;
                wins += f64::from(u8::from(percentile >= 33.3));
            }
            let nf = n as f64;
            let want = [
                pts.iter().sum::<f64>() / nf,
                pct.iter().sum::<f64>() / nf,
                (c_hits / nf + vc_hits / nf) / 2.0,
                p_hits / nf,
                100.0 * wins / nf,
                pct.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ];
            let got = AblationReport::metric_values(&cell.aggregate);
            for (k, (g, w)) in got.iter().zip(want).enumerate() {
                ensure((g - w).abs() <= 1e-9, || format!("{} n={n} {}: {g} vs {w}", cell.generator, AblationReport::METRICS[k]))?;
            }
            cells += 1;
        }
    }
    let csv = report.render(ReportFormat::Csv);
    let data_lines = csv.lines().skip(1).count();
    ensure(data_lines == 10, || format!("CSV has {data_lines} data lines"))?;
    ensure(csv.lines().all(|l| l.split(',').count() == 8), || "CSV rows are not n, generator and 6 metrics".into())?;
    Ok(format!("5 rows x 6 metrics x 2 generators; {cells} cells match recomputation"))
}

fn expanded_field(entries: &ContestEntrySet, demo: &DemoSet) -> Result<Vec<i64>, String> {
    let mut out = Vec::new();
    let mut cache: HashMap<PlayerId, i64> = HashMap::new();
    for id in demo.pool.ids() {
        let q = match demo.perfs.get(id) {
            Some(p) => score_player(p, demo.pool.role_of(id).unwrap(), &demo.scoring).map_err(|e| e.to_string())?.quarters(),
            None => 0,
        };
        cache.insert(id.clone(), q);
    }
    for t in entries.unique() {
        let members: i64 = t.members().map(|id| cache[id]).sum();
        let total = members + cache[t.captain()] + cache[t.vice_captain()] / 2;
        out.extend(std::iter::repeat_n(total, t.multiplicity() as usize));
    }
    out.sort();
    Ok(out)
}

fn main() {
    let _ = demo::crate_dir();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("table aggregates", criterion_1),
        ("win classifier", criterion_2),
        ("dream team exactness", criterion_3),
        ("rules oracle", criterion_4),
        ("analytics oracles", criterion_5),
        ("KS sanity", criterion_6),
        ("scoring fixtures", criterion_7),
        ("pipeline determinism", criterion_8),
        ("ablation grid", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({secs:.2}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.2}s) {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
