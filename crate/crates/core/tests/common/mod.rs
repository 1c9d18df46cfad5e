//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use fancric::model::{
    Batting, BattingHand, Bowling, FantasyTeam, Fielding, FranchiseId, Player, PlayerId, PlayerMatchPerformance,
    PlayerPool, PlayerRole,
};
use fancric::points::{Credits, Points};
use fancric::rules::{parse_rules, PoolRestriction, RulesSchema, ViolationCode};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const ROLES: [PlayerRole; 4] = [PlayerRole::WicketKeeper, PlayerRole::Batter, PlayerRole::AllRounder, PlayerRole::Bowler];

pub fn player(id: &str, role: PlayerRole, franchise: &str, credit_halves: u32) -> Player {
    Player {
        player_id: PlayerId::new(id),
        name: id.to_uppercase(),
        role,
        franchise_id: FranchiseId::new(franchise),
        credit_cost: Credits::from_halves(credit_halves),
        batting_hand: BattingHand::default(),
        bowling_style: None,
        description: None,
    }
}

/// `n` players over two franchises with random roles and 7.0-10.5 credits.
pub fn random_players(rng: &mut impl Rng, n: usize) -> Vec<Player> {
    (0..n)
        .map(|i| {
            let role = ROLES[rng.random_range(0..4)];
            let franchise = if rng.random_bool(0.5) { "HOME" } else { "AWAY" };
            player(&format!("p{i:02}"), role, franchise, rng.random_range(14..=21))
        })
        .collect()
}

/// Role bounds, franchise cap and budget drawn at random, always internally consistent.
pub fn random_rules(rng: &mut impl Rng) -> RulesSchema {
    loop {
        let mut bounds = Vec::new();
        for code in ["WK", "BAT", "AR", "BOWL"] {
            let min = rng.random_range(0..=3u32);
            let max = min + rng.random_range(0..=4u32);
            bounds.push(format!("\"{code}\": {{\"min\": {min}, \"max\": {max}}}"));
        }
        let json = format!(
            "{{\"total_players\": 11, \"role_bounds\": {{{}}}, \"max_per_franchise\": {}, \"credit_budget\": {}, \"pool_restriction\": \"{}\"}}",
            bounds.join(", "),
            rng.random_range(6..=10u32),
            rng.random_range(170..=210u32) as f64 / 2.0,
            if rng.random_bool(0.5) { "PlayingXIOnly" } else { "FullSquad" },
        );
        if let Ok(r) = parse_rules(&json) {
            return r;
        }
    }
}

/// Every rule a lineup of distinct players breaks, computed from first principles.
pub fn naive_violations(
    members: &[&Player],
    captain: &PlayerId,
    vice: &PlayerId,
    rules: &RulesSchema,
    xi: Option<&BTreeSet<PlayerId>>,
) -> BTreeSet<ViolationCode> {
    let mut out = BTreeSet::new();
    if members.len() != rules.total_players as usize {
        out.insert(ViolationCode::CountViolation);
    }
    if !members.iter().any(|p| p.player_id == *captain) {
        out.insert(ViolationCode::CaptainViolation);
    }
    if !members.iter().any(|p| p.player_id == *vice) {
        out.insert(ViolationCode::ViceCaptainViolation);
    }
    if captain == vice {
        out.insert(ViolationCode::CaptainEqualsViceCaptain);
    }
    for role in ROLES {
        let n = members.iter().filter(|p| p.role == role).count() as u32;
        let b = rules.role_bounds[&role];
        if n < b.min || n > b.max {
            out.insert(ViolationCode::RoleBoundViolation);
        }
    }
    let mut per_franchise: BTreeMap<&str, u32> = BTreeMap::new();
    for p in members {
        *per_franchise.entry(p.franchise_id.as_str()).or_default() += 1;
    }
    if per_franchise.values().any(|n| *n > rules.max_per_franchise) {
        out.insert(ViolationCode::FranchiseQuotaViolation);
    }
    let halves: u32 = members.iter().map(|p| p.credit_cost.halves()).sum();
    if halves > rules.credit_budget.halves() {
        out.insert(ViolationCode::BudgetViolation);
    }
    if rules.pool_restriction == PoolRestriction::PlayingXIOnly {
        if let Some(xi) = xi {
            if members.iter().any(|p| !xi.contains(&p.player_id)) {
                out.insert(ViolationCode::PoolRestrictionViolation);
            }
        }
    }
    out
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Best total over every valid subset and every ordered C/VC pair, in quarter points.
/// Multipliers are passed in halves (2.0 = 4, 1.5 = 3).
pub fn brute_force_best(
    players: &[Player],
    base: &BTreeMap<PlayerId, Points>,
    rules: &RulesSchema,
    xi: Option<&BTreeSet<PlayerId>>,
    captain_halves: i64,
    vice_halves: i64,
) -> Option<i64> {
    let mut best: Option<i64> = None;
    let k = rules.total_players as usize;
    for_each_subset(players.len(), k, &mut |idx| {
        let members: Vec<&Player> = idx.iter().map(|&i| &players[i]).collect();
        let id0 = &members[0].player_id;
        let id1 = &members[1].player_id;
        if !naive_violations(&members, id0, id1, rules, xi).is_empty() {
            return;
        }
        let q: Vec<i64> = members.iter().map(|p| base[&p.player_id].quarters()).collect();
        let sum: i64 = q.iter().sum();
        for c in 0..k {
            for v in 0..k {
                if c == v {
                    continue;
                }
                // Base values sit on the half-point grid, so these divisions are exact.
                let total = sum + q[c] * (captain_halves - 2) / 2 + q[v] * (vice_halves - 2) / 2;
                if best.is_none_or(|b| total > b) {
                    best = Some(total);
                }
            }
        }
    });
    best
}

/// A random lineup that passes the naive checker, or `None` after many misses.
pub fn random_valid_team(
    rng: &mut impl Rng,
    players: &[Player],
    rules: &RulesSchema,
    xi: Option<&BTreeSet<PlayerId>>,
) -> Option<FantasyTeam> {
    let k = rules.total_players as usize;
    for _ in 0..10_000 {
        let mut picked: Vec<&Player> = players.choose_multiple(rng, k).collect();
        picked.sort_by(|a, b| a.player_id.cmp(&b.player_id));
        let c = picked[rng.random_range(0..k)].player_id.clone();
        let mut v = c.clone();
        while v == c {
            v = picked[rng.random_range(0..k)].player_id.clone();
        }
        if naive_violations(&picked, &c, &v, rules, xi).is_empty() {
            return Some(FantasyTeam::new(picked.iter().map(|p| p.player_id.clone()), c, v));
        }
    }
    None
}

/// A consistent random stat line for someone in the XI.
pub fn random_performance(rng: &mut impl Rng, id: &PlayerId) -> PlayerMatchPerformance {
    let fours = rng.random_range(0..=8u32);
    let sixes = rng.random_range(0..=6u32);
    let runs = 4 * fours + 6 * sixes + rng.random_range(0..=40u32);
    let balls_faced = if runs == 0 { rng.random_range(0..=6u32) } else { rng.random_range(runs / 3 + 1..=runs + 10) };
    let dismissed = rng.random_bool(0.6);
    let legal_balls = [0u32, 6, 12, 18, 24][rng.random_range(0..5)];
    let wickets = if legal_balls == 0 { 0 } else { rng.random_range(0..=4u32) };
    PlayerMatchPerformance {
        player_id: id.clone(),
        played: true,
        batting: Batting {
            runs,
            balls_faced,
            fours,
            sixes,
            dismissed,
            dismissal_kind: None,
        },
        bowling: Bowling {
            legal_balls,
            maidens: if legal_balls >= 6 { rng.random_range(0..=1u32) } else { 0 },
            runs_conceded: rng.random_range(0..=legal_balls * 2 + 1),
            wickets,
            bowled_or_lbw_count: rng.random_range(0..=wickets),
        },
        fielding: Fielding {
            catches: rng.random_range(0..=3u32),
            stumpings: rng.random_range(0..=1u32),
            runouts_direct: rng.random_range(0..=1u32),
            runouts_indirect: rng.random_range(0..=1u32),
        },
    }
}

pub fn pool_of(players: &[Player]) -> PlayerPool {
    PlayerPool::new(players.iter().cloned()).expect("ids are unique")
}

/// Deterministic xorshift stream for places that want plain integers without an RNG type.
pub struct Xorshift(pub u64);

impl Xorshift {
    pub fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
}
