//! Exact maximum-points lineup by subset enumeration.
//!
//! For a fixed set of eleven, the best captain is the top base scorer and the
//! best vice-captain the runner-up (the captain multiplier is at least the
//! vice-captain one), so only member subsets need enumerating. Subsets are
//! visited in lexicographic order of sorted ids and only strictly better
//! scores replace the incumbent, which makes ties resolve to the smallest
//! member list.

use std::collections::BTreeMap;

use serde::Serialize;

use super::AnalyticsError;
use crate::model::{FantasyTeam, PlayerId, PlayerMatchPerformance, PlayerPool, PlayerRole};
use crate::points::Points;
use crate::rules::{PoolRestriction, RulesError, RulesSchema};
use crate::scoring::{base_points_table, team_score_from_base, ScoringSchema, TeamScore};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DreamTeam {
    pub team: FantasyTeam,
    pub score: TeamScore,
}

struct Candidate {
    role: usize,
    franchise: usize,
    credits: u32,
    base: i64,
}

struct Search<'a> {
    cands: &'a [Candidate],
    total: usize,
    role_min: [usize; 4],
    role_max: [usize; 4],
    /// `role_left[i][r]` = candidates of role `r` at positions `>= i`.
    role_left: Vec<[usize; 4]>,
    max_per_franchise: usize,
    budget: u32,
    captain_halves: i64,
    vice_halves: i64,
    chosen: Vec<usize>,
    roles: [usize; 4],
    franchises: Vec<usize>,
    credits: u32,
    best: Option<(i64, Vec<usize>)>,
}

impl Search<'_> {
    fn evaluate(&mut self) {
        // Captain = first maximum in id order, vice = next best.
        let mut c: Option<usize> = None;
        let mut v: Option<usize> = None;
        for &i in &self.chosen {
            let b = self.cands[i].base;
            match c {
                None => c = Some(i),
                Some(ci) if b > self.cands[ci].base => {
                    v = c;
                    c = Some(i);
                }
                _ => match v {
                    None => v = Some(i),
                    Some(vi) if b > self.cands[vi].base => v = Some(i),
                    _ => {}
                },
            }
        }
        let (c, v) = (c.unwrap(), v.unwrap());
        let sum: i64 = self.chosen.iter().map(|&i| self.cands[i].base).sum();
        // Quarter-point totals times 2 keep the half-step multipliers exact.
        let score2 = 2 * sum
            + self.cands[c].base * (self.captain_halves - 2)
            + self.cands[v].base * (self.vice_halves - 2);
        if self.best.as_ref().is_none_or(|(s, _)| score2 > *s) {
            self.best = Some((score2, self.chosen.clone()));
        }
    }

    fn feasible_rest(&self, i: usize) -> bool {
        let need = self.total - self.chosen.len();
        if self.cands.len() - i < need {
            return false;
        }
        let mut deficit = 0;
        for r in 0..4 {
            let have = self.roles[r];
            if have + self.role_left[i][r] < self.role_min[r] {
                return false;
            }
            deficit += self.role_min[r].saturating_sub(have);
        }
        deficit <= need
    }

    fn dfs(&mut self, i: usize) {
        if self.chosen.len() == self.total {
            if (0..4).all(|r| self.roles[r] >= self.role_min[r]) {
                self.evaluate();
            }
            return;
        }
        if !self.feasible_rest(i) {
            return;
        }
        let c = &self.cands[i];
        if self.roles[c.role] < self.role_max[c.role]
            && self.franchises[c.franchise] < self.max_per_franchise
            && self.credits + c.credits <= self.budget
        {
            let (role, franchise, credits) = (c.role, c.franchise, c.credits);
            self.chosen.push(i);
            self.roles[role] += 1;
            self.franchises[franchise] += 1;
            self.credits += credits;
            self.dfs(i + 1);
            self.chosen.pop();
            self.roles[role] -= 1;
            self.franchises[franchise] -= 1;
            self.credits -= credits;
        }
        self.dfs(i + 1);
    }
}

/// Highest-scoring valid lineup given per-player base points.
pub fn dream_team_from_base(
    pool: &PlayerPool,
    base: &BTreeMap<PlayerId, Points>,
    rules: &RulesSchema,
    schema: &ScoringSchema,
) -> Result<DreamTeam, AnalyticsError> {
    let eligible: Vec<_> = pool
        .iter()
        .filter(|p| match (rules.pool_restriction, pool.playing_xi()) {
            (PoolRestriction::PlayingXIOnly, Some(xi)) => xi.contains(&p.player_id),
            _ => true,
        })
        .collect();
    let mut franchise_ix: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cands = Vec::with_capacity(eligible.len());
    for p in &eligible {
        let next = franchise_ix.len();
        let franchise = *franchise_ix.entry(p.franchise_id.as_str()).or_insert(next);
        let b = base
            .get(&p.player_id)
            .ok_or_else(|| AnalyticsError::MissingBase(p.player_id.clone()))?;
        cands.push(Candidate {
            role: p.role.index(),
            franchise,
            credits: p.credit_cost.halves(),
            base: b.quarters(),
        });
    }
    let mut role_left = vec![[0usize; 4]; cands.len() + 1];
    for i in (0..cands.len()).rev() {
        role_left[i] = role_left[i + 1];
        role_left[i][cands[i].role] += 1;
    }
    let mut role_min = [0; 4];
    let mut role_max = [0; 4];
    for r in PlayerRole::ALL {
        role_min[r.index()] = rules.bounds(r).min as usize;
        role_max[r.index()] = rules.bounds(r).max as usize;
    }
    let mut search = Search {
        cands: &cands,
        total: rules.total_players as usize,
        role_min,
        role_max,
        role_left,
        max_per_franchise: rules.max_per_franchise as usize,
        budget: rules.credit_budget.halves(),
        captain_halves: schema.captain_multiplier.halves(),
        vice_halves: schema.vice_captain_multiplier.halves(),
        chosen: Vec::with_capacity(rules.total_players as usize),
        roles: [0; 4],
        franchises: vec![0; franchise_ix.len()],
        credits: 0,
        best: None,
    };
    if search.total >= 2 {
        search.dfs(0);
    }
    let (_, chosen) = search.best.ok_or(AnalyticsError::Rules(RulesError::Infeasible))?;

    let members: Vec<PlayerId> = chosen.iter().map(|&i| eligible[i].player_id.clone()).collect();
    let mut by_base: Vec<usize> = chosen.clone();
    by_base.sort_by(|a, b| cands[*b].base.cmp(&cands[*a].base).then(a.cmp(b)));
    let team = FantasyTeam::new(
        members,
        eligible[by_base[0]].player_id.clone(),
        eligible[by_base[1]].player_id.clone(),
    );
    let score = team_score_from_base(&team, base, schema)?;
    Ok(DreamTeam { team, score })
}

/// Highest-scoring valid lineup for a finished match.
pub fn dream_team(
    pool: &PlayerPool,
    perfs: &BTreeMap<PlayerId, PlayerMatchPerformance>,
    rules: &RulesSchema,
    schema: &ScoringSchema,
) -> Result<DreamTeam, AnalyticsError> {
    let base = base_points_table(pool, perfs, schema)?;
    dream_team_from_base(pool, &base, rules, schema)
}
