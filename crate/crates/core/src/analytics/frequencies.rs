use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{AnalyticsError, ContestEntrySet};
use crate::model::{FantasyTeam, PlayerId, PlayerPool};
use crate::rules::{repair_team, validate_team, RulesSchema};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PickCount {
    pub as_captain: u64,
    pub as_vice_captain: u64,
    pub in_team: u64,
}

/// Multiplicity-weighted pick counts per player.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PickFrequencies {
    pub counts: BTreeMap<PlayerId, PickCount>,
}

impl PickFrequencies {
    pub fn get(&self, id: &PlayerId) -> PickCount {
        self.counts.get(id).copied().unwrap_or_default()
    }

    /// Players ordered by a key, highest first, ties by ascending id.
    fn ranked(&self, key: impl Fn(&PickCount) -> u64) -> Vec<&PlayerId> {
        let mut ids: Vec<(&PlayerId, u64)> = self.counts.iter().map(|(id, c)| (id, key(c))).collect();
        ids.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ids.into_iter().map(|(id, _)| id).collect()
    }
}

pub fn pick_frequencies(set: &ContestEntrySet) -> PickFrequencies {
    let n = set.players().len();
    let tally = set
        .compact_teams()
        .par_chunks(4096)
        .fold(
            || vec![PickCount::default(); n],
            |mut acc, chunk| {
                for t in chunk {
                    for &m in &t.members {
                        acc[m as usize].in_team += t.multiplicity;
                    }
                    acc[t.captain as usize].as_captain += t.multiplicity;
                    acc[t.vice_captain as usize].as_vice_captain += t.multiplicity;
                }
                acc
            },
        )
        .reduce(
            || vec![PickCount::default(); n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.as_captain += y.as_captain;
                    x.as_vice_captain += y.as_vice_captain;
                    x.in_team += y.in_team;
                }
                a
            },
        );
    let counts = set
        .players()
        .iter()
        .cloned()
        .zip(tally)
        .collect();
    PickFrequencies { counts }
}

/// Team of the most picked captain, vice-captain and players, repaired if it breaks the rules.
///
/// Players in the pool that nobody picked still count (with zero picks) so a
/// thin contest can still yield a full team.
pub fn wisdom_of_crowds_team(
    freqs: &PickFrequencies,
    rules: &RulesSchema,
    pool: &PlayerPool,
) -> Result<FantasyTeam, AnalyticsError> {
    if pool.len() < rules.total_players as usize {
        return Err(AnalyticsError::Rules(crate::rules::RulesError::Infeasible));
    }
    let mut all = freqs.clone();
    for id in pool.ids() {
        all.counts.entry(id.clone()).or_default();
    }
    let captain = all.ranked(|c| c.as_captain)[0].clone();
    let vice = all
        .ranked(|c| c.as_vice_captain)
        .into_iter()
        .find(|id| **id != captain)
        .ok_or(AnalyticsError::Rules(crate::rules::RulesError::Infeasible))?
        .clone();
    let rest = rules.total_players as usize - 2;
    let mut players = vec![captain.clone(), vice.clone()];
    players.extend(
        all.ranked(|c| c.in_team)
            .into_iter()
            .filter(|id| **id != captain && **id != vice)
            .take(rest)
            .cloned(),
    );
    let team = FantasyTeam::new(players, captain, vice);

    let fits = validate_team(&team, pool, rules).map(|r| r.ok).unwrap_or(false);
    if fits {
        return Ok(team);
    }
    let preference: BTreeMap<PlayerId, f64> = all
        .counts
        .iter()
        .map(|(id, c)| (id.clone(), c.in_team as f64))
        .collect();
    Ok(repair_team(&team, rules, pool, &preference)?)
}
