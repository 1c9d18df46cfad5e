use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{AgentId, PipelineError};
use crate::model::{CareerProfile, FantasyTeam, FormAssessment, FranchiseId, MatchContext, PlayerId};
use crate::sources::{SearchAnswer, TeamRecord, WeatherSnapshot};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub agent: AgentId,
    /// Fixture keys, search queries, LLM fingerprints or store descriptors the value came from.
    pub sources: Vec<String>,
}

impl Provenance {
    pub fn new(agent: AgentId, sources: impl IntoIterator<Item = String>) -> Self {
        Provenance {
            agent,
            sources: sources.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Slot<T> {
    Empty,
    Filled {
        value: T,
        provenance: Provenance,
        /// Supervisor step at which the slot was written.
        filled_at: u32,
    },
}

impl<T> Default for Slot<T> {
    fn default() -> Self {
        Slot::Empty
    }
}

impl<T> Slot<T> {
    pub fn is_filled(&self) -> bool {
        matches!(self, Slot::Filled { .. })
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Slot::Filled { value, .. } => Some(value),
            Slot::Empty => None,
        }
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        match self {
            Slot::Filled { provenance, .. } => Some(provenance),
            Slot::Empty => None,
        }
    }

    /// Writes a slot that must still be empty.
    pub(crate) fn fill(&mut self, name: &'static str, value: T, provenance: Provenance, step: u32) -> Result<(), PipelineError> {
        if self.is_filled() {
            return Err(PipelineError::SlotAlreadyFilled(name));
        }
        *self = Slot::Filled {
            value,
            provenance,
            filled_at: step,
        };
        Ok(())
    }

    /// Writes a slot that may be rewritten (the review loop slots).
    pub(crate) fn rewrite(&mut self, value: T, provenance: Provenance, step: u32) {
        *self = Slot::Filled {
            value,
            provenance,
            filled_at: step,
        };
    }

    pub(crate) fn require(&self, name: &'static str) -> Result<&T, PipelineError> {
        self.value().ok_or(PipelineError::SlotEmpty(name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddsQuote {
    pub franchise_id: FranchiseId,
    pub decimal_odds: f64,
    pub source: String,
    pub fetched_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchReport {
    pub summary: String,
    pub answer: SearchAnswer,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StrategyBrief {
    pub team_records: BTreeMap<FranchiseId, TeamRecord>,
    pub team_strengths: BTreeMap<FranchiseId, Vec<String>>,
    pub team_weaknesses: BTreeMap<FranchiseId, Vec<String>>,
    pub tips: Vec<String>,
    pub recommendations: Vec<String>,
}

/// Shared state the supervisor routes agents over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blackboard {
    pub match_context: Slot<MatchContext>,
    pub weather: Slot<[WeatherSnapshot; 2]>,
    pub odds: Slot<Vec<OddsQuote>>,
    pub pitch: Slot<PitchReport>,
    pub career_profiles: Slot<BTreeMap<PlayerId, CareerProfile>>,
    pub form: Slot<BTreeMap<PlayerId, FormAssessment>>,
    pub strategy: Slot<StrategyBrief>,
    pub proposed_teams: Slot<Vec<FantasyTeam>>,
    pub review_feedback: Slot<Vec<String>>,
    pub final_teams: Slot<Vec<FantasyTeam>>,
    /// Completed reviewer/revision rounds.
    pub review_iterations: u32,
    /// Supervisor steps taken so far.
    pub step: u32,
}

impl Blackboard {
    pub fn new(context: MatchContext) -> Self {
        Blackboard {
            match_context: Slot::Filled {
                value: context,
                provenance: Provenance::new(AgentId::Supervisor, ["input".to_string()]),
                filled_at: 0,
            },
            weather: Slot::Empty,
            odds: Slot::Empty,
            pitch: Slot::Empty,
            career_profiles: Slot::Empty,
            form: Slot::Empty,
            strategy: Slot::Empty,
            proposed_teams: Slot::Empty,
            review_feedback: Slot::Empty,
            final_teams: Slot::Empty,
            review_iterations: 0,
            step: 0,
        }
    }

    pub fn slot_states(&self) -> SlotStates {
        SlotStates {
            match_context: self.match_context.is_filled(),
            weather: self.weather.is_filled(),
            odds: self.odds.is_filled(),
            pitch: self.pitch.is_filled(),
            career_profiles: self.career_profiles.is_filled(),
            form: self.form.is_filled(),
            strategy: self.strategy.is_filled(),
            proposed_teams: self.proposed_teams.is_filled(),
            final_teams: self.final_teams.is_filled(),
            review_iterations: self.review_iterations,
        }
    }
}

/// Which slots are filled: everything routing depends on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SlotStates {
    pub match_context: bool,
    pub weather: bool,
    pub odds: bool,
    pub pitch: bool,
    pub career_profiles: bool,
    pub form: bool,
    pub strategy: bool,
    pub proposed_teams: bool,
    pub final_teams: bool,
    pub review_iterations: u32,
}
