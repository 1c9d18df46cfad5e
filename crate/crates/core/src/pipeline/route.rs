use serde::{Deserialize, Serialize};

use super::{PipelineError, SlotStates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentId {
    Supervisor,
    Researcher,
    CareerProfiler,
    FormAssessor,
    Strategizer,
    Selector,
    Reviewer,
    Baseline,
}

impl AgentId {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentId::Supervisor => "supervisor",
            AgentId::Researcher => "researcher",
            AgentId::CareerProfiler => "career_profiler",
            AgentId::FormAssessor => "form_assessor",
            AgentId::Strategizer => "strategizer",
            AgentId::Selector => "selector",
            AgentId::Reviewer => "reviewer",
            AgentId::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    Agent(AgentId),
    Done,
}

/// Next agent to run, decided only by which slots are filled.
pub fn route_next(states: &SlotStates, max_review_iters: u32) -> Result<Route, PipelineError> {
    use AgentId::*;
    if states.final_teams {
        return Ok(Route::Done);
    }
    if !states.match_context {
        return Err(PipelineError::StuckState("match context is empty".into()));
    }
    let next = if !(states.weather && states.odds && states.pitch) {
        Researcher
    } else if !states.career_profiles {
        CareerProfiler
    } else if !states.form {
        FormAssessor
    } else if !states.strategy {
        Strategizer
    } else if !states.proposed_teams || states.review_iterations <= max_review_iters {
        Selector
    } else {
        return Err(PipelineError::StuckState(format!(
            "{} review iterations exceed the bound {max_review_iters} without final teams",
            states.review_iterations
        )));
    };
    Ok(Route::Agent(next))
}
