//! Contest populations: ingestion, pick frequencies, score statistics and the Dream Team.

mod dream_team;
mod frequencies;
mod ingest;
mod summary;

use thiserror::Error;

use crate::model::{PlayerId, Signature, TeamStructureError};
use crate::rules::RulesError;
use crate::scoring::ScoringError;

pub use dream_team::{dream_team, dream_team_from_base, DreamTeam};
pub use frequencies::{pick_frequencies, wisdom_of_crowds_team, PickCount, PickFrequencies};
pub use ingest::{
    ingest_entries, load_entries, read_store, ContestEntrySet, IngestOptions, MalformedLine,
    UniqueTeam, STORE_HEADER,
};
pub use summary::{
    ks_normal_statistic, percentile_rank, score_entries, summarize, ContestSummary, EntryPoints,
    HistogramBin, ScoreDistribution, SummaryOptions, Weighting,
};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("reading entries: {0}")]
    Io(#[from] std::io::Error),
    #[error("{malformed} of {total} lines are malformed (first: {first:?})")]
    TooManyMalformed {
        malformed: u64,
        total: u64,
        first: Option<MalformedLine>,
    },
    #[error("entry store line {line}: {reason}")]
    BadStore { line: u64, reason: String },
    #[error("no points for team {0}")]
    MissingPoints(Signature),
    #[error("no base points for player `{0}`")]
    MissingBase(PlayerId),
    #[error("the entry set is empty")]
    EmptySet,
    #[error("histogram bin width must be positive")]
    BadBinWidth,
    #[error("degenerate sample: {0}")]
    Degenerate(&'static str),
    #[error(transparent)]
    Team(#[from] TeamStructureError),
    #[error(transparent)]
    Rules(#[from] RulesError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}
