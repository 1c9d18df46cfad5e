//! External facts: innings weather, search answers and historical player statistics.

mod search;
mod stats;
mod weather;

use thiserror::Error;

use crate::http::HttpError;
use crate::model::{CsvError, PlayerId};

pub use search::{
    search_answer, slug_for, FixtureSearch, RecordingSearch, SearchAnswer, SearchClient, TavilySearch,
    SEARCH_KEY_ENV,
};
pub use stats::{
    apply_temporal_guard, load_match_records, load_player_stats, parse_timestamp, GuardedStatStore,
    HistoricalStatStore, MatchRecord, StatRow, TeamRecord, MATCH_COLUMNS,
};
pub use weather::{
    fetch_innings_weather, weather_fixture_name, FixtureWeather, LiveWeather, RecordingWeather,
    WeatherClient, WeatherPayload, WeatherSnapshot, HOURLY_FIELDS,
};

#[derive(Debug, Error)]
pub enum SourceError {
    #[error(transparent)]
    Http(#[from] HttpError),
    #[error("no {kind} fixture for `{key}`")]
    MissingFixture { kind: &'static str, key: String },
    #[error("{0}")]
    Io(String),
    #[error("unexpected payload: {0}")]
    Protocol(String),
    #[error("innings {innings} window has no hourly data (outside the forecast horizon?)")]
    OutsideHorizon { innings: u8 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("search returned an empty answer for `{0}`")]
    EmptyAnswer(String),
    #[error("authentication: {0}")]
    Auth(String),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("row {row}: duplicate row for match `{match_id}`, player `{player_id}`")]
    DuplicateRow {
        match_id: String,
        player_id: PlayerId,
        row: usize,
    },
}

impl From<std::io::Error> for SourceError {
    fn from(e: std::io::Error) -> Self {
        SourceError::Io(e.to_string())
    }
}
