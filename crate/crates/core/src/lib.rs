//! Fantasy cricket team generation and contest analytics.

pub mod analytics;
pub mod cli;
pub mod demo;
pub mod evaluation;
pub mod http;
pub mod llm;
pub mod model;
pub mod pipeline;
pub mod points;
pub mod rules;
pub mod scoring;
pub mod sources;
