//! Record a run, write its transcript, then replay it with no fixtures at all.

use std::io::BufReader;

use fancric::demo::{fixture_backend, fixtures_dir, DemoSet, FixtureSources};
use fancric::pipeline::{run_pipeline, PipelineConfig, PromptSet, Transcript};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let demo = DemoSet::committed()?;
    let sources = FixtureSources::new(&fixtures_dir());
    let cfg = PipelineConfig::default().with_n(5);
    let prompts = PromptSet::embedded();
    let first = run_pipeline(&cfg, demo.context.clone(), &demo.pool, &demo.rules, &sources.with_stats(&demo.stats), &fixture_backend(), &prompts)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("run.jsonl");
    first.transcript.write_jsonl(std::fs::File::create(&path)?)?;
    println!("wrote {} records to {}", first.transcript.records.len(), path.display());

    let loaded = Transcript::read_jsonl(BufReader::new(std::fs::File::open(&path)?))?;
    let replay = loaded.replay_backend();
    let second = run_pipeline(&cfg, demo.context.clone(), &demo.pool, &demo.rules, &sources.with_stats(&demo.stats), &replay, &prompts)?;
    println!("replayed {} responses; teams identical: {}", replay.len(), first.teams == second.teams);
    println!("transcripts identical: {}", first.transcript == second.transcript);
    Ok(())
}

