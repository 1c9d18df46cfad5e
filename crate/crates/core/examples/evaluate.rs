//! Generate ten teams and place them against the contest field and the Dream Team.

use fancric::analytics::Weighting;
use fancric::demo::{fixture_backend, fixtures_dir, DemoSet, FixtureSources};
use fancric::evaluation::{aggregate_report, evaluation_report, Evaluator, ReportFormat, DEFAULT_WIN_FLOOR};
use fancric::pipeline::{run_pipeline, PipelineConfig, PromptSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let demo = DemoSet::committed()?;
    let sources = FixtureSources::new(&fixtures_dir());
    let result = run_pipeline(
        &PipelineConfig::default().with_n(10),
        demo.context.clone(),
        &demo.pool,
        &demo.rules,
        &sources.with_stats(&demo.stats),
        &fixture_backend(),
        &PromptSet::embedded(),
    )?;
    let pool = demo.pool.clone().with_playing_xi(demo.context.playing_xi_ids().unwrap());
    let ev = Evaluator::new(&pool, &demo.perfs, &demo.rules, &demo.scoring, &demo.entries, Weighting::Multiplicity, DEFAULT_WIN_FLOOR)?;
    println!("Dream Team scores {}", ev.dream_team().score.total);
    let rows = ev.evaluate_all(&result.teams)?;
    let agg = aggregate_report(&rows)?;
    print!("{}", evaluation_report(&rows, &agg, ReportFormat::Text));
    Ok(())
}
