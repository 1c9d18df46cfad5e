//! Run the full agent pipeline offline against the committed fixtures.

use fancric::demo::{fixture_backend, fixtures_dir, DemoSet, FixtureSources};
use fancric::pipeline::{call_budget, run_pipeline, AgentId, PipelineConfig, PromptSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let demo = DemoSet::committed()?;
    let sources = FixtureSources::new(&fixtures_dir());
    let cfg = PipelineConfig::default().with_n(n);
    let result = run_pipeline(
        &cfg,
        demo.context.clone(),
        &demo.pool,
        &demo.rules,
        &sources.with_stats(&demo.stats),
        &fixture_backend(),
        &PromptSet::embedded(),
    )?;

    for (i, t) in result.teams.iter().enumerate() {
        println!("{:>2}. {:<24} C {:<14} VC {}", i + 1, t.name.as_deref().unwrap_or("-"), t.captain, t.vice_captain);
    }
    let tr = &result.transcript;
    println!(
        "llm calls {} of budget {}",
        tr.llm_calls(),
        call_budget(n, cfg.max_review_iters, cfg.team_attempts)
    );
    for agent in [AgentId::Researcher, AgentId::CareerProfiler, AgentId::FormAssessor, AgentId::Strategizer, AgentId::Selector, AgentId::Reviewer] {
        println!("  {:<12} {}", agent.as_str(), tr.llm_calls_by(agent));
    }
    Ok(())
}
