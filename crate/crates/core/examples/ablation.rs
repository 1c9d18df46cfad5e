//! Both generators over every team count, evaluated cell by cell.

use fancric::analytics::Weighting;
use fancric::demo::{fixture_backend, fixtures_dir, DemoSet, FixtureSources};
use fancric::evaluation::{
    run_ablation, BaselineGenerator, Evaluator, FanCricGenerator, ReportFormat, TeamGenerator, ABLATION_NS,
    DEFAULT_WIN_FLOOR,
};
use fancric::llm::ModelConfig;
use fancric::pipeline::{PipelineConfig, PromptSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let demo = DemoSet::committed()?;
    let sources = FixtureSources::new(&fixtures_dir());
    let llm = fixture_backend();
    let prompts = PromptSet::embedded();
    let fancric = FanCricGenerator {
        config: PipelineConfig::default(),
        context: &demo.context,
        pool: &demo.pool,
        rules: &demo.rules,
        sources: sources.with_stats(&demo.stats),
        llm: &llm,
        prompts: &prompts,
    };
    let baseline = BaselineGenerator {
        context: &demo.context,
        pool: &demo.pool,
        rules: &demo.rules,
        llm: &llm,
        models: ModelConfig::default(),
        prompts: &prompts,
        team_attempts: 3,
    };
    let pool = demo.pool.clone().with_playing_xi(demo.context.playing_xi_ids().unwrap());
    let ev = Evaluator::new(&pool, &demo.perfs, &demo.rules, &demo.scoring, &demo.entries, Weighting::Multiplicity, DEFAULT_WIN_FLOOR)?;
    let report = run_ablation(&ABLATION_NS, &[&fancric as &dyn TeamGenerator, &baseline], &ev)?;
    print!("{}", report.render(ReportFormat::Text));
    Ok(())
}
