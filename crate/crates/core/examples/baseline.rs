//! The single-prompt baseline against the committed fixtures.

use fancric::demo::{fixture_backend, DemoSet};
use fancric::evaluation::prompt_engineering_baseline;
use fancric::llm::ModelConfig;
use fancric::pipeline::PromptSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let demo = DemoSet::committed()?;
    let result = prompt_engineering_baseline(
        &demo.context,
        &demo.pool,
        &demo.rules,
        5,
        &fixture_backend(),
        &ModelConfig::default(),
        &PromptSet::embedded(),
        3,
    )?;
    for (i, t) in result.teams.iter().enumerate() {
        let players: Vec<&str> = t.players.iter().map(|p| p.as_str()).collect();
        println!("{}. C {} VC {}: {}", i + 1, t.captain, t.vice_captain, players.join(" "));
    }
    println!("llm calls {}", result.transcript.llm_calls());
    Ok(())
}
