//! Pipeline behaviour against the scripted analyst backend and fixture sources.

use fancric::demo::{fixtures_dir, AnalystBackend, AnalystOptions, DemoSet, FixtureSources, MATCH_ID};
use fancric::evaluation::prompt_engineering_baseline;
use fancric::llm::ModelConfig;
use fancric::model::PlayerId;
use fancric::pipeline::{
    call_budget, run_pipeline, stats_cutoff, AgentId, GenerationResult, PipelineConfig, PipelineError, PromptSet,
    MAX_TEAMS,
};
use fancric::rules::validate_team;

fn demo() -> DemoSet {
    DemoSet::committed().expect("committed demo data loads")
}

fn run(demo: &DemoSet, n: usize, options: AnalystOptions) -> Result<GenerationResult, PipelineError> {
    let llm = AnalystBackend::new(&demo.pool, &demo.context, demo.rules.clone(), options);
    let sources = FixtureSources::new(&fixtures_dir());
    run_pipeline(
        &PipelineConfig::default().with_n(n),
        demo.context.clone(),
        &demo.pool,
        &demo.rules,
        &sources.with_stats(&demo.stats),
        &llm,
        &PromptSet::embedded(),
    )
}

fn assert_valid(demo: &DemoSet, teams: &[fancric::model::FantasyTeam]) {
    let xi = demo.pool.clone().with_playing_xi(demo.context.playing_xi_ids().unwrap());
    for t in teams {
        let r = validate_team(t, &xi, &demo.rules).unwrap();
        assert!(r.ok, "{:?}", r.violations);
        assert!(t.name.as_deref().is_some_and(|n| !n.is_empty()), "unnamed team");
    }
}

#[test]
fn slate_sizes_at_both_ends() {
    let demo = demo();
    for n in [1, MAX_TEAMS] {
        let r = run(&demo, n, AnalystOptions::default()).unwrap();
        assert_eq!(r.teams.len(), n);
        assert_valid(&demo, &r.teams);
        assert!(r.transcript.llm_calls() <= call_budget(n, 2, 3));
    }
}

#[test]
fn out_of_range_slate_sizes_are_rejected() {
    let demo = demo();
    for n in [0, MAX_TEAMS + 1] {
        assert!(matches!(run(&demo, n, AnalystOptions::default()), Err(PipelineError::InvalidN(m)) if m == n));
    }
}

#[test]
fn short_team_is_re_prompted_by_the_selector() {
    let demo = demo();
    let options = AnalystOptions {
        invalid_team: Some(2),
        ..AnalystOptions::default()
    };
    let r = run(&demo, 3, options).unwrap();
    assert_valid(&demo, &r.teams);
    let clean = run(&demo, 3, AnalystOptions::default()).unwrap();
    assert!(
        r.transcript.llm_calls_by(AgentId::Selector) > clean.transcript.llm_calls_by(AgentId::Selector),
        "no fix prompt recorded"
    );
}

#[test]
fn short_team_is_re_prompted_by_the_baseline() {
    let demo = demo();
    let prompts = PromptSet::embedded();
    let run_baseline = |options| {
        let llm = AnalystBackend::new(&demo.pool, &demo.context, demo.rules.clone(), options);
        prompt_engineering_baseline(&demo.context, &demo.pool, &demo.rules, 3, &llm, &ModelConfig::default(), &prompts, 3)
            .unwrap()
    };
    let fixed = run_baseline(AnalystOptions {
        invalid_team: Some(1),
        ..AnalystOptions::default()
    });
    assert_valid(&demo, &fixed.teams);
    let clean = run_baseline(AnalystOptions::default());
    assert!(fixed.transcript.llm_calls() > clean.transcript.llm_calls());
}

#[test]
fn missing_weather_fixture_names_the_slot() {
    let demo = demo();
    let empty = tempfile::tempdir().unwrap();
    let sources = FixtureSources::new(empty.path());
    let llm = AnalystBackend::new(&demo.pool, &demo.context, demo.rules.clone(), AnalystOptions::default());
    let err = run_pipeline(
        &PipelineConfig::default().with_n(2),
        demo.context.clone(),
        &demo.pool,
        &demo.rules,
        &sources.with_stats(&demo.stats),
        &llm,
        &PromptSet::embedded(),
    )
    .unwrap_err();
    assert_eq!(err.slot(), Some("weather"), "{err}");
    assert!(err.to_string().contains("weather"));
}

#[test]
fn form_windows_stop_before_match_day() {
    let demo = demo();
    let cutoff = stats_cutoff(&demo.context);
    assert!(
        demo.stats.rows().iter().any(|r| r.match_id == MATCH_ID),
        "the demo history should hold the match itself so the guard has something to hide"
    );
    let r = run(&demo, 1, AnalystOptions::default()).unwrap();
    let form = r.blackboard_final.form.value().unwrap();
    assert_eq!(form.len(), 22);
    for f in form.values() {
        assert!(f.window_matches.len() <= f.window_size);
        for id in &f.window_matches {
            assert_ne!(id, MATCH_ID);
            assert!(demo.stats.matches()[id].match_date < cutoff, "{id} is on or after match day");
        }
    }
}

#[test]
fn anchored_ratings_and_team_come_through() {
    let demo = demo();
    let r = run(&demo, 4, AnalystOptions::default()).unwrap();
    let stoinis = PlayerId::new("lsg-stoinis");
    assert_eq!(r.blackboard_final.career_profiles.value().unwrap()[&stoinis].career_rating, 7);
    assert_eq!(r.blackboard_final.form.value().unwrap()[&stoinis].form_rating, 8);
    assert_eq!(r.teams[0].captain, stoinis);
    assert_eq!(r.teams[0].name.as_deref(), Some("Strategic Strikers"));
}

#[test]
fn runs_are_deterministic() {
    let demo = demo();
    let a = run(&demo, 5, AnalystOptions::default()).unwrap();
    let b = run(&demo, 5, AnalystOptions::default()).unwrap();
    assert_eq!(a.teams, b.teams);
    assert_eq!(a.transcript.to_jsonl(), b.transcript.to_jsonl());
}
