//! Generate, evaluate and aggregate over a grid of team counts and generators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aggregate_report, AggregateReport, EvaluationError, EvaluationRow, Evaluator};
use crate::llm::{ChatBackend, ModelConfig};
use crate::model::{FantasyTeam, MatchContext, PlayerPool};
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineError, PipelineSources, PromptSet};
use crate::rules::RulesSchema;

pub const ABLATION_NS: [usize; 5] = [1, 5, 10, 15, 20];

pub trait TeamGenerator: Sync {
    fn name(&self) -> &str;
    fn generate(&self, n: usize) -> Result<Vec<FantasyTeam>, PipelineError>;
}

pub struct FanCricGenerator<'a> {
    pub config: PipelineConfig,
    pub context: &'a MatchContext,
    pub pool: &'a PlayerPool,
    pub rules: &'a RulesSchema,
    pub sources: PipelineSources<'a>,
    pub llm: &'a dyn ChatBackend,
    pub prompts: &'a PromptSet,
}

impl TeamGenerator for FanCricGenerator<'_> {
    fn name(&self) -> &str {
        "fancric"
    }

    fn generate(&self, n: usize) -> Result<Vec<FantasyTeam>, PipelineError> {
        let cfg = self.config.clone().with_n(n);
        run_pipeline(&cfg, self.context.clone(), self.pool, self.rules, &self.sources, self.llm, self.prompts).map(|r| r.teams)
    }
}

pub struct BaselineGenerator<'a> {
    pub context: &'a MatchContext,
    pub pool: &'a PlayerPool,
    pub rules: &'a RulesSchema,
    pub llm: &'a dyn ChatBackend,
    pub models: ModelConfig,
    pub prompts: &'a PromptSet,
    pub team_attempts: u32,
}

impl TeamGenerator for BaselineGenerator<'_> {
    fn name(&self) -> &str {
        "baseline"
    }

    fn generate(&self, n: usize) -> Result<Vec<FantasyTeam>, PipelineError> {
        super::prompt_engineering_baseline(
            self.context,
            self.pool,
            self.rules,
            n,
            self.llm,
            &self.models,
            self.prompts,
            self.team_attempts,
        )
        .map(|r| r.teams)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub generator: String,
    pub aggregate: AggregateReport,
    pub rows: Vec<EvaluationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub n: usize,
    /// One cell per generator, in the order the generators were given.
    pub cells: Vec<AblationCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub generators: Vec<String>,
    pub win_floor: f64,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub const METRICS: [&'static str; 6] = [
        "Points Avg.",
        "Rank Avg.",
        "C/VC in DT",
        "Players in DT",
        "Win %",
        "Highest Rank",
    ];

    pub fn metric_values(a: &AggregateReport) -> [f64; 6] {
        [
            a.points_avg,
            a.percentile_avg,
            a.c_vc_in_dt_avg(),
            a.players_in_dt_avg,
            a.win_pct,
            a.highest_percentile,
        ]
    }
}

/// Runs every (generator, n) cell; cells run in parallel and come back in grid order.
pub fn run_ablation(
    ns: &[usize],
    generators: &[&dyn TeamGenerator],
    evaluator: &Evaluator,
) -> Result<AblationReport, EvaluationError> {
    let grid: Vec<(usize, usize)> = ns
        .iter()
        .flat_map(|&n| (0..generators.len()).map(move |g| (n, g)))
        .collect();
    let cells: Vec<Result<AblationCell, EvaluationError>> = grid
        .par_iter()
        .map(|&(n, g)| {
            let gen = generators[g];
            let teams = gen.generate(n).map_err(|e| EvaluationError::Generation {
                generator: gen.name().to_string(),
                n,
                message: e.to_string(),
            })?;
            if teams.len() != n {
                return Err(EvaluationError::WrongTeamCount {
                    generator: gen.name().to_string(),
                    n,
                    got: teams.len(),
                });
            }
            let rows = evaluator.evaluate_all(&teams)?;
            Ok(AblationCell {
                generator: gen.name().to_string(),
                aggregate: aggregate_report(&rows)?,
                rows,
            })
        })
        .collect();
    let mut cells = cells.into_iter();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let row_cells = (0..generators.len())
            .map(|_| cells.next().expect("one cell per grid point"))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(AblationRow { n, cells: row_cells });
    }
    Ok(AblationReport {
        generators: generators.iter().map(|g| g.name().to_string()).collect(),
        win_floor: evaluator.win_floor(),
        rows,
    })
}
