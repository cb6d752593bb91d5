//! End-to-end orchestration: severity evaluation, judgement aggregation,
//! simulation, final ordering, and matrix placement in one call.

use std::collections::BTreeMap;

use crate::ingest::{self, MissingScores};
use crate::matrix::{self, MatrixError, MatrixInput, MatrixOptions, PriorityMatrix};
use crate::mcs::{self, ConfigError, RankedStats, SimulationConfig};
use crate::model::{Dataset, MonteCarloStats, Priority, PriorityRecord};
use crate::ej;
use crate::report::{self, ExpertRanking};
use crate::sif::{self, SifError, SifResult};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalysisOptions {
    pub simulation: SimulationConfig,
    pub matrix: MatrixOptions,
}

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub sif: Vec<SifResult>,
    /// Simulation summaries ordered by final rank.
    pub ranked: Vec<RankedStats>,
    /// Completed records ordered by final rank, ties by id.
    pub records: Vec<PriorityRecord>,
    pub matrix: PriorityMatrix,
    pub counts: BTreeMap<Priority, usize>,
    pub experts: Vec<ExpertRanking>,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Sif(#[from] SifError),
    #[error(transparent)]
    MissingScores(#[from] MissingScores),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub fn run_analysis(
    dataset: &Dataset,
    options: &AnalysisOptions,
) -> Result<Analysis, AnalysisError> {
    let sif: Vec<SifResult> = dataset
        .ucas()
        .iter()
        .map(|uca| sif::evaluate(uca, dataset))
        .collect::<Result<_, _>>()?;

    let raw = ingest::score_matrix(dataset)?;
    let initial = ej::initial_ranking(&raw);
    let distributions = mcs::run_mcs(&raw, &options.simulation)?;
    let stats: Vec<MonteCarloStats> = distributions
        .iter()
        .zip(&initial.ranks)
        .map(|(dist, &initial_rank)| mcs::summarize(dist, initial_rank, &options.simulation))
        .collect();
    let ranked = mcs::final_ej_ordering(&stats);

    let ej_by_id: BTreeMap<&str, f64> =
        ranked.iter().map(|r| (r.uca_id.as_str(), r.ej_score)).collect();
    let inputs: Vec<MatrixInput> = sif
        .iter()
        .map(|result| MatrixInput {
            uca_id: result.uca_id.clone(),
            pms: result.pms,
            cif: result.cif,
            sif: result.sif,
            ej: ej_by_id[result.uca_id.as_str()],
        })
        .collect();
    let outcome = matrix::build_matrix(&inputs, &options.matrix)?;
    let counts = matrix::priority_counts(&outcome.matrix);
    let experts = report::expert_rankings(dataset);

    let final_by_id: BTreeMap<&str, u32> =
        ranked.iter().map(|r| (r.uca_id.as_str(), r.final_rank)).collect();
    let mut records = outcome.records;
    records.sort_by(|a, b| {
        final_by_id[a.uca_id.as_str()]
            .cmp(&final_by_id[b.uca_id.as_str()])
            .then_with(|| a.uca_id.cmp(&b.uca_id))
    });

    Ok(Analysis {
        sif,
        ranked,
        records,
        matrix: outcome.matrix,
        counts,
        experts,
        warnings: outcome.warnings,
    })
}

/// Like [`run_analysis`], with the load-time warnings folded into the
/// result. Used where the caller does not manage warnings itself.
pub fn analyze_parsed(
    parsed: &ingest::Parsed,
    options: &AnalysisOptions,
) -> Result<Analysis, AnalysisError> {
    let mut analysis = run_analysis(&parsed.dataset, options)?;
    let mut warnings = parsed.warnings.clone();
    warnings.append(&mut analysis.warnings);
    analysis.warnings = warnings;
    Ok(analysis)
}
