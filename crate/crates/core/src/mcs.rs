//! Monte Carlo rank-sensitivity simulation over expert scores.
//!
//! Each iteration perturbs every raw score cell by an independent uniform
//! relative variation, reruns the whole normalize-sum-rank chain, and
//! records the resulting rank of every UCA. Iteration `i` draws from a
//! dedicated substream derived from `(seed, i)`, so results are identical
//! no matter how iterations are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ej::{self, Direction, ScoreMatrix};
use crate::model::{MonteCarloStats, Stability};

const CI95_Z: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Number of iterations.
    pub num_simulations: usize,
    /// Relative perturbation bound; each cell moves by a uniform factor in
    /// `[-variation_range, +variation_range]`.
    pub variation_range: f64,
    pub seed: u64,
    /// A UCA is stable only while `|mean_rank - initial_rank|` stays below
    /// this shift.
    pub stability_mean_shift: f64,
    /// A UCA is stable only while its rank standard deviation stays at or
    /// below this bound.
    pub stability_max_std: f64,
}

impl Default for SimulationConfig {
    fn default() -> SimulationConfig {
        SimulationConfig {
            num_simulations: 1000,
            variation_range: 0.10,
            seed: 0,
            stability_mean_shift: 1.0,
            stability_max_std: 0.5,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_simulations < 1 {
            return Err(ConfigError::ZeroSimulations);
        }
        if !(self.variation_range > 0.0 && self.variation_range <= 1.0) {
            return Err(ConfigError::VariationOutOfRange(self.variation_range));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("num_simulations must be at least 1")]
    ZeroSimulations,
    #[error("variation_range {0} is outside (0, 1]")]
    VariationOutOfRange(f64),
}

/// Simulated ranks of one UCA, indexed by iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    pub uca_id: String,
    pub ranks: Vec<u32>,
}

/// Applies a relative variation to a raw score. Zero is a fixed point, so
/// a criterion scored 0 never moves.
pub fn perturb(score: f64, variation: f64) -> f64 {
    score * (1.0 + variation)
}

fn substream(seed: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration);
    rng
}

/// One uniform draw in `[-range, +range]`.
pub fn uniform_draw(rng: &mut ChaCha8Rng, range: f64) -> f64 {
    rng.random_range(-range..=range)
}

/// Runs the simulation with uniform perturbations.
pub fn run_mcs(
    raw: &ScoreMatrix,
    config: &SimulationConfig,
) -> Result<Vec<RankDistribution>, ConfigError> {
    run_mcs_with(raw, config, uniform_draw)
}

/// Runs the simulation with a caller-supplied draw function, which returns
/// the relative variation for one cell. Draws happen in a fixed order:
/// iteration, then row, then column, each iteration on its own substream.
pub fn run_mcs_with<F>(
    raw: &ScoreMatrix,
    config: &SimulationConfig,
    mut draw: F,
) -> Result<Vec<RankDistribution>, ConfigError>
where
    F: FnMut(&mut ChaCha8Rng, f64) -> f64,
{
    config.validate()?;
    let mut distributions: Vec<RankDistribution> = raw
        .uca_ids()
        .iter()
        .map(|id| RankDistribution {
            uca_id: id.clone(),
            ranks: Vec::with_capacity(config.num_simulations),
        })
        .collect();

    for iteration in 0..config.num_simulations {
        let mut rng = substream(config.seed, iteration as u64);
        let mut rows = raw.rows().to_vec();
        for row in &mut rows {
            for cell in row.iter_mut() {
                let u = draw(&mut rng, config.variation_range);
                *cell = perturb(*cell, u);
            }
        }
        let scores = ej::saw_rows(&ej::normalize_rows(&rows));
        let ranks = ej::rank_competition(&scores, Direction::HigherIsBetter);
        for (distribution, rank) in distributions.iter_mut().zip(ranks) {
            distribution.ranks.push(rank);
        }
    }
    Ok(distributions)
}

/// Condenses a rank distribution into its summary statistics.
///
/// The standard deviation is the population form (divide by N). The
/// confidence bound is the upper limit of the two-sided 95% interval of
/// the mean rank, `mean + 1.96 * std / sqrt(N)`.
pub fn summarize(
    dist: &RankDistribution,
    initial_rank: u32,
    config: &SimulationConfig,
) -> MonteCarloStats {
    let n = dist.ranks.len() as f64;
    assert!(n > 0.0, "rank distribution must not be empty");
    let mean_rank = dist.ranks.iter().map(|&r| f64::from(r)).sum::<f64>() / n;
    let variance = dist
        .ranks
        .iter()
        .map(|&r| {
            let d = f64::from(r) - mean_rank;
            d * d
        })
        .sum::<f64>()
        / n;
    let rank_std = variance.sqrt();
    let ej_score = mean_rank + rank_std;
    let ci_upper = mean_rank + CI95_Z * rank_std / n.sqrt();
    let stability = stability_of(mean_rank, rank_std, initial_rank, config);
    MonteCarloStats {
        uca_id: dist.uca_id.clone(),
        initial_rank,
        mean_rank,
        rank_std,
        ej_score,
        ci_upper,
        stability,
    }
}

fn stability_of(
    mean_rank: f64,
    rank_std: f64,
    initial_rank: u32,
    config: &SimulationConfig,
) -> Stability {
    let shift = (mean_rank - f64::from(initial_rank)).abs();
    if shift < config.stability_mean_shift && rank_std <= config.stability_max_std {
        Stability::Stable
    } else {
        Stability::Sensitive
    }
}

/// Reclassifies an existing summary against (possibly different) thresholds.
pub fn classify_stability(stats: &MonteCarloStats, config: &SimulationConfig) -> Stability {
    stability_of(stats.mean_rank, stats.rank_std, stats.initial_rank, config)
}

/// A summary joined with its final position in the ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedStats {
    pub uca_id: String,
    pub initial_rank: u32,
    pub mean_rank: f64,
    pub rank_std: f64,
    pub ej_score: f64,
    pub ci_upper: f64,
    pub stability: Stability,
    pub final_rank: u32,
}

/// Orders UCAs by confidence bound (ascending), breaking ties by score and
/// then id, and assigns competition final ranks over `(ci_upper, ej_score)`.
pub fn final_ej_ordering(stats: &[MonteCarloStats]) -> Vec<RankedStats> {
    let mut order: Vec<usize> = (0..stats.len()).collect();
    order.sort_by(|&a, &b| {
        stats[a]
            .ci_upper
            .total_cmp(&stats[b].ci_upper)
            .then(stats[a].ej_score.total_cmp(&stats[b].ej_score))
            .then(stats[a].uca_id.cmp(&stats[b].uca_id))
    });
    let mut out: Vec<RankedStats> = Vec::with_capacity(stats.len());
    for (pos, &idx) in order.iter().enumerate() {
        let s = &stats[idx];
        let final_rank = match out.last() {
            Some(prev)
                if prev.ci_upper == s.ci_upper && prev.ej_score == s.ej_score =>
            {
                prev.final_rank
            }
            _ => (pos + 1) as u32,
        };
        out.push(RankedStats {
            uca_id: s.uca_id.clone(),
            initial_rank: s.initial_rank,
            mean_rank: s.mean_rank,
            rank_std: s.rank_std,
            ej_score: s.ej_score,
            ci_upper: s.ci_upper,
            stability: s.stability,
            final_rank,
        });
    }
    out
}
