//! Report artifacts: per-expert initial rankings, the full record table,
//! and a plain-text summary.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ej::{self, ScoreMatrix};
use crate::mcs::RankedStats;
use crate::model::{Dataset, Priority, PriorityRecord, Stability};

/// One UCA's position in a single expert's initial ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertRank {
    pub uca_id: String,
    pub saw_score: f64,
    pub rank: u32,
}

/// Initial ranking induced by one expert's sheets alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertRanking {
    pub expert_id: String,
    pub ranks: Vec<ExpertRank>,
}

/// Ranks the dataset separately per expert, over the UCAs that expert
/// scored. Useful for spotting disagreement between assessors.
pub fn expert_rankings(dataset: &Dataset) -> Vec<ExpertRanking> {
    let expert_ids: BTreeSet<&str> = dataset
        .ucas()
        .iter()
        .flat_map(|uca| uca.expert_scores.keys().map(String::as_str))
        .collect();

    expert_ids
        .into_iter()
        .map(|expert_id| {
            let mut ids = Vec::new();
            let mut rows = Vec::new();
            for uca in dataset.ucas() {
                if let Some(scores) = uca.expert_scores.get(expert_id) {
                    ids.push(uca.id.clone());
                    rows.push(scores.as_row());
                }
            }
            let ranking = ej::initial_ranking(&ScoreMatrix::new(ids.clone(), rows));
            let ranks = ids
                .into_iter()
                .zip(ranking.scores.iter().zip(&ranking.ranks))
                .map(|(uca_id, (&saw_score, &rank))| ExpertRank { uca_id, saw_score, rank })
                .collect();
            ExpertRanking { expert_id: expert_id.to_string(), ranks }
        })
        .collect()
}

/// Full per-UCA table joining matrix placement with the simulation summary.
/// Rows follow the order of `records`.
pub fn matrix_csv(records: &[PriorityRecord], ranked: &[RankedStats]) -> String {
    let by_id: BTreeMap<&str, &RankedStats> =
        ranked.iter().map(|r| (r.uca_id.as_str(), r)).collect();
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "uca_id",
            "pms",
            "cif",
            "sif",
            "ej",
            "ej_inverted",
            "sif_scaled",
            "ej_scaled",
            "priority",
            "final_rank",
            "stability",
        ])
        .expect("write to memory");
    for record in records {
        let stats = by_id
            .get(record.uca_id.as_str())
            .expect("simulation stats for every placed UCA");
        writer
            .write_record([
                record.uca_id.clone(),
                record.pms.to_string(),
                record.cif.to_string(),
                record.sif.to_string(),
                record.ej.to_string(),
                record.ej_inverted.to_string(),
                record.sif_scaled.to_string(),
                record.ej_scaled.to_string(),
                record.priority.to_string(),
                stats.final_rank.to_string(),
                stats.stability.to_string(),
            ])
            .expect("write to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("utf-8 output")
}

/// Plain-text run summary: priority counts, the top of the final ordering,
/// the sensitive UCAs, and the per-expert comparison.
pub fn render_report(
    ranked: &[RankedStats],
    counts: &BTreeMap<Priority, usize>,
    experts: &[ExpertRanking],
    top: usize,
) -> String {
    let mut out = String::from("Priority overview:\n");
    let total: usize = counts.values().sum();
    for (priority, count) in counts {
        out.push_str(&format!(
            "  {priority} {:<11} {count}\n",
            format!("({})", priority.description())
        ));
    }
    out.push_str(&format!("  total          {total}\n"));

    let shown = top.min(ranked.len());
    out.push_str(&format!("\nTop {shown} of {} by final rank:\n", ranked.len()));
    out.push_str("  rank  UCA             EJ-score  CI95^     stability\n");
    for stats in ranked.iter().take(shown) {
        out.push_str(&format!(
            "  {:<4}  {:<14}  {:<8.4}  {:<8.4}  {}\n",
            stats.final_rank, stats.uca_id, stats.ej_score, stats.ci_upper, stats.stability
        ));
    }

    let sensitive: Vec<&str> = ranked
        .iter()
        .filter(|s| s.stability == Stability::Sensitive)
        .map(|s| s.uca_id.as_str())
        .collect();
    if sensitive.is_empty() {
        out.push_str("\nSensitive UCAs: none\n");
    } else {
        out.push_str(&format!("\nSensitive UCAs: {}\n", sensitive.join(", ")));
    }

    if !experts.is_empty() {
        out.push_str("\nInitial rank per expert:\n");
        let mut uca_order: Vec<&str> = Vec::new();
        for expert in experts {
            for rank in &expert.ranks {
                if !uca_order.contains(&rank.uca_id.as_str()) {
                    uca_order.push(&rank.uca_id);
                }
            }
        }
        out.push_str(&format!("  {:<14}", "UCA"));
        for expert in experts {
            out.push_str(&format!("  {:>8}", expert.expert_id));
        }
        out.push('\n');
        for uca_id in uca_order {
            out.push_str(&format!("  {uca_id:<14}"));
            for expert in experts {
                match expert.ranks.iter().find(|r| r.uca_id == uca_id) {
                    Some(rank) => out.push_str(&format!("  {:>8}", rank.rank)),
                    None => out.push_str(&format!("  {:>8}", "-")),
                }
            }
            out.push('\n');
        }
    }
    out
}
