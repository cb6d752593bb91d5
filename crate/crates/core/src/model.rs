//! Domain types shared by every stage of the prioritization pipeline.
//!
//! Everything here is immutable once constructed and safe to share across
//! threads. A [`Dataset`] is only obtainable through [`Dataset::new`], which
//! checks the cross-record invariants (unique ids, unique weights, hierarchy
//! consistency) and reports every violation it finds instead of stopping at
//! the first one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Severity guideword used when refining a loss into sub-losses.
///
/// "No Effect" is deliberately absent: a sub-loss with no effect carries no
/// priority weight and never enters a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DalLevel {
    Catastrophic,
    Hazardous,
    Major,
    Minor,
}

impl DalLevel {
    /// Case-insensitive parse of the guideword label.
    pub fn parse(label: &str) -> Option<DalLevel> {
        match label.trim().to_ascii_lowercase().as_str() {
            "catastrophic" => Some(DalLevel::Catastrophic),
            "hazardous" => Some(DalLevel::Hazardous),
            "major" => Some(DalLevel::Major),
            "minor" => Some(DalLevel::Minor),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DalLevel::Catastrophic => "Catastrophic",
            DalLevel::Hazardous => "Hazardous",
            DalLevel::Major => "Major",
            DalLevel::Minor => "Minor",
        }
    }
}

impl fmt::Display for DalLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A refined sub-loss carrying its pre-mitigation severity weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SubLoss {
    pub id: String,
    pub parent_loss: String,
    pub dal_level: DalLevel,
    pub description: String,
    /// Severity weight, unique within a dataset; higher means more severe.
    pub pms: u32,
}

/// A controller (or decision maker) from the control structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    pub id: String,
    pub name: String,
    /// Impact weight, unique within a dataset; higher means more influence.
    pub cif: u32,
    /// Position in the control structure; level 1 is the top.
    pub hierarchy_level: u32,
}

/// The five expert-assessment criteria, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    OperationalDisruption,
    Criticality,
    Detectability,
    StakeholderEffect,
    Likelihood,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::OperationalDisruption,
        Criterion::Criticality,
        Criterion::Detectability,
        Criterion::StakeholderEffect,
        Criterion::Likelihood,
    ];

    /// Column name used in score files.
    pub fn key(&self) -> &'static str {
        match self {
            Criterion::OperationalDisruption => "operational_disruption",
            Criterion::Criticality => "criticality",
            Criterion::Detectability => "detectability",
            Criterion::StakeholderEffect => "stakeholder_effect",
            Criterion::Likelihood => "likelihood",
        }
    }

    /// Valid score range for this criterion, inclusive.
    pub fn range(&self) -> (u8, u8) {
        match self {
            Criterion::Likelihood => (0, 1),
            _ => (1, 3),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("score {value} out of range for {criterion} (expected {}..={})", criterion.range().0, criterion.range().1)]
pub struct ScoreRangeError {
    pub criterion: Criterion,
    pub value: u8,
}

/// One expert's scores for one UCA.
///
/// The four 1-3 criteria and the binary likelihood flag are all
/// concern-ordered: a higher score always means more concern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriterionScores {
    operational_disruption: u8,
    criticality: u8,
    detectability: u8,
    stakeholder_effect: u8,
    likelihood: u8,
}

impl CriterionScores {
    pub fn new(
        operational_disruption: u8,
        criticality: u8,
        detectability: u8,
        stakeholder_effect: u8,
        likelihood: u8,
    ) -> Result<CriterionScores, ScoreRangeError> {
        let scores = CriterionScores {
            operational_disruption,
            criticality,
            detectability,
            stakeholder_effect,
            likelihood,
        };
        for criterion in Criterion::ALL {
            let value = scores.get(criterion);
            let (lo, hi) = criterion.range();
            if value < lo || value > hi {
                return Err(ScoreRangeError { criterion, value });
            }
        }
        Ok(scores)
    }

    pub fn get(&self, criterion: Criterion) -> u8 {
        match criterion {
            Criterion::OperationalDisruption => self.operational_disruption,
            Criterion::Criticality => self.criticality,
            Criterion::Detectability => self.detectability,
            Criterion::StakeholderEffect => self.stakeholder_effect,
            Criterion::Likelihood => self.likelihood,
        }
    }

    /// Scores as one matrix row, in [`Criterion::ALL`] order.
    pub fn as_row(&self) -> [f64; 5] {
        let mut row = [0.0; 5];
        for (slot, criterion) in row.iter_mut().zip(Criterion::ALL) {
            *slot = f64::from(self.get(criterion));
        }
        row
    }
}

/// One unsafe control action with its loss links and expert score sheets.
#[derive(Debug, Clone, PartialEq)]
pub struct UcaRecord {
    pub id: String,
    pub controller_id: String,
    pub description: String,
    /// Ids of the sub-losses this UCA can lead to; never empty in a valid
    /// record. A loss family the UCA does not touch simply has no entry.
    pub loss_links: BTreeSet<String>,
    /// Per-expert score sheets, keyed by expert id.
    pub expert_scores: BTreeMap<String, CriterionScores>,
}

/// Whether a UCA kept its rank under input perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Sensitive,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "Stable",
            Stability::Sensitive => "Sensitive",
        })
    }
}

/// Rank-distribution summary for one UCA after the simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloStats {
    pub uca_id: String,
    pub initial_rank: u32,
    pub mean_rank: f64,
    /// Population standard deviation of the simulated ranks.
    pub rank_std: f64,
    /// `mean_rank + rank_std`; lower means higher priority.
    pub ej_score: f64,
    /// Upper bound of the 95% confidence interval of the mean rank.
    pub ci_upper: f64,
    pub stability: Stability,
}

/// Five priority levels; `P1` is the most urgent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Priority {
    P1,
    P2,
    P3,
    P4,
    P5,
}

impl Priority {
    pub fn description(&self) -> &'static str {
        match self {
            Priority::P1 => "high",
            Priority::P2 => "moderate",
            Priority::P3 => "minor",
            Priority::P4 => "low",
            Priority::P5 => "very low",
        }
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", *self as u8 + 1)
    }
}

/// Final per-UCA tuple placed on the priority matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityRecord {
    pub uca_id: String,
    pub pms: u32,
    pub cif: u32,
    pub sif: u32,
    /// Final expert-judgement score; lower means higher priority.
    pub ej: f64,
    /// `max(ej over the cohort) - ej`, so that higher means worse.
    pub ej_inverted: f64,
    pub sif_scaled: u8,
    pub ej_scaled: u8,
    pub priority: Priority,
}

/// Where a violation was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Locus {
    SubLoss(String),
    Controller(String),
    Uca(String),
    Score { uca_id: String, expert_id: String },
    Dataset,
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locus::SubLoss(id) => write!(f, "sub-loss {id}"),
            Locus::Controller(id) => write!(f, "controller {id}"),
            Locus::Uca(id) => write!(f, "UCA {id}"),
            Locus::Score { uca_id, expert_id } => write!(f, "score sheet ({uca_id}, {expert_id})"),
            Locus::Dataset => f.write_str("dataset"),
        }
    }
}

/// A single invariant violation. Violations are data, not faults: the
/// validator always returns the complete list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub locus: Locus,
    pub message: String,
}

impl Violation {
    pub fn new(locus: Locus, message: impl Into<String>) -> Violation {
        Violation { locus, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.locus, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} violation(s):", self.0.len())?;
        for violation in &self.0 {
            writeln!(f, "  {violation}")?;
        }
        Ok(())
    }
}

/// Validated aggregate of sub-losses, controllers, and UCAs; the single
/// input to all downstream engines.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    sub_losses: Vec<SubLoss>,
    controllers: Vec<Controller>,
    ucas: Vec<UcaRecord>,
}

impl Dataset {
    /// Builds a dataset, collecting every invariant violation.
    pub fn new(
        sub_losses: Vec<SubLoss>,
        controllers: Vec<Controller>,
        ucas: Vec<UcaRecord>,
    ) -> Result<Dataset, Violations> {
        let mut violations = Vec::new();

        check_unique(sub_losses.iter().map(|l| &l.id), &mut violations, |id| {
            Violation::new(Locus::SubLoss(id.clone()), "duplicate sub-loss id")
        });
        check_unique(controllers.iter().map(|c| &c.id), &mut violations, |id| {
            Violation::new(Locus::Controller(id.clone()), "duplicate controller id")
        });
        check_unique(ucas.iter().map(|u| &u.id), &mut violations, |id| {
            Violation::new(Locus::Uca(id.clone()), "duplicate UCA id")
        });

        let mut pms_seen: BTreeMap<u32, &str> = BTreeMap::new();
        for loss in &sub_losses {
            if loss.pms < 1 {
                violations.push(Violation::new(
                    Locus::SubLoss(loss.id.clone()),
                    "pms must be at least 1",
                ));
            }
            if let Some(other) = pms_seen.insert(loss.pms, &loss.id) {
                violations.push(Violation::new(
                    Locus::SubLoss(loss.id.clone()),
                    format!("pms {} already assigned to {}", loss.pms, other),
                ));
            }
        }

        let mut cif_seen: BTreeMap<u32, &str> = BTreeMap::new();
        for controller in &controllers {
            if controller.cif < 1 {
                violations.push(Violation::new(
                    Locus::Controller(controller.id.clone()),
                    "cif must be at least 1",
                ));
            }
            if controller.hierarchy_level < 1 {
                violations.push(Violation::new(
                    Locus::Controller(controller.id.clone()),
                    "hierarchy_level must be at least 1",
                ));
            }
            if let Some(other) = cif_seen.insert(controller.cif, &controller.id) {
                violations.push(Violation::new(
                    Locus::Controller(controller.id.clone()),
                    format!("cif {} already assigned to {}", controller.cif, other),
                ));
            }
        }

        // A controller higher in the hierarchy must carry the larger weight.
        for upper in &controllers {
            for lower in &controllers {
                if upper.hierarchy_level < lower.hierarchy_level && upper.cif <= lower.cif {
                    violations.push(Violation::new(
                        Locus::Controller(lower.id.clone()),
                        format!(
                            "cif {} at level {} is not below cif {} of {} at level {}",
                            lower.cif,
                            lower.hierarchy_level,
                            upper.cif,
                            upper.id,
                            upper.hierarchy_level
                        ),
                    ));
                }
            }
        }

        let dataset = Dataset { sub_losses, controllers, ucas };
        for uca in &dataset.ucas {
            violations.extend(record_violations(uca, &dataset));
        }

        if violations.is_empty() {
            Ok(dataset)
        } else {
            Err(Violations(violations))
        }
    }

    pub fn sub_losses(&self) -> &[SubLoss] {
        &self.sub_losses
    }

    pub fn controllers(&self) -> &[Controller] {
        &self.controllers
    }

    pub fn ucas(&self) -> &[UcaRecord] {
        &self.ucas
    }

    pub fn sub_loss(&self, id: &str) -> Option<&SubLoss> {
        self.sub_losses.iter().find(|l| l.id == id)
    }

    pub fn controller(&self, id: &str) -> Option<&Controller> {
        self.controllers.iter().find(|c| c.id == id)
    }

    pub fn uca(&self, id: &str) -> Option<&UcaRecord> {
        self.ucas.iter().find(|u| u.id == id)
    }
}

fn check_unique<'a>(
    ids: impl Iterator<Item = &'a String>,
    violations: &mut Vec<Violation>,
    make: impl Fn(&String) -> Violation,
) {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            violations.push(make(id));
        }
    }
}

/// Checks one record against a dataset and returns the full list of
/// violations, or `Ok` if there are none.
pub fn validate_record(record: &UcaRecord, dataset: &Dataset) -> Result<(), Violations> {
    let violations = record_violations(record, dataset);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Violations(violations))
    }
}

fn record_violations(record: &UcaRecord, dataset: &Dataset) -> Vec<Violation> {
    let mut violations = Vec::new();
    if record.loss_links.is_empty() {
        violations.push(Violation::new(Locus::Uca(record.id.clone()), "no loss link"));
    }
    if dataset.controller(&record.controller_id).is_none() {
        violations.push(Violation::new(
            Locus::Uca(record.id.clone()),
            format!("unresolved controller {}", record.controller_id),
        ));
    }
    for link in &record.loss_links {
        if dataset.sub_loss(link).is_none() {
            violations.push(Violation::new(
                Locus::Uca(record.id.clone()),
                format!("unresolved sub-loss {link}"),
            ));
        }
    }
    violations
}
