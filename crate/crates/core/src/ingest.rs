//! Parsing and validation of dataset inputs.
//!
//! Datasets arrive either as four column-oriented CSV files (losses,
//! controllers, UCAs, score sheets) or as one JSON bundle carrying the same
//! four arrays. Score cells accept numeric values or the canonical
//! qualitative intensity labels; labels map to concern-ordered scores so a
//! higher number always means more concern. Malformed cells are hard
//! errors, never coerced. Cross-record problems (dangling ids, duplicate
//! weights) are collected in full and reported together.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ej::ScoreMatrix;
use crate::model::{
    Controller, Criterion, CriterionScores, DalLevel, Dataset, Locus, SubLoss, UcaRecord,
    Violation, Violations,
};
use crate::sif;

/// Where a dataset comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetManifest {
    /// Four column-oriented files. `scores` may be omitted when judgement
    /// scoring is not needed (validation only).
    Files {
        losses: PathBuf,
        controllers: PathBuf,
        ucas: PathBuf,
        scores: Option<PathBuf>,
    },
    /// One JSON bundle with `losses`, `controllers`, `ucas`, `scores`.
    Bundle { path: PathBuf },
}

impl DatasetManifest {
    /// Every file referenced by the manifest.
    pub fn paths(&self) -> Vec<&Path> {
        match self {
            DatasetManifest::Files { losses, controllers, ucas, scores } => {
                let mut paths = vec![losses.as_path(), controllers.as_path(), ucas.as_path()];
                if let Some(scores) = scores {
                    paths.push(scores.as_path());
                }
                paths
            }
            DatasetManifest::Bundle { path } => vec![path.as_path()],
        }
    }
}

/// A validated dataset plus non-fatal observations made while loading it.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}{}: {message}", line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Format {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },
    #[error(transparent)]
    Invalid(#[from] Violations),
}

const INTENSITIES: [(Criterion, &str, u8); 14] = [
    (Criterion::OperationalDisruption, "High Impact", 3),
    (Criterion::OperationalDisruption, "Medium Impact", 2),
    (Criterion::OperationalDisruption, "Low Impact", 1),
    (Criterion::Criticality, "High Risk", 3),
    (Criterion::Criticality, "Moderate Risk", 2),
    (Criterion::Criticality, "Low Risk", 1),
    (Criterion::Detectability, "Low Detectability", 3),
    (Criterion::Detectability, "Moderate Detectability", 2),
    (Criterion::Detectability, "High Detectability", 1),
    (Criterion::StakeholderEffect, "Significant Impact", 3),
    (Criterion::StakeholderEffect, "Moderate Impact", 2),
    (Criterion::StakeholderEffect, "Minimal Impact", 1),
    (Criterion::Likelihood, "Not mitigated by pre-existing regulations and likely to occur", 1),
    (Criterion::Likelihood, "Mitigated by pre-existing regulations and unlikely to occur", 0),
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown intensity {label:?} for criterion {criterion}")]
pub struct UnknownIntensity {
    pub criterion: Criterion,
    pub label: String,
}

/// Maps a qualitative intensity label (case-insensitive) to its numeric
/// score for the given criterion.
pub fn score_intensity(criterion: Criterion, label: &str) -> Result<u8, UnknownIntensity> {
    let wanted = label.trim();
    INTENSITIES
        .iter()
        .find(|(c, canonical, _)| *c == criterion && canonical.eq_ignore_ascii_case(wanted))
        .map(|(_, _, score)| *score)
        .ok_or_else(|| UnknownIntensity { criterion, label: label.to_string() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no expert scores present")]
pub struct NoExperts;

/// Per-criterion arithmetic mean across expert sheets. Sums are taken over
/// integers, so the result does not depend on expert order.
pub fn aggregate_experts(
    scores: &BTreeMap<String, CriterionScores>,
) -> Result<[f64; 5], NoExperts> {
    if scores.is_empty() {
        return Err(NoExperts);
    }
    let count = scores.len() as f64;
    let mut row = [0.0; 5];
    for (slot, criterion) in row.iter_mut().zip(Criterion::ALL) {
        let sum: u32 = scores.values().map(|s| u32::from(s.get(criterion))).sum();
        *slot = f64::from(sum) / count;
    }
    Ok(row)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("UCA {uca_id}: no expert scores")]
pub struct MissingScores {
    pub uca_id: String,
}

/// Aggregated raw score matrix with one row per UCA, in dataset order.
pub fn score_matrix(dataset: &Dataset) -> Result<ScoreMatrix, MissingScores> {
    let mut ids = Vec::with_capacity(dataset.ucas().len());
    let mut rows = Vec::with_capacity(dataset.ucas().len());
    for uca in dataset.ucas() {
        let row = aggregate_experts(&uca.expert_scores)
            .map_err(|_| MissingScores { uca_id: uca.id.clone() })?;
        ids.push(uca.id.clone());
        rows.push(row);
    }
    Ok(ScoreMatrix::new(ids, rows))
}

// -- wire format ------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub sub_loss_id: String,
    pub parent: String,
    pub dal: String,
    pub description: String,
    pub pms: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerRow {
    pub controller_id: String,
    pub name: String,
    pub hierarchy_level: u32,
    pub cif: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcaRow {
    pub uca_id: String,
    pub controller_id: String,
    pub description: String,
    pub loss_links: Vec<String>,
}

/// A score cell: a number, or a canonical intensity label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoreValue {
    Number(u8),
    Label(String),
}

impl ScoreValue {
    fn resolve(&self, criterion: Criterion) -> Result<u8, String> {
        match self {
            ScoreValue::Number(n) => Ok(*n),
            ScoreValue::Label(label) => {
                score_intensity(criterion, label).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub uca_id: String,
    pub expert_id: String,
    pub operational_disruption: ScoreValue,
    pub criticality: ScoreValue,
    pub detectability: ScoreValue,
    pub stakeholder_effect: ScoreValue,
    pub likelihood: ScoreValue,
}

impl ScoreRow {
    fn cell(&self, criterion: Criterion) -> &ScoreValue {
        match criterion {
            Criterion::OperationalDisruption => &self.operational_disruption,
            Criterion::Criticality => &self.criticality,
            Criterion::Detectability => &self.detectability,
            Criterion::StakeholderEffect => &self.stakeholder_effect,
            Criterion::Likelihood => &self.likelihood,
        }
    }

    fn to_scores(&self) -> Result<CriterionScores, String> {
        let mut values = [0u8; 5];
        for (slot, criterion) in values.iter_mut().zip(Criterion::ALL) {
            *slot = self.cell(criterion).resolve(criterion)?;
        }
        CriterionScores::new(values[0], values[1], values[2], values[3], values[4])
            .map_err(|e| e.to_string())
    }
}

/// The JSON bundle: all four arrays in one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub losses: Vec<LossRow>,
    pub controllers: Vec<ControllerRow>,
    pub ucas: Vec<UcaRow>,
    #[serde(default)]
    pub scores: Vec<ScoreRow>,
}

impl DatasetFile {
    /// Canonical view of a dataset: original ordering, numeric scores.
    pub fn from_dataset(dataset: &Dataset) -> DatasetFile {
        DatasetFile {
            losses: dataset
                .sub_losses()
                .iter()
                .map(|loss| LossRow {
                    sub_loss_id: loss.id.clone(),
                    parent: loss.parent_loss.clone(),
                    dal: loss.dal_level.as_str().to_string(),
                    description: loss.description.clone(),
                    pms: loss.pms,
                })
                .collect(),
            controllers: dataset
                .controllers()
                .iter()
                .map(|controller| ControllerRow {
                    controller_id: controller.id.clone(),
                    name: controller.name.clone(),
                    hierarchy_level: controller.hierarchy_level,
                    cif: Some(controller.cif),
                })
                .collect(),
            ucas: dataset
                .ucas()
                .iter()
                .map(|uca| UcaRow {
                    uca_id: uca.id.clone(),
                    controller_id: uca.controller_id.clone(),
                    description: uca.description.clone(),
                    loss_links: uca.loss_links.iter().cloned().collect(),
                })
                .collect(),
            scores: dataset
                .ucas()
                .iter()
                .flat_map(|uca| {
                    uca.expert_scores.iter().map(|(expert_id, scores)| ScoreRow {
                        uca_id: uca.id.clone(),
                        expert_id: expert_id.clone(),
                        operational_disruption: ScoreValue::Number(
                            scores.get(Criterion::OperationalDisruption),
                        ),
                        criticality: ScoreValue::Number(scores.get(Criterion::Criticality)),
                        detectability: ScoreValue::Number(scores.get(Criterion::Detectability)),
                        stakeholder_effect: ScoreValue::Number(
                            scores.get(Criterion::StakeholderEffect),
                        ),
                        likelihood: ScoreValue::Number(scores.get(Criterion::Likelihood)),
                    })
                })
                .collect(),
        }
    }
}

/// Canonical JSON rendering: stable field order, numeric scores, two-space
/// indentation, trailing newline. Reparsing and reserializing a canonical
/// bundle reproduces it byte for byte.
pub fn to_canonical_json(dataset: &Dataset) -> String {
    let mut out = serde_json::to_string_pretty(&DatasetFile::from_dataset(dataset))
        .expect("dataset serializes");
    out.push('\n');
    out
}

// -- parsing ----------------------------------------------------------------

/// Per-row source lines, parallel to the arrays of a [`DatasetFile`].
/// Empty when the source is a JSON bundle.
#[derive(Debug, Default)]
struct LineIndex {
    losses: Vec<u64>,
    controllers: Vec<u64>,
    ucas: Vec<u64>,
    scores: Vec<u64>,
}

#[derive(Debug)]
struct Origin {
    losses: PathBuf,
    controllers: PathBuf,
    ucas: PathBuf,
    scores: PathBuf,
}

/// Parses and cross-links a dataset from the manifest's files.
pub fn parse_dataset(manifest: &DatasetManifest) -> Result<Parsed, IngestError> {
    match manifest {
        DatasetManifest::Files { losses, controllers, ucas, scores } => {
            let (loss_rows, loss_lines) = read_losses_csv(losses)?;
            let (controller_rows, controller_lines) = read_controllers_csv(controllers)?;
            let (uca_rows, uca_lines) = read_ucas_csv(ucas)?;
            let (score_rows, score_lines) = match scores {
                Some(path) => read_scores_csv(path)?,
                None => (Vec::new(), Vec::new()),
            };
            let file = DatasetFile {
                losses: loss_rows,
                controllers: controller_rows,
                ucas: uca_rows,
                scores: score_rows,
            };
            let lines = LineIndex {
                losses: loss_lines,
                controllers: controller_lines,
                ucas: uca_lines,
                scores: score_lines,
            };
            let origin = Origin {
                losses: losses.clone(),
                controllers: controllers.clone(),
                ucas: ucas.clone(),
                scores: scores.clone().unwrap_or_default(),
            };
            let mut parsed = assemble(file, lines, origin)?;
            if scores.is_none() {
                parsed.warnings.push("no score sheet file provided".to_string());
            }
            Ok(parsed)
        }
        DatasetManifest::Bundle { path } => {
            let text = fs::read_to_string(path)
                .map_err(|source| IngestError::File { path: path.clone(), source })?;
            parse_bundle_str(&text, path)
        }
    }
}

/// Parses a JSON bundle held in memory. `path` is only used in messages.
pub fn parse_bundle_str(text: &str, path: &Path) -> Result<Parsed, IngestError> {
    let file: DatasetFile = serde_json::from_str(text).map_err(|e| IngestError::Format {
        path: path.to_path_buf(),
        line: Some(e.line() as u64),
        message: e.to_string(),
    })?;
    let origin = Origin {
        losses: path.to_path_buf(),
        controllers: path.to_path_buf(),
        ucas: path.to_path_buf(),
        scores: path.to_path_buf(),
    };
    assemble(file, LineIndex::default(), origin)
}

fn assemble(file: DatasetFile, lines: LineIndex, origin: Origin) -> Result<Parsed, IngestError> {
    let mut warnings = Vec::new();

    let mut sub_losses = Vec::with_capacity(file.losses.len());
    for (idx, row) in file.losses.iter().enumerate() {
        let dal_level = DalLevel::parse(&row.dal).ok_or_else(|| IngestError::Format {
            path: origin.losses.clone(),
            line: lines.losses.get(idx).copied(),
            message: format!("unknown severity guideword {:?}", row.dal),
        })?;
        sub_losses.push(SubLoss {
            id: row.sub_loss_id.clone(),
            parent_loss: row.parent.clone(),
            dal_level,
            description: row.description.clone(),
            pms: row.pms,
        });
    }

    let controllers = resolve_controllers(&file.controllers, &mut warnings)?;

    let mut ucas: Vec<UcaRecord> = file
        .ucas
        .iter()
        .map(|row| UcaRecord {
            id: row.uca_id.clone(),
            controller_id: row.controller_id.clone(),
            description: row.description.clone(),
            loss_links: row
                .loss_links
                .iter()
                .map(|link| link.trim().to_string())
                .filter(|link| !link.is_empty())
                .collect(),
            expert_scores: BTreeMap::new(),
        })
        .collect();
    if ucas.is_empty() {
        warnings.push(format!("{}: no UCA records", origin.ucas.display()));
    }

    let mut link_violations = Vec::new();
    for (idx, row) in file.scores.iter().enumerate() {
        let line = lines.scores.get(idx).copied();
        let scores = row.to_scores().map_err(|message| IngestError::Format {
            path: origin.scores.clone(),
            line,
            message,
        })?;
        let locus = Locus::Score {
            uca_id: row.uca_id.clone(),
            expert_id: row.expert_id.clone(),
        };
        let at = line.map(|l| format!(" ({} line {l})", file_name(&origin.scores))).unwrap_or_default();
        match ucas.iter_mut().find(|uca| uca.id == row.uca_id) {
            Some(uca) => {
                if uca.expert_scores.insert(row.expert_id.clone(), scores).is_some() {
                    link_violations
                        .push(Violation::new(locus, format!("duplicate score sheet{at}")));
                }
            }
            None => link_violations
                .push(Violation::new(locus, format!("score sheet for unknown UCA{at}"))),
        }
    }

    if !file.scores.is_empty() {
        let unscored: Vec<&str> = ucas
            .iter()
            .filter(|uca| uca.expert_scores.is_empty())
            .map(|uca| uca.id.as_str())
            .collect();
        if !unscored.is_empty() {
            warnings.push(format!("UCAs without score sheets: {}", unscored.join(", ")));
        }
    }

    let mut violations = link_violations;
    let dataset = match Dataset::new(sub_losses, controllers, ucas) {
        Ok(dataset) => {
            if violations.is_empty() {
                dataset
            } else {
                return Err(IngestError::Invalid(Violations(violations)));
            }
        }
        Err(Violations(dataset_violations)) => {
            violations.extend(annotate(dataset_violations, &lines, &origin, &file));
            return Err(IngestError::Invalid(Violations(violations)));
        }
    };

    Ok(Parsed { dataset, warnings })
}

/// Fills in controller impact weights. Explicit weights win; when none are
/// given they are derived from hierarchy positions. Mixing the two is an
/// error, and explicit weights that contradict the hierarchy produce a
/// warning.
fn resolve_controllers(
    rows: &[ControllerRow],
    warnings: &mut Vec<String>,
) -> Result<Vec<Controller>, IngestError> {
    let explicit: Vec<Option<u32>> = rows.iter().map(|row| row.cif).collect();
    let levels: Vec<u32> = rows.iter().map(|row| row.hierarchy_level).collect();

    let cifs: Vec<u32> = if explicit.iter().all(Option::is_none) && !rows.is_empty() {
        sif::derive_cif_values(&levels).map_err(|e| {
            IngestError::Invalid(Violations(vec![Violation::new(
                Locus::Dataset,
                format!("cannot derive cif from hierarchy: {e}"),
            )]))
        })?
    } else {
        let missing: Vec<Violation> = rows
            .iter()
            .filter(|row| row.cif.is_none())
            .map(|row| {
                Violation::new(
                    Locus::Controller(row.controller_id.clone()),
                    "cif missing while other controllers specify one",
                )
            })
            .collect();
        if !missing.is_empty() {
            return Err(IngestError::Invalid(Violations(missing)));
        }
        let given: Vec<u32> = explicit.into_iter().map(Option::unwrap).collect();
        if let Ok(derived) = sif::derive_cif_values(&levels) {
            if derived != given {
                warnings.push(
                    "explicit cif values differ from the hierarchy-derived ranking; \
                     explicit values win"
                        .to_string(),
                );
            }
        }
        given
    };

    Ok(rows
        .iter()
        .zip(cifs)
        .map(|(row, cif)| Controller {
            id: row.controller_id.clone(),
            name: row.name.clone(),
            cif,
            hierarchy_level: row.hierarchy_level,
        })
        .collect())
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Appends source positions to violations where the offending row is known.
fn annotate(
    violations: Vec<Violation>,
    lines: &LineIndex,
    origin: &Origin,
    file: &DatasetFile,
) -> Vec<Violation> {
    let position = |locus: &Locus| -> Option<(String, u64)> {
        match locus {
            Locus::SubLoss(id) => file
                .losses
                .iter()
                .position(|row| row.sub_loss_id == *id)
                .and_then(|idx| lines.losses.get(idx).copied())
                .map(|line| (file_name(&origin.losses), line)),
            Locus::Controller(id) => file
                .controllers
                .iter()
                .position(|row| row.controller_id == *id)
                .and_then(|idx| lines.controllers.get(idx).copied())
                .map(|line| (file_name(&origin.controllers), line)),
            Locus::Uca(id) => file
                .ucas
                .iter()
                .position(|row| row.uca_id == *id)
                .and_then(|idx| lines.ucas.get(idx).copied())
                .map(|line| (file_name(&origin.ucas), line)),
            _ => None,
        }
    };
    violations
        .into_iter()
        .map(|violation| match position(&violation.locus) {
            Some((name, line)) => Violation {
                message: format!("{} ({name} line {line})", violation.message),
                locus: violation.locus,
            },
            None => violation,
        })
        .collect()
}

// -- CSV readers ------------------------------------------------------------

struct CsvTable {
    path: PathBuf,
    header: csv::StringRecord,
    records: Vec<(csv::StringRecord, u64)>,
}

impl CsvTable {
    fn open(path: &Path, required: &[&str]) -> Result<CsvTable, IngestError> {
        let text = fs::read_to_string(path)
            .map_err(|source| IngestError::File { path: path.to_path_buf(), source })?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| csv_format_error(path, &e))?
            .clone();
        for column in required {
            if !header.iter().any(|h| h == *column) {
                return Err(IngestError::Format {
                    path: path.to_path_buf(),
                    line: Some(1),
                    message: format!("missing column {column:?}"),
                });
            }
        }
        let mut records = Vec::new();
        for result in reader.records() {
            let record = result.map_err(|e| csv_format_error(path, &e))?;
            let line = record.position().map(|p| p.line()).unwrap_or_default();
            records.push((record, line));
        }
        Ok(CsvTable { path: path.to_path_buf(), header, records })
    }

    fn field<'r>(
        &self,
        record: &'r csv::StringRecord,
        line: u64,
        column: &str,
    ) -> Result<&'r str, IngestError> {
        let idx = self.header.iter().position(|h| h == column).expect("column checked at open");
        record.get(idx).ok_or_else(|| IngestError::Format {
            path: self.path.clone(),
            line: Some(line),
            message: format!("missing value for column {column:?}"),
        })
    }

    fn number(
        &self,
        record: &csv::StringRecord,
        line: u64,
        column: &str,
    ) -> Result<u32, IngestError> {
        let cell = self.field(record, line, column)?;
        cell.parse().map_err(|_| IngestError::Format {
            path: self.path.clone(),
            line: Some(line),
            message: format!("invalid number {cell:?} in column {column:?}"),
        })
    }
}

fn csv_format_error(path: &Path, error: &csv::Error) -> IngestError {
    let line = error.position().map(|p| p.line());
    IngestError::Format {
        path: path.to_path_buf(),
        line,
        message: error.to_string(),
    }
}

fn read_losses_csv(path: &Path) -> Result<(Vec<LossRow>, Vec<u64>), IngestError> {
    let table = CsvTable::open(path, &["sub_loss_id", "parent", "dal", "description", "pms"])?;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (record, line) in &table.records {
        rows.push(LossRow {
            sub_loss_id: table.field(record, *line, "sub_loss_id")?.to_string(),
            parent: table.field(record, *line, "parent")?.to_string(),
            dal: table.field(record, *line, "dal")?.to_string(),
            description: table.field(record, *line, "description")?.to_string(),
            pms: table.number(record, *line, "pms")?,
        });
        lines.push(*line);
    }
    Ok((rows, lines))
}

fn read_controllers_csv(path: &Path) -> Result<(Vec<ControllerRow>, Vec<u64>), IngestError> {
    let table = CsvTable::open(path, &["controller_id", "name", "hierarchy_level", "cif"])?;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (record, line) in &table.records {
        let cif_cell = table.field(record, *line, "cif")?;
        let cif = if cif_cell.is_empty() {
            None
        } else {
            Some(table.number(record, *line, "cif")?)
        };
        rows.push(ControllerRow {
            controller_id: table.field(record, *line, "controller_id")?.to_string(),
            name: table.field(record, *line, "name")?.to_string(),
            hierarchy_level: table.number(record, *line, "hierarchy_level")?,
            cif,
        });
        lines.push(*line);
    }
    Ok((rows, lines))
}

fn read_ucas_csv(path: &Path) -> Result<(Vec<UcaRow>, Vec<u64>), IngestError> {
    let table = CsvTable::open(path, &["uca_id", "controller_id", "description", "loss_links"])?;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (record, line) in &table.records {
        rows.push(UcaRow {
            uca_id: table.field(record, *line, "uca_id")?.to_string(),
            controller_id: table.field(record, *line, "controller_id")?.to_string(),
            description: table.field(record, *line, "description")?.to_string(),
            loss_links: table
                .field(record, *line, "loss_links")?
                .split(';')
                .map(|link| link.trim().to_string())
                .filter(|link| !link.is_empty())
                .collect(),
        });
        lines.push(*line);
    }
    Ok((rows, lines))
}

fn read_scores_csv(path: &Path) -> Result<(Vec<ScoreRow>, Vec<u64>), IngestError> {
    let columns: Vec<&str> = ["uca_id", "expert_id"]
        .into_iter()
        .chain(Criterion::ALL.iter().map(|c| c.key()))
        .collect();
    let table = CsvTable::open(path, &columns)?;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (record, line) in &table.records {
        let cell = |column: &str| -> Result<ScoreValue, IngestError> {
            let raw = table.field(record, *line, column)?;
            Ok(match raw.parse::<u8>() {
                Ok(n) => ScoreValue::Number(n),
                Err(_) => ScoreValue::Label(raw.to_string()),
            })
        };
        rows.push(ScoreRow {
            uca_id: table.field(record, *line, "uca_id")?.to_string(),
            expert_id: table.field(record, *line, "expert_id")?.to_string(),
            operational_disruption: cell("operational_disruption")?,
            criticality: cell("criticality")?,
            detectability: cell("detectability")?,
            stakeholder_effect: cell("stakeholder_effect")?,
            likelihood: cell("likelihood")?,
        });
        lines.push(*line);
    }
    Ok((rows, lines))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intensity_table_covers_exactly_the_canonical_labels() {
        assert_eq!(
            score_intensity(
                Criterion::Likelihood,
                "Not mitigated by pre-existing regulations and likely to occur"
            )
            .unwrap(),
            1
        );
        assert_eq!(
            score_intensity(
                Criterion::Likelihood,
                "Mitigated by pre-existing regulations and unlikely to occur"
            )
            .unwrap(),
            0
        );
        assert_eq!(score_intensity(Criterion::OperationalDisruption, "High Impact").unwrap(), 3);
        assert_eq!(score_intensity(Criterion::Detectability, "Low Detectability").unwrap(), 3);
        assert_eq!(score_intensity(Criterion::Detectability, "High Detectability").unwrap(), 1);
        assert_eq!(score_intensity(Criterion::StakeholderEffect, "minimal impact").unwrap(), 1);

        for (criterion, label, score) in INTENSITIES {
            assert_eq!(score_intensity(criterion, label).unwrap(), score);
        }
        // Labels never leak across criteria.
        assert!(score_intensity(Criterion::Criticality, "High Impact").is_err());
        assert!(score_intensity(Criterion::OperationalDisruption, "nonsense").is_err());
    }

    #[test]
    fn aggregation_is_the_mean_and_order_free() {
        let mut scores = BTreeMap::new();
        scores.insert("E1".to_string(), CriterionScores::new(3, 3, 2, 3, 0).unwrap());
        assert_eq!(aggregate_experts(&scores).unwrap(), [3.0, 3.0, 2.0, 3.0, 0.0]);

        scores.insert("E2".to_string(), CriterionScores::new(2, 3, 2, 3, 1).unwrap());
        let mean = aggregate_experts(&scores).unwrap();
        assert_eq!(mean[0], 2.5);
        assert_eq!(mean[4], 0.5);

        let mut reversed = BTreeMap::new();
        for (k, v) in scores.iter().rev() {
            reversed.insert(k.clone(), *v);
        }
        assert_eq!(aggregate_experts(&reversed).unwrap(), mean);
    }

    #[test]
    fn empty_expert_map_is_an_error() {
        assert_eq!(aggregate_experts(&BTreeMap::new()), Err(NoExperts));
    }

    #[test]
    fn bundle_accepts_labels_and_numbers_for_scores() {
        let bundle = r#"{
            "losses": [
                {"sub_loss_id": "L1.1", "parent": "L1", "dal": "catastrophic", "description": "", "pms": 20}
            ],
            "controllers": [
                {"controller_id": "C1", "name": "C1", "hierarchy_level": 1, "cif": 1}
            ],
            "ucas": [
                {"uca_id": "U1", "controller_id": "C1", "description": "", "loss_links": ["L1.1"]}
            ],
            "scores": [
                {"uca_id": "U1", "expert_id": "E1",
                 "operational_disruption": "High Impact", "criticality": 2,
                 "detectability": "Low Detectability", "stakeholder_effect": 1,
                 "likelihood": 0}
            ]
        }"#;
        let parsed = parse_bundle_str(bundle, std::path::Path::new("inline.json")).unwrap();
        let scores = parsed.dataset.uca("U1").unwrap().expert_scores["E1"];
        assert_eq!(scores.as_row(), [3.0, 2.0, 3.0, 1.0, 0.0]);
    }

    #[test]
    fn score_value_resolution() {
        assert_eq!(ScoreValue::Number(2).resolve(Criterion::Criticality).unwrap(), 2);
        assert_eq!(
            ScoreValue::Label("Moderate Risk".into()).resolve(Criterion::Criticality).unwrap(),
            2
        );
        assert!(ScoreValue::Label("Moderate Risk".into())
            .resolve(Criterion::Detectability)
            .is_err());
    }
}
