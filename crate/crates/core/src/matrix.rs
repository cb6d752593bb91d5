//! Dynamically scaled 5x5 prioritization matrix.
//!
//! Both axes are binned 0..4 against the cohort maxima (or pinned maxima,
//! when cross-run comparability matters). The judgement axis is inverted
//! first so that on both axes a larger coordinate means a worse UCA.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{Priority, PriorityRecord};

/// One cell of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub sif_scaled: u8,
    pub ej_scaled: u8,
    pub priority: Priority,
    pub ucas: Vec<String>,
}

/// The full 5x5 grid with the axis maxima it was scaled against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityMatrix {
    pub max_sif: u32,
    pub max_ej_inverted: f64,
    /// Exactly 25 cells, ordered by `sif_scaled`, then `ej_scaled`.
    pub cells: Vec<MatrixCell>,
}

impl PriorityMatrix {
    pub fn cell(&self, sif_scaled: u8, ej_scaled: u8) -> &MatrixCell {
        &self.cells[usize::from(sif_scaled) * 5 + usize::from(ej_scaled)]
    }

    /// Cell coordinates of a UCA, if it is placed anywhere.
    pub fn locate(&self, uca_id: &str) -> Option<(u8, u8)> {
        self.cells
            .iter()
            .find(|cell| cell.ucas.iter().any(|id| id == uca_id))
            .map(|cell| (cell.sif_scaled, cell.ej_scaled))
    }

    pub fn total_ucas(&self) -> usize {
        self.cells.iter().map(|cell| cell.ucas.len()).sum()
    }
}

/// Per-UCA input to the matrix builder.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixInput {
    pub uca_id: String,
    pub pms: u32,
    pub cif: u32,
    pub sif: u32,
    /// Final judgement score; lower means higher priority.
    pub ej: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MatrixOptions {
    /// Pin the severity axis instead of using the cohort maximum.
    pub fixed_max_sif: Option<u32>,
    /// Pin the inverted judgement axis instead of using the cohort maximum.
    pub fixed_max_ej_inverted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("no records to place")]
    EmptyInput,
    #[error("UCA {uca}: sif must be positive")]
    NonPositiveSif { uca: String },
    #[error("axis maximum must be positive")]
    InvalidAxisMax,
    #[error("unsupported output format {0:?}")]
    UnsupportedFormat(String),
}

/// Matrix plus the completed per-UCA records and any scaling warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOutcome {
    pub matrix: PriorityMatrix,
    /// One record per input, in input order.
    pub records: Vec<PriorityRecord>,
    pub warnings: Vec<String>,
}

/// Flips the judgement scale: the best (lowest) score maps to the cohort
/// maximum and the worst to zero.
pub fn invert_ej(ej: &[f64]) -> Vec<f64> {
    let max = ej.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ej.iter().map(|value| max - value).collect()
}

/// Bins a value against an axis maximum: `floor(value / axis_max * 4)`,
/// clamped to 0..4 so the maximum itself lands in the top bin.
///
/// A degenerate axis (`axis_max <= 0`) bins everything to 0 by convention;
/// callers are expected to warn.
pub fn scale_axis(value: f64, axis_max: f64) -> u8 {
    if axis_max <= 0.0 {
        return 0;
    }
    let bin = (value / axis_max * 4.0).floor();
    bin.clamp(0.0, 4.0) as u8
}

/// Priority level of a cell from its anti-diagonal position: the worst
/// corner (4, 4) is P1 and the opposite corner (0, 0) is P5.
pub fn cell_priority(sif_scaled: u8, ej_scaled: u8) -> Priority {
    match sif_scaled + ej_scaled {
        0 | 1 => Priority::P5,
        2 | 3 => Priority::P4,
        4 => Priority::P3,
        5 | 6 => Priority::P2,
        _ => Priority::P1,
    }
}

/// Places every record on the grid, scaling both axes against this cohort
/// (or the pinned maxima from `options`).
pub fn build_matrix(
    inputs: &[MatrixInput],
    options: &MatrixOptions,
) -> Result<MatrixOutcome, MatrixError> {
    if inputs.is_empty() {
        return Err(MatrixError::EmptyInput);
    }
    for input in inputs {
        if input.sif < 1 {
            return Err(MatrixError::NonPositiveSif { uca: input.uca_id.clone() });
        }
    }
    if options.fixed_max_sif.is_some_and(|max| max < 1)
        || options.fixed_max_ej_inverted.is_some_and(|max| max <= 0.0)
    {
        return Err(MatrixError::InvalidAxisMax);
    }

    let mut warnings = Vec::new();
    let ej_values: Vec<f64> = inputs.iter().map(|i| i.ej).collect();
    let inverted = invert_ej(&ej_values);

    let data_max_sif = inputs.iter().map(|i| i.sif).max().unwrap_or(1);
    let max_sif = options.fixed_max_sif.unwrap_or(data_max_sif);
    if max_sif < data_max_sif {
        warnings.push(format!(
            "pinned sif axis maximum {max_sif} is below the cohort maximum {data_max_sif}; \
             values beyond it land in the top bin"
        ));
    }

    let data_max_inverted = inverted.iter().copied().fold(0.0f64, f64::max);
    let max_ej_inverted = options.fixed_max_ej_inverted.unwrap_or(data_max_inverted);
    // All judgement scores equal: the axis cannot discriminate, so every
    // record sits at its own maximum and takes the top bin.
    let ej_degenerate = max_ej_inverted <= 0.0;
    if ej_degenerate {
        warnings.push(
            "judgement axis is degenerate (all EJ scores equal); \
             every UCA is placed in the top EJ bin"
                .to_string(),
        );
    } else if options.fixed_max_ej_inverted.is_some_and(|max| max < data_max_inverted) {
        warnings.push(format!(
            "pinned EJ axis maximum {max_ej_inverted} is below the cohort maximum \
             {data_max_inverted}; values beyond it land in the top bin"
        ));
    }

    let mut cells: Vec<MatrixCell> = (0..25)
        .map(|i| {
            let sif_scaled = (i / 5) as u8;
            let ej_scaled = (i % 5) as u8;
            MatrixCell {
                sif_scaled,
                ej_scaled,
                priority: cell_priority(sif_scaled, ej_scaled),
                ucas: Vec::new(),
            }
        })
        .collect();

    let mut records = Vec::with_capacity(inputs.len());
    for (input, &ej_inverted) in inputs.iter().zip(&inverted) {
        let sif_scaled = scale_axis(f64::from(input.sif), f64::from(max_sif));
        let ej_scaled = if ej_degenerate { 4 } else { scale_axis(ej_inverted, max_ej_inverted) };
        let priority = cell_priority(sif_scaled, ej_scaled);
        cells[usize::from(sif_scaled) * 5 + usize::from(ej_scaled)]
            .ucas
            .push(input.uca_id.clone());
        records.push(PriorityRecord {
            uca_id: input.uca_id.clone(),
            pms: input.pms,
            cif: input.cif,
            sif: input.sif,
            ej: input.ej,
            ej_inverted,
            sif_scaled,
            ej_scaled,
            priority,
        });
    }

    Ok(MatrixOutcome {
        matrix: PriorityMatrix { max_sif, max_ej_inverted, cells },
        records,
        warnings,
    })
}

/// Number of placed UCAs per priority level. Levels with no UCA are
/// included with a zero count, so the overview always lists all five.
pub fn priority_counts(matrix: &PriorityMatrix) -> BTreeMap<Priority, usize> {
    let mut counts: BTreeMap<Priority, usize> =
        [Priority::P1, Priority::P2, Priority::P3, Priority::P4, Priority::P5]
            .into_iter()
            .map(|p| (p, 0))
            .collect();
    for cell in &matrix.cells {
        *counts.entry(cell.priority).or_insert(0) += cell.ucas.len();
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Svg,
    Json,
    Csv,
}

impl FromStr for RenderFormat {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<RenderFormat, MatrixError> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(RenderFormat::Text),
            "svg" => Ok(RenderFormat::Svg),
            "json" => Ok(RenderFormat::Json),
            "csv" => Ok(RenderFormat::Csv),
            other => Err(MatrixError::UnsupportedFormat(other.to_string())),
        }
    }
}

impl fmt::Display for RenderFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RenderFormat::Text => "text",
            RenderFormat::Svg => "svg",
            RenderFormat::Json => "json",
            RenderFormat::Csv => "csv",
        })
    }
}

pub fn render(matrix: &PriorityMatrix, format: RenderFormat) -> Vec<u8> {
    match format {
        RenderFormat::Text => render_text(matrix).into_bytes(),
        RenderFormat::Svg => render_svg(matrix).into_bytes(),
        RenderFormat::Json => render_json(matrix).into_bytes(),
        RenderFormat::Csv => render_csv(matrix).into_bytes(),
    }
}

pub fn render_json(matrix: &PriorityMatrix) -> String {
    let mut out = serde_json::to_string_pretty(matrix).expect("matrix serializes");
    out.push('\n');
    out
}

/// Flat cell-coordinate records, one line per placed UCA.
pub fn render_csv(matrix: &PriorityMatrix) -> String {
    let mut out = String::from("uca_id,sif_scaled,ej_scaled,priority\n");
    for cell in &matrix.cells {
        for uca in &cell.ucas {
            out.push_str(&format!(
                "{},{},{},{}\n",
                uca, cell.sif_scaled, cell.ej_scaled, cell.priority
            ));
        }
    }
    out
}

pub fn render_text(matrix: &PriorityMatrix) -> String {
    let cell_text = |sif: u8, ej: u8| -> String {
        let cell = matrix.cell(sif, ej);
        if cell.ucas.is_empty() {
            "·".to_string()
        } else {
            format!("{} {}", cell.priority, cell.ucas.join(","))
        }
    };
    let mut widths = [3usize; 5];
    for (sif, width) in widths.iter_mut().enumerate() {
        for ej in 0..5 {
            *width = (*width).max(cell_text(sif as u8, ej).chars().count());
        }
    }

    let mut out = String::from("EJ (inverted)\n");
    for ej in (0..5).rev() {
        out.push_str(&format!(" {ej} |"));
        for (sif, width) in widths.iter().enumerate() {
            let text = cell_text(sif as u8, ej);
            let pad = width - text.chars().count();
            out.push_str(&format!(" {}{} |", text, " ".repeat(pad)));
        }
        out.push('\n');
    }
    out.push_str("   +");
    for width in &widths {
        out.push_str(&"-".repeat(width + 2));
        out.push('+');
    }
    out.push('\n');
    out.push_str("    ");
    for (sif, width) in widths.iter().enumerate() {
        out.push_str(&format!(" {sif}{}", " ".repeat(width + 1)));
    }
    out.push_str("SIF\n");
    out.push_str(&format!(
        "axis maxima: SIF {} | EJ (inverted) {}\n",
        matrix.max_sif, matrix.max_ej_inverted
    ));
    out
}

fn priority_color(priority: Priority) -> &'static str {
    match priority {
        Priority::P1 => "#8b0000",
        Priority::P2 => "#e53935",
        Priority::P3 => "#fb8c00",
        Priority::P4 => "#fdd835",
        Priority::P5 => "#43a047",
    }
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(matrix: &PriorityMatrix) -> String {
    const CELL: f64 = 104.0;
    const LEFT: f64 = 70.0;
    const TOP: f64 = 30.0;
    let grid = CELL * 5.0;
    let width = LEFT + grid + 20.0;
    let height = TOP + grid + 70.0;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));

    for cell in &matrix.cells {
        let x = LEFT + f64::from(cell.sif_scaled) * CELL;
        // Flip vertically: bin 4 sits at the top of the drawing.
        let y = TOP + f64::from(4 - cell.ej_scaled) * CELL;
        svg.push_str(&format!(
            "  <rect class=\"cell\" x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" \
             fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"2\"/>\n",
            priority_color(cell.priority)
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"#ffffff\">{}</text>\n",
            x + 6.0,
            y + 16.0,
            cell.priority
        ));
        let visible = cell.ucas.iter().take(6);
        for (line, uca) in visible.enumerate() {
            svg.push_str(&format!(
                "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" fill=\"#ffffff\">{}</text>\n",
                x + 6.0,
                y + 32.0 + line as f64 * 12.0,
                xml_escape(uca)
            ));
        }
        if cell.ucas.len() > 6 {
            svg.push_str(&format!(
                "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" fill=\"#ffffff\">+{} more</text>\n",
                x + 6.0,
                y + 32.0 + 6.0 * 12.0,
                cell.ucas.len() - 6
            ));
        }
    }

    for bin in 0..5u8 {
        let x = LEFT + (f64::from(bin) + 0.5) * CELL;
        svg.push_str(&format!(
            "  <text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{bin}</text>\n",
            TOP + grid + 18.0
        ));
        let y = TOP + (f64::from(4 - bin) + 0.5) * CELL;
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"12\" text-anchor=\"middle\">{bin}</text>\n",
            LEFT - 16.0
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\">SIF (max {})</text>\n",
        LEFT + grid / 2.0,
        TOP + grid + 44.0,
        matrix.max_sif
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 {:.1} {:.1})\">EJ (inverted) (max {})</text>\n",
        LEFT - 44.0,
        TOP + grid / 2.0,
        LEFT - 44.0,
        TOP + grid / 2.0,
        matrix.max_ej_inverted
    ));
    svg.push_str("</svg>\n");
    svg
}
