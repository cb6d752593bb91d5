//! Severity-impact evaluation: per-UCA severity from linked sub-losses,
//! controller impact from the control hierarchy, and their product.

use crate::model::{Controller, Dataset, SubLoss, UcaRecord};

/// Severity-impact breakdown for one UCA.
#[derive(Debug, Clone, PartialEq)]
pub struct SifResult {
    pub uca_id: String,
    pub pms: u32,
    /// The linked sub-loss whose weight governs the UCA.
    pub governing_sub_loss: String,
    pub cif: u32,
    pub sif: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SifError {
    #[error("UCA {uca}: no loss link")]
    EmptyLinks { uca: String },
    #[error("UCA {uca}: unresolved sub-loss {link}")]
    UnresolvedLink { uca: String, link: String },
    #[error("UCA {uca}: unresolved controller {controller}")]
    UnresolvedController { uca: String, controller: String },
    #[error("duplicate hierarchy level {level}")]
    DuplicateLevel { level: u32 },
}

/// Returns the highest severity weight among the linked sub-losses and the
/// sub-loss id that carries it. Weights are unique per dataset, so the
/// governing sub-loss is unambiguous.
pub fn assign_pms(uca: &UcaRecord, losses: &[SubLoss]) -> Result<(u32, String), SifError> {
    let mut best: Option<(u32, &str)> = None;
    for link in &uca.loss_links {
        let loss = losses
            .iter()
            .find(|l| l.id == *link)
            .ok_or_else(|| SifError::UnresolvedLink { uca: uca.id.clone(), link: link.clone() })?;
        if best.is_none_or(|(pms, _)| loss.pms > pms) {
            best = Some((loss.pms, &loss.id));
        }
    }
    best.map(|(pms, id)| (pms, id.to_string()))
        .ok_or_else(|| SifError::EmptyLinks { uca: uca.id.clone() })
}

/// A UCA inherits the impact weight of the controller that issues it.
pub fn lookup_cif(uca: &UcaRecord, controllers: &[Controller]) -> Result<u32, SifError> {
    controllers
        .iter()
        .find(|c| c.id == uca.controller_id)
        .map(|c| c.cif)
        .ok_or_else(|| SifError::UnresolvedController {
            uca: uca.id.clone(),
            controller: uca.controller_id.clone(),
        })
}

/// Impact weight per hierarchy position: with `n` controllers the top level
/// receives `n` and the bottom level 1.
pub(crate) fn derive_cif_values(levels: &[u32]) -> Result<Vec<u32>, SifError> {
    for (i, level) in levels.iter().enumerate() {
        if levels[..i].contains(level) {
            return Err(SifError::DuplicateLevel { level: *level });
        }
    }
    let n = levels.len() as u32;
    Ok(levels
        .iter()
        .map(|level| {
            let above = levels.iter().filter(|other| *other < level).count() as u32;
            n - above
        })
        .collect())
}

/// Fills controller impact weights from hierarchy positions alone.
pub fn derive_cif_ranking(controllers: &[Controller]) -> Result<Vec<Controller>, SifError> {
    let levels: Vec<u32> = controllers.iter().map(|c| c.hierarchy_level).collect();
    let cifs = derive_cif_values(&levels)?;
    Ok(controllers
        .iter()
        .zip(cifs)
        .map(|(controller, cif)| Controller { cif, ..controller.clone() })
        .collect())
}

pub fn compute_sif(pms: u32, cif: u32) -> u32 {
    pms * cif
}

/// Full severity-impact evaluation of one UCA against its dataset.
pub fn evaluate(uca: &UcaRecord, dataset: &Dataset) -> Result<SifResult, SifError> {
    let (pms, governing_sub_loss) = assign_pms(uca, dataset.sub_losses())?;
    let cif = lookup_cif(uca, dataset.controllers())?;
    Ok(SifResult {
        uca_id: uca.id.clone(),
        pms,
        governing_sub_loss,
        cif,
        sif: compute_sif(pms, cif),
    })
}
