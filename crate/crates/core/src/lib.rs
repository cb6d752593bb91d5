//! Prioritization of unsafe control actions (UCAs) identified by a
//! system-theoretic hazard analysis.
//!
//! Three per-UCA factors are combined:
//!
//! * a severity weight inherited from the worst linked sub-loss,
//! * an impact weight inherited from the issuing controller's position in
//!   the control hierarchy (their product is the severity-impact factor),
//! * an expert-judgement score obtained by normalizing criterion scores,
//!   summing them, and measuring rank stability under a Monte Carlo
//!   perturbation of the inputs.
//!
//! The result is placed on a dynamically scaled 5x5 priority matrix with
//! five levels, P1 (urgent) through P5 (very low).

pub mod ej;
pub mod ingest;
pub mod matrix;
pub mod mcs;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod sif;

pub use ingest::{parse_dataset, DatasetManifest, IngestError, Parsed};
pub use model::{Dataset, Priority, Stability, Violations};
pub use pipeline::{run_analysis, Analysis, AnalysisError, AnalysisOptions};
