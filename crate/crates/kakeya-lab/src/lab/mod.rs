//! Experiment orchestration: configuration files, deterministic artifact
//! emission, and the runners behind the command-line binary.
//!
//! Every runner takes an [`ExperimentConfig`], prints a short human
//! summary, and (when an output directory is set) writes CSV, JSON, SVG,
//! or tree-text artifacts. Each artifact embeds the SHA-256 of the
//! canonical configuration, so a result file can always be traced back to
//! the exact parameters that produced it, and re-running a command with
//! the same configuration reproduces every artifact byte for byte.

pub mod config;
pub mod report;
pub mod run;

pub use config::ExperimentConfig;
pub use run::{run, Command, RunSummary};

use crate::dirtree::TreeError;
use crate::families::FamilyError;
use crate::gtree::GtreeError;
use crate::sticky::StickyError;
use crate::witness::WitnessError;

/// Anything that can stop a runner before it finishes.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Sticky(#[from] StickyError),
    #[error(transparent)]
    Gtree(#[from] GtreeError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("requested depth {depth} exceeds cap-depth {cap}")]
    DepthCap { depth: u32, cap: u32 },
}
