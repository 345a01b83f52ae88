//! Synthetic environment and replay harness.
//!
//! The proprietary interaction logs behind the original evaluation are not
//! available, so the harness builds a synthetic stand-in with the same
//! statistical shape: clustered situations over generated (or supplied)
//! taxonomies, a per-cluster document pool, and Bernoulli click
//! probabilities per (cluster, document). Policies are replayed over the
//! identical environment randomness — common random numbers for the
//! situation stream and click draws, an independent stream for policy
//! randomness — so that differences in cumulative click-through rate
//! reflect policy behaviour rather than luck.

mod env;
mod replay;
mod sweep;

pub use env::{DecoyConfig, Environment, EnvironmentConfig};
pub use replay::{
    compare_policies, run_trials, Comparison, ComparisonRow, CtrPoint, CtrSeries, PolicyEntry,
    RunOutcome, TrialOptions, TrialRecord,
};
pub use sweep::{threshold_sweep, write_sweep_csv, GoldClustering, SweepPoint, SweepResult};

use thiserror::Error;

use crate::policies::PolicyError;
use crate::situation::SituationError;
use crate::taxonomy::TaxonomyError;
use crate::usermodel::UserModelError;

#[derive(Debug, Error)]
pub enum SimulatorError {
    #[error("{name} must be at least {minimum}, got {value}")]
    CountTooSmall {
        name: &'static str,
        minimum: usize,
        value: usize,
    },
    #[error("{name} must be a probability in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("critical cluster count {critical} exceeds the cluster count {clusters}")]
    TooManyCriticalClusters { critical: usize, clusters: usize },
    #[error(
        "docs_per_situation {docs} leaves no ordinary documents \
         (need at least {needed} for this layout)"
    )]
    PoolTooSmall { docs: usize, needed: usize },
    #[error("situation count {situations} is below the cluster count {clusters}")]
    TooFewSituations { situations: usize, clusters: usize },
    #[error("taxonomy for {dimension} has no internal nodes to anchor clusters on")]
    NoAnchors { dimension: crate::taxonomy::Dimension },
    #[error("case base must hold at least one past situation before trials start")]
    EmptyCaseBase,
    #[error("the contextual policy needs a non-empty critical-situation set")]
    MissingCriticalSet,
    #[error("gold clustering holds fewer than two situations; nothing to sweep")]
    EmptyGold,
    #[error("threshold {value} outside [0, {max}]")]
    ThresholdOutOfRange { value: f64, max: f64 },
    #[error("no threshold values supplied")]
    EmptyThresholdGrid,
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Situation(#[from] SituationError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    UserModel(#[from] UserModelError),
}
