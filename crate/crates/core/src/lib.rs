//! Situation-aware exploration/exploitation for document recommendation.
//!
//! A mobile user's context is modelled as a *situation*: a triple of
//! concepts — location, time, social — drawn from three rooted taxonomies.
//! A case base maps past situations to per-document click statistics, and a
//! family of bandit policies turns those statistics into ranked
//! recommendation lists. The headline policy adapts its exploration rate to
//! how *critical* the current situation is: near a known critical situation
//! it exploits only, far from one it explores in proportion to the distance.
//!
//! The crate is organised around six modules:
//!
//! - [`taxonomy`]: concept trees with depth, least-common-subsumer, and
//!   concept similarity queries.
//! - [`situation`]: situation triples, weighted situation similarity,
//!   nearest-past-situation retrieval, and the critical-situation registry.
//! - [`usermodel`]: the case base of per-situation document statistics and
//!   click-through rates.
//! - [`policies`]: pluggable exploration/exploitation strategies, from pure
//!   exploitation through epsilon schedules to the situation-adaptive policy.
//! - [`simulator`]: a synthetic environment and replay harness that compares
//!   policies by cumulative click-through rate and calibrates the similarity
//!   threshold.
//! - [`config`]: the plain-text run-configuration format shared by the
//!   simulator and the command-line front end.
//!
//! Everything is deterministic given seeds: the same configuration and seed
//! reproduce the same trial stream byte for byte.

pub mod config;
pub mod policies;
pub mod simulator;
pub mod situation;
pub mod taxonomy;
pub mod usermodel;

pub use situation::{
    criticality, epsilon_from_similarity, nearest_past_situation, situation_sim,
    CriticalSituationSet, Criticality, SimilarityWeights, Situation, TaxonomySet,
};
pub use taxonomy::{ConceptId, Dimension, Taxonomy};
pub use usermodel::{CaseBase, DocumentId, DocumentStats};
