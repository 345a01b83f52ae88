//! Exploration/exploitation strategies over candidate document statistics.
//!
//! Every policy answers the same two questions each trial: what exploration
//! rate applies right now ([`effective_epsilon`]), and which documents go
//! into the ranked list ([`select_documents`]). The list is built slot by
//! slot without replacement: at each slot a fresh uniform draw `q` either
//! exceeds the exploration rate — pick the remaining candidate with the
//! highest click-through rate, ties to the smallest document id — or not,
//! in which case a remaining candidate is picked uniformly at random. The
//! comparison is strict (`q > epsilon`) with `q` on `[0, 1)`, so the
//! expected number of explored slots per trial is `epsilon * n`.
//!
//! The exploration rate itself comes in several flavours:
//!
//! - [`PolicyKind::Exploit`]: always 0 (pure exploitation).
//! - [`PolicyKind::EpsGreedy`]: a constant.
//! - [`PolicyKind::EpsBeginning`]: 1 during the first `epsilon * I` trials,
//!   0 afterwards.
//! - [`PolicyKind::EpsDecreasingRatio`]: `epsilon0 / t`.
//! - [`PolicyKind::EpsDecreasingStep`]: starts high and drops by a fixed
//!   step every period, floored at 0.
//! - [`PolicyKind::ExponentiatedGradient`]: samples the rate from a finite
//!   candidate set whose weights receive multiplicative updates on clicks.
//! - [`PolicyKind::Contextual`]: derives the rate from how close the
//!   current situation is to a known critical one, and exploits outright
//!   inside critical situations (see [`contextual_select`]).
//!
//! Policies are deterministic given their seeded random state; a policy
//! instance is not meant for concurrent use.

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::situation::{
    criticality, CriticalSituationSet, Criticality, SimilarityWeights, Situation, SituationError,
    TaxonomySet,
};
use crate::usermodel::{CaseBase, DocumentId, DocumentStats, UserModelError};

/// Which exploration/exploitation strategy to run.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    /// Pure exploitation: the constant-epsilon policy at 0.
    Exploit,
    /// Constant exploration rate.
    EpsGreedy { epsilon: f64 },
    /// Explore every slot during the first `epsilon * total_iterations`
    /// trials, then exploit only.
    EpsBeginning { epsilon: f64, total_iterations: u64 },
    /// Exploration rate `epsilon0 / t` at trial `t`.
    EpsDecreasingRatio { epsilon0: f64 },
    /// Starts at `start` and decreases by `step` every `period` trials,
    /// never below 0.
    EpsDecreasingStep { start: f64, step: f64, period: u64 },
    /// Samples the rate from `candidates` under exponentiated-gradient
    /// weights (see [`EgState`]).
    ExponentiatedGradient {
        candidates: Vec<f64>,
        floor: f64,
        learning_rate: f64,
    },
    /// Situation-adaptive rate from the criticality test.
    Contextual,
}

impl PolicyKind {
    /// Checks the parameter ranges once, at configuration time.
    pub fn validate(&self) -> Result<(), PolicyError> {
        let check_eps = |value: f64| {
            if value.is_finite() && (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(PolicyError::InvalidEpsilon { value })
            }
        };
        match self {
            PolicyKind::Exploit | PolicyKind::Contextual => Ok(()),
            PolicyKind::EpsGreedy { epsilon } => check_eps(*epsilon),
            PolicyKind::EpsBeginning {
                epsilon,
                total_iterations,
            } => {
                check_eps(*epsilon)?;
                if *total_iterations < 1 {
                    return Err(PolicyError::InvalidHorizon);
                }
                Ok(())
            }
            PolicyKind::EpsDecreasingRatio { epsilon0 } => check_eps(*epsilon0),
            PolicyKind::EpsDecreasingStep { start, step, period } => {
                check_eps(*start)?;
                if !step.is_finite() || *step < 0.0 {
                    return Err(PolicyError::InvalidStep { value: *step });
                }
                if *period < 1 {
                    return Err(PolicyError::InvalidPeriod);
                }
                Ok(())
            }
            PolicyKind::ExponentiatedGradient {
                candidates,
                floor,
                learning_rate,
            } => {
                if candidates.is_empty() {
                    return Err(PolicyError::EmptyCandidates);
                }
                for &c in candidates {
                    check_eps(c)?;
                }
                if !floor.is_finite() || *floor <= 0.0 || *floor >= 1.0 {
                    return Err(PolicyError::InvalidFloor { value: *floor });
                }
                if !learning_rate.is_finite() || *learning_rate <= 0.0 {
                    return Err(PolicyError::InvalidLearningRate {
                        value: *learning_rate,
                    });
                }
                Ok(())
            }
        }
    }

    /// Canonical short name, used in comparison output.
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::Exploit => "exploit",
            PolicyKind::EpsGreedy { .. } => "eps_greedy",
            PolicyKind::EpsBeginning { .. } => "eps_beginning",
            PolicyKind::EpsDecreasingRatio { .. } => "eps_decreasing_ratio",
            PolicyKind::EpsDecreasingStep { .. } => "eps_decreasing_step",
            PolicyKind::ExponentiatedGradient { .. } => "eg",
            PolicyKind::Contextual => "contextual",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("epsilon must lie in [0, 1], got {value}")]
    InvalidEpsilon { value: f64 },
    #[error("total iteration count must be at least 1")]
    InvalidHorizon,
    #[error("step size must be non-negative and finite, got {value}")]
    InvalidStep { value: f64 },
    #[error("decrease period must be at least 1")]
    InvalidPeriod,
    #[error("epsilon candidate set must not be empty")]
    EmptyCandidates,
    #[error("exploration floor must lie in (0, 1), got {value}")]
    InvalidFloor { value: f64 },
    #[error("learning rate must be positive and finite, got {value}")]
    InvalidLearningRate { value: f64 },
    #[error("candidate index {index} out of range ({len} candidates)")]
    CandidateIndex { index: usize, len: usize },
    #[error("no candidate documents to select from")]
    EmptyCandidatePool,
    #[error("the contextual policy needs nearest-critical similarity inputs")]
    MissingEpsilonInputs,
    #[error("the exponentiated-gradient policy needs its sampler state")]
    MissingEgState,
    #[error(transparent)]
    Situation(#[from] SituationError),
    #[error(transparent)]
    UserModel(#[from] UserModelError),
}

/// Sampler state for the exponentiated-gradient meta-policy: one positive
/// weight per epsilon candidate, mixed with a uniform exploration floor.
///
/// Sampling probabilities are
/// `p_i = (1 - floor) * w_i / sum(w) + floor / k`, so every candidate keeps
/// probability at least `floor / k`. A click multiplies the chosen
/// candidate's weight by `exp(learning_rate / p_i)`; a miss leaves the
/// weights unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct EgState {
    candidates: Vec<f64>,
    weights: Vec<f64>,
    floor: f64,
    learning_rate: f64,
}

impl EgState {
    pub fn new(
        candidates: Vec<f64>,
        floor: f64,
        learning_rate: f64,
    ) -> Result<Self, PolicyError> {
        PolicyKind::ExponentiatedGradient {
            candidates: candidates.clone(),
            floor,
            learning_rate,
        }
        .validate()?;
        let weights = vec![1.0; candidates.len()];
        Ok(EgState {
            candidates,
            weights,
            floor,
            learning_rate,
        })
    }

    /// The default candidate grid {0.0, 0.1, ..., 0.9}.
    pub fn default_candidates() -> Vec<f64> {
        (0..10).map(|i| i as f64 / 10.0).collect()
    }

    pub fn candidates(&self) -> &[f64] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Current sampling distribution over the candidates.
    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        let k = self.candidates.len() as f64;
        self.weights
            .iter()
            .map(|w| (1.0 - self.floor) * w / total + self.floor / k)
            .collect()
    }

    /// Samples a candidate index and its epsilon value.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (usize, f64) {
        let probs = self.probabilities();
        let draw: f64 = rng.random();
        let mut cdf = 0.0;
        for (i, p) in probs.iter().enumerate() {
            cdf += p;
            if draw < cdf {
                return (i, self.candidates[i]);
            }
        }
        // Rounding left the draw past the accumulated mass.
        let last = self.candidates.len() - 1;
        (last, self.candidates[last])
    }

    /// Applies the multiplicative update for the candidate that produced
    /// this trial: weight times `exp(learning_rate * reward / p)` where `p`
    /// is its pre-update sampling probability. Weights are renormalized to
    /// unit sum afterwards, which leaves the distribution unchanged and
    /// keeps repeated updates from overflowing.
    pub fn update(&mut self, chosen: usize, clicked: bool) -> Result<(), PolicyError> {
        if chosen >= self.candidates.len() {
            return Err(PolicyError::CandidateIndex {
                index: chosen,
                len: self.candidates.len(),
            });
        }
        if clicked {
            let p = self.probabilities()[chosen];
            self.weights[chosen] *= (self.learning_rate / p).exp();
            let total: f64 = self.weights.iter().sum();
            for w in &mut self.weights {
                *w /= total;
            }
        }
        Ok(())
    }
}

/// Inputs the contextual policy needs to derive its rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonInputs {
    pub nearest_critical_similarity: f64,
    pub threshold: f64,
}

/// Everything a selection round sees: the candidate pool, the requested
/// list size, the 1-based trial index, and (for the contextual policy) the
/// criticality inputs. Random state is passed alongside.
#[derive(Debug)]
pub struct SelectionContext<'a> {
    pub candidates: &'a BTreeMap<DocumentId, DocumentStats>,
    pub list_size: usize,
    pub iteration: u64,
    pub epsilon_inputs: Option<EpsilonInputs>,
}

/// The exploration rate resolved for one trial, plus the sampled candidate
/// index when the exponentiated-gradient policy chose it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonDecision {
    pub epsilon: f64,
    pub eg_choice: Option<usize>,
}

/// Resolves the exploration rate a policy uses at `ctx.iteration`.
/// Always in `[0, 1]`.
pub fn effective_epsilon<R: Rng>(
    kind: &PolicyKind,
    ctx: &SelectionContext<'_>,
    eg: Option<&EgState>,
    rng: &mut R,
) -> Result<EpsilonDecision, PolicyError> {
    let t = ctx.iteration.max(1);
    let plain = |epsilon: f64| EpsilonDecision {
        epsilon,
        eg_choice: None,
    };
    let decision = match kind {
        PolicyKind::Exploit => plain(0.0),
        PolicyKind::EpsGreedy { epsilon } => plain(*epsilon),
        PolicyKind::EpsBeginning {
            epsilon,
            total_iterations,
        } => {
            if (t as f64) <= epsilon * (*total_iterations as f64) {
                plain(1.0)
            } else {
                plain(0.0)
            }
        }
        PolicyKind::EpsDecreasingRatio { epsilon0 } => plain((epsilon0 / t as f64).min(1.0)),
        PolicyKind::EpsDecreasingStep { start, step, period } => {
            let drops = (t - 1) / period;
            plain((start - step * drops as f64).clamp(0.0, *start))
        }
        PolicyKind::ExponentiatedGradient { .. } => {
            let eg = eg.ok_or(PolicyError::MissingEgState)?;
            let (choice, epsilon) = eg.sample(rng);
            EpsilonDecision {
                epsilon,
                eg_choice: Some(choice),
            }
        }
        PolicyKind::Contextual => {
            let inputs = ctx
                .epsilon_inputs
                .ok_or(PolicyError::MissingEpsilonInputs)?;
            plain(crate::situation::epsilon_from_similarity(
                inputs.nearest_critical_similarity,
                inputs.threshold,
            ))
        }
    };
    debug_assert!((0.0..=1.0).contains(&decision.epsilon));
    Ok(decision)
}

/// Builds the ranked list: `min(list_size, pool)` distinct documents, each
/// slot exploiting (highest CTR, ties to the smallest id) when the fresh
/// uniform draw exceeds `epsilon` and exploring uniformly otherwise.
pub fn select_documents<R: Rng>(
    ctx: &SelectionContext<'_>,
    epsilon: f64,
    rng: &mut R,
) -> Result<Vec<DocumentId>, PolicyError> {
    if ctx.candidates.is_empty() {
        return Err(PolicyError::EmptyCandidatePool);
    }
    // Id-sorted remaining pool; first-maximum scan gives the id tie-break.
    let mut remaining: Vec<(&DocumentId, f64)> = ctx
        .candidates
        .iter()
        .map(|(id, stats)| (id, stats.ctr()))
        .collect();
    let slots = ctx.list_size.min(remaining.len());
    let mut selected = Vec::with_capacity(slots);
    for _ in 0..slots {
        let q: f64 = rng.random();
        let pick = if q > epsilon {
            let mut best = 0;
            for (i, &(_, ctr)) in remaining.iter().enumerate().skip(1) {
                if ctr > remaining[best].1 {
                    best = i;
                }
            }
            best
        } else {
            rng.random_range(0..remaining.len())
        };
        selected.push(remaining.remove(pick).0.clone());
    }
    Ok(selected)
}

/// Outcome of one contextual selection round.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualSelection {
    pub recommended: Vec<DocumentId>,
    pub criticality: Criticality,
    /// Whether the current situation was newly inserted into the critical
    /// set.
    pub registered: bool,
}

/// The situation-adaptive selection round: test the current situation
/// against the critical set; inside a critical situation exploit only and
/// remember the situation as critical, otherwise explore at the
/// distance-scaled rate. Candidates come from the nearest past situation's
/// case-base entry.
#[allow(clippy::too_many_arguments)]
pub fn contextual_select<R: Rng>(
    current: &Situation,
    critical: &mut CriticalSituationSet,
    case_base: &CaseBase,
    nearest_past: &Situation,
    list_size: usize,
    weights: &SimilarityWeights,
    taxonomies: &TaxonomySet,
    rng: &mut R,
) -> Result<ContextualSelection, PolicyError> {
    let verdict = criticality(current, critical, weights, taxonomies)?;
    let registered = if verdict.is_critical {
        critical.register(current.clone())
    } else {
        false
    };
    let candidates = case_base.candidate_documents(nearest_past)?;
    let ctx = SelectionContext {
        candidates,
        list_size,
        iteration: 1,
        epsilon_inputs: None,
    };
    let recommended = select_documents(&ctx, verdict.epsilon, rng)?;
    Ok(ContextualSelection {
        recommended,
        criticality: verdict,
        registered,
    })
}
