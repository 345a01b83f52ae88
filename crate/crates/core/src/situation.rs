//! Situation triples, weighted situation similarity, nearest-past-situation
//! retrieval, and the critical-situation registry.
//!
//! A [`Situation`] instantiates the user context as one concept per
//! dimension. Two situations are compared by the weighted sum of per-
//! dimension concept similarities; with the default unit weights the
//! similarity lives in `(0, 3]` and reaches 3 exactly on identical triples.
//!
//! Critical situations are situations in which only exploitation is allowed.
//! The [`CriticalSituationSet`] holds the expert-declared seed plus every
//! situation later found critical at runtime; [`criticality`] tests the
//! current situation against it and derives the adaptive exploration rate
//!
//! ```text
//! epsilon = 1 - m / B   if m < B,   0 otherwise
//! ```
//!
//! where `m` is the similarity to the nearest critical situation and `B` the
//! criticality threshold.

use std::fmt;

use thiserror::Error;

use crate::taxonomy::{ConceptId, Dimension, Taxonomy, TaxonomyError};

/// One concept per context dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Situation {
    pub location: ConceptId,
    pub time: ConceptId,
    pub social: ConceptId,
}

impl Situation {
    pub fn new(location: ConceptId, time: ConceptId, social: ConceptId) -> Self {
        Situation {
            location,
            time,
            social,
        }
    }

    pub fn get(&self, dimension: Dimension) -> &ConceptId {
        match dimension {
            Dimension::Location => &self.location,
            Dimension::Time => &self.time,
            Dimension::Social => &self.social,
        }
    }
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.location, self.time, self.social)
    }
}

/// The three taxonomies a situation resolves against.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxonomySet {
    pub location: Taxonomy,
    pub time: Taxonomy,
    pub social: Taxonomy,
}

impl TaxonomySet {
    pub fn new(location: Taxonomy, time: Taxonomy, social: Taxonomy) -> Self {
        TaxonomySet {
            location,
            time,
            social,
        }
    }

    pub fn get(&self, dimension: Dimension) -> &Taxonomy {
        match dimension {
            Dimension::Location => &self.location,
            Dimension::Time => &self.time,
            Dimension::Social => &self.social,
        }
    }

    /// Checks that every field of `s` exists in its dimension's taxonomy.
    pub fn resolve(&self, s: &Situation) -> Result<(), SituationError> {
        for dim in Dimension::ALL {
            if !self.get(dim).contains(s.get(dim)) {
                return Err(SituationError::UnresolvedConcept {
                    dimension: dim,
                    id: s.get(dim).to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Per-dimension weights of the situation similarity; all non-negative with
/// at least one positive. Defaults to 1 for every dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityWeights {
    pub location: f64,
    pub time: f64,
    pub social: f64,
}

impl SimilarityWeights {
    pub fn new(location: f64, time: f64, social: f64) -> Result<Self, SituationError> {
        let ok = [location, time, social]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0)
            && (location + time + social) > 0.0;
        if !ok {
            return Err(SituationError::InvalidWeights);
        }
        Ok(SimilarityWeights {
            location,
            time,
            social,
        })
    }

    pub fn get(&self, dimension: Dimension) -> f64 {
        match dimension {
            Dimension::Location => self.location,
            Dimension::Time => self.time,
            Dimension::Social => self.social,
        }
    }

    /// Sum of the weights: the maximum attainable situation similarity.
    pub fn total(&self) -> f64 {
        self.location + self.time + self.social
    }
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        SimilarityWeights {
            location: 1.0,
            time: 1.0,
            social: 1.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SituationError {
    #[error("concept `{id}` not found in the {dimension} taxonomy")]
    UnresolvedConcept { dimension: Dimension, id: String },
    #[error("weights must be non-negative and finite, with at least one positive")]
    InvalidWeights,
    #[error("no past situations to compare against")]
    EmptyPastSituations,
    #[error("critical-situation set is empty")]
    EmptyCriticalSet,
    #[error("criticality threshold must be positive and finite, got {value}")]
    InvalidThreshold { value: f64 },
    #[error("line {line}: expected `location<TAB>time<TAB>social`")]
    MalformedSeedLine { line: usize },
    #[error("line {line}: {source}")]
    SeedLine {
        line: usize,
        source: Box<SituationError>,
    },
}

impl SituationError {
    fn from_taxonomy(dimension: Dimension, err: TaxonomyError) -> Self {
        match err {
            TaxonomyError::UnknownConcept { id } => {
                SituationError::UnresolvedConcept { dimension, id }
            }
            // Construction errors cannot surface from similarity queries.
            other => SituationError::UnresolvedConcept {
                dimension,
                id: other.to_string(),
            },
        }
    }
}

/// Weighted situation similarity: the sum over dimensions of
/// `weight * concept_sim`. Symmetric; with unit weights it is in `(0, 3]`
/// and equals 3 exactly when the triples are component-wise equal.
pub fn situation_sim(
    a: &Situation,
    b: &Situation,
    weights: &SimilarityWeights,
    taxonomies: &TaxonomySet,
) -> Result<f64, SituationError> {
    let mut total = 0.0;
    for dim in Dimension::ALL {
        let sim = taxonomies
            .get(dim)
            .concept_sim(a.get(dim), b.get(dim))
            .map_err(|e| SituationError::from_taxonomy(dim, e))?;
        total += weights.get(dim) * sim;
    }
    Ok(total)
}

/// Outcome of nearest-past-situation retrieval.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestSituation<'a> {
    pub index: usize,
    pub situation: &'a Situation,
    pub similarity: f64,
}

/// Retrieves the past situation maximizing [`situation_sim`] against
/// `current`. Exhaustive scan; ties resolve to the smallest index (the
/// oldest situation) so replays are deterministic.
pub fn nearest_past_situation<'a>(
    current: &Situation,
    past: &'a [Situation],
    weights: &SimilarityWeights,
    taxonomies: &TaxonomySet,
) -> Result<NearestSituation<'a>, SituationError> {
    if past.is_empty() {
        return Err(SituationError::EmptyPastSituations);
    }
    let mut best: Option<NearestSituation<'a>> = None;
    for (index, candidate) in past.iter().enumerate() {
        let similarity = situation_sim(current, candidate, weights, taxonomies)?;
        let better = match &best {
            None => true,
            Some(b) => similarity > b.similarity,
        };
        if better {
            best = Some(NearestSituation {
                index,
                situation: candidate,
                similarity,
            });
        }
    }
    Ok(best.expect("past is non-empty"))
}

/// The adaptive exploration rate derived from the similarity `m` to the
/// nearest critical situation: `1 - m / threshold` below the threshold, 0 at
/// or above it. Always in `[0, 1]`.
pub fn epsilon_from_similarity(similarity: f64, threshold: f64) -> f64 {
    if similarity >= threshold {
        0.0
    } else {
        (1.0 - similarity / threshold).clamp(0.0, 1.0)
    }
}

/// The expert-seeded, runtime-grown registry of critical situations.
///
/// Membership is exact triple equality — near-duplicates are already caught
/// by the threshold test — so insertion is idempotent and the set grows only
/// on genuinely new triples. Growth is unbounded; one registry is
/// owned by a single simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSituationSet {
    members: Vec<Situation>,
    threshold: f64,
}

impl CriticalSituationSet {
    /// Creates an empty set with the given criticality threshold. The
    /// threshold must be positive (the adaptive epsilon divides by it);
    /// callers validating a configuration should additionally bound it by
    /// the weight total.
    pub fn new(threshold: f64) -> Result<Self, SituationError> {
        if !threshold.is_finite() || threshold <= 0.0 {
            return Err(SituationError::InvalidThreshold { value: threshold });
        }
        Ok(CriticalSituationSet {
            members: Vec::new(),
            threshold,
        })
    }

    pub fn with_members(
        threshold: f64,
        members: impl IntoIterator<Item = Situation>,
    ) -> Result<Self, SituationError> {
        let mut set = Self::new(threshold)?;
        for m in members {
            set.register(m);
        }
        Ok(set)
    }

    /// Parses a critical-situation seed file: one
    /// `location<TAB>time<TAB>social` line per situation, `#` comments and
    /// blank lines ignored. Every concept must resolve.
    pub fn parse_seed(
        text: &str,
        threshold: f64,
        taxonomies: &TaxonomySet,
    ) -> Result<Self, SituationError> {
        let mut set = Self::new(threshold)?;
        for (offset, raw) in text.lines().enumerate() {
            let line = offset + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            let [loc, time, social] = fields.as_slice() else {
                return Err(SituationError::MalformedSeedLine { line });
            };
            let situation = Situation::new(
                ConceptId::new(*loc).map_err(|_| SituationError::MalformedSeedLine { line })?,
                ConceptId::new(*time).map_err(|_| SituationError::MalformedSeedLine { line })?,
                ConceptId::new(*social).map_err(|_| SituationError::MalformedSeedLine { line })?,
            );
            taxonomies.resolve(&situation).map_err(|e| SituationError::SeedLine {
                line,
                source: Box::new(e),
            })?;
            set.register(situation);
        }
        Ok(set)
    }

    /// Appends `s` unless an equal triple is already a member. Returns
    /// whether the set grew.
    pub fn register(&mut self, s: Situation) -> bool {
        if self.members.contains(&s) {
            false
        } else {
            self.members.push(s);
            true
        }
    }

    pub fn contains(&self, s: &Situation) -> bool {
        self.members.contains(s)
    }

    pub fn members(&self) -> &[Situation] {
        &self.members
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Result of the criticality test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criticality {
    pub is_critical: bool,
    /// The exploration rate to use: 0 when critical, `1 - m/B` otherwise.
    pub epsilon: f64,
    /// Similarity to the nearest critical situation.
    pub nearest_similarity: f64,
}

/// Tests `current` against the critical-situation set: critical when its
/// similarity to the nearest member reaches the threshold, in which case
/// exploration is disabled; otherwise the exploration rate scales with the
/// remaining distance to the threshold.
pub fn criticality(
    current: &Situation,
    critical: &CriticalSituationSet,
    weights: &SimilarityWeights,
    taxonomies: &TaxonomySet,
) -> Result<Criticality, SituationError> {
    if critical.is_empty() {
        return Err(SituationError::EmptyCriticalSet);
    }
    let mut nearest = f64::NEG_INFINITY;
    for member in critical.members() {
        let sim = situation_sim(current, member, weights, taxonomies)?;
        if sim > nearest {
            nearest = sim;
        }
    }
    let epsilon = epsilon_from_similarity(nearest, critical.threshold());
    Ok(Criticality {
        is_critical: nearest >= critical.threshold(),
        epsilon,
        nearest_similarity: nearest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cid(s: &str) -> ConceptId {
        ConceptId::new(s).unwrap()
    }

    /// Three small trees giving easily hand-checked per-dimension sims.
    ///
    /// location: R -> X                (identical concepts give 1.0)
    /// time:     R -> A -> {A1, A2}    (sim(A1, A2) = 2/3)
    /// social:   R -> {A -> A1, B}     (sim(A1, B) = 0.4)
    fn taxonomies() -> TaxonomySet {
        TaxonomySet::new(
            Taxonomy::parse("R\t-\nX\tR\n", Dimension::Location).unwrap(),
            Taxonomy::parse("R\t-\nA\tR\nA1\tA\nA2\tA\n", Dimension::Time).unwrap(),
            Taxonomy::parse("R\t-\nA\tR\nA1\tA\nB\tR\n", Dimension::Social).unwrap(),
        )
    }

    fn sit(loc: &str, time: &str, social: &str) -> Situation {
        Situation::new(cid(loc), cid(time), cid(social))
    }

    #[test]
    fn identical_triples_reach_the_weight_total() {
        let taxos = taxonomies();
        let w = SimilarityWeights::default();
        let s = sit("X", "A1", "A1");
        assert_eq!(situation_sim(&s, &s, &w, &taxos).unwrap(), 3.0);
    }

    #[test]
    fn per_dimension_sims_sum() {
        let taxos = taxonomies();
        let w = SimilarityWeights::default();
        let a = sit("X", "A1", "A1");
        let b = sit("X", "A2", "B");
        let got = situation_sim(&a, &b, &w, &taxos).unwrap();
        let want = 1.0 + 2.0 / 3.0 + 0.4;
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        assert_eq!(got, situation_sim(&b, &a, &w, &taxos).unwrap());
    }

    #[test]
    fn zero_weights_mask_dimensions() {
        let taxos = taxonomies();
        let w = SimilarityWeights::new(2.0, 0.0, 0.0).unwrap();
        let a = sit("X", "A1", "A1");
        let b = sit("X", "A2", "B");
        assert_eq!(situation_sim(&a, &b, &w, &taxos).unwrap(), 2.0);
    }

    #[test]
    fn unresolved_concept_is_an_error_not_zero() {
        let taxos = taxonomies();
        let w = SimilarityWeights::default();
        let a = sit("X", "A1", "A1");
        let b = sit("nowhere", "A1", "A1");
        assert_eq!(
            situation_sim(&a, &b, &w, &taxos).unwrap_err(),
            SituationError::UnresolvedConcept {
                dimension: Dimension::Location,
                id: "nowhere".into()
            }
        );
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(SimilarityWeights::new(0.0, 0.0, 0.0).is_err());
        assert!(SimilarityWeights::new(-1.0, 1.0, 1.0).is_err());
        assert!(SimilarityWeights::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn nearest_is_the_argmax() {
        let taxos = taxonomies();
        let w = SimilarityWeights::default();
        let current = sit("X", "A1", "A1");
        let past = vec![
            sit("X", "A2", "B"),  // 1 + 2/3 + 0.4
            sit("X", "A1", "B"),  // 1 + 1 + 0.4
            sit("X", "A2", "A1"), // 1 + 2/3 + 1
        ];
        let hit = nearest_past_situation(&current, &past, &w, &taxos).unwrap();
        assert_eq!(hit.index, 2);
        assert!((hit.similarity - (2.0 + 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn nearest_finds_current_itself() {
        let taxos = taxonomies();
        let w = SimilarityWeights::default();
        let current = sit("X", "A1", "A1");
        let past = vec![sit("X", "A2", "B"), current.clone()];
        let hit = nearest_past_situation(&current, &past, &w, &taxos).unwrap();
        assert_eq!(hit.index, 1);
        assert_eq!(hit.similarity, 3.0);
    }

    #[test]
    fn ties_resolve_to_the_earliest_index() {
        let taxos = taxonomies();
        let w = SimilarityWeights::default();
        let current = sit("X", "A1", "A1");
        let tied = sit("X", "A2", "A1");
        let past = vec![tied.clone(), tied];
        let hit = nearest_past_situation(&current, &past, &w, &taxos).unwrap();
        assert_eq!(hit.index, 0);
    }

    #[test]
    fn empty_past_is_an_error() {
        let taxos = taxonomies();
        let w = SimilarityWeights::default();
        let current = sit("X", "A1", "A1");
        assert_eq!(
            nearest_past_situation(&current, &[], &w, &taxos).unwrap_err(),
            SituationError::EmptyPastSituations
        );
    }

    #[test]
    fn epsilon_formula_boundary_cases() {
        // At the threshold the situation is critical and epsilon vanishes.
        assert_eq!(epsilon_from_similarity(2.4, 2.4), 0.0);
        assert_eq!(epsilon_from_similarity(3.0, 2.4), 0.0);
        // Maximally dissimilar drives epsilon to 1.
        assert_eq!(epsilon_from_similarity(0.0, 2.4), 1.0);
        // Midpoint arithmetic.
        assert!((epsilon_from_similarity(1.2, 2.4) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn criticality_at_and_below_threshold() {
        let taxos = taxonomies();
        let w = SimilarityWeights::default();
        let member = sit("X", "A1", "A1");
        let sc = CriticalSituationSet::with_members(2.4, [member.clone()]).unwrap();

        // Exact member: similarity 3 >= any threshold <= 3.
        let c = criticality(&member, &sc, &w, &taxos).unwrap();
        assert!(c.is_critical);
        assert_eq!(c.epsilon, 0.0);
        assert_eq!(c.nearest_similarity, 3.0);

        // Non-member below the threshold explores proportionally.
        let other = sit("X", "A2", "B"); // sim 1 + 2/3 + 0.4 = 2.0666...
        let c = criticality(&other, &sc, &w, &taxos).unwrap();
        assert!(!c.is_critical);
        let m = 1.0 + 2.0 / 3.0 + 0.4;
        assert!((c.epsilon - (1.0 - m / 2.4)).abs() < 1e-12);
        assert!((c.nearest_similarity - m).abs() < 1e-12);
    }

    #[test]
    fn criticality_requires_members_and_positive_threshold() {
        let taxos = taxonomies();
        let w = SimilarityWeights::default();
        let sc = CriticalSituationSet::new(2.4).unwrap();
        assert_eq!(
            criticality(&sit("X", "A1", "A1"), &sc, &w, &taxos).unwrap_err(),
            SituationError::EmptyCriticalSet
        );
        assert_eq!(
            CriticalSituationSet::new(0.0).unwrap_err(),
            SituationError::InvalidThreshold { value: 0.0 }
        );
    }

    #[test]
    fn register_is_idempotent() {
        let mut sc = CriticalSituationSet::new(2.4).unwrap();
        assert!(sc.register(sit("X", "A1", "A1")));
        assert_eq!(sc.len(), 1);
        assert!(!sc.register(sit("X", "A1", "A1")));
        assert_eq!(sc.len(), 1);
        assert!(sc.register(sit("X", "A2", "A1")));
        assert_eq!(sc.len(), 2);
    }

    #[test]
    fn registered_situation_tests_critical() {
        let taxos = taxonomies();
        let w = SimilarityWeights::default();
        let mut sc = CriticalSituationSet::new(3.0).unwrap();
        let s = sit("X", "A2", "B");
        sc.register(s.clone());
        // Self-similarity is the weight total, which reaches any threshold
        // bounded by it.
        let c = criticality(&s, &sc, &w, &taxos).unwrap();
        assert!(c.is_critical);
        assert_eq!(c.epsilon, 0.0);
    }

    #[test]
    fn seed_file_parses_and_validates() {
        let taxos = taxonomies();
        let text = "# expert-declared critical situations\nX\tA1\tA1\n\nX\tA2\tB\nX\tA1\tA1\n";
        let sc = CriticalSituationSet::parse_seed(text, 2.4, &taxos).unwrap();
        assert_eq!(sc.len(), 2); // duplicate line collapsed

        let bad = "X\tA1\n";
        assert_eq!(
            CriticalSituationSet::parse_seed(bad, 2.4, &taxos).unwrap_err(),
            SituationError::MalformedSeedLine { line: 1 }
        );

        let unresolved = "X\tA1\tmystery\n";
        assert!(matches!(
            CriticalSituationSet::parse_seed(unresolved, 2.4, &taxos).unwrap_err(),
            SituationError::SeedLine { line: 1, .. }
        ));
    }

    /// Strategies for random situations over the fixed test taxonomies.
    fn arb_situation() -> impl Strategy<Value = Situation> {
        let loc = prop::sample::select(vec!["R", "X"]);
        let time = prop::sample::select(vec!["R", "A", "A1", "A2"]);
        let social = prop::sample::select(vec!["R", "A", "A1", "B"]);
        (loc, time, social).prop_map(|(l, t, s)| sit(l, t, s))
    }

    proptest! {
        #[test]
        fn symmetry_and_identity_maximum(a in arb_situation(), b in arb_situation()) {
            let taxos = taxonomies();
            let w = SimilarityWeights::default();
            let ab = situation_sim(&a, &b, &w, &taxos).unwrap();
            let ba = situation_sim(&b, &a, &w, &taxos).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab > 0.0 && ab <= 3.0);
            if a == b {
                prop_assert_eq!(ab, 3.0);
            } else {
                prop_assert!(ab < 3.0);
            }
        }

        #[test]
        fn nearest_matches_a_plain_linear_scan(
            current in arb_situation(),
            past in prop::collection::vec(arb_situation(), 1..20),
        ) {
            let taxos = taxonomies();
            let w = SimilarityWeights::default();
            let hit = nearest_past_situation(&current, &past, &w, &taxos).unwrap();

            // Independent scan: first index attaining the maximum.
            let sims: Vec<f64> = past
                .iter()
                .map(|p| situation_sim(&current, p, &w, &taxos).unwrap())
                .collect();
            let best = sims.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let index = sims.iter().position(|&s| s == best).unwrap();
            prop_assert_eq!(hit.index, index);
            prop_assert_eq!(hit.similarity, best);
        }

        #[test]
        fn scaling_weights_scales_similarity(
            a in arb_situation(),
            b in arb_situation(),
            k in 0.1f64..10.0,
        ) {
            let taxos = taxonomies();
            let w = SimilarityWeights::default();
            let scaled = SimilarityWeights::new(k, k, k).unwrap();
            let base = situation_sim(&a, &b, &w, &taxos).unwrap();
            let got = situation_sim(&a, &b, &scaled, &taxos).unwrap();
            prop_assert!((got - k * base).abs() < 1e-9);
        }

        #[test]
        fn epsilon_is_monotone_and_clamped(m in 0.0f64..3.0, b in 0.1f64..3.0) {
            let e = epsilon_from_similarity(m, b);
            prop_assert!((0.0..=1.0).contains(&e));
            // Non-increasing in m.
            let e2 = epsilon_from_similarity(m + 0.01, b);
            prop_assert!(e2 <= e + 1e-15);
            if m >= b {
                prop_assert_eq!(e, 0.0);
            }
        }

        #[test]
        fn criticality_invariant_under_joint_scaling(
            current in arb_situation(),
            member in arb_situation(),
            k in 0.1f64..10.0,
        ) {
            let taxos = taxonomies();
            let w = SimilarityWeights::default();
            let sw = SimilarityWeights::new(k, k, k).unwrap();
            let sc = CriticalSituationSet::with_members(2.4, [member.clone()]).unwrap();
            let sc_scaled = CriticalSituationSet::with_members(2.4 * k, [member]).unwrap();
            let base = criticality(&current, &sc, &w, &taxos).unwrap();
            let scaled = criticality(&current, &sc_scaled, &sw, &taxos).unwrap();
            prop_assert_eq!(base.is_critical, scaled.is_critical);
            prop_assert!((base.epsilon - scaled.epsilon).abs() < 1e-9);
        }
    }
}
