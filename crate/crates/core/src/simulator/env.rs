//! Deterministic construction of the synthetic evaluation environment.
//!
//! Situations come in clusters. Per dimension, every cluster gets an anchor
//! concept hanging under a shared spine, and each cluster member is a leaf
//! under that anchor:
//!
//! ```text
//! root (1) — lvl2 — ... — lvl<branch_depth> — anchor(cluster) — member leaf
//! ```
//!
//! With the default `branch_depth = 4`, two members of one cluster agree up
//! to the anchor (concept similarity 10/12 per dimension, situation
//! similarity 2.5) while members of different clusters agree up to the
//! spine (8/12 per dimension, 2.0). That puts same-cluster pairs above the
//! usual criticality threshold of 2.4 and cross-cluster pairs below it.
//!
//! Each cluster owns a disjoint document pool with one best document, a
//! body of ordinary ones, and a tail of duds. Clusters designated critical
//! put the best document first — preferences there are established, so pure
//! exploitation finds it immediately — while the other clusters hide it
//! behind the ordinary documents, where only exploration reaches it. An
//! optional decoy document models a misleading early winner: it sits first
//! in every pool with pre-seeded clicks so greedy selection locks onto it.

use std::collections::HashMap;

use rand::Rng;

use super::SimulatorError;
use crate::situation::{CriticalSituationSet, SimilarityWeights, Situation, SituationError};
use crate::taxonomy::{ConceptId, Dimension, Taxonomy};
use crate::usermodel::{CaseBase, DocumentId};
use crate::TaxonomySet;

/// A misleading early winner planted in every document pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyConfig {
    /// True click probability of the decoy.
    pub click_prob: f64,
    /// Pre-seeded clicked recommendations in the bootstrap case base.
    pub preseed: u64,
}

/// Parameters of the synthetic environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentConfig {
    pub seed: u64,
    pub clusters: usize,
    pub critical_clusters: usize,
    /// Total situations, spread over the clusters.
    pub situations: usize,
    /// Documents exposed per situation (one pool per cluster).
    pub docs_per_situation: usize,
    /// Depth of the deepest spine node shared by all cluster anchors.
    pub branch_depth: u32,
    pub best_click_prob: f64,
    pub base_click_prob: f64,
    /// Number of never-clicked documents at the tail of each pool.
    pub dud_docs: usize,
    pub dud_click_prob: f64,
    pub decoy: Option<DecoyConfig>,
    pub weights: SimilarityWeights,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig {
            seed: 42,
            clusters: 8,
            critical_clusters: 2,
            situations: 200,
            docs_per_situation: 15,
            branch_depth: 4,
            best_click_prob: 0.95,
            base_click_prob: 0.5,
            dud_docs: 4,
            dud_click_prob: 0.0,
            decoy: None,
            weights: SimilarityWeights::default(),
        }
    }
}

impl EnvironmentConfig {
    /// Checks counts and probability ranges; the constructors run this, and
    /// configuration validation reports its message directly.
    pub fn validate(&self) -> Result<(), SimulatorError> {
        let count = |name, minimum, value| {
            if value < minimum {
                Err(SimulatorError::CountTooSmall {
                    name,
                    minimum,
                    value,
                })
            } else {
                Ok(())
            }
        };
        count("clusters", 1, self.clusters)?;
        count("situations", 1, self.situations)?;
        count("docs_per_situation", 1, self.docs_per_situation)?;
        count("branch_depth", 1, self.branch_depth as usize)?;
        if self.critical_clusters > self.clusters {
            return Err(SimulatorError::TooManyCriticalClusters {
                critical: self.critical_clusters,
                clusters: self.clusters,
            });
        }
        if self.situations < self.clusters {
            return Err(SimulatorError::TooFewSituations {
                situations: self.situations,
                clusters: self.clusters,
            });
        }
        let prob = |name, value: f64| {
            if value.is_finite() && (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(SimulatorError::InvalidProbability { name, value })
            }
        };
        prob("best_click_prob", self.best_click_prob)?;
        prob("base_click_prob", self.base_click_prob)?;
        prob("dud_click_prob", self.dud_click_prob)?;
        if let Some(decoy) = &self.decoy {
            prob("decoy_click_prob", decoy.click_prob)?;
        }
        // Layout: [decoy] + ordinary body + best + duds, body non-empty.
        let fixed = 1 + self.dud_docs + usize::from(self.decoy.is_some());
        if self.docs_per_situation < fixed + 1 {
            return Err(SimulatorError::PoolTooSmall {
                docs: self.docs_per_situation,
                needed: fixed + 1,
            });
        }
        Ok(())
    }
}

/// One situation cluster: its member situations (the first member is the
/// archetype) and its document pool with click probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub members: Vec<Situation>,
    pub critical: bool,
    pub documents: Vec<DocumentId>,
    pub click_probs: Vec<f64>,
    /// Index of the pre-seeded decoy document, when one exists.
    pub decoy_index: Option<usize>,
}

impl Cluster {
    pub fn archetype(&self) -> &Situation {
        &self.members[0]
    }
}

/// The generated world: taxonomies, clustered situations, and the
/// ground-truth click model.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    config: EnvironmentConfig,
    taxonomies: TaxonomySet,
    clusters: Vec<Cluster>,
    all_situations: Vec<Situation>,
    situation_cluster: HashMap<Situation, usize>,
    situation_index: HashMap<Situation, usize>,
    doc_probs: HashMap<DocumentId, Vec<f64>>,
    critical_seed: Option<Vec<Situation>>,
}

impl Environment {
    /// Builds the environment from scratch, generating the three
    /// taxonomies. Deterministic in the configuration alone.
    pub fn generate(config: &EnvironmentConfig) -> Result<Self, SimulatorError> {
        config.validate()?;
        let members = spread(config.situations, config.clusters);
        let taxonomies = TaxonomySet::new(
            synthetic_taxonomy(Dimension::Location, "loc", config, &members)?,
            synthetic_taxonomy(Dimension::Time, "time", config, &members)?,
            synthetic_taxonomy(Dimension::Social, "soc", config, &members)?,
        );
        let anchors_to_members = |cluster: usize| -> Vec<Situation> {
            (0..members[cluster])
                .map(|m| {
                    Situation::new(
                        leaf_id("loc", cluster, m),
                        leaf_id("time", cluster, m),
                        leaf_id("soc", cluster, m),
                    )
                })
                .collect()
        };
        let cluster_members: Vec<Vec<Situation>> =
            (0..config.clusters).map(anchors_to_members).collect();
        Self::assemble(config.clone(), taxonomies, cluster_members)
    }

    /// Builds the environment over externally supplied taxonomies: cluster
    /// anchors are internal nodes taken in id order per dimension, and the
    /// members are the leaves beneath them (reused cyclically when a
    /// subtree is small).
    pub fn from_taxonomies(
        config: &EnvironmentConfig,
        taxonomies: TaxonomySet,
    ) -> Result<Self, SimulatorError> {
        config.validate()?;
        let members = spread(config.situations, config.clusters);
        let mut per_dimension: Vec<Vec<Vec<ConceptId>>> = Vec::new();
        for dim in Dimension::ALL {
            per_dimension.push(anchored_leaves(
                taxonomies.get(dim),
                config.clusters,
                &members,
            )?);
        }
        let cluster_members: Vec<Vec<Situation>> = (0..config.clusters)
            .map(|c| {
                (0..members[c])
                    .map(|m| {
                        Situation::new(
                            per_dimension[0][c][m].clone(),
                            per_dimension[1][c][m].clone(),
                            per_dimension[2][c][m].clone(),
                        )
                    })
                    .collect()
            })
            .collect();
        Self::assemble(config.clone(), taxonomies, cluster_members)
    }

    fn assemble(
        config: EnvironmentConfig,
        taxonomies: TaxonomySet,
        cluster_members: Vec<Vec<Situation>>,
    ) -> Result<Self, SimulatorError> {
        let mut clusters = Vec::with_capacity(config.clusters);
        let mut all_situations = Vec::with_capacity(config.situations);
        let mut situation_cluster = HashMap::new();
        let mut situation_index = HashMap::new();
        let mut doc_probs: HashMap<DocumentId, Vec<f64>> = HashMap::new();

        for (c, members) in cluster_members.into_iter().enumerate() {
            let critical = c < config.critical_clusters;
            let (documents, click_probs, decoy_index) = document_pool(&config, c, critical);
            for (i, doc) in documents.iter().enumerate() {
                let probs = doc_probs
                    .entry(doc.clone())
                    .or_insert_with(|| vec![0.0; config.clusters]);
                probs[c] = click_probs[i];
            }
            for member in &members {
                situation_cluster.entry(member.clone()).or_insert(c);
                if !situation_index.contains_key(member) {
                    situation_index.insert(member.clone(), all_situations.len());
                    all_situations.push(member.clone());
                }
            }
            clusters.push(Cluster {
                members,
                critical,
                documents,
                click_probs,
                decoy_index,
            });
        }

        Ok(Environment {
            config,
            taxonomies,
            clusters,
            all_situations,
            situation_cluster,
            situation_index,
            doc_probs,
            critical_seed: None,
        })
    }

    /// Replaces the critical-set seed with expert-declared situations (for
    /// example from a seed file) instead of the critical clusters'
    /// archetypes.
    pub fn with_critical_seed(mut self, members: Vec<Situation>) -> Self {
        self.critical_seed = Some(members);
        self
    }

    pub fn config(&self) -> &EnvironmentConfig {
        &self.config
    }

    pub fn taxonomies(&self) -> &TaxonomySet {
        &self.taxonomies
    }

    pub fn weights(&self) -> &SimilarityWeights {
        &self.config.weights
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// Every distinct situation the stream can produce.
    pub fn situations(&self) -> &[Situation] {
        &self.all_situations
    }

    /// Stable index of a stream situation, when it is one.
    pub fn situation_index(&self, s: &Situation) -> Option<usize> {
        self.situation_index.get(s).copied()
    }

    /// The cluster a stream situation belongs to.
    pub fn cluster_of(&self, s: &Situation) -> Option<usize> {
        self.situation_cluster.get(s).copied()
    }

    /// Whether a stream situation belongs to a designated critical cluster.
    pub fn in_critical_cluster(&self, s: &Situation) -> bool {
        self.cluster_of(s)
            .map(|c| self.clusters[c].critical)
            .unwrap_or(false)
    }

    /// Draws the next situation of the stream, uniformly over all members.
    pub fn draw_situation<R: Rng>(&self, rng: &mut R) -> &Situation {
        &self.all_situations[rng.random_range(0..self.all_situations.len())]
    }

    /// Ground-truth probability that `doc` is clicked when recommended
    /// under `situation`. Unknown pairs never click.
    pub fn click_probability(&self, situation: &Situation, doc: &DocumentId) -> f64 {
        match (self.cluster_of(situation), self.doc_probs.get(doc)) {
            (Some(c), Some(probs)) => probs[c],
            _ => 0.0,
        }
    }

    /// The starting case base: one zero-count entry per cluster archetype,
    /// plus the decoy's pre-seeded wins when a decoy is configured.
    pub fn bootstrap_case_base(&self) -> CaseBase {
        let mut cb = CaseBase::new();
        for cluster in &self.clusters {
            let archetype = cluster.archetype().clone();
            cb.seed_entry(archetype.clone(), cluster.documents.iter().cloned());
            if let (Some(decoy_index), Some(decoy)) = (cluster.decoy_index, &self.config.decoy) {
                let doc = &cluster.documents[decoy_index];
                for _ in 0..decoy.preseed {
                    cb.record_feedback(&archetype, doc, true);
                }
            }
        }
        cb
    }

    /// The expert-seeded critical set: the archetypes of the designated
    /// critical clusters, unless a seed override was supplied.
    pub fn critical_set(&self, threshold: f64) -> Result<CriticalSituationSet, SituationError> {
        match &self.critical_seed {
            Some(members) => CriticalSituationSet::with_members(threshold, members.iter().cloned()),
            None => CriticalSituationSet::with_members(
                threshold,
                self.clusters
                    .iter()
                    .filter(|c| c.critical)
                    .map(|c| c.archetype().clone()),
            ),
        }
    }

    /// Planted gold clustering for threshold calibration: the first
    /// `per_cluster` members of every cluster labelled by cluster, plus a
    /// few duplicated situations — `duplicates` re-labelled consistently
    /// (same group) and `ambiguous` filed under the following group, the
    /// way a manual grouping misfiles the odd repeated situation.
    pub fn gold_clustering(
        &self,
        per_cluster: usize,
        duplicates: usize,
        ambiguous: usize,
    ) -> super::GoldClustering {
        let mut members = Vec::new();
        for (label, cluster) in self.clusters.iter().enumerate() {
            for situation in cluster.members.iter().take(per_cluster) {
                members.push((situation.clone(), label));
            }
        }
        let k = self.clusters.len();
        if per_cluster > 0 {
            for d in 0..duplicates {
                let c = d % k;
                members.push((self.clusters[c].archetype().clone(), c));
            }
            for a in 0..ambiguous {
                let c = a % k;
                let donor = &self.clusters[c].members;
                let situation = donor[1.min(donor.len() - 1)].clone();
                members.push((situation, (c + 1) % k));
            }
        }
        super::GoldClustering { members }
    }
}

/// Splits `total` into `parts` counts, remainder to the front.
fn spread(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let extra = total % parts;
    (0..parts)
        .map(|i| base + usize::from(i < extra))
        .collect()
}

fn leaf_id(prefix: &str, cluster: usize, member: usize) -> ConceptId {
    ConceptId::new(format!("{prefix}_c{cluster:02}_m{member:03}")).expect("generated id")
}

fn synthetic_taxonomy(
    dimension: Dimension,
    prefix: &str,
    config: &EnvironmentConfig,
    members: &[usize],
) -> Result<Taxonomy, SimulatorError> {
    let mut edges: Vec<(ConceptId, Option<ConceptId>)> = Vec::new();
    let id = |s: String| ConceptId::new(s).expect("generated id");
    let root = id(format!("{prefix}_root"));
    edges.push((root.clone(), None));
    let mut spine = root;
    for level in 2..=config.branch_depth {
        let node = id(format!("{prefix}_lvl{level}"));
        edges.push((node.clone(), Some(spine)));
        spine = node;
    }
    for (cluster, &count) in members.iter().enumerate() {
        let anchor = id(format!("{prefix}_c{cluster:02}"));
        edges.push((anchor.clone(), Some(spine.clone())));
        for m in 0..count {
            edges.push((leaf_id(prefix, cluster, m), Some(anchor.clone())));
        }
    }
    Ok(Taxonomy::from_edges(dimension, edges)?)
}

/// Document pool layout for one cluster. Critical clusters lead with the
/// best document; elsewhere it hides behind the ordinary body. The decoy,
/// when configured, always takes the front slot.
fn document_pool(
    config: &EnvironmentConfig,
    cluster: usize,
    critical: bool,
) -> (Vec<DocumentId>, Vec<f64>, Option<usize>) {
    let pool = config.docs_per_situation;
    let mut probs = Vec::with_capacity(pool);
    let mut decoy_index = None;

    if let Some(decoy) = &config.decoy {
        decoy_index = Some(0);
        probs.push(decoy.click_prob);
    }
    let body = pool - probs.len() - config.dud_docs - 1;
    if decoy_index.is_none() && critical {
        probs.push(config.best_click_prob);
        probs.extend(std::iter::repeat_n(config.base_click_prob, body));
    } else {
        probs.extend(std::iter::repeat_n(config.base_click_prob, body));
        probs.push(config.best_click_prob);
    }
    probs.extend(std::iter::repeat_n(config.dud_click_prob, config.dud_docs));

    let documents = (0..pool)
        .map(|i| DocumentId::new(format!("c{cluster:02}_d{i:02}")).expect("generated id"))
        .collect();
    (documents, probs, decoy_index)
}

/// Per-cluster member concepts on an external taxonomy: internal nodes in
/// id order anchor the clusters; leaves under each anchor (in id order,
/// cycled) become the members.
fn anchored_leaves(
    taxonomy: &Taxonomy,
    clusters: usize,
    members: &[usize],
) -> Result<Vec<Vec<ConceptId>>, SimulatorError> {
    let mut leaves_by_anchor: Vec<(ConceptId, Vec<ConceptId>)> = Vec::new();
    let leaves = taxonomy.leaves();
    let mut internal: Vec<&ConceptId> = taxonomy
        .concepts()
        .filter(|c| !leaves.contains(c))
        .collect();
    internal.sort();
    if internal.is_empty() {
        return Err(SimulatorError::NoAnchors {
            dimension: taxonomy.dimension(),
        });
    }
    for anchor in internal {
        let mut under = Vec::new();
        for leaf in &leaves {
            let mut cursor = (*leaf).clone();
            loop {
                if &cursor == anchor {
                    under.push((*leaf).clone());
                    break;
                }
                match taxonomy.parent(&cursor)? {
                    Some(parent) => cursor = parent.clone(),
                    None => break,
                }
            }
        }
        under.sort();
        if !under.is_empty() {
            leaves_by_anchor.push((anchor.clone(), under));
        }
    }
    // Prefer the deepest anchors so clusters sit far apart; id order breaks
    // ties deterministically.
    leaves_by_anchor.sort_by(|a, b| {
        let da = taxonomy.depth(&a.0).expect("anchor exists");
        let db = taxonomy.depth(&b.0).expect("anchor exists");
        db.cmp(&da).then_with(|| a.0.cmp(&b.0))
    });
    Ok((0..clusters)
        .map(|c| {
            let (_, leaves) = &leaves_by_anchor[c % leaves_by_anchor.len()];
            (0..members[c]).map(|m| leaves[m % leaves.len()].clone()).collect()
        })
        .collect())
}
