//! The case base: per-situation document statistics and click-through rates.
//!
//! Each past situation owns a map from document to its feedback counters —
//! clicks, recommendations, and accumulated reading time. Reading time is
//! stored for completeness but never consulted by the selection policies;
//! rewards are click-only. A document's click-through rate (CTR) is
//! `clicks / recommendations`, with a never-recommended document pinned at 0
//! so that cold-start exploitation stays conservative.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::situation::Situation;

/// Opaque document token; non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DocumentId(String);

impl DocumentId {
    pub fn new(token: impl Into<String>) -> Result<Self, UserModelError> {
        let token = token.into();
        if token.is_empty() {
            return Err(UserModelError::EmptyDocumentId);
        }
        Ok(DocumentId(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Feedback counters for one document under one situation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DocumentStats {
    pub clicks: u64,
    pub recommendations: u64,
    /// Total seconds spent reading; recorded but not used by policies.
    pub reading_time: f64,
}

impl DocumentStats {
    /// Click-through rate: `clicks / recommendations`, 0 when the document
    /// was never recommended.
    pub fn ctr(&self) -> f64 {
        if self.recommendations == 0 {
            0.0
        } else {
            self.clicks as f64 / self.recommendations as f64
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum UserModelError {
    #[error("document id must be non-empty")]
    EmptyDocumentId,
    #[error("situation {situation} has no case-base entry")]
    UnknownSituation { situation: String },
}

/// The user model: an ordered collection of `(situation, document stats)`
/// entries, unique by situation triple.
///
/// One case base belongs to one simulated user per run; mutation is
/// single-owner, while snapshots and reads can be shared freely.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CaseBase {
    situations: Vec<Situation>,
    docs: Vec<BTreeMap<DocumentId, DocumentStats>>,
    index: HashMap<Situation, usize>,
}

impl CaseBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.situations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.situations.is_empty()
    }

    pub fn contains(&self, situation: &Situation) -> bool {
        self.index.contains_key(situation)
    }

    /// Past situations in insertion order. This is the `PS` scanned by
    /// nearest-situation retrieval.
    pub fn situations(&self) -> &[Situation] {
        &self.situations
    }

    fn entry_index(&self, situation: &Situation) -> Result<usize, UserModelError> {
        self.index
            .get(situation)
            .copied()
            .ok_or_else(|| UserModelError::UnknownSituation {
                situation: situation.to_string(),
            })
    }

    fn entry_or_insert(&mut self, situation: &Situation) -> usize {
        if let Some(&i) = self.index.get(situation) {
            return i;
        }
        let i = self.situations.len();
        self.situations.push(situation.clone());
        self.docs.push(BTreeMap::new());
        self.index.insert(situation.clone(), i);
        i
    }

    /// Creates an entry for `situation` populated with the given documents
    /// at zero counts. Returns whether a new entry was created; an existing
    /// entry is left untouched.
    pub fn seed_entry(
        &mut self,
        situation: Situation,
        documents: impl IntoIterator<Item = DocumentId>,
    ) -> bool {
        if self.contains(&situation) {
            return false;
        }
        let i = self.entry_or_insert(&situation);
        for doc in documents {
            self.docs[i].entry(doc).or_default();
        }
        true
    }

    /// Gives `current` its own entry carrying a zero-count copy of
    /// `source`'s document set — the bridge between observing behaviour
    /// under the nearest past situation and recording rewards under the
    /// current one. No-op if `current` already has an entry.
    pub fn seed_from(
        &mut self,
        current: Situation,
        source: &Situation,
    ) -> Result<bool, UserModelError> {
        let src = self.entry_index(source)?;
        if self.contains(&current) {
            return Ok(false);
        }
        let doc_ids: Vec<DocumentId> = self.docs[src].keys().cloned().collect();
        Ok(self.seed_entry(current, doc_ids))
    }

    /// The document statistics recorded under `situation` — the candidate
    /// pool a policy selects from.
    pub fn candidate_documents(
        &self,
        situation: &Situation,
    ) -> Result<&BTreeMap<DocumentId, DocumentStats>, UserModelError> {
        Ok(&self.docs[self.entry_index(situation)?])
    }

    /// Records one recommendation of `doc` under `situation`, clicked or
    /// not. Missing entries are created on demand.
    pub fn record_feedback(&mut self, situation: &Situation, doc: &DocumentId, clicked: bool) {
        let i = self.entry_or_insert(situation);
        let stats = self.docs[i].entry(doc.clone()).or_default();
        stats.recommendations += 1;
        if clicked {
            stats.clicks += 1;
        }
    }

    /// Accumulates reading time observed for `doc` under `situation`.
    pub fn add_reading_time(&mut self, situation: &Situation, doc: &DocumentId, seconds: f64) {
        let i = self.entry_or_insert(situation);
        let stats = self.docs[i].entry(doc.clone()).or_default();
        stats.reading_time += seconds.max(0.0);
    }

    /// Total `(clicks, recommendations)` across every entry.
    pub fn total_counts(&self) -> (u64, u64) {
        let mut clicks = 0;
        let mut recommendations = 0;
        for docs in &self.docs {
            for stats in docs.values() {
                clicks += stats.clicks;
                recommendations += stats.recommendations;
            }
        }
        (clicks, recommendations)
    }

    /// Writes the case-base snapshot as CSV, one row per
    /// `(situation, document)` in insertion then document order.
    pub fn write_snapshot_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "situation_loc,situation_time,situation_social,doc_id,clicks,recommendations,reading_time"
        )?;
        for (situation, docs) in self.situations.iter().zip(&self.docs) {
            for (doc, stats) in docs {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{:.3}",
                    situation.location,
                    situation.time,
                    situation.social,
                    doc,
                    stats.clicks,
                    stats.recommendations,
                    stats.reading_time
                )?;
            }
        }
        Ok(())
    }
}
