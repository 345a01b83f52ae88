//! Rooted concept trees for the three context dimensions.
//!
//! A [`Taxonomy`] is an immutable tree of concepts loaded from a plain-text
//! file (one `concept<TAB>parent` line per concept, `-` marking the root).
//! It answers three queries: the depth of a concept (number of nodes on the
//! path from the concept to the root, both ends included, so the root has
//! depth 1), the least common subsumer (deepest common ancestor) of two
//! concepts, and the derived concept similarity
//!
//! ```text
//! sim(a, b) = 2 * depth(lcs(a, b)) / (depth(a) + depth(b))
//! ```
//!
//! which is 1 exactly when `a == b` and stays in `(0, 1]` otherwise because
//! every pair shares at least the root. Taxonomies are trees, not DAGs:
//! multiple parentage is rejected at load so the LCS is unique.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// The three context dimensions, each backed by its own taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Location,
    Time,
    Social,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Location, Dimension::Time, Dimension::Social];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Location => "location",
            Dimension::Time => "time",
            Dimension::Social => "social",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Opaque concept token, unique within one taxonomy.
///
/// Tokens are non-empty and contain no whitespace (the taxonomy file format
/// is whitespace-delimited).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(token: impl Into<String>) -> Result<Self, TaxonomyError> {
        let token = token.into();
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(TaxonomyError::InvalidConceptId { token });
        }
        Ok(ConceptId(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ConceptId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TaxonomyError {
    #[error("invalid concept id {token:?}: must be non-empty and contain no whitespace")]
    InvalidConceptId { token: String },
    #[error("line {line}: expected `concept<TAB>parent`")]
    MalformedLine { line: usize },
    #[error("line {line}: duplicate concept `{id}`")]
    DuplicateConcept { id: String, line: usize },
    #[error("line {line}: unknown parent `{parent}` for concept `{id}`")]
    UnknownParent {
        id: String,
        parent: String,
        line: usize,
    },
    #[error("line {line}: second root `{id}` (root `{root}` already declared)")]
    MultipleRoots {
        id: String,
        root: String,
        line: usize,
    },
    #[error("no root declared (expected exactly one `concept<TAB>-` line)")]
    MissingRoot,
    #[error("line {line}: concept `{id}` is part of a parent cycle")]
    Cycle { id: String, line: usize },
    #[error("unknown concept `{id}`")]
    UnknownConcept { id: String },
}

/// Immutable rooted concept tree for one context dimension.
///
/// All queries are pure; a loaded taxonomy can be shared freely across
/// threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Taxonomy {
    dimension: Dimension,
    ids: Vec<ConceptId>,
    index: HashMap<ConceptId, u32>,
    /// `parents[i]` is the slot of node i's parent; the root points at itself.
    parents: Vec<u32>,
    depths: Vec<u32>,
    root: u32,
}

impl Taxonomy {
    /// Parses taxonomy-file content: UTF-8, one `concept<TAB>parent` line per
    /// concept, `-` as the root's parent, `#` comment lines and blank lines
    /// ignored. Exactly one root per file.
    pub fn parse(text: &str, dimension: Dimension) -> Result<Self, TaxonomyError> {
        let mut entries = Vec::new();
        for (offset, raw) in text.lines().enumerate() {
            let line = offset + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split('\t').map(str::trim);
            let (id, parent) = match (fields.next(), fields.next(), fields.next()) {
                (Some(id), Some(parent), None) if !id.is_empty() && !parent.is_empty() => {
                    (id, parent)
                }
                _ => return Err(TaxonomyError::MalformedLine { line }),
            };
            let id = ConceptId::new(id)?;
            let parent = if parent == "-" {
                None
            } else {
                Some(ConceptId::new(parent)?)
            };
            entries.push((id, parent, line));
        }
        Self::from_entries(dimension, entries)
    }

    /// Builds a taxonomy from `(concept, parent)` pairs, `None` marking the
    /// root. Used by the synthetic environment generator; applies the same
    /// validation as [`Taxonomy::parse`], with positions in place of line
    /// numbers.
    pub fn from_edges(
        dimension: Dimension,
        edges: impl IntoIterator<Item = (ConceptId, Option<ConceptId>)>,
    ) -> Result<Self, TaxonomyError> {
        let entries = edges
            .into_iter()
            .enumerate()
            .map(|(i, (id, parent))| (id, parent, i + 1))
            .collect();
        Self::from_entries(dimension, entries)
    }

    fn from_entries(
        dimension: Dimension,
        entries: Vec<(ConceptId, Option<ConceptId>, usize)>,
    ) -> Result<Self, TaxonomyError> {
        let mut ids: Vec<ConceptId> = Vec::with_capacity(entries.len());
        let mut index: HashMap<ConceptId, u32> = HashMap::with_capacity(entries.len());
        let mut root: Option<(u32, usize)> = None;

        for (slot, (id, parent, line)) in entries.iter().enumerate() {
            if index.contains_key(id) {
                return Err(TaxonomyError::DuplicateConcept {
                    id: id.to_string(),
                    line: *line,
                });
            }
            if parent.is_none() {
                if let Some((first, _)) = root {
                    return Err(TaxonomyError::MultipleRoots {
                        id: id.to_string(),
                        root: ids[first as usize].to_string(),
                        line: *line,
                    });
                }
                root = Some((slot as u32, *line));
            }
            index.insert(id.clone(), slot as u32);
            ids.push(id.clone());
        }

        let (root, _) = root.ok_or(TaxonomyError::MissingRoot)?;

        let mut parents = vec![0u32; ids.len()];
        for (slot, (id, parent, line)) in entries.iter().enumerate() {
            parents[slot] = match parent {
                None => slot as u32,
                Some(parent) => match index.get(parent) {
                    Some(&p) => p,
                    None => {
                        return Err(TaxonomyError::UnknownParent {
                            id: id.to_string(),
                            parent: parent.to_string(),
                            line: *line,
                        })
                    }
                },
            };
        }

        // Depth of every node, detecting parent cycles along the way. A walk
        // longer than the node count must have revisited something.
        let mut depths = vec![0u32; ids.len()];
        for start in 0..ids.len() {
            if depths[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut node = start as u32;
            loop {
                if depths[node as usize] != 0 {
                    break;
                }
                if node == root {
                    depths[node as usize] = 1;
                    break;
                }
                if path.len() > ids.len() {
                    let (_, _, line) = &entries[node as usize];
                    return Err(TaxonomyError::Cycle {
                        id: ids[node as usize].to_string(),
                        line: *line,
                    });
                }
                path.push(node);
                node = parents[node as usize];
            }
            let mut depth = depths[node as usize];
            for &n in path.iter().rev() {
                depth += 1;
                depths[n as usize] = depth;
            }
        }

        Ok(Taxonomy {
            dimension,
            ids,
            index,
            parents,
            depths,
            root,
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn root(&self) -> &ConceptId {
        &self.ids[self.root as usize]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, concept: &ConceptId) -> bool {
        self.index.contains_key(concept)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &ConceptId> {
        self.ids.iter()
    }

    /// Concepts with no children.
    pub fn leaves(&self) -> Vec<&ConceptId> {
        let mut has_child = vec![false; self.ids.len()];
        for (slot, &parent) in self.parents.iter().enumerate() {
            if slot as u32 != parent {
                has_child[parent as usize] = true;
            }
        }
        self.ids
            .iter()
            .zip(has_child)
            .filter(|(_, c)| !c)
            .map(|(id, _)| id)
            .collect()
    }

    /// Parent of a concept; `None` for the root.
    pub fn parent(&self, concept: &ConceptId) -> Result<Option<&ConceptId>, TaxonomyError> {
        let slot = self.slot(concept)?;
        if slot == self.root {
            Ok(None)
        } else {
            Ok(Some(&self.ids[self.parents[slot as usize] as usize]))
        }
    }

    fn slot(&self, concept: &ConceptId) -> Result<u32, TaxonomyError> {
        self.index
            .get(concept)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownConcept {
                id: concept.to_string(),
            })
    }

    /// Number of nodes on the path from `concept` to the root, inclusive of
    /// both ends; the root has depth 1.
    pub fn depth(&self, concept: &ConceptId) -> Result<u32, TaxonomyError> {
        Ok(self.depths[self.slot(concept)? as usize])
    }

    /// Least common subsumer: the deepest node lying on both root paths.
    /// Symmetric, and `lcs(a, a) == a`.
    pub fn lcs(&self, a: &ConceptId, b: &ConceptId) -> Result<&ConceptId, TaxonomyError> {
        let slot = self.lcs_slot(self.slot(a)?, self.slot(b)?);
        Ok(&self.ids[slot as usize])
    }

    fn lcs_slot(&self, mut a: u32, mut b: u32) -> u32 {
        while self.depths[a as usize] > self.depths[b as usize] {
            a = self.parents[a as usize];
        }
        while self.depths[b as usize] > self.depths[a as usize] {
            b = self.parents[b as usize];
        }
        while a != b {
            a = self.parents[a as usize];
            b = self.parents[b as usize];
        }
        a
    }

    /// Concept similarity `2 * depth(lcs) / (depth(a) + depth(b))`.
    ///
    /// Symmetric, equal to 1 exactly when `a == b`, and always in `(0, 1]`
    /// since any two concepts share at least the root.
    pub fn concept_sim(&self, a: &ConceptId, b: &ConceptId) -> Result<f64, TaxonomyError> {
        let a = self.slot(a)?;
        let b = self.slot(b)?;
        let lcs = self.lcs_slot(a, b);
        let lcs_depth = f64::from(self.depths[lcs as usize]);
        let sum = f64::from(self.depths[a as usize]) + f64::from(self.depths[b as usize]);
        Ok(2.0 * lcs_depth / sum)
    }
}
