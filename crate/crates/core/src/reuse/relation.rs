use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Superset label → the scope labels it covers.
pub type Taxonomy = BTreeMap<String, BTreeSet<String>>;

/// How the scope of method `a` relates to the scope of `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "superset", rename_all = "snake_case")]
pub enum RelationKind {
    /// `a` strictly contains `b`.
    GeneralOf,
    /// `b` strictly contains `a`.
    SpecificOf,
    /// Disjoint scopes inside a common registered superset.
    Parallel(String),
    Unrelated,
}

impl RelationKind {
    /// Logical similarity contributed by the relation alone.
    pub fn score(&self) -> f64 {
        match self {
            RelationKind::GeneralOf | RelationKind::SpecificOf => 1.0,
            RelationKind::Parallel(_) => 0.5,
            RelationKind::Unrelated => 0.0,
        }
    }
}

/// Equal scopes are `Unrelated`: neither strictly contains the other and
/// they are not disjoint. Among several covering supersets the
/// lexicographically smallest label is reported.
pub fn classify_relation(
    scope_a: &BTreeSet<String>,
    scope_b: &BTreeSet<String>,
    supersets: &Taxonomy,
) -> Result<RelationKind> {
    if scope_a.is_empty() || scope_b.is_empty() {
        return Err(Error::EmptyScope);
    }
    if scope_a.len() > scope_b.len() && scope_a.is_superset(scope_b) {
        return Ok(RelationKind::GeneralOf);
    }
    if scope_b.len() > scope_a.len() && scope_b.is_superset(scope_a) {
        return Ok(RelationKind::SpecificOf);
    }
    if scope_a.is_disjoint(scope_b) {
        // BTreeMap iterates labels in lexicographic order
        let witness = supersets
            .iter()
            .find(|(_, members)| scope_a.is_subset(members) && scope_b.is_subset(members));
        if let Some((label, _)) = witness {
            return Ok(RelationKind::Parallel(label.clone()));
        }
    }
    Ok(RelationKind::Unrelated)
}
