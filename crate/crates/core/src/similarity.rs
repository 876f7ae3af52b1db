//! Similarity kernels and the weighted hybrid feature similarity.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::features::{meta_encode, Encoder, FeatureSet, FeatureVector};
use crate::method_store::{Measurables, Method};

const AGREEMENT_EPS: f64 = 1e-12;

/// Convex weights of the hybrid: symbolic, embedding, measurable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityWeights {
    pub symbolic: f64,
    pub embedding: f64,
    pub measurable: f64,
}

impl SimilarityWeights {
    pub fn new(symbolic: f64, embedding: f64, measurable: f64) -> Result<Self> {
        let w = Self {
            symbolic,
            embedding,
            measurable,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.symbolic, self.embedding, self.measurable];
        if parts.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidConfig(format!(
                "similarity weights must lie in [0, 1], got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "similarity weights must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    /// Weights used when the measurable component is absent: the measurable
    /// share is split between the other two in proportion to their weights.
    pub fn without_measurable(&self) -> (f64, f64) {
        let rest = self.symbolic + self.embedding;
        if rest == 0.0 {
            (0.5, 0.5)
        } else {
            (self.symbolic / rest, self.embedding / rest)
        }
    }
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        Self {
            symbolic: 0.4,
            embedding: 0.4,
            measurable: 0.2,
        }
    }
}

/// |A ∩ B| / |A ∪ B|. Two empty sets score 1.0.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Cosine of the angle between two raw vectors; 0.0 when either is zero.
pub fn cosine_raw(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

pub fn cosine(u: &FeatureVector, v: &FeatureVector) -> Result<f64> {
    cosine_raw(u.values(), v.values())
}

/// Mean per-key agreement over shared measurables, or `None` when the maps
/// share no key.
pub fn measurable_agreement(a: &Measurables, b: &Measurables) -> Result<Option<f64>> {
    let mut total = 0.0;
    let mut shared = 0usize;
    for (key, ma) in a {
        let Some(mb) = b.get(key) else { continue };
        if ma.unit != mb.unit {
            return Err(Error::UnitMismatch {
                key: key.clone(),
                left: ma.unit.clone(),
                right: mb.unit.clone(),
            });
        }
        let gap = (ma.value - mb.value).abs() / (ma.value.abs() + mb.value.abs() + AGREEMENT_EPS);
        total += 1.0 - gap.min(1.0);
        shared += 1;
    }
    Ok((shared > 0).then(|| total / shared as f64))
}

/// Weighted hybrid of Jaccard, non-negative cosine and measurable agreement.
pub fn sim_feat(a: &FeatureSet, b: &FeatureSet, weights: &SimilarityWeights) -> Result<f64> {
    let sym = jaccard(&a.symbolic, &b.symbolic);
    let emb = cosine(&a.embedding, &b.embedding)?.max(0.0);
    let score = match measurable_agreement(&a.measurable, &b.measurable)? {
        Some(meas) => weights.symbolic * sym + weights.embedding * emb + weights.measurable * meas,
        None => {
            let (ws, we) = weights.without_measurable();
            ws * sym + we * emb
        }
    };
    Ok(score.clamp(0.0, 1.0))
}

/// Cosine between a method's joint encoding and a question's encoding.
pub fn sim_meta(method: &Method, question: &str, encoder: &dyn Encoder) -> f64 {
    cosine(&meta_encode(method, encoder), &encoder.encode(question)).expect("one encoder yields one dimension")
}
