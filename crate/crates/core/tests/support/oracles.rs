//! Independent reference implementations used as test oracles. None of
//! these call into the crate's kernels; they recompute from definitions.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

/// FNV-1a 64 computed in 128-bit arithmetic with explicit reduction.
pub fn ref_fnv1a(token: &str) -> u64 {
    let modulus: u128 = 1 << 64;
    let mut h: u128 = 14_695_981_039_346_656_037;
    for b in token.bytes() {
        h ^= u128::from(b);
        h = (h * 1_099_511_628_211) % modulus;
    }
    h as u64
}

pub fn ref_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .map(|t| t.to_lowercase())
        .filter(|t| t.chars().count() >= 2)
        .collect()
}

pub fn ref_token_set(text: &str) -> BTreeSet<String> {
    ref_tokens(text).into_iter().collect()
}

fn bucket_counts(text: &str, dim: usize) -> HashMap<usize, f64> {
    let mut counts = HashMap::new();
    for t in ref_tokens(text) {
        *counts.entry((ref_fnv1a(&t) % dim as u64) as usize).or_insert(0.0) += 1.0;
    }
    counts
}

/// Cosine of the hashed term-frequency vectors of two texts, computed
/// sparsely; zero when either text has no tokens.
pub fn ref_text_cosine(a: &str, b: &str, dim: usize) -> f64 {
    let ca = bucket_counts(a, dim);
    let cb = bucket_counts(b, dim);
    let na: f64 = ca.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = cb.values().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = ca.iter().map(|(k, v)| v * cb.get(k).copied().unwrap_or(0.0)).sum();
    dot / (na * nb)
}

pub fn ref_jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    a.intersection(b).count() as f64 / a.union(b).count() as f64
}

/// Hybrid similarity of two texts with no measurables: the measurable
/// weight is split between the other two in proportion.
pub fn ref_sim_feat_text(a: &str, b: &str, w_sym: f64, w_emb: f64, dim: usize) -> f64 {
    let (s, e) = if w_sym + w_emb == 0.0 {
        (0.5, 0.5)
    } else {
        (w_sym / (w_sym + w_emb), w_emb / (w_sym + w_emb))
    };
    s * ref_jaccard(&ref_token_set(a), &ref_token_set(b)) + e * ref_text_cosine(a, b, dim).max(0.0)
}

/// Relation by direct set evaluation; mirrors the crate's label names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefRelation {
    General,
    Specific,
    Parallel(String),
    Unrelated,
}

pub fn ref_relation(
    a: &BTreeSet<String>,
    b: &BTreeSet<String>,
    supersets: &BTreeMap<String, BTreeSet<String>>,
) -> RefRelation {
    let a_in_b = a.iter().all(|x| b.contains(x));
    let b_in_a = b.iter().all(|x| a.contains(x));
    if b_in_a && !a_in_b {
        return RefRelation::General;
    }
    if a_in_b && !b_in_a {
        return RefRelation::Specific;
    }
    let disjoint = a.iter().all(|x| !b.contains(x));
    if disjoint {
        let mut witnesses: Vec<&String> = supersets
            .iter()
            .filter(|(_, g)| a.iter().chain(b.iter()).all(|x| g.contains(x)))
            .map(|(label, _)| label)
            .collect();
        witnesses.sort();
        if let Some(w) = witnesses.first() {
            return RefRelation::Parallel((*w).clone());
        }
    }
    RefRelation::Unrelated
}

/// Candidates sorted by descending score, ties by ascending id.
pub fn ref_order(candidates: &[(String, f64)]) -> Vec<(String, f64)> {
    let mut v = candidates.to_vec();
    v.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then_with(|| x.0.cmp(&y.0)));
    v
}

/// Sort then pick the first valid candidate.
pub fn ref_first_valid(candidates: &[(String, f64)], valid: &BTreeSet<String>) -> Option<String> {
    ref_order(candidates)
        .into_iter()
        .map(|(id, _)| id)
        .find(|id| valid.contains(id))
}

/// Argmax by exhaustive rescoring, smallest id on ties.
pub fn ref_argmax(candidates: &[(String, f64)]) -> Option<String> {
    let mut best: Option<&(String, f64)> = None;
    for c in candidates {
        best = match best {
            None => Some(c),
            Some(b) if c.1 > b.1 || (c.1 == b.1 && c.0 < b.0) => Some(c),
            keep => keep,
        };
    }
    best.map(|b| b.0.clone())
}

/// Mean and n-1 standard deviation.
pub fn ref_moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// A series of `n` points with exactly the given sample mean and sd.
pub fn series_with_moments(mean: f64, sd: f64, n: usize) -> Vec<f64> {
    // symmetric zig-zag around zero, then rescaled
    let raw: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + i as f64 * 0.1))
        .collect();
    let (m, s) = ref_moments(&raw);
    raw.iter().map(|x| mean + (x - m) / s * sd).collect()
}
