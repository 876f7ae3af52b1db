//! Question features: a lower-cased token set, measurable attributes passed
//! through untouched, and a unit-norm text embedding.
//!
//! The default [`HashingEncoder`] is a hashed term-frequency vector: every
//! token is hashed with 64-bit FNV-1a, reduced modulo the dimension, counted
//! and the result L2-normalized. No stopword removal, no subwords.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::method_store::{Measurables, Method};

pub const DEFAULT_DIM: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |hash, &b| (hash ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Splits on non-alphanumeric characters, lower-cases each piece and drops
/// pieces shorter than two characters. Returns the token multiset in text
/// order.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if c.is_alphanumeric() {
            current.push(c);
        } else if !current.is_empty() {
            let token = current.to_lowercase();
            if token.chars().count() >= 2 {
                tokens.push(token);
            }
            current.clear();
        }
    }
    tokens
}

/// A real vector that is either all zeros or of unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// Scales `raw` to unit norm; a zero (or non-finite) input becomes the
    /// zero vector.
    pub fn normalized(raw: Vec<f64>) -> Self {
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Self::zeros(raw.len());
        }
        Self(raw.into_iter().map(|v| v / norm).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

/// Text encoder backend. External embedding services implement this.
pub trait Encoder: Send + Sync {
    fn dim(&self) -> usize;
    fn encode(&self, text: &str) -> FeatureVector;
}

/// Deterministic hashed term-frequency encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashingEncoder {
    dim: usize,
}

impl HashingEncoder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be >= 1".into()));
        }
        Ok(Self { dim })
    }

    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a64(token.as_bytes()) % self.dim as u64) as usize
    }
}

impl Default for HashingEncoder {
    fn default() -> Self {
        Self { dim: DEFAULT_DIM }
    }
}

impl Encoder for HashingEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str) -> FeatureVector {
        let mut counts = vec![0.0; self.dim];
        for token in tokenize(text) {
            counts[self.bucket(&token)] += 1.0;
        }
        FeatureVector::normalized(counts)
    }
}

/// Joint encoding of a whole method: the question and solution joined by a
/// space, then encoded.
pub fn meta_encode(method: &Method, encoder: &dyn Encoder) -> FeatureVector {
    encoder.encode(&format!("{} {}", method.question, method.solution))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub symbolic: BTreeSet<String>,
    pub measurable: Measurables,
    pub embedding: FeatureVector,
}

pub fn extract_features(text: &str, measurable: &Measurables, encoder: &dyn Encoder) -> FeatureSet {
    FeatureSet {
        symbolic: tokenize(text).into_iter().collect(),
        measurable: measurable.clone(),
        embedding: encoder.encode(text),
    }
}

/// Features of a method's question, including the method's own symbolic
/// tokens and measurables.
pub fn method_features(method: &Method, encoder: &dyn Encoder) -> FeatureSet {
    let mut features = extract_features(&method.question, &method.measurable, encoder);
    features.symbolic.extend(
        method
            .symbolic
            .iter()
            .map(|t| t.trim().to_lowercase())
            .filter(|t| !t.is_empty()),
    );
    features
}
