//! Decision layer for cross-question reuse.
//!
//! A [`ReuseEngine`] tries, in order, vertical reuse (a strictly more
//! general method), horizontal reuse (a parallel method under a shared
//! superset), partial feature matching with threshold relaxation, hidden
//! characteristic matching (two backend verdicts), and finally whole-method
//! template matching. Every candidate must also pass the validity check
//! before it is selected.

mod relation;
mod search;
mod strategies;
mod validity;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Encoder, HashingEncoder};
use crate::gateway::Gateway;
use crate::method_store::{Measurables, Method, MethodLibrary};
use crate::similarity::SimilarityWeights;

pub use relation::{classify_relation, RelationKind, Taxonomy};
pub use search::threshold_search;
pub use strategies::RankedCandidate;
pub use validity::{parse_verdict, Rule, Validator};

/// Tolerance used when comparing a score against a threshold, so relaxed
/// thresholds such as `0.8 - 0.3` still admit a score of exactly `0.5`.
pub const THRESHOLD_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Attempt only the single best-scoring candidate.
    Global,
    /// Attempt candidates above a relaxing threshold, best first.
    Relative,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "global" => Ok(SearchMode::Global),
            "relative" => Ok(SearchMode::Relative),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReuseConfig {
    pub mode: SearchMode,
    pub tau: f64,
    pub delta_tau: f64,
    pub tau_min: f64,
    /// Maximum validity attempts in relative mode (and latent-similarity
    /// queries in hidden reuse).
    pub budget: usize,
    pub tau_meta: f64,
    pub weights: SimilarityWeights,
}

impl Default for ReuseConfig {
    fn default() -> Self {
        Self {
            mode: SearchMode::Relative,
            tau: 0.6,
            delta_tau: 0.05,
            tau_min: 0.2,
            budget: 10,
            tau_meta: 0.5,
            weights: SimilarityWeights::default(),
        }
    }
}

impl ReuseConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau", self.tau),
            ("tau_min", self.tau_min),
            ("tau_meta", self.tau_meta),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.tau_min > self.tau {
            return Err(Error::InvalidConfig(format!(
                "tau_min ({}) must not exceed tau ({})",
                self.tau_min, self.tau
            )));
        }
        if !(self.delta_tau > 0.0 && self.delta_tau.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "delta_tau must be positive, got {}",
                self.delta_tau
            )));
        }
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be at least 1".into()));
        }
        self.weights.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Vertical,
    Horizontal,
    Feature,
    Hidden,
    Emerging,
}

impl Strategy {
    pub const PIPELINE: [Strategy; 5] = [
        Strategy::Vertical,
        Strategy::Horizontal,
        Strategy::Feature,
        Strategy::Hidden,
        Strategy::Emerging,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::Vertical => "vertical",
            Strategy::Horizontal => "horizontal",
            Strategy::Feature => "feature",
            Strategy::Hidden => "hidden",
            Strategy::Emerging => "emerging",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One validity attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub method_id: String,
    pub score: f64,
    pub valid: bool,
    pub strategy: Strategy,
    /// Threshold in force when the attempt was made.
    pub threshold: f64,
    /// Relaxation pass (0-based) for relative-mode feature matching.
    pub pass: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ReuseResult {
    Selected {
        method_id: String,
        score: f64,
        strategy: Strategy,
    },
    NoneFound {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseOutcome {
    pub result: ReuseResult,
    pub attempts: Vec<Attempt>,
    pub final_tau: f64,
}

impl ReuseOutcome {
    pub(crate) fn none(reason: impl Into<String>, attempts: Vec<Attempt>, final_tau: f64) -> Self {
        Self {
            result: ReuseResult::NoneFound { reason: reason.into() },
            attempts,
            final_tau,
        }
    }

    pub fn is_selected(&self) -> bool {
        matches!(self.result, ReuseResult::Selected { .. })
    }

    pub fn selected_id(&self) -> Option<&str> {
        match &self.result {
            ReuseResult::Selected { method_id, .. } => Some(method_id),
            ReuseResult::NoneFound { .. } => None,
        }
    }

    pub fn strategy(&self) -> Option<Strategy> {
        match &self.result {
            ReuseResult::Selected { strategy, .. } => Some(*strategy),
            ReuseResult::NoneFound { .. } => None,
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match &self.result {
            ReuseResult::NoneFound { reason } => Some(reason),
            ReuseResult::Selected { .. } => None,
        }
    }
}

/// A target question lacking its own solution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Query {
    pub text: String,
    pub scope: BTreeSet<String>,
    pub measurable: Measurables,
}

impl Query {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            ..Self::default()
        }
    }

    pub fn with_scope<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.scope = labels.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_measurables(mut self, measurable: Measurables) -> Self {
        self.measurable = measurable;
        self
    }
}

/// Runs the reuse strategies against a library through one gateway.
pub struct ReuseEngine<'g> {
    gateway: &'g Gateway,
    config: ReuseConfig,
    encoder: Arc<dyn Encoder>,
    validator: Validator,
    taxonomy: Taxonomy,
}

impl<'g> ReuseEngine<'g> {
    pub fn new(gateway: &'g Gateway, config: ReuseConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            gateway,
            config,
            encoder: Arc::new(HashingEncoder::default()),
            validator: Validator::new(),
            taxonomy: BTreeMap::new(),
        })
    }

    pub fn with_encoder(mut self, encoder: Arc<dyn Encoder>) -> Self {
        self.encoder = encoder;
        self
    }

    /// Registers superset categories used to detect parallel methods.
    pub fn with_taxonomy(mut self, taxonomy: Taxonomy) -> Self {
        self.taxonomy = taxonomy;
        self
    }

    pub fn with_superset<I, S>(mut self, label: impl Into<String>, members: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.taxonomy
            .insert(label.into(), members.into_iter().map(Into::into).collect());
        self
    }

    /// Adds a rule that every candidate solution must pass before the
    /// backend is asked.
    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.validator.add_rule(rule);
        self
    }

    pub fn config(&self) -> &ReuseConfig {
        &self.config
    }

    pub fn gateway(&self) -> &'g Gateway {
        self.gateway
    }

    pub fn encoder(&self) -> &dyn Encoder {
        self.encoder.as_ref()
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    /// Rule hooks first, then the backend's yes/no verdict.
    pub fn valid(&self, solution: &str, question: &str) -> Result<bool> {
        self.validator.check(solution, question, self.gateway)
    }

    /// Runs the whole pipeline over direct (depth-0) methods.
    pub fn solve(&self, query: &Query, library: &MethodLibrary) -> Result<ReuseOutcome> {
        self.solve_at_depth(query, library, 0)
    }

    /// Runs the whole pipeline over methods of one depth.
    pub fn solve_at_depth(&self, query: &Query, library: &MethodLibrary, depth: u32) -> Result<ReuseOutcome> {
        let pool: Vec<&Method> = library.at_depth(depth).collect();
        self.solve_in(query, &pool)
    }

    pub(crate) fn solve_in(&self, query: &Query, pool: &[&Method]) -> Result<ReuseOutcome> {
        let mut attempts = Vec::new();
        let mut reasons = Vec::new();
        let mut final_tau = self.config.tau;

        for strategy in Strategy::PIPELINE {
            let stage = match strategy {
                Strategy::Vertical | Strategy::Horizontal if query.scope.is_empty() => {
                    reasons.push(format!("{strategy}: no target scope"));
                    continue;
                }
                Strategy::Vertical => self.vertical_in(query, pool)?,
                Strategy::Horizontal => self.horizontal_in(query, pool)?,
                Strategy::Feature => match self.partial_in(query, pool) {
                    Err(Error::EmptyLibrary) => {
                        reasons.push(format!("{strategy}: empty library"));
                        continue;
                    }
                    other => {
                        let outcome = other?;
                        final_tau = outcome.final_tau;
                        outcome
                    }
                },
                Strategy::Hidden => self.hidden_in(query, pool)?,
                Strategy::Emerging => self.emerging_in(query, pool)?,
            };
            attempts.extend(stage.attempts);
            match stage.result {
                selected @ ReuseResult::Selected { .. } => {
                    return Ok(ReuseOutcome {
                        result: selected,
                        attempts,
                        final_tau,
                    })
                }
                ReuseResult::NoneFound { reason } => reasons.push(format!("{strategy}: {reason}")),
            }
        }

        Ok(ReuseOutcome::none(reasons.join("; "), attempts, final_tau))
    }
}

pub(crate) fn direct_pool(library: &MethodLibrary) -> Vec<&Method> {
    library.at_depth(0).collect()
}

/// Descending by score, ascending by id on ties.
pub(crate) fn rank_order(a: &(f64, &str), b: &(f64, &str)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}
