use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{meta_encode, method_features};
use crate::method_store::{Method, MethodLibrary};
use crate::reuse::validity::parse_verdict;
use crate::similarity::{cosine, sim_feat};

use super::{
    classify_relation, direct_pool, rank_order, Attempt, Query, RelationKind, ReuseEngine, ReuseOutcome, ReuseResult,
    Strategy, THRESHOLD_EPS,
};

/// A candidate scored by logical similarity gated on validity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub method_id: String,
    /// `sim_logic` when valid, otherwise zero.
    pub score: f64,
    pub sim_logic: f64,
    pub relation: RelationKind,
    pub valid: bool,
}

fn selected(strategy: Strategy, id: &str, score: f64, attempts: Vec<Attempt>, final_tau: f64) -> ReuseOutcome {
    ReuseOutcome {
        result: ReuseResult::Selected {
            method_id: id.to_string(),
            score,
            strategy,
        },
        attempts,
        final_tau,
    }
}

fn attempt(strategy: Strategy, id: &str, score: f64, valid: bool, threshold: f64) -> Attempt {
    Attempt {
        method_id: id.to_string(),
        score,
        valid,
        strategy,
        threshold,
        pass: 0,
    }
}

impl ReuseEngine<'_> {
    /// Reuses a strictly more general method, most specific one first.
    pub fn vertical_reuse(&self, query: &Query, library: &MethodLibrary) -> Result<ReuseOutcome> {
        self.vertical_in(query, &direct_pool(library))
    }

    pub(crate) fn vertical_in(&self, query: &Query, pool: &[&Method]) -> Result<ReuseOutcome> {
        if query.scope.is_empty() {
            return Err(Error::EmptyScope);
        }
        let mut general: Vec<&Method> = pool
            .iter()
            .copied()
            .filter(|m| m.scope.len() > query.scope.len() && m.scope.is_superset(&query.scope))
            .collect();
        general.sort_by(|a, b| a.scope.len().cmp(&b.scope.len()).then_with(|| a.id.cmp(&b.id)));

        let tau = self.config().tau;
        if general.is_empty() {
            return Ok(ReuseOutcome::none("no general method", Vec::new(), tau));
        }
        let mut attempts = Vec::new();
        for method in general {
            let score = RelationKind::GeneralOf.score();
            let ok = self.valid(&method.solution, &query.text)?;
            attempts.push(attempt(Strategy::Vertical, &method.id, score, ok, tau));
            if ok {
                return Ok(selected(Strategy::Vertical, &method.id, score, attempts, tau));
            }
        }
        Ok(ReuseOutcome::none("general methods failed validation", attempts, tau))
    }

    /// Reuses a parallel method (disjoint scope under a shared registered
    /// superset), highest feature similarity first.
    pub fn horizontal_reuse(&self, query: &Query, library: &MethodLibrary) -> Result<ReuseOutcome> {
        self.horizontal_in(query, &direct_pool(library))
    }

    pub(crate) fn horizontal_in(&self, query: &Query, pool: &[&Method]) -> Result<ReuseOutcome> {
        if query.scope.is_empty() {
            return Err(Error::EmptyScope);
        }
        let target = self.query_features(query);
        let mut parallel = Vec::new();
        for method in pool.iter().copied().filter(|m| !m.scope.is_empty()) {
            let relation = classify_relation(&method.scope, &query.scope, self.taxonomy())?;
            if matches!(relation, RelationKind::Parallel(_)) {
                let score = sim_feat(
                    &target,
                    &method_features(method, self.encoder()),
                    &self.config().weights,
                )?;
                parallel.push((score, method));
            }
        }
        parallel.sort_by(|a, b| rank_order(&(a.0, &a.1.id), &(b.0, &b.1.id)));

        let tau = self.config().tau;
        if parallel.is_empty() {
            return Ok(ReuseOutcome::none("no parallel method", Vec::new(), tau));
        }
        let mut attempts = Vec::new();
        for (score, method) in parallel {
            let ok = self.valid(&method.solution, &query.text)?;
            attempts.push(attempt(Strategy::Horizontal, &method.id, score, ok, tau));
            if ok {
                return Ok(selected(Strategy::Horizontal, &method.id, score, attempts, tau));
            }
        }
        Ok(ReuseOutcome::none("parallel methods failed validation", attempts, tau))
    }

    /// Candidates ordered by whole-method similarity, highest first.
    fn meta_ranked<'m>(&self, query: &Query, pool: &[&'m Method]) -> Vec<(f64, &'m Method)> {
        let target = self.encoder().encode(&query.text);
        let mut ranked: Vec<(f64, &Method)> = pool
            .iter()
            .map(|m| {
                let score = cosine(&meta_encode(m, self.encoder()), &target).expect("one encoder yields one dimension");
                (score, *m)
            })
            .collect();
        ranked.sort_by(|a, b| rank_order(&(a.0, &a.1.id), &(b.0, &b.1.id)));
        ranked
    }

    /// Whole-method similarity between a method and the query text.
    pub fn meta_score(&self, method: &Method, query: &Query) -> f64 {
        cosine(
            &meta_encode(method, self.encoder()),
            &self.encoder().encode(&query.text),
        )
        .expect("one encoder yields one dimension")
    }

    /// Two backend verdicts per candidate: latent similarity of the
    /// questions, then validity of the solution. At most `budget`
    /// latent-similarity queries are issued.
    pub fn hidden_reuse(&self, query: &Query, library: &MethodLibrary) -> Result<ReuseOutcome> {
        self.hidden_in(query, &direct_pool(library))
    }

    pub(crate) fn hidden_in(&self, query: &Query, pool: &[&Method]) -> Result<ReuseOutcome> {
        let tau = self.config().tau;
        let mut attempts = Vec::new();
        let mut latent_matches = 0usize;
        for (queries, (score, method)) in self.meta_ranked(query, pool).into_iter().enumerate() {
            if queries >= self.config().budget {
                return Ok(ReuseOutcome::none("budget exhausted", attempts, tau));
            }
            let answer = self.gateway().ask(
                "latent_similarity",
                &[("target", &query.text), ("candidate", &method.question)],
                "",
            )?;
            if !parse_verdict(&answer)? {
                attempts.push(attempt(Strategy::Hidden, &method.id, score, false, tau));
                continue;
            }
            latent_matches += 1;
            let ok = self.valid(&method.solution, &query.text)?;
            attempts.push(attempt(Strategy::Hidden, &method.id, score, ok, tau));
            if ok {
                return Ok(selected(Strategy::Hidden, &method.id, score, attempts, tau));
            }
        }
        let reason = if latent_matches == 0 {
            "no latent match"
        } else {
            "latent matches failed validation"
        };
        Ok(ReuseOutcome::none(reason, attempts, tau))
    }

    /// Whole-method template matching: similarity of the jointly encoded
    /// method to the query must reach `tau_meta`, then validity.
    pub fn emerging_reuse(&self, query: &Query, library: &MethodLibrary) -> Result<ReuseOutcome> {
        self.emerging_in(query, &direct_pool(library))
    }

    pub(crate) fn emerging_in(&self, query: &Query, pool: &[&Method]) -> Result<ReuseOutcome> {
        let tau_meta = self.config().tau_meta;
        let mut attempts = Vec::new();
        for (score, method) in self.meta_ranked(query, pool) {
            if score < tau_meta - THRESHOLD_EPS {
                break;
            }
            let ok = self.valid(&method.solution, &query.text)?;
            attempts.push(attempt(Strategy::Emerging, &method.id, score, ok, tau_meta));
            if ok {
                return Ok(selected(Strategy::Emerging, &method.id, score, attempts, tau_meta));
            }
        }
        let reason = if attempts.is_empty() {
            "no method reaches the template threshold"
        } else {
            "template matches failed validation"
        };
        Ok(ReuseOutcome::none(reason, attempts, tau_meta))
    }

    /// Scores every direct method by `max(relation score, sim_feat)` gated on
    /// validity, best first (ties by id). Candidates with zero logical
    /// similarity score zero without a validity query.
    pub fn rank_candidates(&self, query: &Query, library: &MethodLibrary) -> Result<Vec<RankedCandidate>> {
        let target = self.query_features(query);
        let mut ranked = Vec::new();
        for method in library.at_depth(0) {
            let relation = if method.scope.is_empty() || query.scope.is_empty() {
                RelationKind::Unrelated
            } else {
                classify_relation(&method.scope, &query.scope, self.taxonomy())?
            };
            let feat = sim_feat(
                &target,
                &method_features(method, self.encoder()),
                &self.config().weights,
            )?;
            let sim_logic = relation.score().max(feat);
            let valid = sim_logic > 0.0 && self.valid(&method.solution, &query.text)?;
            ranked.push(RankedCandidate {
                method_id: method.id.clone(),
                score: if valid { sim_logic } else { 0.0 },
                sim_logic,
                relation,
                valid,
            });
        }
        ranked.sort_by(|a, b| rank_order(&(a.score, &a.method_id), &(b.score, &b.method_id)));
        Ok(ranked)
    }
}
