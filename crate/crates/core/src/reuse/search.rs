use crate::error::{Error, Result};
use crate::features::{extract_features, method_features, FeatureSet};
use crate::method_store::{Method, MethodLibrary};
use crate::similarity::sim_feat;

use super::{
    direct_pool, rank_order, Attempt, Query, ReuseConfig, ReuseEngine, ReuseOutcome, ReuseResult, SearchMode, Strategy,
    THRESHOLD_EPS,
};

/// Outcome of the single-candidate feature reuse condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureReuse {
    pub reused: bool,
    pub score: f64,
}

/// Partial feature matching over pre-computed `(id, score)` candidates.
///
/// Global mode attempts only the best candidate (smallest id on ties).
/// Relative mode attempts every untried candidate scoring at least the
/// current threshold, best first; when a pass is exhausted the threshold
/// drops by `delta_tau`, never below `tau_min`. A candidate is attempted
/// at most once. The search stops on the first success, when `budget`
/// attempts have failed, or when a pass at `tau_min` finds nothing new.
pub fn threshold_search<F>(candidates: &[(String, f64)], config: &ReuseConfig, mut attempt: F) -> Result<ReuseOutcome>
where
    F: FnMut(&str) -> Result<bool>,
{
    if candidates.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    let mut order: Vec<(f64, &str)> = candidates.iter().map(|(id, s)| (*s, id.as_str())).collect();
    order.sort_by(rank_order);

    let selected = |id: &str, score: f64, attempts, final_tau| ReuseOutcome {
        result: ReuseResult::Selected {
            method_id: id.to_string(),
            score,
            strategy: Strategy::Feature,
        },
        attempts,
        final_tau,
    };
    let record = |id: &str, score: f64, valid: bool, threshold: f64, pass: usize| Attempt {
        method_id: id.to_string(),
        score,
        valid,
        strategy: Strategy::Feature,
        threshold,
        pass,
    };

    if config.mode == SearchMode::Global {
        let (score, id) = order[0];
        let ok = attempt(id)?;
        let attempts = vec![record(id, score, ok, config.tau, 0)];
        return Ok(if ok {
            selected(id, score, attempts, config.tau)
        } else {
            ReuseOutcome::none("best candidate failed validation", attempts, config.tau)
        });
    }

    let mut tried = vec![false; order.len()];
    let mut attempts = Vec::new();
    let mut tau = config.tau;
    let mut pass = 0;
    loop {
        let mut attempted_this_pass = false;
        for (i, &(score, id)) in order.iter().enumerate() {
            if tried[i] {
                continue;
            }
            if score < tau - THRESHOLD_EPS {
                break;
            }
            tried[i] = true;
            attempted_this_pass = true;
            let ok = attempt(id)?;
            attempts.push(record(id, score, ok, tau, pass));
            if ok {
                return Ok(selected(id, score, attempts, tau));
            }
            if attempts.len() >= config.budget {
                return Ok(ReuseOutcome::none("budget exhausted", attempts, tau));
            }
        }
        if !attempted_this_pass && tau <= config.tau_min {
            return Ok(ReuseOutcome::none(
                "no untried candidate reaches the minimum threshold",
                attempts,
                tau,
            ));
        }
        tau = (tau - config.delta_tau).max(config.tau_min);
        pass += 1;
    }
}

impl ReuseEngine<'_> {
    pub fn query_features(&self, query: &Query) -> FeatureSet {
        extract_features(&query.text, &query.measurable, self.encoder())
    }

    /// Feature similarity between the query and a method's question.
    pub fn feature_score(&self, query: &Query, method: &Method) -> Result<f64> {
        let target = self.query_features(query);
        sim_feat(
            &target,
            &method_features(method, self.encoder()),
            &self.config().weights,
        )
    }

    /// Reuse iff the feature similarity reaches `tau` and the solution is
    /// valid for the query. Validity is not consulted below the threshold.
    pub fn reuse_feat(&self, query: &Query, candidate: &Method) -> Result<FeatureReuse> {
        let score = self.feature_score(query, candidate)?;
        let reused = score >= self.config().tau - THRESHOLD_EPS && self.valid(&candidate.solution, &query.text)?;
        Ok(FeatureReuse { reused, score })
    }

    pub fn partial_feature_match(&self, query: &Query, library: &MethodLibrary) -> Result<ReuseOutcome> {
        self.partial_in(query, &direct_pool(library))
    }

    pub(crate) fn partial_in(&self, query: &Query, pool: &[&Method]) -> Result<ReuseOutcome> {
        if pool.is_empty() {
            return Err(Error::EmptyLibrary);
        }
        let target = self.query_features(query);
        let candidates = pool
            .iter()
            .map(|m| {
                let score = sim_feat(&target, &method_features(m, self.encoder()), &self.config().weights)?;
                Ok((m.id.clone(), score))
            })
            .collect::<Result<Vec<_>>>()?;
        threshold_search(&candidates, self.config(), |id| {
            let method = pool.iter().find(|m| m.id == id).expect("candidate from pool");
            self.valid(&method.solution, &query.text)
        })
    }
}
