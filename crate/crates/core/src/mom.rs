//! Methods of methods: depth-`i + 1` methods that validate or refine a
//! depth-`i` method when it fails.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gateway::Gateway;
use crate::method_store::{Method, MethodLibrary};
use crate::reuse::{Query, ReuseEngine};

/// Tag marking the built-in double-calculation method of methods.
pub const DOUBLE_CALCULATION_TAG: &str = "builtin:double-calculation";
pub const CONFIRMED_TAG: &str = "mom:confirmed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Confirmed,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomOutcome {
    /// Validated or refined version of the input; same depth as the input.
    pub refined: Option<Method>,
    pub verdict: Verdict,
    pub applied_mom: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleCheck {
    pub verdict: Verdict,
    pub first: String,
    pub second: String,
}

/// Depth-1 method: verify a calculation by computing it again
/// independently and comparing.
pub fn double_calculation_method() -> Method {
    Method::new(
        "mom-double-calculation",
        "How can we verify the correctness of a complex mathematical expression?",
        "Perform an independent secondary calculation and compare the results.",
    )
    .with_depth(1)
    .with_tag(DOUBLE_CALCULATION_TAG)
}

/// Trim, lower-case and collapse internal whitespace.
pub fn normalize_answer(answer: &str) -> String {
    answer
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Asks the same question in two independent sessions and compares the
/// normalized answers.
pub fn double_check(question: &str, gateway: &Gateway) -> Result<DoubleCheck> {
    let first = gateway.ask("double_check", &[("question", question)], "double-check/1")?;
    let second = gateway.ask("double_check", &[("question", question)], "double-check/2")?;
    let verdict = if normalize_answer(&first) == normalize_answer(&second) {
        Verdict::Confirmed
    } else {
        Verdict::Refuted
    };
    Ok(DoubleCheck { verdict, first, second })
}

/// Looks for a method of exactly the next depth that applies to `failed`
/// and applies it.
pub fn escalate(failed: &Method, library: &MethodLibrary, engine: &ReuseEngine<'_>) -> Result<MomOutcome> {
    let inconclusive = MomOutcome {
        refined: None,
        verdict: Verdict::Inconclusive,
        applied_mom: None,
    };
    let next_depth = failed.depth + 1;
    if library.at_depth(next_depth).next().is_none() {
        return Ok(inconclusive);
    }

    let gateway = engine.gateway();
    let query_text = gateway.render("mom_query", &[("question", &failed.question)])?.rendered;
    let outcome = engine.solve_at_depth(&Query::new(query_text), library, next_depth)?;
    let Some(mom) = outcome.selected_id().and_then(|id| library.get(id)) else {
        return Ok(inconclusive);
    };

    if mom.tags.contains(DOUBLE_CALCULATION_TAG) {
        let check = double_check(&failed.question, gateway)?;
        let refined = (check.verdict == Verdict::Confirmed).then(|| confirmed(failed, None));
        return Ok(MomOutcome {
            refined,
            verdict: check.verdict,
            applied_mom: Some(mom.id.clone()),
        });
    }

    let response = gateway.ask(
        "mom_apply",
        &[
            ("mom_question", &mom.question),
            ("mom_solution", &mom.solution),
            ("question", &failed.question),
            ("solution", &failed.solution),
        ],
        "",
    )?;
    let (verdict, replacement) = parse_application(&response);
    let refined = match (verdict, replacement) {
        (Verdict::Confirmed, replacement) => Some(confirmed(failed, replacement)),
        (_, Some(replacement)) => Some(Method {
            solution: replacement,
            ..failed.clone()
        }),
        (_, None) => None,
    };
    Ok(MomOutcome {
        refined,
        verdict,
        applied_mom: Some(mom.id.clone()),
    })
}

fn confirmed(failed: &Method, replacement: Option<String>) -> Method {
    let mut method = failed.clone();
    if let Some(solution) = replacement {
        method.solution = solution;
    }
    method.tags.insert(CONFIRMED_TAG.to_string());
    method
}

/// Reads `VERDICT:` and optional `SOLUTION:` lines from a response.
fn parse_application(response: &str) -> (Verdict, Option<String>) {
    let mut verdict = Verdict::Inconclusive;
    let mut solution = None;
    for line in response.lines() {
        let line = line.trim().trim_start_matches(['*', '-', '#']).trim();
        if let Some((label, value)) = line.split_once(':') {
            let value = value.trim().trim_matches('*').trim();
            match label.trim().trim_matches('*').to_ascii_uppercase().as_str() {
                "VERDICT" => {
                    verdict = match value.to_ascii_uppercase().as_str() {
                        v if v.starts_with("CONFIRMED") => Verdict::Confirmed,
                        v if v.starts_with("REFUTED") => Verdict::Refuted,
                        _ => Verdict::Inconclusive,
                    }
                }
                "SOLUTION" if !value.is_empty() => solution = Some(value.to_string()),
                _ => {}
            }
        }
    }
    (verdict, solution)
}
