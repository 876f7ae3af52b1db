use std::fmt;

use crate::error::{Error, Result};
use crate::gateway::Gateway;

/// Predicate over `(solution, question)`; `false` rejects the candidate
/// without consulting the backend.
pub type Rule = Box<dyn Fn(&str, &str) -> bool + Send + Sync>;

#[derive(Default)]
pub struct Validator {
    rules: Vec<Rule>,
}

impl fmt::Debug for Validator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Validator").field("rules", &self.rules.len()).finish()
    }
}

impl Validator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_rule(&mut self, rule: Rule) {
        self.rules.push(rule);
    }

    pub fn check(&self, solution: &str, question: &str, gateway: &Gateway) -> Result<bool> {
        if !self.rules.iter().all(|rule| rule(solution, question)) {
            return Ok(false);
        }
        let answer = gateway.ask("validate", &[("solution", solution), ("question", question)], "")?;
        parse_verdict(&answer)
    }
}

/// The first standalone `yes` or `no` word (any case) decides.
pub fn parse_verdict(text: &str) -> Result<bool> {
    text.split(|c: char| !c.is_alphanumeric())
        .find_map(|word| {
            if word.eq_ignore_ascii_case("yes") {
                Some(true)
            } else if word.eq_ignore_ascii_case("no") {
                Some(false)
            } else {
                None
            }
        })
        .ok_or_else(|| Error::UnparseableVerdict(text.chars().take(120).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::ScriptedBackend;
    use std::sync::Arc;

    #[test]
    fn verdict_parsing() {
        assert!(parse_verdict("YES").unwrap());
        assert!(parse_verdict("**Yes.** It applies.").unwrap());
        assert!(!parse_verdict("No, picking time says nothing here.").unwrap());
        assert!(!parse_verdict("Answer: NO").unwrap());
        assert!(parse_verdict("Nobody knows; yessir").is_err());
        assert!(matches!(
            parse_verdict("It might work in some cases."),
            Err(Error::UnparseableVerdict(_))
        ));
    }

    #[test]
    fn rule_rejects_without_backend_call() {
        let backend = Arc::new(ScriptedBackend::new(["YES"]));
        let gw = Gateway::new(backend.clone());
        let mut v = Validator::new();
        v.add_rule(Box::new(|solution, _| !solution.trim().is_empty()));
        assert!(!v.check("  ", "q", &gw).unwrap());
        assert!(backend.prompts().is_empty());
        assert!(v.check("use picking time", "q", &gw).unwrap());
        assert_eq!(backend.prompts().len(), 1);
    }

    #[test]
    fn prose_answer_is_unparseable() {
        let gw = Gateway::new(ScriptedBackend::new(["Hard to say really."]));
        assert!(matches!(
            Validator::new().check("s", "q", &gw),
            Err(Error::UnparseableVerdict(_))
        ));
    }
}
