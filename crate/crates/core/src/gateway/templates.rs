use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::Prompt;

const BUILTIN: &[(&str, &str)] = &[
    ("pair_separation", include_str!("../../templates/pair_separation.txt")),
    ("validate", include_str!("../../templates/validate.txt")),
    (
        "latent_similarity",
        include_str!("../../templates/latent_similarity.txt"),
    ),
    ("mom_query", include_str!("../../templates/mom_query.txt")),
    ("mom_apply", include_str!("../../templates/mom_apply.txt")),
    ("double_check", include_str!("../../templates/double_check.txt")),
    ("ask_question", include_str!("../../templates/ask_question.txt")),
    ("provide_material", include_str!("../../templates/provide_material.txt")),
    ("feature_pairs", include_str!("../../templates/feature_pairs.txt")),
    ("which_story", include_str!("../../templates/which_story.txt")),
    ("conversation", include_str!("../../templates/conversation.txt")),
];

/// Named prompt templates with `{{placeholder}}` slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<String, String>,
}

impl TemplateSet {
    /// The templates shipped under `templates/`.
    pub fn builtin() -> Self {
        Self {
            templates: BUILTIN
                .iter()
                .map(|(id, text)| (id.to_string(), text.to_string()))
                .collect(),
        }
    }

    /// Built-in templates overridden by every `<id>.txt` file in `dir`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut set = Self::builtin();
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            set.insert(id, text);
        }
        Ok(set)
    }

    pub fn insert(&mut self, id: impl Into<String>, text: impl Into<String>) {
        self.templates.insert(id.into(), text.into());
    }

    pub fn get(&self, id: &str) -> Option<&str> {
        self.templates.get(id).map(String::as_str)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    /// Substitutes every `{{name}}` with its binding. Bound values are
    /// inserted verbatim and never re-scanned.
    pub fn render(&self, template_id: &str, bindings: &[(&str, &str)]) -> Result<Prompt> {
        let template = self
            .get(template_id)
            .ok_or_else(|| Error::UnknownTemplate(template_id.to_string()))?;

        let mut out = String::with_capacity(template.len());
        let mut rest = template;
        while let Some(start) = rest.find("{{") {
            out.push_str(&rest[..start]);
            let after = &rest[start + 2..];
            let Some(end) = after.find("}}") else {
                out.push_str(&rest[start..]);
                rest = "";
                break;
            };
            let name = after[..end].trim();
            let value = bindings
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::UnboundPlaceholder {
                    template: template_id.to_string(),
                    placeholder: name.to_string(),
                })?;
            out.push_str(value);
            rest = &after[end + 2..];
        }
        out.push_str(rest);

        let rendered = out.trim_end().to_string();
        if rendered.trim().is_empty() {
            return Err(Error::Precondition(format!(
                "template `{template_id}` rendered to empty text"
            )));
        }
        Ok(Prompt {
            template_id: template_id.to_string(),
            rendered,
            session_salt: String::new(),
        })
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}
