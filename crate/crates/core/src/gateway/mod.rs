//! Uniform access to language-model backends.
//!
//! Every model interaction goes through a [`Gateway`]: a prompt is rendered
//! from a named template, then handed to a [`Backend`]. Tests and the
//! experiment harness use the recorded backend, which looks responses up by
//! the SHA-256 digest of the normalized prompt so runs are reproducible.

mod http;
mod scripted;
mod templates;
mod transcript;

use sha2::{Digest, Sha256};

use crate::error::Result;

pub use http::{HttpBackend, API_TOKEN_ENV, API_URL_ENV};
pub use scripted::{FnBackend, ScriptedBackend};
pub use templates::TemplateSet;
pub use transcript::{RecordedBackend, RecordingBackend, TranscriptEntry, TranscriptStore};

/// A rendered prompt ready to send to a backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub template_id: String,
    pub rendered: String,
    /// Distinguishes otherwise identical prompts issued in independent
    /// sessions (experiment rounds, double-checks).
    pub session_salt: String,
}

impl Prompt {
    pub fn with_salt(mut self, salt: impl Into<String>) -> Self {
        self.session_salt = salt.into();
        self
    }

    /// Transcript key for this prompt.
    pub fn digest(&self) -> String {
        prompt_digest(&self.rendered, &self.session_salt)
    }
}

/// Trim and collapse every whitespace run to a single space.
pub fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lower-case hex SHA-256 over `normalize(rendered)`, a 0x1F separator
/// byte, then the salt, all as UTF-8.
pub fn prompt_digest(rendered: &str, salt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(normalize(rendered).as_bytes());
    hasher.update([0x1f]);
    hasher.update(salt.as_bytes());
    hex::encode(hasher.finalize())
}

/// A language-model backend.
pub trait Backend: Send + Sync {
    fn complete(&self, prompt: &Prompt) -> Result<String>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn complete(&self, prompt: &Prompt) -> Result<String> {
        (**self).complete(prompt)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn complete(&self, prompt: &Prompt) -> Result<String> {
        (**self).complete(prompt)
    }
}

/// Template set plus backend.
pub struct Gateway {
    templates: TemplateSet,
    backend: Box<dyn Backend>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("templates", &self.templates)
            .finish_non_exhaustive()
    }
}

impl Gateway {
    /// Gateway over the built-in templates.
    pub fn new(backend: impl Backend + 'static) -> Self {
        Self::with_templates(TemplateSet::builtin(), backend)
    }

    pub fn with_templates(templates: TemplateSet, backend: impl Backend + 'static) -> Self {
        Self {
            templates,
            backend: Box::new(backend),
        }
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    pub fn render(&self, template_id: &str, bindings: &[(&str, &str)]) -> Result<Prompt> {
        self.templates.render(template_id, bindings)
    }

    pub fn complete(&self, prompt: &Prompt) -> Result<String> {
        self.backend.complete(prompt)
    }

    /// Render then complete in one step.
    pub fn ask(&self, template_id: &str, bindings: &[(&str, &str)], salt: &str) -> Result<String> {
        let prompt = self.render(template_id, bindings)?.with_salt(salt);
        self.complete(&prompt)
    }
}
