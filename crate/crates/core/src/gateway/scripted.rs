use std::collections::VecDeque;
use std::sync::Mutex;

use crate::error::{Error, Result};

use super::{Backend, Prompt};

/// Answers from a programmed queue, in order. Single consumer.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    queue: Mutex<VecDeque<String>>,
    seen: Mutex<Vec<Prompt>>,
}

impl ScriptedBackend {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            queue: Mutex::new(responses.into_iter().map(Into::into).collect()),
            seen: Mutex::new(Vec::new()),
        }
    }

    pub fn push(&self, response: impl Into<String>) {
        self.queue.lock().unwrap().push_back(response.into());
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().unwrap().len()
    }

    /// Prompts received so far.
    pub fn prompts(&self) -> Vec<Prompt> {
        self.seen.lock().unwrap().clone()
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, prompt: &Prompt) -> Result<String> {
        self.seen.lock().unwrap().push(prompt.clone());
        self.queue.lock().unwrap().pop_front().ok_or(Error::ScriptExhausted)
    }
}

/// Backend computed by a closure; handy for rule-based stand-ins.
pub struct FnBackend<F> {
    f: F,
}

impl<F> FnBackend<F>
where
    F: Fn(&Prompt) -> Result<String> + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F> Backend for FnBackend<F>
where
    F: Fn(&Prompt) -> Result<String> + Send + Sync,
{
    fn complete(&self, prompt: &Prompt) -> Result<String> {
        (self.f)(prompt)
    }
}
