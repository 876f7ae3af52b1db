//! The two comparison studies, each run as a treated arm and a control arm
//! over independent multi-turn sessions.
//!
//! Relationship study: both arms ask the banana question, receive the
//! picking-time material and ask again; only the treated arm is prompted
//! to separate the material into question-solution pairs in between.
//!
//! Feature study: both arms receive the eleven stories and the disk
//! question; the treated arm is then asked to form pairs and pick an
//! applicable one, the control arm only which story gives an indication.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Encoder, HashingEncoder};
use crate::gateway::Gateway;

use super::{segment_similarity, ScoreSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    Rela,
    Feature,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Rela => "rela",
            Study::Feature => "feature",
        }
    }

    pub fn arm_labels(self) -> (&'static str, &'static str) {
        match self {
            Study::Rela => ("RelaMethod", "CompareRela"),
            Study::Feature => ("featureMethd", "compareMP3Method"),
        }
    }

    pub fn pair_label(self) -> String {
        let (a, b) = self.arm_labels();
        format!("{a} vs. {b}")
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rela" | "relationship" => Ok(Study::Rela),
            "feature" => Ok(Study::Feature),
            other => Err(Error::InvalidConfig(format!(
                "unknown experiment {other:?} (expected rela or feature)"
            ))),
        }
    }
}

/// Texts one study needs: the question asked, the material provided and
/// the reference every final answer is scored against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Materials {
    pub question: String,
    pub material: String,
    pub reference: String,
}

const CORPUS_FILES: [(&str, &str); 5] = [
    (
        "relationship_question.txt",
        include_str!("../../fixtures/corpus/relationship_question.txt"),
    ),
    (
        "relationship_hint.txt",
        include_str!("../../fixtures/corpus/relationship_hint.txt"),
    ),
    (
        "feature_question.txt",
        include_str!("../../fixtures/corpus/feature_question.txt"),
    ),
    (
        "feature_hint.txt",
        include_str!("../../fixtures/corpus/feature_hint.txt"),
    ),
    ("stories.txt", include_str!("../../fixtures/corpus/stories.txt")),
];

fn builtin_text(name: &str) -> String {
    CORPUS_FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| text.trim().to_string())
        .expect("corpus file is embedded")
}

fn file_names(study: Study) -> (&'static str, &'static str, &'static str) {
    match study {
        Study::Rela => (
            "relationship_question.txt",
            "relationship_hint.txt",
            "relationship_hint.txt",
        ),
        Study::Feature => ("feature_question.txt", "stories.txt", "feature_hint.txt"),
    }
}

impl Materials {
    /// The shipped corpus.
    pub fn builtin(study: Study) -> Self {
        let (q, m, r) = file_names(study);
        Self {
            question: builtin_text(q),
            material: builtin_text(m),
            reference: builtin_text(r),
        }
    }

    /// Reads the same file names from a corpus directory.
    pub fn from_dir(study: Study, dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let read = |name: &str| -> Result<String> {
            let path = dir.join(name);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            if text.trim().is_empty() {
                return Err(Error::Precondition(format!("{} is empty", path.display())));
            }
            Ok(text.trim().to_string())
        };
        let (q, m, r) = file_names(study);
        Ok(Self {
            question: read(q)?,
            material: read(m)?,
            reference: read(r)?,
        })
    }
}

/// Manual scoring segments, keyed by arm (`treated` / `control`) then
/// 1-based round. A present segment is scored instead of the full answer.
pub type Segments = BTreeMap<String, BTreeMap<usize, String>>;

#[derive(Clone)]
pub struct ExperimentConfig {
    pub encoder: Arc<dyn Encoder>,
    pub segments: Segments,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            encoder: Arc::new(HashingEncoder::default()),
            segments: Segments::new(),
        }
    }
}

impl fmt::Debug for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExperimentConfig")
            .field("dim", &self.encoder.dim())
            .field("segments", &self.segments)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmRun {
    /// Final answer of every round.
    pub outputs: Vec<String>,
    pub series: ScoreSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRun {
    pub study: Study,
    pub reference: String,
    pub treated: ArmRun,
    pub control: ArmRun,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Arm {
    Treated,
    Control,
}

impl Arm {
    fn key(self) -> &'static str {
        match self {
            Arm::Treated => "treated",
            Arm::Control => "control",
        }
    }
}

/// User messages of one session, in order.
fn protocol(study: Study, arm: Arm, materials: &Materials, gateway: &Gateway) -> Result<Vec<String>> {
    let render = |id: &str, bindings: &[(&str, &str)]| Ok(gateway.render(id, bindings)?.rendered);
    let q = materials.question.as_str();
    let m = materials.material.as_str();
    let mut steps = Vec::new();
    match study {
        Study::Rela => {
            steps.push(render("ask_question", &[("question", q)])?);
            steps.push(render("provide_material", &[("material", m)])?);
            if arm == Arm::Treated {
                steps.push(render("pair_separation", &[("content", m)])?);
            }
            steps.push(render("ask_question", &[("question", q)])?);
        }
        Study::Feature => {
            steps.push(render("provide_material", &[("material", m)])?);
            steps.push(render("ask_question", &[("question", q)])?);
            steps.push(match arm {
                Arm::Treated => render("feature_pairs", &[("question", q)])?,
                Arm::Control => render("which_story", &[("count", "11"), ("issue", "disk time reset")])?,
            });
        }
    }
    Ok(steps)
}

/// Runs one session and returns its final answer.
fn run_session(study: Study, arm: Arm, round: usize, materials: &Materials, gateway: &Gateway) -> Result<String> {
    let mut history = String::new();
    let mut last = String::new();
    for (k, message) in protocol(study, arm, materials, gateway)?.iter().enumerate() {
        let salt = format!("{}/{}/round-{:02}/step-{}", study.name(), arm.key(), round, k + 1);
        let prompt = gateway
            .render("conversation", &[("history", &history), ("message", message)])?
            .with_salt(salt);
        last = gateway.complete(&prompt)?;
        history.push_str(&format!("User: {message}\nAssistant: {}\n\n", last.trim()));
    }
    Ok(last)
}

fn run_arm(
    study: Study,
    arm: Arm,
    label: &str,
    rounds: usize,
    materials: &Materials,
    gateway: &Gateway,
    config: &ExperimentConfig,
) -> Result<ArmRun> {
    let overrides = config.segments.get(arm.key());
    let mut outputs = Vec::with_capacity(rounds);
    let mut scores = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let output = run_session(study, arm, round, materials, gateway)?;
        let scored = overrides
            .and_then(|m| m.get(&round))
            .map(String::as_str)
            .unwrap_or(&output);
        scores.push(segment_similarity(
            scored,
            &materials.reference,
            config.encoder.as_ref(),
        )?);
        outputs.push(output);
    }
    Ok(ArmRun {
        outputs,
        series: ScoreSeries::new(label, scores),
    })
}

/// Runs both arms for `rounds` rounds; treated first.
pub fn run_experiment(
    study: Study,
    rounds: usize,
    materials: &Materials,
    gateway: &Gateway,
    config: &ExperimentConfig,
) -> Result<ExperimentRun> {
    if rounds == 0 {
        return Err(Error::Precondition("rounds must be at least 1".into()));
    }
    if materials.reference.trim().is_empty() {
        return Err(Error::Precondition("reference text is empty".into()));
    }
    let (treated_label, control_label) = study.arm_labels();
    let treated = run_arm(study, Arm::Treated, treated_label, rounds, materials, gateway, config)?;
    let control = run_arm(study, Arm::Control, control_label, rounds, materials, gateway, config)?;
    Ok(ExperimentRun {
        study,
        reference: materials.reference.clone(),
        treated,
        control,
    })
}
