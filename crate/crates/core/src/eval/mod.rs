//! Evaluation harness: alignment scoring, Welch's t-test, the two
//! multi-round comparison studies and the method-pair report.

mod experiment;
mod report;
mod stats;

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Encoder;
use crate::similarity::cosine;

pub use experiment::{run_experiment, ArmRun, ExperimentConfig, ExperimentRun, Materials, Segments, Study};
pub use report::{Report, ReportRow, SummaryRow, SummaryTable, RATIO_TOLERANCE};
pub use stats::{
    ln_gamma, regularized_incomplete_beta, student_t_two_tailed, summarize, welch_t, welch_t_from_summary,
    SampleSummary, TTestResult,
};

/// Per-round scores of one arm; index `i` holds round `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub label: String,
    pub scores: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(label: impl Into<String>, scores: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            scores,
        }
    }

    pub fn rounds(&self) -> usize {
        self.scores.len()
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.scores.is_empty()).then(|| self.scores.iter().sum::<f64>() / self.scores.len() as f64)
    }

    /// Writes `round,score` rows, rounds numbered from 1.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Parse {
            line: 0,
            message: e.to_string(),
        };
        out.write_record(["round", "score"]).map_err(csv_err)?;
        for (i, score) in self.scores.iter().enumerate() {
            out.write_record([(i + 1).to_string(), score.to_string()])
                .map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))
    }

    /// Reads `round,score` rows. Rounds may appear in any order but must
    /// cover `1..=n` exactly once.
    pub fn from_csv<R: Read>(label: impl Into<String>, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        if headers.len() != 2 || &headers[0] != "round" || &headers[1] != "score" {
            return Err(Error::Parse {
                line: 1,
                message: "expected header \"round,score\"".into(),
            });
        }
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let bad = |message: String| Error::Parse { line, message };
            let record = record.map_err(|e| bad(e.to_string()))?;
            let round: usize = record[0]
                .parse()
                .map_err(|_| bad(format!("invalid round {:?}", &record[0])))?;
            let score: f64 = record[1]
                .parse()
                .map_err(|_| bad(format!("invalid score {:?}", &record[1])))?;
            if !score.is_finite() {
                return Err(bad("score must be finite".into()));
            }
            rows.push((round, score, line));
        }
        rows.sort_by_key(|r| r.0);
        for (i, &(round, _, line)) in rows.iter().enumerate() {
            if round != i + 1 {
                return Err(Error::Parse {
                    line,
                    message: format!("rounds must be 1..={} without gaps or repeats", rows.len()),
                });
            }
        }
        Ok(Self::new(label, rows.into_iter().map(|r| r.1).collect()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_csv(label, file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.to_csv(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Cosine between the encoded output and the encoded reference.
pub fn segment_similarity(output: &str, reference: &str, encoder: &dyn Encoder) -> Result<f64> {
    if reference.trim().is_empty() {
        return Err(Error::Precondition("reference text is empty".into()));
    }
    cosine(&encoder.encode(output), &encoder.encode(reference))
}
