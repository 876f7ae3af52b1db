//! Method-pair comparison table: mean difference, average similarity and
//! their ratio, with the Welch test alongside.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Encoder;
use crate::similarity::cosine;

use super::stats::{welch_t, welch_t_from_summary, SampleSummary, TTestResult};
use super::{ExperimentRun, ScoreSeries};

/// Largest gap between a computed and a published ratio (as fractions)
/// that is not flagged.
pub const RATIO_TOLERANCE: f64 = 1e-3;

/// One row of published summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub a: SampleSummary,
    pub b: SampleSummary,
    pub average_similarity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reuse_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub mean_difference: f64,
    pub average_similarity: f64,
    /// `mean_difference / average_similarity`; absent when the average
    /// similarity is zero.
    pub relative_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_ratio: Option<f64>,
    /// Set when a published ratio exists and differs from the computed one
    /// by more than [`RATIO_TOLERANCE`].
    pub ratio_discrepancy: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reuse_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<TTestResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<ScoreSeries>,
}

impl ReportRow {
    fn build(label: String, mean_a: f64, mean_b: f64, average_similarity: f64, published_ratio: Option<f64>) -> Self {
        let mean_difference = (mean_a - mean_b).abs();
        let relative_ratio = (average_similarity != 0.0).then(|| mean_difference / average_similarity);
        let ratio_discrepancy = match (relative_ratio, published_ratio) {
            (Some(c), Some(p)) => (c - p).abs() > RATIO_TOLERANCE,
            (None, Some(_)) => true,
            _ => false,
        };
        Self {
            label,
            mean_a,
            mean_b,
            mean_difference,
            average_similarity,
            relative_ratio,
            published_ratio,
            ratio_discrepancy,
            reuse_type: None,
            test: None,
            series: Vec::new(),
        }
    }

    /// Row from summary statistics; the test is recomputed from them.
    pub fn from_summary(row: &SummaryRow) -> Result<Self> {
        let mut out = Self::build(
            row.label.clone(),
            row.a.mean,
            row.b.mean,
            row.average_similarity,
            row.published_ratio,
        );
        out.reuse_type = row.reuse_type.clone();
        out.test = Some(welch_t_from_summary(row.a, row.b)?);
        Ok(out)
    }

    /// Row from a finished run. Average similarity is the mean cosine
    /// between the two arms' outputs of the same round.
    pub fn from_run(run: &ExperimentRun, encoder: &dyn Encoder) -> Result<Self> {
        let (ta, ca) = (&run.treated, &run.control);
        if ta.outputs.len() != ca.outputs.len() {
            return Err(Error::LengthMismatch(ta.outputs.len(), ca.outputs.len()));
        }
        if ta.series.rounds() != ca.series.rounds() {
            return Err(Error::LengthMismatch(ta.series.rounds(), ca.series.rounds()));
        }
        if ta.outputs.is_empty() {
            return Err(Error::Precondition("a run needs at least one round".into()));
        }
        let mut total = 0.0;
        for (a, b) in ta.outputs.iter().zip(&ca.outputs) {
            total += cosine(&encoder.encode(a), &encoder.encode(b))?;
        }
        let average_similarity = total / ta.outputs.len() as f64;
        let mean_a = ta.series.mean().expect("non-empty");
        let mean_b = ca.series.mean().expect("non-empty");
        let mut out = Self::build(run.study.pair_label(), mean_a, mean_b, average_similarity, None);
        out.test = match welch_t(&ta.series, &ca.series) {
            Ok(t) => Some(t),
            Err(Error::Precondition(_) | Error::DegenerateVariance) => None,
            Err(e) => return Err(e),
        };
        out.series = vec![ta.series.clone(), ca.series.clone()];
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

fn percent(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

impl Report {
    pub fn from_summary(table: &SummaryTable) -> Result<Self> {
        Ok(Self {
            rows: table.rows.iter().map(ReportRow::from_summary).collect::<Result<_>>()?,
        })
    }

    pub fn load_summary(path: impl AsRef<Path>) -> Result<SummaryTable> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table with a footnote for flagged ratios.
    pub fn render_table(&self) -> String {
        let header = [
            "Method Pair",
            "Mean Difference",
            "Average Similarity",
            "Relative Ratio",
            "t",
            "df",
            "p",
        ];
        let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        let mut notes = Vec::new();
        for row in &self.rows {
            let mut ratio = row.relative_ratio.map(percent).unwrap_or_else(|| "n/a".into());
            if row.ratio_discrepancy {
                ratio.push('*');
                notes.push(format!(
                    "* {}: computed ratio {} differs from the published {}",
                    row.label,
                    row.relative_ratio.map(percent).unwrap_or_else(|| "n/a".into()),
                    row.published_ratio.map(percent).unwrap_or_else(|| "n/a".into()),
                ));
            }
            let (t, df, p) = match &row.test {
                Some(t) => (
                    format!("{:.2}", t.t),
                    format!("{:.2}", t.df),
                    format!("{:.3e}", t.p_two_tailed),
                ),
                None => ("-".into(), "-".into(), "-".into()),
            };
            cells.push(vec![
                row.label.clone(),
                format!("{:.4}", row.mean_difference),
                format!("{:.4}", row.average_similarity),
                ratio,
                t,
                df,
                p,
            ]);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in cells.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c == 0 {
                        format!("{cell:<w$}", w = widths[c])
                    } else {
                        format!("{cell:>w$}", w = widths[c])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        for note in notes {
            let _ = writeln!(out, "{note}");
        }
        out
    }
}
