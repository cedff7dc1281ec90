use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, Method};
use crate::error::Result;
use crate::infer::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Accuracy,
    Timing,
    Threshold,
    DecisionRate,
    RealPairs,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Accuracy => "accuracy",
            Self::Timing => "timing",
            Self::Threshold => "threshold",
            Self::DecisionRate => "decision_rate",
            Self::RealPairs => "real_pairs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub config_hash: String,
    pub tool_version: String,
}

impl Provenance {
    pub fn for_config(config: &ExperimentConfig) -> Result<Self> {
        let canonical = serde_json::to_vec(config)?;
        let digest = Sha256::digest(&canonical);
        Ok(Self {
            master_seed: config.master_seed,
            config_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }
}

/// Verdict tallies against a known truth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: usize,
    pub wrong: usize,
    pub undecided: usize,
}

impl Tally {
    pub fn record(&mut self, verdict: Verdict, truth: Verdict) {
        if verdict == Verdict::Undecided {
            self.undecided += 1;
        } else if verdict == truth {
            self.correct += 1;
        } else {
            self.wrong += 1;
        }
    }

    pub fn total(&self) -> usize {
        self.correct + self.wrong + self.undecided
    }

    /// `correct / max(1, correct + wrong)`
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / (self.correct + self.wrong).max(1) as f64
    }

    pub fn decision_rate(&self) -> f64 {
        (self.correct + self.wrong) as f64 / self.total().max(1) as f64
    }
}

/// One aggregate line: a method on one setting at one sample size and
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub setting: String,
    pub sample_size: usize,
    pub epsilon: f64,
    pub models: usize,
    pub correct: usize,
    pub wrong: usize,
    pub undecided: usize,
    pub accuracy: f64,
    pub correct_proportion: f64,
    pub wrong_proportion: f64,
    pub undecided_proportion: f64,
    pub mean_time_us: f64,
    pub total_time_s: f64,
}

impl ReportRow {
    pub fn new(
        method: Method,
        setting: &str,
        sample_size: usize,
        epsilon: f64,
        tally: Tally,
        total_time_s: f64,
    ) -> Self {
        let models = tally.total();
        let denom = models.max(1) as f64;
        Self {
            method,
            setting: setting.to_string(),
            sample_size,
            epsilon,
            models,
            correct: tally.correct,
            wrong: tally.wrong,
            undecided: tally.undecided,
            accuracy: tally.accuracy(),
            correct_proportion: tally.correct as f64 / denom,
            wrong_proportion: tally.wrong as f64 / denom,
            undecided_proportion: tally.undecided as f64 / denom,
            mean_time_us: total_time_s * 1e6 / denom,
            total_time_s,
        }
    }

    pub fn tally(&self) -> Tally {
        Tally {
            correct: self.correct,
            wrong: self.wrong,
            undecided: self.undecided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub setting: String,
    pub decision_rate: f64,
    pub decided: usize,
    pub correct: usize,
    /// In percent.
    pub correct_percentage: f64,
    /// Smallest `|delta|` among the decided trials.
    pub min_abs_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub id: u32,
    pub truth: Verdict,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub replicates: usize,
    pub correct: usize,
    pub wrong: usize,
    pub undecided: usize,
    pub accuracy: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPairsSummary {
    pub pairs_listed: usize,
    pub pairs_excluded: usize,
    pub pairs_scored: usize,
    pub pairs_failed: usize,
    /// Correct decisions over all decided replicates of all scored pairs.
    pub pooled_accuracy: f64,
    /// Mean of the per-pair accuracies.
    pub mean_pair_accuracy: f64,
    /// Per replicate index, accuracy across pairs; the spread of this is what
    /// a box plot over replicates shows.
    pub replicate_accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub provenance: Provenance,
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curve: Vec<CurvePoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<RealPairsSummary>,
}

impl ExperimentReport {
    pub fn new(kind: ExperimentKind, config: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            kind,
            provenance: Provenance::for_config(config)?,
            config: config.clone(),
            rows: Vec::new(),
            curve: Vec::new(),
            pairs: Vec::new(),
            summary: None,
        })
    }

    pub fn row(&self, method: Method, setting: &str, sample_size: usize) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.setting == setting && r.sample_size == sample_size)
    }

    /// A copy with all wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            row.mean_time_us = 0.0;
            row.total_time_s = 0.0;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The main table as CSV: the curve for decision-rate runs, per-pair
    /// results for real-pair runs, aggregate rows otherwise.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        match self.kind {
            ExperimentKind::DecisionRate => {
                for p in &self.curve {
                    writer.serialize(p).map_err(csv_err)?;
                }
            }
            ExperimentKind::RealPairs => {
                for p in &self.pairs {
                    writer.serialize(PairCsvRow::from(p)).map_err(csv_err)?;
                }
            }
            _ => {
                for r in &self.rows {
                    writer.serialize(r).map_err(csv_err)?;
                }
            }
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| csv_err(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Serialize)]
struct PairCsvRow<'a> {
    id: u32,
    truth: Verdict,
    n: usize,
    m: usize,
    l: usize,
    replicates: usize,
    correct: usize,
    wrong: usize,
    undecided: usize,
    accuracy: f64,
    error: &'a str,
}

impl<'a> From<&'a PairResult> for PairCsvRow<'a> {
    fn from(p: &'a PairResult) -> Self {
        Self {
            id: p.id,
            truth: p.truth,
            n: p.n,
            m: p.m,
            l: p.l,
            replicates: p.replicates,
            correct: p.correct,
            wrong: p.wrong,
            undecided: p.undecided,
            accuracy: p.accuracy,
            error: p.error.as_deref().unwrap_or(""),
        }
    }
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_bookkeeping() {
        let mut t = Tally::default();
        t.record(Verdict::XCausesY, Verdict::XCausesY);
        t.record(Verdict::YCausesX, Verdict::XCausesY);
        t.record(Verdict::Undecided, Verdict::XCausesY);
        t.record(Verdict::XCausesY, Verdict::XCausesY);
        assert_eq!(t.total(), 4);
        assert!((t.accuracy() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(Tally::default().accuracy(), 0.0);
    }

    #[test]
    fn row_proportions() {
        let tally = Tally {
            correct: 6,
            wrong: 2,
            undecided: 2,
        };
        let row = ReportRow::new(Method::Dc, "s", 100, 0.05, tally, 1.0);
        assert_eq!(row.models, 10);
        assert_eq!(row.accuracy, 0.75);
        assert_eq!(row.undecided_proportion, 0.2);
        assert_eq!(row.mean_time_us, 1e5);
    }
}
