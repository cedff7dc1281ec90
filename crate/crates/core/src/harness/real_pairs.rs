//! Real cause-effect pairs: discretize, resample, run DC, score against the
//! recorded direction.
//!
//! The data directory holds `pairNNNN.txt` files with whitespace-separated
//! numeric columns and a metadata file. Metadata lines are either the
//! six-column form `id cause_first cause_last effect_first effect_last weight`
//! (1-based column ranges) or the two-column form `id x_causes_y|y_causes_x`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Family, Resampling};
use super::discretize::{discretize_column, DiscretizeRule};
use super::io::parse_numeric_table;
use super::report::{ExperimentKind, ExperimentReport, PairResult, RealPairsSummary, Tally};
use crate::dist::{JointPmf, PairedSample};
use crate::error::{Error, Result};
use crate::infer::{decide, dependence_measures, Verdict};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq)]
pub enum PairTruth {
    /// Column ranges, 1-based and inclusive.
    Columns {
        cause: (usize, usize),
        effect: (usize, usize),
    },
    Direction(Verdict),
}

impl PairTruth {
    /// Direction relative to the chosen zero-based `(x, y)` columns.
    pub fn verdict(&self, columns: (usize, usize)) -> Result<Verdict> {
        match *self {
            PairTruth::Direction(v) => Ok(v),
            PairTruth::Columns { cause, effect } => {
                if cause.0 != cause.1 || effect.0 != effect.1 {
                    return Err(Error::InvalidParameter("multivariate pair".into()));
                }
                let (x, y) = (columns.0 + 1, columns.1 + 1);
                if cause.0 == x && effect.0 == y {
                    Ok(Verdict::XCausesY)
                } else if cause.0 == y && effect.0 == x {
                    Ok(Verdict::YCausesX)
                } else {
                    Err(Error::InvalidParameter(format!(
                        "chosen columns {x},{y} are not the recorded cause/effect columns"
                    )))
                }
            }
        }
    }
}

pub fn parse_metadata(text: &str) -> Result<BTreeMap<u32, PairTruth>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let id: u32 = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad pair id {:?}", fields[0])))?;
        let truth = match fields.len() {
            2 => PairTruth::Direction(match fields[1] {
                "x_causes_y" | "->" => Verdict::XCausesY,
                "y_causes_x" | "<-" => Verdict::YCausesX,
                other => return Err(parse_err(format!("unknown direction {other:?}"))),
            }),
            n if n >= 5 => {
                let num = |k: usize| -> Result<usize> {
                    fields[k]
                        .parse()
                        .map_err(|_| parse_err(format!("bad column index {:?}", fields[k])))
                };
                PairTruth::Columns {
                    cause: (num(1)?, num(2)?),
                    effect: (num(3)?, num(4)?),
                }
            }
            _ => return Err(parse_err(format!("unrecognized metadata line {line:?}"))),
        };
        out.insert(id, truth);
    }
    Ok(out)
}

pub fn pair_path(data_dir: &Path, id: u32) -> PathBuf {
    data_dir.join(format!("pair{id:04}.txt"))
}

/// Loads one pair file and discretizes the chosen columns.
pub fn load_pair(
    path: &Path,
    columns: (usize, usize),
    rule: DiscretizeRule,
) -> Result<PairedSample> {
    let text = std::fs::read_to_string(path)?;
    let table = parse_numeric_table(&text)?;
    if table.is_empty() {
        return Err(Error::EmptySample);
    }
    let width = table[0].len();
    if columns.0 >= width || columns.1 >= width {
        return Err(Error::InvalidParameter(format!(
            "file has {width} columns, wanted {} and {}",
            columns.0 + 1,
            columns.1 + 1
        )));
    }
    let xs: Vec<f64> = table.iter().map(|r| r[columns.0]).collect();
    let ys: Vec<f64> = table.iter().map(|r| r[columns.1]).collect();
    let xs = discretize_column(&xs, rule)?;
    let ys = discretize_column(&ys, rule)?;
    Ok(xs.into_iter().zip(ys).collect())
}

pub fn resample<R: Rng + ?Sized>(
    sample: &PairedSample,
    scheme: Resampling,
    rng: &mut R,
) -> PairedSample {
    let n = sample.len();
    let records = sample.records();
    match scheme {
        Resampling::Bootstrap => (0..n).map(|_| records[rng.random_range(0..n)]).collect(),
        Resampling::Subsample { fraction } => {
            let k = ((fraction * n as f64).round() as usize).clamp(1, n);
            let mut idx = sample_indices(rng, n, k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| records[i]).collect()
        }
    }
}

struct PairSpec {
    id: u32,
    truth: Result<Verdict>,
    rule: DiscretizeRule,
}

fn score_pair(config: &ExperimentConfig, spec: &PairSpec) -> PairResult {
    let Family::RealPairs {
        data_dir,
        replicates,
        resampling,
        columns,
        ..
    } = &config.family
    else {
        unreachable!("checked by run_real_pairs")
    };
    let mut result = PairResult {
        id: spec.id,
        truth: Verdict::Undecided,
        n: 0,
        m: 0,
        l: 0,
        replicates: *replicates,
        correct: 0,
        wrong: 0,
        undecided: 0,
        accuracy: 0.0,
        error: None,
    };
    let outcome = (|| -> Result<Tally> {
        let truth = match &spec.truth {
            Ok(v) => *v,
            Err(e) => return Err(Error::InvalidParameter(e.to_string())),
        };
        result.truth = truth;
        let sample = load_pair(&pair_path(data_dir, spec.id), *columns, spec.rule)?;
        let joint = JointPmf::estimate(&sample)?;
        (result.n, (result.m, result.l)) = (sample.len(), joint.shape());
        // A constant column makes the whole pair unusable.
        dependence_measures(&joint)?;
        let mut tally = Tally::default();
        for r in 0..*replicates {
            let mut rng =
                rng_from_seed(derive_seed(config.master_seed, &[spec.id as u64, r as u64]));
            let replicate = resample(&sample, *resampling, &mut rng);
            let verdict = match dependence_measures(&JointPmf::estimate(&replicate)?) {
                Ok(m) => decide(m, config.epsilon)?.verdict,
                Err(Error::DegenerateSupport { .. }) => Verdict::Undecided,
                Err(e) => return Err(e),
            };
            tally.record(verdict, truth);
        }
        Ok(tally)
    })();
    match outcome {
        Ok(t) => {
            result.correct = t.correct;
            result.wrong = t.wrong;
            result.undecided = t.undecided;
            result.accuracy = t.accuracy();
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    result
}

/// Runs DC on every retained pair listed in the metadata. Pairs that fail to
/// load or are degenerate are reported with an error and left out of the
/// averages.
pub fn run_real_pairs(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let Family::RealPairs {
        data_dir,
        metadata,
        exclude,
        columns,
        scale_overrides,
        replicates,
        ..
    } = &config.family
    else {
        return Err(Error::Config(
            "the real-pairs experiment needs a real_pairs family".into(),
        ));
    };
    let meta_path = metadata
        .clone()
        .unwrap_or_else(|| data_dir.join("pairmeta.txt"));
    let meta_text = std::fs::read_to_string(&meta_path)
        .map_err(|e| Error::Config(format!("{}: {e}", meta_path.display())))?;
    let meta = parse_metadata(&meta_text)?;

    let specs: Vec<PairSpec> = meta
        .iter()
        .filter(|(id, _)| !exclude.contains(id))
        .map(|(&id, truth)| PairSpec {
            id,
            truth: truth.verdict(*columns),
            rule: scale_overrides
                .get(&id)
                .map_or(DiscretizeRule::Auto, |&k| DiscretizeRule::Scale(k)),
        })
        .collect();

    let pairs: Vec<PairResult> = if let Some(threads) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| specs.par_iter().map(|s| score_pair(config, s)).collect())
    } else {
        specs.par_iter().map(|s| score_pair(config, s)).collect()
    };

    let scored: Vec<&PairResult> = pairs.iter().filter(|p| p.error.is_none()).collect();
    let mut pooled = Tally::default();
    for p in &scored {
        pooled.correct += p.correct;
        pooled.wrong += p.wrong;
        pooled.undecided += p.undecided;
    }
    let mean_pair_accuracy = if scored.is_empty() {
        0.0
    } else {
        scored.iter().map(|p| p.accuracy).sum::<f64>() / scored.len() as f64
    };
    let replicate_accuracies = replicate_accuracies(config, &specs, &pairs, *replicates)?;

    let mut report = ExperimentReport::new(ExperimentKind::RealPairs, config)?;
    report.summary = Some(RealPairsSummary {
        pairs_listed: meta.len(),
        pairs_excluded: meta.len() - specs.len(),
        pairs_scored: scored.len(),
        pairs_failed: pairs.len() - scored.len(),
        pooled_accuracy: pooled.accuracy(),
        mean_pair_accuracy,
        replicate_accuracies,
    });
    report.pairs = pairs;
    Ok(report)
}

/// Accuracy across scored pairs for each replicate index. Re-derives each
/// replicate from its seed, so it matches the per-pair tallies exactly.
fn replicate_accuracies(
    config: &ExperimentConfig,
    specs: &[PairSpec],
    pairs: &[PairResult],
    replicates: usize,
) -> Result<Vec<f64>> {
    let Family::RealPairs {
        data_dir,
        resampling,
        columns,
        ..
    } = &config.family
    else {
        unreachable!()
    };
    let mut per_rep = vec![Tally::default(); replicates];
    for (spec, result) in specs.iter().zip(pairs) {
        if result.error.is_some() {
            continue;
        }
        let sample = load_pair(&pair_path(data_dir, spec.id), *columns, spec.rule)?;
        let tallies: Vec<Verdict> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng =
                    rng_from_seed(derive_seed(config.master_seed, &[spec.id as u64, r as u64]));
                let replicate = resample(&sample, *resampling, &mut rng);
                match dependence_measures(&JointPmf::estimate(&replicate)?) {
                    Ok(m) => Ok(decide(m, config.epsilon)?.verdict),
                    Err(Error::DegenerateSupport { .. }) => Ok(Verdict::Undecided),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        for (r, v) in tallies.into_iter().enumerate() {
            per_rep[r].record(v, result.truth);
        }
    }
    Ok(per_rep.iter().map(Tally::accuracy).collect())
}
