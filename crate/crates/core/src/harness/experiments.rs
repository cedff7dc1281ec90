//! Synthetic-model experiments: accuracy, timing, threshold and decision-rate
//! studies.
//!
//! Every model and sample is a pure function of `(master_seed, setting,
//! model index, sample size)`, so results do not depend on thread count or
//! scheduling.

use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Family, Method};
use super::report::{CurvePoint, ExperimentKind, ExperimentReport, ReportRow, Tally};
use crate::dist::{JointPmf, PairedSample};
use crate::dr::{dr_decide, DrConfig};
use crate::error::{Error, Result};
use crate::infer::{decide, dependence_measures, DependencePair, Verdict};
use crate::seed::{derive_seed, rng_from_seed};
use crate::synth::{gen_anm, gen_reference_set_model, DiscreteModel};

const DR_STREAM: u64 = 0xD5;

#[derive(Debug, Clone, PartialEq)]
enum SettingSpec {
    Anm {
        x_size: usize,
        y0_size: usize,
        noise: Vec<i64>,
    },
    ReferenceSet {
        x_size: usize,
        y_size: usize,
        count: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub index: usize,
    pub label: String,
    spec: SettingSpec,
}

pub fn settings(config: &ExperimentConfig) -> Result<Vec<Setting>> {
    match &config.family {
        Family::Anm {
            x_size,
            y0_size,
            noise_domains,
        } => Ok(noise_domains
            .iter()
            .enumerate()
            .map(|(index, noise)| Setting {
                index,
                label: format!("noise{}", noise.len()),
                spec: SettingSpec::Anm {
                    x_size: *x_size,
                    y0_size: *y0_size,
                    noise: noise.clone(),
                },
            })
            .collect()),
        Family::ReferenceSet {
            sizes,
            reference_count,
        } => Ok(sizes
            .iter()
            .enumerate()
            .map(|(index, &(m, l))| Setting {
                index,
                label: format!("{m}x{l}"),
                spec: SettingSpec::ReferenceSet {
                    x_size: m,
                    y_size: l,
                    count: *reference_count,
                },
            })
            .collect()),
        Family::RealPairs { .. } => Err(Error::Config(
            "real_pairs family is only valid for the real-pairs experiment".into(),
        )),
    }
}

pub fn model_for(
    config: &ExperimentConfig,
    setting: &Setting,
    model: usize,
) -> Result<DiscreteModel> {
    let seed = derive_seed(config.master_seed, &[setting.index as u64, model as u64]);
    let mut rng = rng_from_seed(seed);
    match &setting.spec {
        SettingSpec::Anm {
            x_size,
            y0_size,
            noise,
        } => gen_anm(&mut rng, *x_size, *y0_size, noise),
        SettingSpec::ReferenceSet {
            x_size,
            y_size,
            count,
        } => gen_reference_set_model(&mut rng, *x_size, *y_size, *count),
    }
}

fn sample_seed(config: &ExperimentConfig, setting: &Setting, model: usize, n: usize) -> u64 {
    derive_seed(
        config.master_seed,
        &[setting.index as u64, model as u64, n as u64],
    )
}

pub fn sample_for(
    config: &ExperimentConfig,
    setting: &Setting,
    model_index: usize,
    model: &DiscreteModel,
    n: usize,
) -> Result<PairedSample> {
    let mut rng = rng_from_seed(sample_seed(config, setting, model_index, n));
    model.sample(n, &mut rng)
}

fn dr_config_for(config: &ExperimentConfig, sample_seed: u64) -> DrConfig {
    DrConfig {
        seed: derive_seed(sample_seed, &[DR_STREAM]),
        ..config.dr
    }
}

/// DC measures, with degenerate supports mapped to `None`.
fn dc_measures(sample: &PairedSample) -> Result<Option<DependencePair>> {
    let joint = JointPmf::estimate(sample)?;
    match dependence_measures(&joint) {
        Ok(m) => Ok(Some(m)),
        Err(Error::DegenerateSupport { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs one method on one sample and returns its verdict.
pub fn run_method(
    method: Method,
    sample: &PairedSample,
    epsilon: f64,
    dr: &DrConfig,
) -> Result<Verdict> {
    match method {
        Method::Dc => match dc_measures(sample)? {
            Some(m) => Ok(decide(m, epsilon)?.verdict),
            None => Ok(Verdict::Undecided),
        },
        Method::Dr => match dr_decide(sample, dr) {
            Ok(d) => Ok(d.verdict),
            Err(Error::DegenerateSupport { .. }) => Ok(Verdict::Undecided),
            Err(e) => Err(e),
        },
    }
}

fn with_pool<T: Send>(config: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    match config.threads {
        None => Ok(f()),
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

struct TrialRecord {
    sample_size: usize,
    method: Method,
    verdict: Verdict,
    seconds: f64,
}

/// Accuracy of each method for every setting and sample size, forced choice
/// unless the config sets a positive epsilon.
pub fn run_accuracy(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let settings = settings(config)?;
    let items: Vec<(usize, usize)> = (0..settings.len())
        .flat_map(|s| (0..config.models_per_setting).map(move |m| (s, m)))
        .collect();

    let trials: Vec<Vec<TrialRecord>> = with_pool(config, || {
        items
            .par_iter()
            .map(|&(s, m)| {
                let setting = &settings[s];
                let model = model_for(config, setting, m)?;
                let mut out = Vec::new();
                for &n in &config.sample_sizes {
                    let sample = sample_for(config, setting, m, &model, n)?;
                    let dr = dr_config_for(config, sample_seed(config, setting, m, n));
                    for &method in &config.methods {
                        let start = Instant::now();
                        let verdict = run_method(method, &sample, config.epsilon, &dr)?;
                        out.push(TrialRecord {
                            sample_size: n,
                            method,
                            verdict,
                            seconds: start.elapsed().as_secs_f64(),
                        });
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut report = ExperimentReport::new(ExperimentKind::Accuracy, config)?;
    for setting in &settings {
        for &n in &config.sample_sizes {
            for &method in &config.methods {
                let mut tally = Tally::default();
                let mut seconds = 0.0;
                for (&(s, _), records) in items.iter().zip(&trials) {
                    if s != setting.index {
                        continue;
                    }
                    for r in records
                        .iter()
                        .filter(|r| r.sample_size == n && r.method == method)
                    {
                        tally.record(r.verdict, Verdict::XCausesY);
                        seconds += r.seconds;
                    }
                }
                report.rows.push(ReportRow::new(
                    method,
                    &setting.label,
                    n,
                    config.epsilon,
                    tally,
                    seconds,
                ));
            }
        }
    }
    Ok(report)
}

/// Total single-threaded wall time of each method over
/// `timing_repetitions` samples per sample size. Both methods see the same
/// samples; one warm-up call per method is discarded.
pub fn run_timing(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let settings = settings(config)?;
    let mut report = ExperimentReport::new(ExperimentKind::Timing, config)?;
    for setting in &settings {
        for &n in &config.sample_sizes {
            let mut samples = Vec::with_capacity(config.timing_repetitions);
            for rep in 0..config.timing_repetitions {
                let model = model_for(config, setting, rep)?;
                let sample = sample_for(config, setting, rep, &model, n)?;
                let dr = dr_config_for(config, sample_seed(config, setting, rep, n));
                samples.push((sample, dr));
            }
            for &method in &config.methods {
                let (warm, warm_dr) = &samples[0];
                std::hint::black_box(run_method(method, warm, config.epsilon, warm_dr)?);
                let mut tally = Tally::default();
                let start = Instant::now();
                for (sample, dr) in &samples {
                    let verdict = run_method(method, sample, config.epsilon, dr)?;
                    tally.record(std::hint::black_box(verdict), Verdict::XCausesY);
                }
                let seconds = start.elapsed().as_secs_f64();
                report.rows.push(ReportRow::new(
                    method,
                    &setting.label,
                    n,
                    config.epsilon,
                    tally,
                    seconds,
                ));
            }
        }
    }
    Ok(report)
}

/// DC measures for every model of every setting at one sample size.
/// `None` marks a degenerate sample.
pub fn dc_trial_measures(
    config: &ExperimentConfig,
    n: usize,
) -> Result<Vec<(Setting, Vec<Option<DependencePair>>)>> {
    let settings = settings(config)?;
    with_pool(config, || {
        settings
            .into_iter()
            .map(|setting| {
                let measures = (0..config.models_per_setting)
                    .into_par_iter()
                    .map(|m| {
                        let model = model_for(config, &setting, m)?;
                        let sample = sample_for(config, &setting, m, &model, n)?;
                        dc_measures(&sample)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((setting, measures))
            })
            .collect::<Result<Vec<_>>>()
    })?
}

/// Correct/wrong/undecided proportions of DC for each threshold in
/// `config.epsilons`, all computed from one set of trials.
pub fn run_threshold_study(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let n = config.threshold_sample_size;
    let trials = dc_trial_measures(config, n)?;
    let mut report = ExperimentReport::new(ExperimentKind::Threshold, config)?;
    for (setting, measures) in &trials {
        for &eps in &config.epsilons {
            let mut tally = Tally::default();
            for m in measures {
                let verdict = match m {
                    Some(m) => decide(*m, eps)?.verdict,
                    None => Verdict::Undecided,
                };
                tally.record(verdict, Verdict::XCausesY);
            }
            report.rows.push(ReportRow::new(
                Method::Dc,
                &setting.label,
                n,
                eps,
                tally,
                0.0,
            ));
        }
    }
    Ok(report)
}

/// Percentage of correct decisions among the trials with the largest
/// `|delta|`, for each requested decision rate. `deltas` are `d_yx - d_xy`
/// with X -> Y the truth. Ties in `|delta|` keep trial order.
pub fn decision_rate_curve(setting: &str, deltas: &[f64], rates: &[f64]) -> Vec<CurvePoint> {
    let mut order: Vec<usize> = (0..deltas.len()).collect();
    order.sort_by(|&a, &b| deltas[b].abs().total_cmp(&deltas[a].abs()));
    let total = deltas.len();
    rates
        .iter()
        .map(|&rate| {
            let decided = ((rate * total as f64).round() as usize).clamp(1.min(total), total);
            let top = &order[..decided];
            let correct = top.iter().filter(|&&i| deltas[i] > 0.0).count();
            CurvePoint {
                setting: setting.to_string(),
                decision_rate: rate,
                decided,
                correct,
                correct_percentage: if decided == 0 {
                    0.0
                } else {
                    100.0 * correct as f64 / decided as f64
                },
                min_abs_delta: top.last().map_or(0.0, |&i| deltas[i].abs()),
            }
        })
        .collect()
}

/// DC decision-rate curve at `config.curve_sample_size`. Also emits one
/// forced-choice accuracy row per setting.
pub fn run_decision_rate_curve(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let n = config.curve_sample_size;
    let trials = dc_trial_measures(config, n)?;
    let mut report = ExperimentReport::new(ExperimentKind::DecisionRate, config)?;
    for (setting, measures) in &trials {
        // Degenerate trials carry no evidence and sort last.
        let deltas: Vec<f64> = measures
            .iter()
            .map(|m| m.map_or(0.0, |m| m.delta()))
            .collect();
        report.curve.extend(decision_rate_curve(
            &setting.label,
            &deltas,
            &config.decision_rates,
        ));
        let mut tally = Tally::default();
        for m in measures {
            let verdict = match m {
                Some(m) => decide(*m, 0.0)?.verdict,
                None => Verdict::Undecided,
            };
            tally.record(verdict, Verdict::XCausesY);
        }
        report.rows.push(ReportRow::new(
            Method::Dc,
            &setting.label,
            n,
            0.0,
            tally,
            0.0,
        ));
    }
    Ok(report)
}
