use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dr::DrConfig;
use crate::error::{Error, Result};
use crate::synth::standard_noise_domain;

/// Models per setting used when no count is given.
pub const DESK_SCALE_MODELS: usize = 100;
/// Models per setting of the full-size experiments.
pub const FULL_SCALE_MODELS: usize = 500;

pub const PAPER_SAMPLE_SIZES: [usize; 6] = [200, 300, 500, 1000, 2000, 4000];
pub const PAPER_EPSILONS: [f64; 3] = [0.01, 0.05, 0.1];
/// Pair ids left out of the real-data run: multivariate pairs and pairs too
/// large to process.
pub const EXCLUDED_PAIRS: [u32; 10] = [17, 44, 45, 52, 53, 54, 55, 68, 71, 75];
/// Stock-return pairs, discretized with `round(100 * v)`.
pub const STOCK_RETURN_PAIRS: [u32; 3] = [65, 66, 67];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dc,
    Dr,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dc => "dc",
            Method::Dr => "dr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resampling {
    /// Draw `n` records with replacement.
    Bootstrap,
    /// Draw `fraction * n` records without replacement.
    Subsample { fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Anm {
        #[serde(default = "default_thirty")]
        x_size: usize,
        #[serde(default = "default_thirty")]
        y0_size: usize,
        #[serde(default = "default_noise_domains")]
        noise_domains: Vec<Vec<i64>>,
    },
    ReferenceSet {
        #[serde(default = "default_reference_sizes")]
        sizes: Vec<(usize, usize)>,
        /// Pool size; `floor(|Y| / 4)` when absent.
        #[serde(default)]
        reference_count: Option<usize>,
    },
    RealPairs {
        data_dir: PathBuf,
        /// Defaults to `<data_dir>/pairmeta.txt`.
        #[serde(default)]
        metadata: Option<PathBuf>,
        #[serde(default = "default_excluded")]
        exclude: Vec<u32>,
        #[serde(default = "default_replicates")]
        replicates: usize,
        #[serde(default = "default_resampling")]
        resampling: Resampling,
        /// Zero-based columns used as X and Y.
        #[serde(default = "default_columns")]
        columns: (usize, usize),
        /// Pair id -> scale factor `k` for `round(k * v)`.
        #[serde(default = "default_scale_overrides")]
        scale_overrides: BTreeMap<u32, f64>,
    },
}

fn default_thirty() -> usize {
    30
}

fn default_noise_domains() -> Vec<Vec<i64>> {
    [2, 3, 5, 7]
        .iter()
        .filter_map(|&k| standard_noise_domain(k))
        .collect()
}

fn default_reference_sizes() -> Vec<(usize, usize)> {
    vec![(12, 12), (15, 15), (18, 18), (20, 20)]
}

fn default_excluded() -> Vec<u32> {
    EXCLUDED_PAIRS.to_vec()
}

fn default_replicates() -> usize {
    50
}

fn default_resampling() -> Resampling {
    Resampling::Bootstrap
}

fn default_columns() -> (usize, usize) {
    (0, 1)
}

fn default_scale_overrides() -> BTreeMap<u32, f64> {
    STOCK_RETURN_PAIRS.iter().map(|&id| (id, 100.0)).collect()
}

fn default_sample_sizes() -> Vec<usize> {
    PAPER_SAMPLE_SIZES.to_vec()
}

fn default_models() -> usize {
    DESK_SCALE_MODELS
}

fn default_methods() -> Vec<Method> {
    vec![Method::Dc, Method::Dr]
}

fn default_epsilons() -> Vec<f64> {
    PAPER_EPSILONS.to_vec()
}

fn default_rates() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 20.0).collect()
}

fn default_threshold_n() -> usize {
    4000
}

fn default_curve_n() -> usize {
    5000
}

fn default_repetitions() -> usize {
    100
}

fn default_seed() -> u64 {
    20170101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    #[serde(default = "default_sample_sizes")]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_models")]
    pub models_per_setting: usize,
    /// Threshold for DC verdicts; 0 is forced choice.
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub dr: DrConfig,
    /// Threshold grid for the threshold study.
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    /// Sample size of the threshold study.
    #[serde(default = "default_threshold_n")]
    pub threshold_sample_size: usize,
    /// Decision rates at which the decision-rate curve is evaluated.
    #[serde(default = "default_rates")]
    pub decision_rates: Vec<f64>,
    /// Sample size of the decision-rate curve.
    #[serde(default = "default_curve_n")]
    pub curve_sample_size: usize,
    /// Runs per sample size in the timing experiment.
    #[serde(default = "default_repetitions")]
    pub timing_repetitions: usize,
    /// Worker threads; all cores when absent. Does not affect results.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            sample_sizes: default_sample_sizes(),
            models_per_setting: default_models(),
            epsilon: 0.0,
            methods: default_methods(),
            master_seed: default_seed(),
            dr: DrConfig::default(),
            epsilons: default_epsilons(),
            threshold_sample_size: default_threshold_n(),
            decision_rates: default_rates(),
            curve_sample_size: default_curve_n(),
            timing_repetitions: default_repetitions(),
            threads: None,
        }
    }

    pub fn anm(noise_domains: Vec<Vec<i64>>) -> Self {
        Self::new(Family::Anm {
            x_size: 30,
            y0_size: 30,
            noise_domains,
        })
    }

    pub fn reference_set(sizes: Vec<(usize, usize)>) -> Self {
        Self::new(Family::ReferenceSet {
            sizes,
            reference_count: None,
        })
    }

    pub fn real_pairs(data_dir: impl Into<PathBuf>) -> Self {
        Self::new(Family::RealPairs {
            data_dir: data_dir.into(),
            metadata: None,
            exclude: default_excluded(),
            replicates: default_replicates(),
            resampling: default_resampling(),
            columns: default_columns(),
            scale_overrides: default_scale_overrides(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.sample_sizes.is_empty() {
            return bad("sample_sizes must be nonempty".into());
        }
        if self.sample_sizes.iter().any(|&n| n < 1) {
            return bad("sample sizes must be at least 1".into());
        }
        if self.models_per_setting < 1 {
            return bad("models_per_setting must be at least 1".into());
        }
        if self.epsilon < 0.0 || !self.epsilon.is_finite() {
            return bad(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            ));
        }
        if self.epsilons.iter().any(|e| *e < 0.0 || !e.is_finite()) {
            return bad("epsilons must be non-negative".into());
        }
        if self.decision_rates.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return bad("decision rates must lie in (0, 1]".into());
        }
        if self.methods.is_empty() {
            return bad("methods must be nonempty".into());
        }
        if !(self.dr.alpha > 0.0 && self.dr.alpha < 1.0) {
            return bad(format!(
                "dr.alpha must lie in (0, 1), got {}",
                self.dr.alpha
            ));
        }
        if self.timing_repetitions < 1 {
            return bad("timing_repetitions must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        match &self.family {
            Family::Anm {
                x_size,
                y0_size,
                noise_domains,
            } => {
                if *x_size < 2 || *y0_size < 1 {
                    return bad("anm domain sizes too small".into());
                }
                if noise_domains.is_empty() || noise_domains.iter().any(|d| d.is_empty()) {
                    return bad("noise domains must be nonempty".into());
                }
            }
            Family::ReferenceSet {
                sizes,
                reference_count,
            } => {
                if sizes.is_empty() || sizes.iter().any(|&(m, l)| m < 4 || l < 4) {
                    return bad("reference-set sizes must be at least 4".into());
                }
                if *reference_count == Some(0) {
                    return bad("reference_count must be at least 1".into());
                }
            }
            Family::RealPairs {
                replicates,
                resampling,
                columns,
                ..
            } => {
                if *replicates < 1 {
                    return bad("replicates must be at least 1".into());
                }
                if let Resampling::Subsample { fraction } = resampling {
                    if !(*fraction > 0.0 && *fraction <= 1.0) {
                        return bad("subsample fraction must lie in (0, 1]".into());
                    }
                }
                if columns.0 == columns.1 {
                    return bad("X and Y columns must differ".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_takes_defaults() {
        let config = ExperimentConfig::from_json(r#"{"family": {"kind": "anm"}}"#).unwrap();
        assert_eq!(config.models_per_setting, DESK_SCALE_MODELS);
        assert_eq!(config.sample_sizes, PAPER_SAMPLE_SIZES.to_vec());
        let Family::Anm { noise_domains, .. } = &config.family else {
            panic!()
        };
        let sizes: Vec<usize> = noise_domains.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 3, 5, 7]);
    }

    #[test]
    fn real_pairs_defaults() {
        let config =
            ExperimentConfig::from_json(r#"{"family": {"kind": "real_pairs", "data_dir": "d"}}"#)
                .unwrap();
        let Family::RealPairs {
            exclude,
            replicates,
            scale_overrides,
            ..
        } = &config.family
        else {
            panic!()
        };
        assert_eq!(exclude.len(), 10);
        assert_eq!(*replicates, 50);
        assert_eq!(scale_overrides.get(&66), Some(&100.0));
    }

    #[test]
    fn rejects_invalid() {
        for text in [
            r#"{"family": {"kind": "anm"}, "sample_sizes": []}"#,
            r#"{"family": {"kind": "anm"}, "models_per_setting": 0}"#,
            r#"{"family": {"kind": "anm"}, "epsilon": -1}"#,
            r#"{"family": {"kind": "reference_set", "sizes": [[3, 3]]}}"#,
            r#"{"family": {"kind": "nope"}}"#,
        ] {
            assert!(
                matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }
}
