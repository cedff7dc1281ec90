//! Synthetic model families: integer additive noise models and models whose
//! conditionals are drawn from a small pool of reference distributions.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{JointPmf, PairedSample};
use crate::error::{Error, Result};

/// The four noise supports used in the additive-noise experiments.
pub fn standard_noise_domain(size: usize) -> Option<Vec<i64>> {
    match size {
        2 => Some(vec![0, 1]),
        3 => Some(vec![-1, 0, 1]),
        5 => Some((-2..=2).collect()),
        7 => Some((-3..=3).collect()),
        _ => None,
    }
}

/// Random PMF of length `size`: integer weights drawn uniformly from
/// `1..=max(1, size / 4)`, normalized to unit sum.
pub fn gen_random_pmf<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Result<Vec<f64>> {
    let weights = gen_random_weights(size, rng)?;
    let total: u64 = weights.iter().sum();
    Ok(weights.iter().map(|&w| w as f64 / total as f64).collect())
}

/// Pre-normalization integer weights of [`gen_random_pmf`].
pub fn gen_random_weights<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Result<Vec<u64>> {
    if size < 1 {
        return Err(Error::InvalidParameter(
            "pmf size must be at least 1".into(),
        ));
    }
    let upper = (size as u64 / 4).max(1);
    Ok((0..size).map(|_| rng.random_range(1..=upper)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    /// `Y = f(X) + N`, `N` independent of `X`.
    Anm {
        /// `f(x_support[i])`
        f: Vec<i64>,
        noise_support: Vec<i64>,
        noise_pmf: Vec<f64>,
    },
    /// Row `i` is `P(Y | x_support[i])` over `y_support`.
    ReferenceSet {
        references: Vec<Vec<f64>>,
        /// Index into `references` for each x.
        assignment: Vec<usize>,
    },
}

/// A generative model with X as the cause of Y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModel {
    pub x_support: Vec<i64>,
    pub y_support: Vec<i64>,
    pub px: Vec<f64>,
    pub mechanism: Mechanism,
}

impl DiscreteModel {
    pub fn kind(&self) -> &'static str {
        match self.mechanism {
            Mechanism::Anm { .. } => "anm",
            Mechanism::ReferenceSet { .. } => "reference_set",
        }
    }

    /// `P(Y | x_support[i])` over `y_support`.
    pub fn conditional_rows(&self) -> Vec<Vec<f64>> {
        match &self.mechanism {
            Mechanism::Anm {
                f,
                noise_support,
                noise_pmf,
            } => {
                let y_index: BTreeMap<i64, usize> = self
                    .y_support
                    .iter()
                    .enumerate()
                    .map(|(j, &y)| (y, j))
                    .collect();
                f.iter()
                    .map(|&fx| {
                        let mut row = vec![0.0; self.y_support.len()];
                        for (&n, &pn) in noise_support.iter().zip(noise_pmf) {
                            row[y_index[&(fx + n)]] += pn;
                        }
                        row
                    })
                    .collect()
            }
            Mechanism::ReferenceSet {
                references,
                assignment,
            } => assignment.iter().map(|&k| references[k].clone()).collect(),
        }
    }

    /// Exact joint `px[i] * P(y_j | x_i)`.
    pub fn exact_joint(&self) -> Result<JointPmf> {
        let p = self
            .conditional_rows()
            .into_iter()
            .zip(&self.px)
            .map(|(row, &px)| row.into_iter().map(|c| px * c).collect())
            .collect();
        JointPmf::from_table(self.x_support.clone(), self.y_support.clone(), p)
    }

    /// `n` i.i.d. draws of `(x, y)`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PairedSample> {
        if n < 1 {
            return Err(Error::InvalidParameter(
                "sample size must be at least 1".into(),
            ));
        }
        let x_dist = weighted(&self.px)?;
        let records = match &self.mechanism {
            Mechanism::Anm {
                f,
                noise_support,
                noise_pmf,
            } => {
                let noise_dist = weighted(noise_pmf)?;
                (0..n)
                    .map(|_| {
                        let i = x_dist.sample(rng);
                        let noise = noise_support[noise_dist.sample(rng)];
                        (self.x_support[i], f[i] + noise)
                    })
                    .collect()
            }
            Mechanism::ReferenceSet {
                references,
                assignment,
            } => {
                let ref_dists = references
                    .iter()
                    .map(|r| weighted(r))
                    .collect::<Result<Vec<_>>>()?;
                (0..n)
                    .map(|_| {
                        let i = x_dist.sample(rng);
                        let j = ref_dists[assignment[i]].sample(rng);
                        (self.x_support[i], self.y_support[j])
                    })
                    .collect()
            }
        };
        Ok(PairedSample::new(records))
    }
}

fn weighted(pmf: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(pmf).map_err(|e| Error::InvalidParameter(format!("bad pmf: {e}")))
}

/// Additive noise model with `x` in `1..=x_size`, `f(x)` uniform on
/// `1..=y0_size` and the given noise support.
pub fn gen_anm<R: Rng + ?Sized>(
    rng: &mut R,
    x_size: usize,
    y0_size: usize,
    noise_domain: &[i64],
) -> Result<DiscreteModel> {
    if noise_domain.is_empty() {
        return Err(Error::InvalidParameter("empty noise domain".into()));
    }
    if x_size < 1 || y0_size < 1 {
        return Err(Error::InvalidParameter(
            "domain sizes must be at least 1".into(),
        ));
    }
    let noise_support: Vec<i64> = noise_domain
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if noise_support.len() != noise_domain.len() {
        return Err(Error::InvalidParameter(
            "noise domain has duplicates".into(),
        ));
    }
    let x_support: Vec<i64> = (1..=x_size as i64).collect();
    let f: Vec<i64> = (0..x_size)
        .map(|_| rng.random_range(1..=y0_size as i64))
        .collect();
    let px = gen_random_pmf(x_size, rng)?;
    let noise_pmf = gen_random_pmf(noise_support.len(), rng)?;
    let y_support: Vec<i64> = f
        .iter()
        .flat_map(|&fx| noise_support.iter().map(move |&n| fx + n))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(DiscreteModel {
        x_support,
        y_support,
        px,
        mechanism: Mechanism::Anm {
            f,
            noise_support,
            noise_pmf,
        },
    })
}

/// Default size of the reference pool for a `y_size`-valued effect.
pub fn default_reference_count(y_size: usize) -> usize {
    (y_size / 4).max(1)
}

/// Model whose conditional rows are picked uniformly from `reference_count`
/// random distributions over `1..=y_size`.
pub fn gen_reference_set_model<R: Rng + ?Sized>(
    rng: &mut R,
    x_size: usize,
    y_size: usize,
    reference_count: Option<usize>,
) -> Result<DiscreteModel> {
    if x_size < 4 || y_size < 4 {
        return Err(Error::InvalidParameter(format!(
            "reference-set sizes must be at least 4, got ({x_size}, {y_size})"
        )));
    }
    let count = reference_count.unwrap_or_else(|| default_reference_count(y_size));
    if count < 1 {
        return Err(Error::InvalidParameter(
            "reference count must be at least 1".into(),
        ));
    }
    let px = gen_random_pmf(x_size, rng)?;
    let references = (0..count)
        .map(|_| gen_random_pmf(y_size, rng))
        .collect::<Result<Vec<_>>>()?;
    let assignment = (0..x_size).map(|_| rng.random_range(0..count)).collect();
    Ok(DiscreteModel {
        x_support: (1..=x_size as i64).collect(),
        y_support: (1..=y_size as i64).collect(),
        px,
        mechanism: Mechanism::ReferenceSet {
            references,
            assignment,
        },
    })
}

/// Two-column `x,y` CSV with a header line.
pub fn sample_to_csv(sample: &PairedSample) -> String {
    let mut out = String::with_capacity(sample.len() * 8 + 4);
    out.push_str("x,y\n");
    for &(x, y) in sample.records() {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn pmf_weights_in_range() {
        let mut rng = rng_from_seed(1);
        let w = gen_random_weights(30, &mut rng).unwrap();
        assert!(w.iter().all(|&v| (1..=7).contains(&v)));
        let p = gen_random_pmf(30, &mut rng).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_pmf_is_uniform() {
        let mut rng = rng_from_seed(2);
        assert_eq!(gen_random_pmf(4, &mut rng).unwrap(), vec![0.25; 4]);
        assert_eq!(gen_random_pmf(2, &mut rng).unwrap(), vec![0.5; 2]);
        assert!(gen_random_pmf(0, &mut rng).is_err());
    }

    #[test]
    fn pmf_is_seed_deterministic() {
        let a = gen_random_pmf(20, &mut rng_from_seed(9)).unwrap();
        let b = gen_random_pmf(20, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn anm_supports() {
        let mut rng = rng_from_seed(3);
        let model = gen_anm(&mut rng, 30, 30, &standard_noise_domain(7).unwrap()).unwrap();
        assert!(model.y_support.iter().all(|&y| (-2..=33).contains(&y)));
        let Mechanism::Anm {
            noise_pmf,
            noise_support,
            ..
        } = &model.mechanism
        else {
            panic!("expected anm");
        };
        assert_eq!(noise_support.len(), 7);
        assert!((noise_pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((model.px.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(gen_anm(&mut rng, 30, 30, &[]).is_err());
    }

    #[test]
    fn reference_rows_come_from_pool() {
        let mut rng = rng_from_seed(4);
        let model = gen_reference_set_model(&mut rng, 15, 15, None).unwrap();
        let Mechanism::ReferenceSet { references, .. } = &model.mechanism else {
            panic!("expected reference set");
        };
        assert_eq!(references.len(), 3);
        for row in model.conditional_rows() {
            assert!(references.contains(&row));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let twelve = gen_reference_set_model(&mut rng, 12, 12, None).unwrap();
        let Mechanism::ReferenceSet { references, .. } = &twelve.mechanism else {
            panic!("expected reference set");
        };
        assert_eq!(references.len(), 3);
    }

    #[test]
    fn point_mass_noise_is_deterministic() {
        let mut rng = rng_from_seed(5);
        let model = gen_anm(&mut rng, 10, 10, &[0]).unwrap();
        let Mechanism::Anm { f, .. } = &model.mechanism else {
            unreachable!()
        };
        let sample = model.sample(500, &mut rng).unwrap();
        for &(x, y) in sample.records() {
            assert_eq!(y, f[(x - 1) as usize]);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let model = gen_reference_set_model(&mut rng_from_seed(6), 12, 12, None).unwrap();
        let a = model.sample(300, &mut rng_from_seed(11)).unwrap();
        let b = model.sample(300, &mut rng_from_seed(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn model_json_round_trip() {
        let model = gen_anm(&mut rng_from_seed(7), 8, 8, &[-1, 0, 1]).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: DiscreteModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }
}
