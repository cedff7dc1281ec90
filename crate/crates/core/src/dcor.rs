//! Empirical distance covariance and distance correlation.
//!
//! For paired observations `(alpha_i, beta_i)`, `i = 1..n`, where `alpha` is
//! scalar and `beta` a vector, the pairwise distance tables are double
//! centered,
//!
//! ```text
//! A_ij = a_ij - a_i. - a_.j + a_..
//! ```
//!
//! and the distance covariance is `(1/n) * sqrt(sum_ij A_ij B_ij)`. The
//! distance correlation normalizes it by the two distance variances and is
//! defined as 0 whenever either side is constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise distances below this fraction of the largest observation norm are
/// treated as exact ties.
pub const CONSTANT_SIDE_TOLERANCE: f64 = 1e-12;

/// `n` paired observations: a scalar `alpha_i` and a vector `beta_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    alpha: Vec<f64>,
    beta: Vec<Vec<f64>>,
}

impl ObservationSet {
    pub fn new(alpha: Vec<f64>, beta: Vec<Vec<f64>>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::LengthMismatch {
                alpha: alpha.len(),
                beta: beta.len(),
            });
        }
        if alpha.len() < 2 {
            return Err(Error::TooFewObservations(alpha.len()));
        }
        let d = beta[0].len();
        if d == 0 {
            return Err(Error::DimensionMismatch {
                index: 0,
                expected: 1,
                found: 0,
            });
        }
        for (index, b) in beta.iter().enumerate() {
            if b.len() != d {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: d,
                    found: b.len(),
                });
            }
        }
        for (index, &value) in alpha.iter().chain(beta.iter().flatten()).enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.beta[0].len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Vec<f64>] {
        &self.beta
    }
}

/// A double-centered `n x n` distance table, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CenteredMatrix {
    pub fn from_scalars(values: &[f64]) -> Self {
        let n = values.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (values[i] - values[j]).abs();
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self::center(n, dist, scale)
    }

    pub fn from_vectors(values: &[Vec<f64>]) -> Self {
        let n = values.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(&values[i], &values[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(euclidean_norm(v)));
        Self::center(n, dist, scale)
    }

    fn center(n: usize, mut dist: Vec<f64>, scale: f64) -> Self {
        let max_dist = dist.iter().fold(0.0f64, |m, &d| m.max(d));
        if max_dist <= CONSTANT_SIDE_TOLERANCE * scale {
            dist.iter_mut().for_each(|d| *d = 0.0);
            return Self { n, data: dist };
        }
        let inv_n = 1.0 / n as f64;
        // The table is symmetric, so row means double as column means.
        let row_means: Vec<f64> = (0..n)
            .map(|i| compensated_sum(dist[i * n..(i + 1) * n].iter().copied()) * inv_n)
            .collect();
        let grand_mean = compensated_sum(row_means.iter().copied()) * inv_n;
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = dist[i * n + j] - row_means[i] - row_means[j] + grand_mean;
            }
        }
        Self { n, data: dist }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    fn frobenius(&self) -> f64 {
        compensated_sum(self.data.iter().map(|v| v * v)).sqrt()
    }
}

/// The centered distance tables of both sides of an [`ObservationSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDistanceMatrices {
    pub a: CenteredMatrix,
    pub b: CenteredMatrix,
}

/// All four quantities of a single distance-correlation evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcorStats {
    pub n: usize,
    pub dcov: f64,
    pub dvar_alpha: f64,
    pub dvar_beta: f64,
    pub dcor: f64,
}

pub fn center_distances(obs: &ObservationSet) -> CenteredDistanceMatrices {
    CenteredDistanceMatrices {
        a: CenteredMatrix::from_scalars(&obs.alpha),
        b: CenteredMatrix::from_vectors(&obs.beta),
    }
}

/// Empirical distance covariance of two centered tables of the same size.
///
/// Round-off can push `sum A_ij B_ij` slightly below zero; such values are
/// clamped. A clearly negative sum means the tables are not what they claim
/// to be and is reported as [`Error::Consistency`].
pub fn dcov_of(a: &CenteredMatrix, b: &CenteredMatrix) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::Consistency(format!(
            "centered tables have sizes {} and {}",
            a.n, b.n
        )));
    }
    let n = a.n as f64;
    let cross = compensated_sum(a.data.iter().zip(&b.data).map(|(x, y)| x * y));
    let tolerance = 1e-9 * (n * n).max(a.frobenius() * b.frobenius());
    if cross < -tolerance {
        return Err(Error::Consistency(format!(
            "sum of A_ij B_ij is {cross}, below -{tolerance}"
        )));
    }
    Ok(cross.max(0.0).sqrt() / n)
}

pub fn dcov(cd: &CenteredDistanceMatrices) -> Result<f64> {
    dcov_of(&cd.a, &cd.b)
}

/// Distance variance of one side: its distance covariance with itself.
pub fn dvar(side: &CenteredMatrix) -> Result<f64> {
    dcov_of(side, side)
}

pub fn dcor_stats(obs: &ObservationSet) -> Result<DcorStats> {
    let cd = center_distances(obs);
    let dcov = dcov(&cd)?;
    let dvar_alpha = dvar(&cd.a)?;
    let dvar_beta = dvar(&cd.b)?;
    let dcor = if dvar_alpha == 0.0 || dvar_beta == 0.0 {
        0.0
    } else {
        (dcov / (dvar_alpha * dvar_beta).sqrt()).clamp(0.0, 1.0)
    };
    Ok(DcorStats {
        n: obs.len(),
        dcov,
        dvar_alpha,
        dvar_beta,
        dcor,
    })
}

/// Distance correlation in `[0, 1]`.
pub fn dcor(obs: &ObservationSet) -> Result<f64> {
    dcor_stats(obs).map(|s| s.dcor)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn euclidean_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Neumaier summation.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
