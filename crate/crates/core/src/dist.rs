//! Joint, marginal and conditional distributions of a pair of discrete
//! variables, estimated from paired integer-coded samples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which way the joint table is factorized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `P(X) P(Y|X)`
    XToY,
    /// `P(Y) P(X|Y)`
    YToX,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::XToY => Direction::YToX,
            Direction::YToX => Direction::XToY,
        }
    }
}

/// Paired observations of two discrete variables.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairedSample {
    records: Vec<(i64, i64)>,
}

impl PairedSample {
    pub fn new(records: Vec<(i64, i64)>) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &[(i64, i64)] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = i64> + '_ {
        self.records.iter().map(|r| r.0)
    }

    pub fn ys(&self) -> impl Iterator<Item = i64> + '_ {
        self.records.iter().map(|r| r.1)
    }

    /// The same sample with the roles of X and Y exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            records: self.records.iter().map(|&(x, y)| (y, x)).collect(),
        }
    }
}

impl FromIterator<(i64, i64)> for PairedSample {
    fn from_iter<I: IntoIterator<Item = (i64, i64)>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Dense probability table over the observed supports of X and Y.
///
/// Rows are indexed by `x_support`, columns by `y_support`. Both supports are
/// sorted ascending and contain only values with positive mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    x_support: Vec<i64>,
    y_support: Vec<i64>,
    p: Vec<Vec<f64>>,
}

impl JointPmf {
    /// Frequency estimate `count(x, y) / n`.
    pub fn estimate(sample: &PairedSample) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let x_index = dictionary(sample.xs());
        let y_index = dictionary(sample.ys());
        let mut counts = vec![vec![0u64; y_index.len()]; x_index.len()];
        for &(x, y) in sample.records() {
            counts[x_index[&x]][y_index[&y]] += 1;
        }
        let n = sample.len() as f64;
        let p = counts
            .into_iter()
            .map(|row| row.into_iter().map(|c| c as f64 / n).collect())
            .collect();
        Ok(Self {
            x_support: x_index.into_keys().collect(),
            y_support: y_index.into_keys().collect(),
            p,
        })
    }

    /// Builds a table from explicit supports and probabilities, dropping
    /// support values whose row or column carries no mass.
    pub fn from_table(x_support: Vec<i64>, y_support: Vec<i64>, p: Vec<Vec<f64>>) -> Result<Self> {
        if p.len() != x_support.len() {
            return Err(Error::InvalidParameter(format!(
                "table has {} rows for {} x values",
                p.len(),
                x_support.len()
            )));
        }
        for row in &p {
            if row.len() != y_support.len() {
                return Err(Error::InvalidParameter(format!(
                    "table row has {} entries for {} y values",
                    row.len(),
                    y_support.len()
                )));
            }
        }
        let mut total = 0.0;
        for (i, v) in p.iter().flatten().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::NonFinite {
                    index: i,
                    value: *v,
                });
            }
            total += v;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "table sums to {total}, expected 1"
            )));
        }
        let keep_rows: Vec<usize> = (0..x_support.len())
            .filter(|&i| p[i].iter().any(|&v| v > 0.0))
            .collect();
        let keep_cols: Vec<usize> = (0..y_support.len())
            .filter(|&j| p.iter().any(|row| row[j] > 0.0))
            .collect();

        let mut rows: Vec<(i64, Vec<f64>)> = keep_rows
            .iter()
            .map(|&i| (x_support[i], keep_cols.iter().map(|&j| p[i][j]).collect()))
            .collect();
        rows.sort_by_key(|r| r.0);
        let mut col_order: Vec<usize> = (0..keep_cols.len()).collect();
        col_order.sort_by_key(|&k| y_support[keep_cols[k]]);

        let y_sorted: Vec<i64> = col_order.iter().map(|&k| y_support[keep_cols[k]]).collect();
        if y_sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("duplicate y support value".into()));
        }
        let x_sorted: Vec<i64> = rows.iter().map(|r| r.0).collect();
        if x_sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("duplicate x support value".into()));
        }
        let p = rows
            .into_iter()
            .map(|(_, row)| col_order.iter().map(|&k| row[k]).collect())
            .collect();
        Ok(Self {
            x_support: x_sorted,
            y_support: y_sorted,
            p,
        })
    }

    pub fn x_support(&self) -> &[i64] {
        &self.x_support
    }

    pub fn y_support(&self) -> &[i64] {
        &self.y_support
    }

    /// Row-major table, `rows()[i][j] = P(x_i, y_j)`.
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    /// `(M, L)`
    pub fn shape(&self) -> (usize, usize) {
        (self.x_support.len(), self.y_support.len())
    }

    pub fn transpose(&self) -> Self {
        let (m, l) = self.shape();
        let p = (0..l)
            .map(|j| (0..m).map(|i| self.p[i][j]).collect())
            .collect();
        Self {
            x_support: self.y_support.clone(),
            y_support: self.x_support.clone(),
            p,
        }
    }

    pub fn x_marginal(&self) -> Vec<f64> {
        self.p.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn y_marginal(&self) -> Vec<f64> {
        let l = self.y_support.len();
        (0..l)
            .map(|j| self.p.iter().map(|row| row[j]).sum())
            .collect()
    }

    /// Splits the joint into a marginal and the conditional rows of the other
    /// variable given each marginal support value.
    pub fn factorize(&self, direction: Direction) -> FactorizedView {
        match direction {
            Direction::XToY => {
                let marginal = self.x_marginal();
                let conditional = self
                    .p
                    .iter()
                    .zip(&marginal)
                    .map(|(row, &px)| row.iter().map(|&v| v / px).collect())
                    .collect();
                FactorizedView {
                    marginal,
                    conditional,
                }
            }
            Direction::YToX => {
                let marginal = self.y_marginal();
                let conditional = marginal
                    .iter()
                    .enumerate()
                    .map(|(j, &py)| self.p.iter().map(|row| row[j] / py).collect())
                    .collect();
                FactorizedView {
                    marginal,
                    conditional,
                }
            }
        }
    }
}

/// A marginal distribution together with the conditional distribution of the
/// other variable at each of its support points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizedView {
    pub marginal: Vec<f64>,
    pub conditional: Vec<Vec<f64>>,
}

impl FactorizedView {
    /// Reassembles `marginal[i] * conditional[i][j]`.
    pub fn recompose(&self) -> Vec<Vec<f64>> {
        self.marginal
            .iter()
            .zip(&self.conditional)
            .map(|(&m, row)| row.iter().map(|&c| m * c).collect())
            .collect()
    }
}

fn dictionary(values: impl Iterator<Item = i64>) -> BTreeMap<i64, usize> {
    let mut map: BTreeMap<i64, usize> = values.map(|v| (v, 0)).collect();
    for (i, slot) in map.values_mut().enumerate() {
        *slot = i;
    }
    map
}
