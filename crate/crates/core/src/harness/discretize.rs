//! Rounding rules that turn continuous columns into integer codes.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizeRule {
    /// `round(20 v)` when every `|v| < 1`, otherwise `round(v)`.
    Auto,
    /// `round(k v)`.
    Scale(f64),
}

impl FromStr for DiscretizeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        let k = s
            .strip_prefix("scale:")
            .and_then(|k| k.parse::<f64>().ok())
            .filter(|k| k.is_finite() && *k > 0.0)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("rule must be auto or scale:<k>, got {s:?}"))
            })?;
        Ok(Self::Scale(k))
    }
}

impl DiscretizeRule {
    /// The multiplier applied to `values` before rounding.
    pub fn factor(&self, values: &[f64]) -> f64 {
        match *self {
            Self::Scale(k) => k,
            Self::Auto => {
                let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if max_abs < 1.0 {
                    20.0
                } else {
                    1.0
                }
            }
        }
    }
}

pub fn discretize_column(values: &[f64], rule: DiscretizeRule) -> Result<Vec<i64>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot discretize an empty column".into(),
        ));
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    let k = rule.factor(values);
    values
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            let r = (k * v).round();
            if r.abs() >= 9.0e15 {
                Err(Error::NonFinite { index, value: v })
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}
