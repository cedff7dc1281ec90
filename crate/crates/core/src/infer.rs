//! Direction inference by comparing the distance correlation of each
//! marginal with its opposite conditional.
//!
//! Each support value `x` contributes one observation `(P(x), P(Y|x))`. If X
//! causes Y, the marginal of the cause and the mechanism are generated
//! independently, so `D(X->Y) = D(P(X), P(Y|X))` should be the smaller of the
//! two measures.

use serde::{Deserialize, Serialize};

use crate::dcor::{dcor, ObservationSet};
use crate::dist::{Direction, JointPmf, PairedSample};
use crate::error::{Error, Result};

/// Threshold suggested for applied use.
pub const RECOMMENDED_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    XCausesY,
    YCausesX,
    Undecided,
}

impl Verdict {
    pub fn mirrored(self) -> Self {
        match self {
            Verdict::XCausesY => Verdict::YCausesX,
            Verdict::YCausesX => Verdict::XCausesY,
            Verdict::Undecided => Verdict::Undecided,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::XCausesY => "x_causes_y",
            Verdict::YCausesX => "y_causes_x",
            Verdict::Undecided => "undecided",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `D(X->Y)` and `D(Y->X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependencePair {
    pub d_xy: f64,
    pub d_yx: f64,
}

impl DependencePair {
    /// `d_yx - d_xy`; positive values favour X -> Y.
    pub fn delta(&self) -> f64 {
        self.d_yx - self.d_xy
    }

    pub fn mirrored(&self) -> Self {
        Self {
            d_xy: self.d_yx,
            d_yx: self.d_xy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionResult {
    pub measures: DependencePair,
    pub epsilon: f64,
    pub delta: f64,
    pub verdict: Verdict,
}

/// Distance correlation between a marginal and the conditional rows of the
/// given factorization.
pub fn directional_dcor(joint: &JointPmf, direction: Direction) -> Result<f64> {
    let view = joint.factorize(direction);
    let obs = ObservationSet::new(view.marginal, view.conditional)?;
    dcor(&obs)
}

pub fn dependence_measures(joint: &JointPmf) -> Result<DependencePair> {
    let (m, l) = joint.shape();
    if m < 2 || l < 2 {
        return Err(Error::DegenerateSupport { m, l });
    }
    Ok(DependencePair {
        d_xy: directional_dcor(joint, Direction::XToY)?,
        d_yx: directional_dcor(joint, Direction::YToX)?,
    })
}

/// Applies the threshold rule. Equality with `epsilon` is undecided.
pub fn decide(measures: DependencePair, epsilon: f64) -> Result<DecisionResult> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be a finite non-negative number, got {epsilon}"
        )));
    }
    let delta = measures.delta();
    let verdict = if delta > epsilon {
        Verdict::XCausesY
    } else if -delta > epsilon {
        Verdict::YCausesX
    } else {
        Verdict::Undecided
    };
    Ok(DecisionResult {
        measures,
        epsilon,
        delta,
        verdict,
    })
}

/// Full inference output, including support sizes, as serialized by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub d_xy: f64,
    pub d_yx: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub verdict: Verdict,
}

impl InferenceReport {
    pub fn decision(&self) -> DecisionResult {
        DecisionResult {
            measures: DependencePair {
                d_xy: self.d_xy,
                d_yx: self.d_yx,
            },
            epsilon: self.epsilon,
            delta: self.delta,
            verdict: self.verdict,
        }
    }
}

pub fn infer_detailed(sample: &PairedSample, epsilon: f64) -> Result<InferenceReport> {
    let joint = JointPmf::estimate(sample)?;
    let (m, l) = joint.shape();
    let result = decide(dependence_measures(&joint)?, epsilon)?;
    Ok(InferenceReport {
        n: sample.len(),
        m,
        l,
        d_xy: result.measures.d_xy,
        d_yx: result.measures.d_yx,
        delta: result.delta,
        epsilon,
        verdict: result.verdict,
    })
}

/// Estimates the joint table, computes both measures and applies the rule.
pub fn infer(sample: &PairedSample, epsilon: f64) -> Result<DecisionResult> {
    infer_detailed(sample, epsilon).map(|r| r.decision())
}
