//! Causal direction inference for pairs of discrete variables.
//!
//! The joint distribution of `(X, Y)` is factorized both ways. For the
//! `X -> Y` view each support value `x` yields one observation
//! `(P(x), P(Y|x))`, and the distance correlation of those observations
//! measures how much the marginal and the mechanism depend on each other. The
//! direction with the smaller dependence is reported as causal.
//!
//! ```
//! use dccause::{infer, PairedSample, Verdict};
//!
//! let sample: PairedSample = (0..400).map(|i| (i % 5, (i % 5) * 2 + (i / 5) % 2)).collect();
//! let result = infer(&sample, 0.0).unwrap();
//! assert!(result.measures.d_xy >= 0.0 && result.measures.d_yx <= 1.0);
//! # let _ = Verdict::Undecided;
//! ```

pub mod dcor;
pub mod dist;
pub mod dr;
pub mod error;
pub mod harness;
pub mod infer;
pub mod seed;
pub mod synth;

pub use dcor::{center_distances, dcor, dcor_stats, dcov, dvar, DcorStats, ObservationSet};
pub use dist::{Direction, FactorizedView, JointPmf, PairedSample};
pub use dr::{dr_decide, fit_regression, independence_test, DrConfig, DrDecision};
pub use error::{Error, ErrorKind, Result};
pub use infer::{
    decide, dependence_measures, infer, infer_detailed, DecisionResult, DependencePair,
    InferenceReport, Verdict, RECOMMENDED_EPSILON,
};
pub use synth::{gen_anm, gen_random_pmf, gen_reference_set_model, DiscreteModel, Mechanism};
