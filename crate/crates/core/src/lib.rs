//! Multi-step, information-guided graph pruning.
//!
//! The library prunes a node-attributed graph over `K` nested steps, scoring
//! edges by their contribution to a downstream node-classification loss, and
//! evaluates the resulting trajectory with information-theoretic measures
//! (a predictor-based mutual-information lower bound, per-step information
//! and complexity scores, and the global AUC-IC / IBP summaries). Seven
//! heuristic baseline pruners run through the same budgeted harness for
//! comparison.
//!
//! Numeric code is generic over the scalar type via [`Scalar`]; the plain
//! type names (`Graph`, `PredictorModel`, ...) default to `f64`.

pub mod baselines;
pub mod gcn;
pub mod graph;
pub mod karate;
pub mod metrics;
pub mod prune;
pub mod scalar;
pub mod tasks;

mod error;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use graph::{gen_split, EdgeSubset, Graph, Task};
pub use karate::builtin_karate;

pub use baselines::{BaselineMethod, BaselineParams};
pub use gcn::{NormalizedAdjacency, PredictorModel, TrainConfig};
pub use metrics::{SummaryMetrics, StepMetrics};
pub use prune::{PruneConfig, ScoringMode, Trajectory};
pub use tasks::{tercile_labels, CentralityKind, CentralityVector};

/// `f32` aliases for the core generic types.
pub type GraphF32 = Graph<f32>;
pub type PredictorModelF32 = PredictorModel<f32>;
pub type TrajectoryF32 = Trajectory<f32>;
