//! Generative fixed-point classification.
//!
//! Instead of training feedforward weights and classifying in one pass, this
//! crate stores each class's expected input pattern as a column of an
//! expectation matrix `M` and recognizes by running feedforward-feedback
//! dynamics at test time: class activations `Y` are iterated until the
//! generated reconstruction `MY` matches the presented input `X`. The columns
//! of `M` are literally the fixed points of the dynamics, which buys three
//! things demonstrated across the modules:
//!
//! - [`dynamics`] — two solvers with identical fixed points: gradient flow
//!   on the reconstruction energy `‖X − MY‖²`, and multiplicative regulatory
//!   feedback that keeps activations positive.
//! - [`feedforward`] — the conventional one-pass baseline `Y = WX` with
//!   `W = (MᵀM)⁻¹Mᵀ` derived from `M`, for side-by-side comparison.
//! - [`learning`] — expectations are learned by plain class-conditional
//!   averaging, and edited online: adding a class or changing one entry
//!   touches nothing else in `M`, while the same edit scrambles every entry
//!   of the derived `W`.
//! - [`analysis`] — recognition difficulty scales with pattern similarity:
//!   iterations-to-threshold and the condition number of the pair matrix
//!   rise together as patterns grow more alike.
//! - [`io`] / [`cli`] — flat-file formats and the experiment command line.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod feedforward;
pub mod io;
pub mod learning;
pub mod model;

pub use analysis::{
    blend, condition_number, pair_iteration_experiment, random_patterns, rank_correlation,
    similarity, sweep_all_pairs, sweep_least_squares_dt, ConditionNumber, PairExperimentResult,
    PairSolverRun,
};
pub use dynamics::{
    energy, least_squares_step, regulatory_feedback_step, solve, solve_counting,
    stable_least_squares_dt, SolverKind,
};
pub use error::{Error, Result, Violation};
pub use feedforward::{
    classify_feedforward, pseudoinverse, weight_change_report, WeightChangeReport,
};
pub use learning::{add_class, learn_expectations, remove_class, set_expectation, LabeledDataset};
pub use model::{
    ActivationVector, ExpectationMatrix, FeedforwardMatrix, InputVector, SolverConfig, SolverTrace,
    StopReason, TargetStop, TraceStep,
};
