//! Domain types: the expectation matrix, input/activation vectors, derived
//! feedforward weights, and solver configuration/trace records.
//!
//! The expectation matrix `M` is stored features-by-classes (N rows, H
//! columns): column `i` holds the input pattern expected when class `i` is
//! fully active, i.e. the fixed point the dynamics settle to. Display and
//! serialization use the transposed classes-as-rows orientation, which reads
//! naturally ("class X expects feature amplitudes ...").
//!
//! All types are immutable values after construction; they can be shared
//! freely across threads.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result, Violation};

fn label_ok(label: &str) -> bool {
    !label.is_empty() && !label.contains(|c: char| c.is_whitespace() || c == ',')
}

/// The learned store of fixed points: entry `(feature, class)` is the
/// expected amplitude of that feature when the class is present.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationMatrix {
    entries: DMatrix<f64>,
    feature_labels: Vec<String>,
    class_labels: Vec<String>,
}

impl ExpectationMatrix {
    /// Build from a features-by-classes matrix, validating every invariant.
    pub fn new(
        entries: DMatrix<f64>,
        feature_labels: Vec<String>,
        class_labels: Vec<String>,
    ) -> Result<Self> {
        let violations = Self::check(&entries, &feature_labels, &class_labels);
        if violations.is_empty() {
            Ok(Self {
                entries,
                feature_labels,
                class_labels,
            })
        } else {
            Err(Error::InvalidModel(violations))
        }
    }

    /// Build from classes-as-rows data (the display orientation): one row of
    /// feature expectations per class.
    pub fn from_class_rows(
        class_labels: Vec<String>,
        feature_labels: Vec<String>,
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        if rows.len() != class_labels.len() {
            return Err(Error::DimensionMismatch {
                context: "class rows",
                expected: class_labels.len(),
                actual: rows.len(),
            });
        }
        let n = feature_labels.len();
        for (row, label) in rows.iter().zip(&class_labels) {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: if label.is_empty() {
                        "row length"
                    } else {
                        "feature count in class row"
                    },
                    expected: n,
                    actual: row.len(),
                });
            }
        }
        let entries = DMatrix::from_fn(n, rows.len(), |feature, class| rows[class][feature]);
        Self::new(entries, feature_labels, class_labels)
    }

    /// Report every invariant violation in the given parts. Empty iff the
    /// parts form a valid expectation matrix. Validation never fails; it
    /// describes what is wrong, naming the offending row/column/cell.
    pub fn check(
        entries: &DMatrix<f64>,
        feature_labels: &[String],
        class_labels: &[String],
    ) -> Vec<Violation> {
        let mut violations = Vec::new();
        let (n, h) = entries.shape();
        if n == 0 {
            violations.push(Violation::NoFeatures);
        }
        if h == 0 {
            violations.push(Violation::NoClasses);
        }
        if feature_labels.len() != n {
            violations.push(Violation::FeatureLabelCount {
                labels: feature_labels.len(),
                features: n,
            });
        }
        if class_labels.len() != h {
            violations.push(Violation::ClassLabelCount {
                labels: class_labels.len(),
                classes: h,
            });
        }
        for (role, labels) in [("feature", feature_labels), ("class", class_labels)] {
            for (i, label) in labels.iter().enumerate() {
                if !label_ok(label) {
                    violations.push(Violation::BadLabel {
                        label: label.clone(),
                        role,
                    });
                }
                if labels[..i].contains(label) {
                    violations.push(match role {
                        "feature" => Violation::DuplicateFeatureLabel(label.clone()),
                        _ => Violation::DuplicateClassLabel(label.clone()),
                    });
                }
            }
        }
        let feature_name = |i: usize| {
            feature_labels
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("#{i}"))
        };
        let class_name = |j: usize| {
            class_labels
                .get(j)
                .cloned()
                .unwrap_or_else(|| format!("#{j}"))
        };
        for j in 0..h {
            let mut any_positive = false;
            for i in 0..n {
                let value = entries[(i, j)];
                if !value.is_finite() {
                    violations.push(Violation::NonFiniteEntry {
                        feature: feature_name(i),
                        class: class_name(j),
                        value,
                    });
                } else if value < 0.0 {
                    violations.push(Violation::NegativeEntry {
                        feature: feature_name(i),
                        class: class_name(j),
                        value,
                    });
                } else if value > 0.0 {
                    any_positive = true;
                }
            }
            if !any_positive && n > 0 {
                violations.push(Violation::UnreachableClass(class_name(j)));
            }
        }
        violations
    }

    /// Re-run validation on this matrix. Always empty for instances built
    /// through the checked constructors.
    pub fn validate(&self) -> Vec<Violation> {
        Self::check(&self.entries, &self.feature_labels, &self.class_labels)
    }

    /// Number of features (N).
    pub fn n_features(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of classes (H).
    pub fn n_classes(&self) -> usize {
        self.entries.ncols()
    }

    /// The stored features-by-classes matrix.
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn feature_labels(&self) -> &[String] {
        &self.feature_labels
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_labels.iter().position(|l| l == label)
    }

    pub fn feature_index(&self, label: &str) -> Option<usize> {
        self.feature_labels.iter().position(|l| l == label)
    }

    /// The expectation of `feature` under `class` — the symbolic lookup
    /// ("how many wheels does this class expect?").
    pub fn expectation(&self, class: &str, feature: &str) -> Result<f64> {
        let j = self
            .class_index(class)
            .ok_or_else(|| Error::UnknownClass(class.into()))?;
        let i = self
            .feature_index(feature)
            .ok_or_else(|| Error::UnknownFeature(feature.into()))?;
        Ok(self.entries[(i, j)])
    }

    /// Column `j` as an owned vector: the stored fixed-point pattern of class `j`.
    pub fn class_pattern(&self, j: usize) -> DVector<f64> {
        self.entries.column(j).into_owned()
    }

    /// Per-class totals `V_i = Σ_j M_ji` used to normalize the feedback dynamics.
    pub fn column_sums(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n_classes(),
            self.entries.column_iter().map(|c| c.sum()),
        )
    }

    /// Rows in display orientation (one row of feature values per class);
    /// always the transpose of the stored matrix.
    pub fn class_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_classes())
            .map(|j| self.entries.column(j).iter().copied().collect())
            .collect()
    }
}

/// A nonnegative feature vector presented to the classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct InputVector {
    values: DVector<f64>,
}

impl InputVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidValue {
                what: "input vector",
                detail: "empty".into(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidValue {
                    what: "input vector",
                    detail: format!("entry {i} = {v} is not finite"),
                });
            }
            if v < 0.0 {
                return Err(Error::InvalidValue {
                    what: "input vector",
                    detail: format!("entry {i} = {v} is negative"),
                });
            }
        }
        Ok(Self {
            values: DVector::from_vec(values),
        })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    /// True when every entry is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Class activations `Y`, the state evolved by the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationVector {
    values: DVector<f64>,
}

impl ActivationVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidValue {
                    what: "activation vector",
                    detail: format!("entry {i} = {v} is not finite"),
                });
            }
        }
        Ok(Self {
            values: DVector::from_vec(values),
        })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    /// The small-seed start state used when no initial activations are given:
    /// every class at 0.0001. The feedback solver cannot start at exact zero.
    pub fn small_seed(classes: usize) -> Self {
        Self {
            values: DVector::from_element(classes, 1e-4),
        }
    }

    pub(crate) fn from_dvector(values: DVector<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    /// Index and value of the largest activation.
    pub fn argmax(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Feedforward weights `W` (classes by features), normally derived from the
/// expectation matrix by pseudoinverse.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedforwardMatrix {
    entries: DMatrix<f64>,
}

impl FeedforwardMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidValue {
                what: "feedforward matrix",
                detail: "empty".into(),
            });
        }
        if let Some(v) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue {
                what: "feedforward matrix",
                detail: format!("contains non-finite entry {v}"),
            });
        }
        Ok(Self { entries })
    }

    /// Expectations used directly as feedforward weights (classes-as-rows,
    /// i.e. `Mᵀ`). This is the naive scheme that fails: expectations are fixed
    /// points, not one-pass weights.
    pub fn naive_from_expectations(m: &ExpectationMatrix) -> Self {
        Self {
            entries: m.entries().transpose(),
        }
    }

    /// Classes-by-features weight matrix.
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn n_classes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.entries.ncols()
    }
}

/// Stop rule that ends a solve once a designated class activation reaches a
/// threshold. This is the iteration-count experiment's stop condition; plain
/// classification runs leave it unset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetStop {
    /// Class index whose activation is watched.
    pub class: usize,
    /// Threshold in (0, 1].
    pub threshold: f64,
}

/// Tunables for the iterative solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Euler step size. The regulatory-feedback solver requires dt <= 1;
    /// the least-squares flow needs dt below its stability limit (see
    /// [`crate::dynamics::stable_least_squares_dt`]).
    pub dt: f64,
    /// Stop when the per-step change of Y falls below this (infinity norm).
    pub convergence_tol: f64,
    /// Hard iteration cap; hitting it is reported, not an error.
    pub max_iterations: usize,
    /// Lower clamp for feedback denominators (and for activations the
    /// feedback update would otherwise drive to exactly zero).
    pub epsilon_floor: f64,
    /// Optional experiment stop rule.
    pub target: Option<TargetStop>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1.0,
            convergence_tol: 1e-8,
            max_iterations: 100_000,
            epsilon_floor: 1e-12,
            target: None,
        }
    }
}

impl SolverConfig {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_target(mut self, class: usize, threshold: f64) -> Self {
        self.target = Some(TargetStop { class, threshold });
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidValue {
                what: "solver config",
                detail: format!("dt = {} must be positive and finite", self.dt),
            });
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::InvalidValue {
                what: "solver config",
                detail: format!(
                    "convergence_tol = {} must be positive",
                    self.convergence_tol
                ),
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidValue {
                what: "solver config",
                detail: "max_iterations must be at least 1".into(),
            });
        }
        if !(self.epsilon_floor.is_finite() && self.epsilon_floor > 0.0) {
            return Err(Error::InvalidValue {
                what: "solver config",
                detail: format!("epsilon_floor = {} must be positive", self.epsilon_floor),
            });
        }
        if let Some(t) = &self.target {
            if !(t.threshold > 0.0 && t.threshold <= 1.0) {
                return Err(Error::InvalidValue {
                    what: "solver config",
                    detail: format!("target threshold {} outside (0, 1]", t.threshold),
                });
            }
        }
        Ok(())
    }
}

/// Why a solve stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Per-step change fell below the convergence tolerance.
    Tolerance,
    /// The designated class activation reached the target threshold.
    TargetThreshold,
    /// The iteration cap was exhausted.
    MaxIterations,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::Tolerance => write!(f, "tolerance"),
            StopReason::TargetThreshold => write!(f, "target_threshold"),
            StopReason::MaxIterations => write!(f, "max_iterations"),
        }
    }
}

/// One recorded solver state: step index, activations, and reconstruction
/// energy `E = ‖X − MY‖²` at that state.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub index: usize,
    pub activations: DVector<f64>,
    pub energy: f64,
}

/// Full per-iteration record of a solve, step 0 being the initial state.
#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub steps: Vec<TraceStep>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl SolverTrace {
    /// Number of dynamic steps taken (excludes the recorded initial state).
    pub fn iterations(&self) -> usize {
        self.steps.last().map(|s| s.index).unwrap_or(0)
    }

    pub fn final_energy(&self) -> Option<f64> {
        self.steps.last().map(|s| s.energy)
    }
}
