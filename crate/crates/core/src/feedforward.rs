//! The one-pass feedforward baseline: derive `W` from the expectation matrix
//! by pseudoinverse and classify with `Y = WX`.
//!
//! `W = (MᵀM)⁻¹Mᵀ` is the left inverse of `M`, so the feedforward answer
//! coincides with the fixed points of the dynamic solvers wherever `M` has
//! full column rank. The point of deriving it here is the contrast: a
//! one-entry edit of `M` reshuffles essentially every entry of `W`, which is
//! what [`weight_change_report`] quantifies.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::model::{ActivationVector, ExpectationMatrix, FeedforwardMatrix, InputVector};

/// Singular values below `RANK_TOLERANCE × σ_max` mean rank deficiency.
const RANK_TOLERANCE: f64 = 1e-10;

/// Condition number of `MᵀM` above which the normal equations are abandoned
/// for a direct SVD pseudoinverse.
const NORMAL_EQUATION_CONDITION_LIMIT: f64 = 1e8;

/// Entries differing by more than this count as "changed" in a
/// [`WeightChangeReport`].
pub const CHANGE_TOLERANCE: f64 = 1e-9;

fn near_dependent_classes(m: &ExpectationMatrix) -> Vec<String> {
    // The eigenvector of the smallest eigenvalue of MᵀM points along the
    // (near-)null direction; classes with substantial weight in it are the
    // ones that are mutually dependent.
    let gram = m.entries().transpose() * m.entries();
    let eigen = SymmetricEigen::new(gram);
    let (min_idx, _) = eigen
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one class");
    let null_dir = eigen.eigenvectors.column(min_idx);
    let peak = null_dir.amax();
    m.class_labels()
        .iter()
        .zip(null_dir.iter())
        .filter(|(_, &w)| w.abs() > 0.3 * peak)
        .map(|(label, _)| label.clone())
        .collect()
}

/// Derive the feedforward weights `W = (MᵀM)⁻¹Mᵀ` (H×N).
///
/// The normal equations are solved by Cholesky factorization; when `MᵀM` is
/// ill-conditioned (κ > 1e8) the computation falls back to an SVD
/// pseudoinverse of `M` itself. Rank-deficient matrices are an error naming
/// the near-dependent class columns.
pub fn pseudoinverse(m: &ExpectationMatrix) -> Result<FeedforwardMatrix> {
    let (n, h) = (m.n_features(), m.n_classes());
    if h > n {
        return Err(Error::SingularModel {
            classes: near_dependent_classes(m),
        });
    }
    let svd = SVD::new(m.entries().clone(), true, true);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    if sigma_max <= 0.0 || sigma_min < RANK_TOLERANCE * sigma_max {
        return Err(Error::SingularModel {
            classes: near_dependent_classes(m),
        });
    }

    let gram_condition = (sigma_max / sigma_min).powi(2);
    let entries = if gram_condition > NORMAL_EQUATION_CONDITION_LIMIT {
        svd.pseudo_inverse(RANK_TOLERANCE * sigma_max)
            .map_err(|_| Error::SingularModel {
                classes: near_dependent_classes(m),
            })?
    } else {
        let gram = m.entries().transpose() * m.entries();
        match gram.cholesky() {
            Some(chol) => chol.solve(&m.entries().transpose()),
            // Cholesky can fail before the condition estimate says so; the
            // SVD route still applies.
            None => svd
                .pseudo_inverse(RANK_TOLERANCE * sigma_max)
                .map_err(|_| Error::SingularModel {
                    classes: near_dependent_classes(m),
                })?,
        }
    };
    FeedforwardMatrix::new(entries)
}

/// Single-pass classification `Y = WX`: no iteration, no state.
pub fn classify_feedforward(w: &FeedforwardMatrix, x: &InputVector) -> Result<ActivationVector> {
    if x.len() != w.n_features() {
        return Err(Error::DimensionMismatch {
            context: "input length (features N)",
            expected: w.n_features(),
            actual: x.len(),
        });
    }
    Ok(ActivationVector::from_dvector(w.entries() * x.values()))
}

/// How much a weight matrix changed between two derivations.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightChangeReport {
    /// The two matrices have different shapes (e.g. a class was added); the
    /// entry counts below then cover the overlapping block only.
    pub shape_changed: bool,
    pub shape_before: (usize, usize),
    pub shape_after: (usize, usize),
    /// Entries compared (the overlapping block).
    pub compared_entries: usize,
    /// Entries differing by more than [`CHANGE_TOLERANCE`].
    pub changed_entries: usize,
    pub max_abs_change: f64,
}

impl WeightChangeReport {
    pub fn fraction_changed(&self) -> f64 {
        if self.compared_entries == 0 {
            0.0
        } else {
            self.changed_entries as f64 / self.compared_entries as f64
        }
    }
}

impl std::fmt::Display for WeightChangeReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.shape_changed {
            write!(
                f,
                "shape changed {}x{} -> {}x{}; ",
                self.shape_before.0, self.shape_before.1, self.shape_after.0, self.shape_after.1
            )?;
        }
        write!(
            f,
            "{} of {} entries changed (max |change| = {})",
            self.changed_entries, self.compared_entries, self.max_abs_change
        )
    }
}

/// Compare two weight matrices entry by entry over their overlapping block.
pub fn weight_change_report(
    before: &FeedforwardMatrix,
    after: &FeedforwardMatrix,
) -> WeightChangeReport {
    let shape_before = (before.n_classes(), before.n_features());
    let shape_after = (after.n_classes(), after.n_features());
    let rows = shape_before.0.min(shape_after.0);
    let cols = shape_before.1.min(shape_after.1);
    let mut changed = 0usize;
    let mut max_abs_change = 0.0f64;
    for i in 0..rows {
        for j in 0..cols {
            let diff = (before.entries()[(i, j)] - after.entries()[(i, j)]).abs();
            if diff > CHANGE_TOLERANCE {
                changed += 1;
            }
            max_abs_change = max_abs_change.max(diff);
        }
    }
    WeightChangeReport {
        shape_changed: shape_before != shape_after,
        shape_before,
        shape_after,
        compared_entries: rows * cols,
        changed_entries: changed,
        max_abs_change,
    }
}

/// Count matrix entries differing beyond [`CHANGE_TOLERANCE`]; used by the
/// CLI locality report for expectation-matrix edits.
pub fn entries_changed(before: &DMatrix<f64>, after: &DMatrix<f64>) -> usize {
    let rows = before.nrows().min(after.nrows());
    let cols = before.ncols().min(after.ncols());
    let mut changed = 0;
    for i in 0..rows {
        for j in 0..cols {
            if (before[(i, j)] - after[(i, j)]).abs() > CHANGE_TOLERANCE {
                changed += 1;
            }
        }
    }
    changed
}
