//! One-shot expectation learning and localized online edits.
//!
//! Learning is class-conditional averaging: the expectation column of a class
//! is the mean of its exemplars, summed in dataset order so results are
//! reproducible bit for bit. The edit operations — add a class, change one
//! expectation, remove a class — return new matrices in which every
//! untouched entry is bit-identical to the input. That locality is the whole
//! point of storing fixed points instead of feedforward weights: compare
//! [`crate::feedforward::weight_change_report`] on the weights derived before
//! and after the same edit.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{ExpectationMatrix, InputVector};

/// Labeled exemplars for expectation learning.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    feature_labels: Vec<String>,
    exemplars: Vec<(InputVector, String)>,
}

impl LabeledDataset {
    pub fn new(feature_labels: Vec<String>, exemplars: Vec<(InputVector, String)>) -> Result<Self> {
        if exemplars.is_empty() {
            return Err(Error::InvalidValue {
                what: "dataset",
                detail: "no exemplars".into(),
            });
        }
        let n = feature_labels.len();
        for (idx, (vector, label)) in exemplars.iter().enumerate() {
            if vector.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "exemplar length (features N)",
                    expected: n,
                    actual: vector.len(),
                });
            }
            if label.is_empty() {
                return Err(Error::InvalidValue {
                    what: "dataset",
                    detail: format!("exemplar {idx} has an empty label"),
                });
            }
        }
        Ok(Self {
            feature_labels,
            exemplars,
        })
    }

    pub fn feature_labels(&self) -> &[String] {
        &self.feature_labels
    }

    pub fn exemplars(&self) -> &[(InputVector, String)] {
        &self.exemplars
    }

    /// Class labels in order of first appearance.
    pub fn class_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for (_, label) in &self.exemplars {
            if !labels.iter().any(|l| l == label) {
                labels.push(label.clone());
            }
        }
        labels
    }
}

/// Learn an expectation matrix by averaging the exemplars of each class.
/// Classes are ordered by first appearance; sums run first-to-last so the
/// result is deterministic for a given dataset.
pub fn learn_expectations(data: &LabeledDataset) -> Result<ExpectationMatrix> {
    let class_labels = data.class_labels();
    let n = data.feature_labels().len();
    let h = class_labels.len();
    let mut sums = DMatrix::<f64>::zeros(n, h);
    let mut counts = vec![0usize; h];
    for (vector, label) in data.exemplars() {
        let j = class_labels
            .iter()
            .position(|l| l == label)
            .expect("label collected above");
        for (i, &v) in vector.as_slice().iter().enumerate() {
            sums[(i, j)] += v;
        }
        counts[j] += 1;
    }
    for j in 0..h {
        let inv = 1.0 / counts[j] as f64;
        for i in 0..n {
            sums[(i, j)] *= inv;
        }
        if sums.column(j).iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidModel(vec![
                crate::error::Violation::UnreachableClass(class_labels[j].clone()),
            ]));
        }
    }
    ExpectationMatrix::new(sums, data.feature_labels().to_vec(), class_labels)
}

/// Add a class as a new expectation column; every pre-existing entry of the
/// returned matrix is bit-identical to the input.
pub fn add_class(
    m: &ExpectationMatrix,
    label: &str,
    expectations: &InputVector,
) -> Result<ExpectationMatrix> {
    if m.class_index(label).is_some() {
        return Err(Error::DuplicateClass(label.into()));
    }
    if expectations.len() != m.n_features() {
        return Err(Error::DimensionMismatch {
            context: "expectations length (features N)",
            expected: m.n_features(),
            actual: expectations.len(),
        });
    }
    if expectations.is_zero() {
        return Err(Error::InvalidValue {
            what: "class expectations",
            detail: format!("'{label}' would have all-zero expectations"),
        });
    }
    let h = m.n_classes();
    let mut entries = m.entries().clone().insert_column(h, 0.0);
    entries.column_mut(h).copy_from(expectations.values());
    let mut class_labels = m.class_labels().to_vec();
    class_labels.push(label.into());
    ExpectationMatrix::new(entries, m.feature_labels().to_vec(), class_labels)
}

/// Change a single expectation entry; all other entries of the returned
/// matrix are bit-identical to the input.
pub fn set_expectation(
    m: &ExpectationMatrix,
    class: &str,
    feature: &str,
    value: f64,
) -> Result<ExpectationMatrix> {
    let j = m
        .class_index(class)
        .ok_or_else(|| Error::UnknownClass(class.into()))?;
    let i = m
        .feature_index(feature)
        .ok_or_else(|| Error::UnknownFeature(feature.into()))?;
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidValue {
            what: "expectation value",
            detail: format!("{value} must be finite and nonnegative"),
        });
    }
    let mut entries = m.entries().clone();
    entries[(i, j)] = value;
    if entries.column(j).iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidValue {
            what: "expectation value",
            detail: format!("setting ({class}, {feature}) to 0 would zero out the whole class"),
        });
    }
    ExpectationMatrix::new(
        entries,
        m.feature_labels().to_vec(),
        m.class_labels().to_vec(),
    )
}

/// Remove a class column; surviving columns are bit-identical and keep their
/// order. Removing the last remaining class is an error.
pub fn remove_class(m: &ExpectationMatrix, label: &str) -> Result<ExpectationMatrix> {
    let j = m
        .class_index(label)
        .ok_or_else(|| Error::UnknownClass(label.into()))?;
    if m.n_classes() == 1 {
        return Err(Error::LastClassRemoval(label.into()));
    }
    let entries = m.entries().clone().remove_column(j);
    let mut class_labels = m.class_labels().to_vec();
    class_labels.remove(j);
    ExpectationMatrix::new(entries, m.feature_labels().to_vec(), class_labels)
}
