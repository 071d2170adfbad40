//! File formats: the model file, the dataset/pattern CSV, and the CSV
//! emitters for traces, experiment sweeps, and derived weights.
//!
//! The model file is a small versioned text format with the matrix written
//! classes-as-rows, so the worked examples can be typed by hand:
//!
//! ```text
//! genrec-model v1
//! features: wheels horizontal handlebars seat
//! classes: bicycle unicycle
//! bicycle: 2 1 1 1
//! unicycle: 1 0 0 1
//! ```
//!
//! Blank lines and `#` comments are ignored. Labels may not contain
//! whitespace or commas. Numbers are written in shortest round-trip decimal
//! form, so writing and re-reading a model reproduces every entry bit for
//! bit — and identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::PairExperimentResult;
use crate::error::{Error, Result};
use crate::learning::LabeledDataset;
use crate::model::{ExpectationMatrix, FeedforwardMatrix, InputVector, SolverTrace};

const MODEL_HEADER: &str = "genrec-model v1";

/// Serialize a model to its canonical text form.
pub fn model_to_string(m: &ExpectationMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "{MODEL_HEADER}").unwrap();
    writeln!(out, "features: {}", m.feature_labels().join(" ")).unwrap();
    writeln!(out, "classes: {}", m.class_labels().join(" ")).unwrap();
    for (label, row) in m.class_labels().iter().zip(m.class_rows()) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{label}: {}", cells.join(" ")).unwrap();
    }
    out
}

pub fn write_model(path: &Path, m: &ExpectationMatrix) -> Result<()> {
    std::fs::write(path, model_to_string(m))?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<ExpectationMatrix> {
    parse_model(&std::fs::read_to_string(path)?)
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

fn significant_lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            None
        } else {
            Some(Line {
                number: idx + 1,
                text,
            })
        }
    })
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn expect_prefix<'a>(line: &Line<'a>, prefix: &str) -> Result<&'a str> {
    line.text
        .strip_prefix(prefix)
        .map(str::trim)
        .ok_or_else(|| {
            parse_err(
                line.number,
                1,
                format!("expected a line starting with '{prefix}'"),
            )
        })
}

/// Parse the canonical model format.
pub fn parse_model(text: &str) -> Result<ExpectationMatrix> {
    let mut lines = significant_lines(text);

    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty model file"))?;
    if header.text != MODEL_HEADER {
        return Err(parse_err(
            header.number,
            1,
            format!("expected header '{MODEL_HEADER}'"),
        ));
    }

    let features_line = lines
        .next()
        .ok_or_else(|| parse_err(header.number, 1, "missing 'features:' line"))?;
    let feature_labels: Vec<String> = expect_prefix(&features_line, "features:")?
        .split_whitespace()
        .map(String::from)
        .collect();
    if feature_labels.is_empty() {
        return Err(parse_err(
            features_line.number,
            1,
            "no feature labels listed",
        ));
    }

    let classes_line = lines
        .next()
        .ok_or_else(|| parse_err(features_line.number, 1, "missing 'classes:' line"))?;
    let class_labels: Vec<String> = expect_prefix(&classes_line, "classes:")?
        .split_whitespace()
        .map(String::from)
        .collect();
    if class_labels.is_empty() {
        return Err(parse_err(classes_line.number, 1, "no class labels listed"));
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(class_labels.len());
    for expected_label in &class_labels {
        let line = lines.next().ok_or_else(|| {
            parse_err(
                classes_line.number,
                1,
                format!("missing expectation row for class '{expected_label}'"),
            )
        })?;
        let (label, rest) = line.text.split_once(':').ok_or_else(|| {
            parse_err(
                line.number,
                1,
                "expected '<class>: <values...>'".to_string(),
            )
        })?;
        if label.trim() != expected_label {
            return Err(parse_err(
                line.number,
                1,
                format!(
                    "expected row for class '{expected_label}', found '{}'",
                    label.trim()
                ),
            ));
        }
        rows.push(parse_number_fields(
            rest,
            line.number,
            line.text.len() - rest.len() + 1,
        )?);
    }

    if let Some(extra) = lines.next() {
        return Err(parse_err(
            extra.number,
            1,
            "unexpected content after the last class row",
        ));
    }

    ExpectationMatrix::from_class_rows(class_labels, feature_labels, &rows)
}

fn parse_number_fields(text: &str, line: usize, column_offset: usize) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut cursor = 0;
    for field in text.split_whitespace() {
        let at = text[cursor..]
            .find(field)
            .expect("field comes from this text")
            + cursor;
        cursor = at + field.len();
        let value: f64 = field.parse().map_err(|_| {
            parse_err(
                line,
                column_offset + at,
                format!("'{field}' is not a number"),
            )
        })?;
        values.push(value);
    }
    Ok(values)
}

/// Parse the dataset CSV: a header row with one label column followed by N
/// feature columns, then one exemplar per row.
pub fn parse_dataset(text: &str) -> Result<LabeledDataset> {
    let mut lines = significant_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty dataset"))?;
    let mut header_fields = header.text.split(',').map(str::trim);
    let _label_column = header_fields
        .next()
        .filter(|f| !f.is_empty())
        .ok_or_else(|| parse_err(header.number, 1, "header needs a label column"))?;
    let feature_labels: Vec<String> = header_fields.map(String::from).collect();
    if feature_labels.is_empty() {
        return Err(parse_err(
            header.number,
            1,
            "header lists no feature columns",
        ));
    }

    let mut exemplars = Vec::new();
    for line in lines {
        let mut column = 1;
        let mut fields = Vec::new();
        for field in line.text.split(',') {
            fields.push((column, field.trim()));
            column += field.len() + 1;
        }
        if fields.len() != feature_labels.len() + 1 {
            return Err(parse_err(
                line.number,
                1,
                format!(
                    "expected {} fields, found {}",
                    feature_labels.len() + 1,
                    fields.len()
                ),
            ));
        }
        let (label_col, label) = fields[0];
        if label.is_empty() {
            return Err(parse_err(line.number, label_col, "empty exemplar label"));
        }
        let mut values = Vec::with_capacity(feature_labels.len());
        for &(col, field) in &fields[1..] {
            let value: f64 = field
                .parse()
                .map_err(|_| parse_err(line.number, col, format!("'{field}' is not a number")))?;
            values.push(value);
        }
        let vector = InputVector::new(values)
            .map_err(|e| parse_err(line.number, 1, format!("invalid exemplar: {e}")))?;
        exemplars.push((vector, label.to_string()));
    }

    LabeledDataset::new(feature_labels, exemplars)
}

pub fn read_dataset(path: &Path) -> Result<LabeledDataset> {
    parse_dataset(&std::fs::read_to_string(path)?)
}

/// Pattern sets reuse the dataset format: one named pattern per row.
pub fn read_patterns(path: &Path) -> Result<Vec<InputVector>> {
    let data = read_dataset(path)?;
    Ok(data.exemplars().iter().map(|(v, _)| v.clone()).collect())
}

/// Per-iteration trace CSV: step, one column per class activation, energy.
pub fn trace_to_csv(trace: &SolverTrace, class_labels: &[String]) -> String {
    let mut out = String::new();
    writeln!(out, "step,{},energy", class_labels.join(",")).unwrap();
    for step in &trace.steps {
        let cells: Vec<String> = step.activations.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{},{},{}", step.index, cells.join(","), step.energy).unwrap();
    }
    out
}

/// Sweep results CSV, one row per pattern pair. Singular pairs keep their
/// similarity and the `inf` condition number but have empty iteration cells.
pub fn experiment_to_csv(results: &[PairExperimentResult]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "i,j,similarity,condition_number,iterations_ls,iterations_rf,converged_ls,converged_rf"
    )
    .unwrap();
    for r in results {
        let (it_ls, conv_ls) = match &r.least_squares {
            Some(run) => (
                format!("{}", run.mean_iterations),
                run.converged.to_string(),
            ),
            None => (String::new(), "false".into()),
        };
        let (it_rf, conv_rf) = match &r.regulatory_feedback {
            Some(run) => (
                format!("{}", run.mean_iterations),
                run.converged.to_string(),
            ),
            None => (String::new(), "false".into()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.i, r.j, r.similarity, r.condition_number, it_ls, it_rf, conv_ls, conv_rf
        )
        .unwrap();
    }
    out
}

/// Derived-weights CSV, classes as rows, full precision.
pub fn feedforward_to_csv(
    w: &FeedforwardMatrix,
    class_labels: &[String],
    feature_labels: &[String],
) -> String {
    let mut out = String::new();
    writeln!(out, "class,{}", feature_labels.join(",")).unwrap();
    for (i, label) in class_labels.iter().enumerate() {
        let cells: Vec<String> = (0..w.n_features())
            .map(|j| format!("{}", w.entries()[(i, j)]))
            .collect();
        writeln!(out, "{label},{}", cells.join(",")).unwrap();
    }
    out
}
