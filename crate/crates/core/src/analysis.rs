//! Difficulty analysis: pattern similarity, matrix conditioning, and the
//! iterations-to-threshold experiment over pattern pairs.
//!
//! Similarity of two nonnegative patterns is the shared amplitude over the
//! total coverage, `sum(min) / sum(max)`: 1 for identical patterns, 0 for
//! disjoint supports. The harder two patterns are to tell apart, the worse
//! the conditioning of the two-column matrix holding them — and the more
//! iterations either dynamic solver needs to push the correct activation
//! from a small seed up to a threshold. The sweep in this module measures
//! all three quantities for every pattern pair so the trend can be checked
//! (and plotted from the CSV the CLI writes).

use nalgebra::DMatrix;
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{solve_counting, stable_least_squares_dt, SolverKind};
use crate::error::{Error, Result};
use crate::model::{
    ActivationVector, ExpectationMatrix, InputVector, SolverConfig, StopReason, TargetStop,
};

/// Threshold the designated activation must reach in the pair experiment
/// when the caller's config does not set one.
pub const DEFAULT_TARGET_THRESHOLD: f64 = 0.9;

/// Shared-amplitude similarity `sum(min(p1,p2)) / sum(max(p1,p2))` in [0, 1].
pub fn similarity(p1: &InputVector, p2: &InputVector) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::DimensionMismatch {
            context: "pattern length",
            expected: p1.len(),
            actual: p2.len(),
        });
    }
    let mut shared = 0.0;
    let mut coverage = 0.0;
    for (&a, &b) in p1.as_slice().iter().zip(p2.as_slice()) {
        shared += a.min(b);
        coverage += a.max(b);
    }
    if coverage == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(shared / coverage)
}

/// Condition number κ = σ_max/σ_min, or the singular flag when σ_min is
/// numerically zero (σ_min < 1e-12·σ_max).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConditionNumber {
    Finite(f64),
    Singular,
}

impl ConditionNumber {
    pub fn is_singular(&self) -> bool {
        matches!(self, ConditionNumber::Singular)
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            ConditionNumber::Finite(v) => Some(*v),
            ConditionNumber::Singular => None,
        }
    }
}

impl std::fmt::Display for ConditionNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConditionNumber::Finite(v) => write!(f, "{v}"),
            ConditionNumber::Singular => write!(f, "inf"),
        }
    }
}

pub(crate) fn condition_number_of(entries: &DMatrix<f64>) -> ConditionNumber {
    let singular_values = entries.clone().svd(false, false).singular_values;
    let sigma_max = singular_values.max();
    let sigma_min = singular_values.min();
    // Fewer singular values than columns means the rank is bounded by the
    // row count and the columns cannot be independent.
    if entries.ncols() > entries.nrows() || sigma_max <= 0.0 || sigma_min < 1e-12 * sigma_max {
        return ConditionNumber::Singular;
    }
    ConditionNumber::Finite(sigma_max / sigma_min)
}

/// Condition number of the expectation matrix: how hard its pseudoinverse —
/// and therefore discrimination between its classes — is.
pub fn condition_number(m: &ExpectationMatrix) -> ConditionNumber {
    condition_number_of(m.entries())
}

/// Iteration counts for one solver on one pattern pair: the arithmetic mean
/// over both presentation orders of the steps needed to drive the correct
/// activation to the threshold. A run that exhausts `max_iterations` before
/// reaching the threshold reports the cap with `converged = false`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSolverRun {
    pub mean_iterations: f64,
    pub converged: bool,
}

/// Everything measured for one unordered pattern pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairExperimentResult {
    pub i: usize,
    pub j: usize,
    pub similarity: f64,
    pub condition_number: ConditionNumber,
    /// `None` when the pair was skipped as singular.
    pub least_squares: Option<PairSolverRun>,
    /// `None` when the pair was skipped as singular.
    pub regulatory_feedback: Option<PairSolverRun>,
}

fn pair_matrix(p1: &InputVector, p2: &InputVector) -> Result<ExpectationMatrix> {
    let n = p1.len();
    let mut entries = DMatrix::<f64>::zeros(n, 2);
    entries.column_mut(0).copy_from(p1.values());
    entries.column_mut(1).copy_from(p2.values());
    ExpectationMatrix::new(
        entries,
        (0..n).map(|i| format!("f{i}")).collect(),
        vec!["pattern1".into(), "pattern2".into()],
    )
}

/// Run the iteration-count protocol for one solver on a pattern pair.
///
/// Presentation one: the input is `p1`, activations start at
/// `[0.0001, 1]`, and steps are counted until the first activation reaches
/// the threshold. Presentation two swaps the roles. The threshold comes from
/// `config.target` if set (its class index is overridden per presentation)
/// and defaults to 0.9.
pub fn pair_iteration_experiment(
    p1: &InputVector,
    p2: &InputVector,
    kind: SolverKind,
    config: &SolverConfig,
) -> Result<PairSolverRun> {
    let sim = similarity(p1, p2)?;
    let m = pair_matrix(p1, p2)?;
    if condition_number(&m).is_singular() {
        return Err(Error::SingularPair { similarity: sim });
    }
    let threshold = config
        .target
        .map(|t| t.threshold)
        .unwrap_or(DEFAULT_TARGET_THRESHOLD);

    let mut total = 0usize;
    let mut converged = true;
    for (input, target_class) in [(p1, 0usize), (p2, 1usize)] {
        let mut run_config = config.clone();
        run_config.target = Some(TargetStop {
            class: target_class,
            threshold,
        });
        let mut start = [1.0, 1.0];
        start[target_class] = 1e-4;
        let y0 = ActivationVector::from_slice(&start).expect("finite start");
        let (_, iterations, reason) = solve_counting(&m, input, &y0, kind, &run_config)?;
        total += iterations;
        converged &= reason == StopReason::TargetThreshold;
    }
    Ok(PairSolverRun {
        mean_iterations: total as f64 / 2.0,
        converged,
    })
}

fn validate_patterns(patterns: &[InputVector]) -> Result<usize> {
    if patterns.len() < 2 {
        return Err(Error::InvalidValue {
            what: "pattern set",
            detail: format!("need at least 2 patterns, got {}", patterns.len()),
        });
    }
    let n = patterns[0].len();
    for p in patterns {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                context: "pattern length",
                expected: n,
                actual: p.len(),
            });
        }
        if p.is_zero() {
            return Err(Error::InvalidValue {
                what: "pattern set",
                detail: "contains an all-zero pattern".into(),
            });
        }
    }
    Ok(n)
}

/// A least-squares step size that is stable for every pair in the set:
/// 0.9 over the largest pair spectral norm squared. The stability limit of
/// the least-squares flow scales with pattern size, so the sweep picks one
/// safe step and uses it for all pairs to keep iteration counts comparable.
pub fn sweep_least_squares_dt(patterns: &[InputVector]) -> Result<f64> {
    validate_patterns(patterns)?;
    let mut dt = f64::INFINITY;
    for i in 0..patterns.len() {
        for j in (i + 1)..patterns.len() {
            let m = pair_matrix(&patterns[i], &patterns[j])?;
            dt = dt.min(stable_least_squares_dt(&m));
        }
    }
    Ok(dt)
}

/// Run both solvers over every unordered pattern pair. Singular pairs are
/// flagged and skipped rather than aborting the sweep. Results are sorted by
/// similarity ascending (ties by index), deterministically for a given input.
pub fn sweep_all_pairs(
    patterns: &[InputVector],
    ls_config: &SolverConfig,
    rf_config: &SolverConfig,
) -> Result<Vec<PairExperimentResult>> {
    validate_patterns(patterns)?;
    let mut results = Vec::with_capacity(patterns.len() * (patterns.len() - 1) / 2);
    for i in 0..patterns.len() {
        for j in (i + 1)..patterns.len() {
            let p1 = &patterns[i];
            let p2 = &patterns[j];
            let sim = similarity(p1, p2)?;
            let kappa = condition_number(&pair_matrix(p1, p2)?);
            let (ls, rf) = if kappa.is_singular() {
                (None, None)
            } else {
                let ls = pair_iteration_experiment(p1, p2, SolverKind::LeastSquares, ls_config)?;
                let rf =
                    pair_iteration_experiment(p1, p2, SolverKind::RegulatoryFeedback, rf_config)?;
                (Some(ls), Some(rf))
            };
            results.push(PairExperimentResult {
                i,
                j,
                similarity: sim,
                condition_number: kappa,
                least_squares: ls,
                regulatory_feedback: rf,
            });
        }
    }
    results.sort_by(|a, b| {
        a.similarity
            .total_cmp(&b.similarity)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    Ok(results)
}

/// Spearman rank correlation: rank both series (ties get their average rank)
/// and take the linear correlation of the ranks. Returns 0 for degenerate
/// series (fewer than two points, or zero variance).
pub fn rank_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "series must have equal length");
    if xs.len() < 2 {
        return 0.0;
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = rx.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        var_x += (a - mean) * (a - mean);
        var_y += (b - mean) * (b - mean);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return 0.0;
    }
    cov / (var_x * var_y).sqrt()
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut result = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // Average rank for the tie group; ranks are 1-based.
        let rank = (start + end) as f64 / 2.0 + 1.0;
        for &idx in &order[start..=end] {
            result[idx] = rank;
        }
        start = end + 1;
    }
    result
}

/// Deterministic random pattern set with a wide spread of pairwise
/// similarities.
///
/// Patterns are built from a shared dictionary of sparse component vectors
/// (think strokes shared between glyphs): each pattern takes the elementwise
/// max of a few dictionary components plus a small private component of its
/// own. Pairs sharing components come out similar; pairs sharing none are
/// nearly disjoint. Identical seeds give identical patterns.
pub fn random_patterns(seed: u64, count: usize, dim: usize) -> Result<Vec<InputVector>> {
    if count < 2 {
        return Err(Error::InvalidValue {
            what: "pattern count",
            detail: format!("need at least 2, got {count}"),
        });
    }
    if dim < 8 {
        return Err(Error::InvalidValue {
            what: "pattern dimension",
            detail: format!("need at least 8, got {dim}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dictionary_size = (count / 2).max(6);
    let component_support = (dim / 8).max(4);
    let private_support = (dim / 32).max(2);

    let mut dictionary = Vec::with_capacity(dictionary_size);
    for _ in 0..dictionary_size {
        let mut component = vec![0.0f64; dim];
        for idx in sample_indices(&mut rng, dim, component_support) {
            component[idx] = rng.gen_range(0.3..1.0);
        }
        dictionary.push(component);
    }

    let mut patterns = Vec::with_capacity(count);
    for _ in 0..count {
        let picks = sample_indices(&mut rng, dictionary_size, 3.min(dictionary_size));
        let mut values = vec![0.0f64; dim];
        for pick in picks {
            for (v, &c) in values.iter_mut().zip(&dictionary[pick]) {
                *v = v.max(c);
            }
        }
        // Private component: keeps every pattern unique so no pair is
        // exactly singular.
        for idx in sample_indices(&mut rng, dim, private_support) {
            values[idx] = values[idx].max(rng.gen_range(0.1..0.35));
        }
        patterns.push(InputVector::new(values).expect("generated patterns are valid"));
    }
    Ok(patterns)
}

/// Linear blend `(1−t)·a + t·b`, used to build controlled-similarity paths
/// between a pattern and a reference.
pub fn blend(a: &InputVector, b: &InputVector, t: f64) -> Result<InputVector> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "pattern length",
            expected: a.len(),
            actual: b.len(),
        });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidValue {
            what: "blend coefficient",
            detail: format!("{t} outside [0, 1]"),
        });
    }
    InputVector::new(
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(&x, &y)| (1.0 - t) * x + t * y)
            .collect(),
    )
}
