//! The two feedforward-feedback solvers that iterate class activations to
//! the fixed points of `MY = X`.
//!
//! Both are explicit Euler integrations with a fixed step size, because the
//! quantity of interest downstream is the discrete iteration count:
//!
//! ```text
//! least squares:        Y ← Y + dt · Mᵀ(X − MY)
//! regulatory feedback:  Yᵢ ← Yᵢ + dt · [ (Yᵢ/Vᵢ) · Σₖ Mₖᵢ · Xₖ/(MY)ₖ − Yᵢ ]
//!                       with Vᵢ = Σⱼ Mⱼᵢ
//! ```
//!
//! The least-squares update is the descent direction of the reconstruction
//! energy `E = ‖X − MY‖²` (the step equals −½∇E). Regulatory feedback is a
//! multiplicative shunting update that rescales each class by the ratio of
//! observed input to its current reconstruction; it keeps activations
//! strictly positive and shares its fixed points with the least-squares flow.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{
    ActivationVector, ExpectationMatrix, InputVector, SolverConfig, SolverTrace, StopReason,
    TraceStep,
};

/// Which dynamic solver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    LeastSquares,
    RegulatoryFeedback,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverKind::LeastSquares => write!(f, "least-squares"),
            SolverKind::RegulatoryFeedback => write!(f, "regulatory-feedback"),
        }
    }
}

fn check_input_len(m: &ExpectationMatrix, x: &InputVector) -> Result<()> {
    if x.len() != m.n_features() {
        return Err(Error::DimensionMismatch {
            context: "input length (features N)",
            expected: m.n_features(),
            actual: x.len(),
        });
    }
    Ok(())
}

fn check_activation_len(m: &ExpectationMatrix, y: &ActivationVector) -> Result<()> {
    if y.len() != m.n_classes() {
        return Err(Error::DimensionMismatch {
            context: "activation length (classes H)",
            expected: m.n_classes(),
            actual: y.len(),
        });
    }
    Ok(())
}

/// Reconstruction energy `E = ‖X − MY‖²`; zero exactly when the activations
/// generate the input.
pub fn energy(m: &ExpectationMatrix, x: &InputVector, y: &ActivationVector) -> Result<f64> {
    check_input_len(m, x)?;
    check_activation_len(m, y)?;
    let residual = x.values() - m.entries() * y.values();
    Ok(residual.norm_squared())
}

/// One explicit Euler step of the least-squares flow `Y ← Y + dt·Mᵀ(X − MY)`.
pub fn least_squares_step(
    m: &ExpectationMatrix,
    x: &InputVector,
    y: &ActivationVector,
    dt: f64,
) -> Result<ActivationVector> {
    check_input_len(m, x)?;
    check_activation_len(m, y)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidValue {
            what: "step size",
            detail: format!("dt = {dt} must be positive and finite"),
        });
    }
    let residual = x.values() - m.entries() * y.values();
    let next = y.values() + m.entries().transpose() * residual * dt;
    Ok(ActivationVector::from_dvector(next))
}

/// One explicit Euler step of the regulatory-feedback dynamics.
///
/// Reconstruction components below `epsilon_floor` are clamped before the
/// division, and an activation the update would drive to exactly zero is
/// floored at `epsilon_floor` so the multiplicative dynamics stay strictly
/// positive.
pub fn regulatory_feedback_step(
    m: &ExpectationMatrix,
    x: &InputVector,
    y: &ActivationVector,
    dt: f64,
    epsilon_floor: f64,
) -> Result<ActivationVector> {
    check_input_len(m, x)?;
    check_activation_len(m, y)?;
    if !(dt.is_finite() && dt > 0.0 && dt <= 1.0) {
        return Err(Error::InvalidValue {
            what: "step size",
            detail: format!("dt = {dt} must be in (0, 1] for regulatory feedback"),
        });
    }
    if !(epsilon_floor.is_finite() && epsilon_floor > 0.0) {
        return Err(Error::InvalidValue {
            what: "epsilon floor",
            detail: format!("{epsilon_floor} must be positive"),
        });
    }
    if let Some((i, &v)) = y.as_slice().iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::NonPositiveActivation { index: i, value: v });
    }

    let entries = m.entries();
    let totals = m.column_sums();
    if let Some(i) = totals.iter().position(|&v| v <= 0.0) {
        return Err(Error::ZeroColumnSum {
            class: m.class_labels()[i].clone(),
        });
    }

    // Ratio of observed input to the current top-down reconstruction, one
    // value per feature.
    let reconstruction = entries * y.values();
    let ratio = DVector::from_fn(m.n_features(), |k, _| {
        x.as_slice()[k] / reconstruction[k].max(epsilon_floor)
    });

    let feedback = entries.transpose() * ratio;
    let next = DVector::from_fn(m.n_classes(), |i, _| {
        let yi = y.as_slice()[i];
        let updated = yi + dt * (yi / totals[i] * feedback[i] - yi);
        updated.max(epsilon_floor)
    });
    Ok(ActivationVector::from_dvector(next))
}

/// Largest step size at which the least-squares flow is safely contractive
/// for this matrix: `0.9 / σ_max(M)²`. The stability limit scales with the
/// input dimension, so a step that converges on a small matrix can diverge
/// on a large one.
pub fn stable_least_squares_dt(m: &ExpectationMatrix) -> f64 {
    let sigma_max = m.entries().singular_values().max();
    if sigma_max > 0.0 {
        0.9 / (sigma_max * sigma_max)
    } else {
        1.0
    }
}

fn step_once(
    kind: SolverKind,
    m: &ExpectationMatrix,
    x: &InputVector,
    y: &ActivationVector,
    config: &SolverConfig,
) -> Result<ActivationVector> {
    match kind {
        SolverKind::LeastSquares => least_squares_step(m, x, y, config.dt),
        SolverKind::RegulatoryFeedback => {
            regulatory_feedback_step(m, x, y, config.dt, config.epsilon_floor)
        }
    }
}

fn run<F>(
    m: &ExpectationMatrix,
    x: &InputVector,
    y0: &ActivationVector,
    kind: SolverKind,
    config: &SolverConfig,
    mut observe: F,
) -> Result<(ActivationVector, StopReason)>
where
    F: FnMut(usize, &ActivationVector),
{
    config.validate()?;
    check_input_len(m, x)?;
    check_activation_len(m, y0)?;
    if let Some(t) = &config.target {
        if t.class >= m.n_classes() {
            return Err(Error::DimensionMismatch {
                context: "target class index",
                expected: m.n_classes(),
                actual: t.class,
            });
        }
    }

    let mut y = y0.clone();
    observe(0, &y);
    for step in 1..=config.max_iterations {
        let next = step_once(kind, m, x, &y, config)?;
        if next.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteActivation { step });
        }
        let delta = (next.values() - y.values()).amax();
        y = next;
        observe(step, &y);
        if delta < config.convergence_tol {
            return Ok((y, StopReason::Tolerance));
        }
        if let Some(t) = &config.target {
            if y.as_slice()[t.class] >= t.threshold {
                return Ok((y, StopReason::TargetThreshold));
            }
        }
    }
    Ok((y, StopReason::MaxIterations))
}

/// Iterate the chosen dynamics from `y0` until the per-step change drops
/// below tolerance, a configured target activation is reached, or the
/// iteration cap is hit. Records every state (including the initial one)
/// with its reconstruction energy.
pub fn solve(
    m: &ExpectationMatrix,
    x: &InputVector,
    y0: &ActivationVector,
    kind: SolverKind,
    config: &SolverConfig,
) -> Result<(ActivationVector, SolverTrace)> {
    let mut steps = Vec::new();
    let (y, stop_reason) = run(m, x, y0, kind, config, |index, state| {
        let residual = x.values() - m.entries() * state.values();
        steps.push(TraceStep {
            index,
            activations: state.values().clone(),
            energy: residual.norm_squared(),
        });
    })?;
    let converged = stop_reason != StopReason::MaxIterations;
    Ok((
        y,
        SolverTrace {
            steps,
            converged,
            stop_reason,
        },
    ))
}

/// Like [`solve`] but records nothing, returning only the final activations,
/// the number of steps taken, and the stop reason. The experiment sweeps use
/// this to count iterations without holding full traces.
pub fn solve_counting(
    m: &ExpectationMatrix,
    x: &InputVector,
    y0: &ActivationVector,
    kind: SolverKind,
    config: &SolverConfig,
) -> Result<(ActivationVector, usize, StopReason)> {
    let mut last = 0;
    let (y, stop_reason) = run(m, x, y0, kind, config, |index, _| last = index)?;
    Ok((y, last, stop_reason))
}
