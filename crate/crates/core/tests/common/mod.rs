//! Shared test oracles, written independently of the library's linear
//! algebra path: plain-`Vec` Gaussian elimination for the pseudoinverse,
//! Jacobi iteration for singular values, and finite differences for the
//! energy gradient. These deliberately avoid nalgebra so that agreement with
//! the library is a genuine cross-check.

#![allow(dead_code)]

use genrec::{ActivationVector, ExpectationMatrix, InputVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Storage-orientation copy of a matrix: `rows[i][j]` with N feature rows
/// and H class columns.
pub fn matrix_rows(m: &ExpectationMatrix) -> Vec<Vec<f64>> {
    (0..m.n_features())
        .map(|i| (0..m.n_classes()).map(|j| m.entries()[(i, j)]).collect())
        .collect()
}

/// Solve `A X = B` by Gaussian elimination with partial pivoting.
/// `a` is n×n, `b` is n×m; returns the n×m solution, or `None` if a pivot
/// collapses to zero.
pub fn gaussian_solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let m = b[0].len();
    for col in 0..n {
        let pivot_row =
            (col..n).max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))?;
        if a[pivot_row][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            for k in 0..m {
                b[row][k] -= factor * b[col][k];
            }
        }
    }
    Some(
        (0..n)
            .map(|i| (0..m).map(|k| b[i][k] / a[i][i]).collect())
            .collect(),
    )
}

/// Pseudoinverse oracle: solve the normal equations `(MᵀM) W = Mᵀ` column by
/// column via Gaussian elimination. Input is the N×H features-by-classes
/// matrix; output is H×N.
pub fn pseudoinverse_oracle(rows: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = rows.len();
    let h = rows[0].len();
    let mut gram = vec![vec![0.0; h]; h];
    for i in 0..h {
        for j in 0..h {
            gram[i][j] = (0..n).map(|k| rows[k][i] * rows[k][j]).sum();
        }
    }
    let mut rhs = vec![vec![0.0; n]; h];
    for i in 0..h {
        for k in 0..n {
            rhs[i][k] = rows[k][i];
        }
    }
    gaussian_solve(gram, rhs)
}

/// Singular values via cyclic Jacobi iteration on the Gram matrix `MᵀM`:
/// rotate away off-diagonal mass until it vanishes, then take square roots
/// of the diagonal. Returned sorted descending.
pub fn singular_values_oracle(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let h = rows[0].len();
    let mut a = vec![vec![0.0; h]; h];
    for i in 0..h {
        for j in 0..h {
            a[i][j] = (0..n).map(|k| rows[k][i] * rows[k][j]).sum();
        }
    }
    let scale: f64 = a
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..h {
            for q in (p + 1)..h {
                off = off.max(a[p][q].abs());
            }
        }
        if off < 1e-14 * scale {
            break;
        }
        for p in 0..h {
            for q in (p + 1)..h {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                // Rotation angle that zeroes a[p][q]: tan(2θ) = 2a_pq/(a_pp−a_qq).
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..h {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..h {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
            }
        }
    }
    let mut sigmas: Vec<f64> = (0..h).map(|i| a[i][i].max(0.0).sqrt()).collect();
    sigmas.sort_by(|x, y| y.total_cmp(x));
    sigmas
}

/// Reconstruction energy computed with plain loops.
pub fn energy_oracle(rows: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    rows.iter()
        .zip(x)
        .map(|(row, &xi)| {
            let recon: f64 = row.iter().zip(y).map(|(&m, &yi)| m * yi).sum();
            (xi - recon) * (xi - recon)
        })
        .sum()
}

/// Central-difference gradient of the energy with respect to the activations.
pub fn numeric_energy_gradient(rows: &[Vec<f64>], x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; y.len()];
    for i in 0..y.len() {
        let h = 1e-5 * y[i].abs().max(1.0);
        let mut plus = y.to_vec();
        plus[i] += h;
        let mut minus = y.to_vec();
        minus[i] -= h;
        grad[i] = (energy_oracle(rows, x, &plus) - energy_oracle(rows, x, &minus)) / (2.0 * h);
    }
    grad
}

/// Random full-column-rank instance: an N×H matrix with entries in [0, 1]
/// and at least one strictly positive entry per column, plus an activation
/// target with entries in [0.1, 1] and the input it generates.
///
/// Instances are resampled until κ(M) ≤ 40: the fixed-point equivalence
/// checks presume a well-determined fixed point, and near-rank-deficient
/// draws (which cluster where N ≈ H) let the per-step stop rule fire while
/// the slow eigenmode is still far from converged.
pub struct RandomInstance {
    pub matrix: ExpectationMatrix,
    pub target: Vec<f64>,
    pub input: InputVector,
}

pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_features: usize,
    max_classes: usize,
) -> RandomInstance {
    loop {
        let h = rng.gen_range(2..=max_classes);
        let n = rng.gen_range(h.max(3)..=max_features.max(h.max(3)));
        let mut entries = nalgebra::DMatrix::<f64>::zeros(n, h);
        for j in 0..h {
            for i in 0..n {
                entries[(i, j)] = rng.gen_range(0.0..1.0);
            }
            // Guarantee the column has support.
            let peak = rng.gen_range(0..n);
            entries[(peak, j)] = entries[(peak, j)].max(0.5);
        }
        let feature_labels = (0..n).map(|i| format!("f{i}")).collect();
        let class_labels = (0..h).map(|j| format!("c{j}")).collect();
        let matrix = match ExpectationMatrix::new(entries, feature_labels, class_labels) {
            Ok(m) => m,
            Err(_) => continue,
        };
        match genrec::condition_number(&matrix) {
            genrec::ConditionNumber::Finite(kappa) if kappa <= 40.0 => {}
            _ => continue,
        }
        let target: Vec<f64> = (0..h).map(|_| rng.gen_range(0.1..=1.0)).collect();
        let generated = matrix.entries() * nalgebra::DVector::from_vec(target.clone());
        let input = match InputVector::new(generated.iter().copied().collect()) {
            Ok(x) => x,
            Err(_) => continue,
        };
        return RandomInstance {
            matrix,
            target,
            input,
        };
    }
}

/// Random activation state with entries in [-1, 2] (least-squares states may
/// go negative mid-flight).
pub fn random_activation(rng: &mut ChaCha8Rng, h: usize) -> ActivationVector {
    ActivationVector::new((0..h).map(|_| rng.gen_range(-1.0..2.0)).collect()).unwrap()
}

/// The worked two-class example used throughout the suite.
pub fn bike_unicycle() -> ExpectationMatrix {
    ExpectationMatrix::from_class_rows(
        vec!["bicycle".into(), "unicycle".into()],
        vec![
            "wheels".into(),
            "horizontal".into(),
            "handlebars".into(),
            "seat".into(),
        ],
        &[vec![2.0, 1.0, 1.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]],
    )
    .unwrap()
}

pub fn input(values: &[f64]) -> InputVector {
    InputVector::from_slice(values).unwrap()
}

pub fn assert_close(got: &[f64], want: &[f64], tol: f64, what: &str) {
    assert_eq!(got.len(), want.len(), "{what}: length mismatch");
    for (k, (g, w)) in got.iter().zip(want).enumerate() {
        assert!(
            (g - w).abs() <= tol,
            "{what}: component {k} differs: got {g}, want {w} (tol {tol})"
        );
    }
}
