//! Dense symmetric positive-definite solves.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{input, Error, Result};

/// Relative jitter levels tried, scaled by the mean diagonal, when the plain
/// factorization fails.
pub const JITTER_LEVELS: [f64; 3] = [1e-12, 1e-10, 1e-8];

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_REFINEMENT_STEPS: usize = 3;

/// A linear system `matrix * x = rhs` with a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SpdSystem {
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl SpdSystem {
    pub fn new(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 {
            return input("system must have n >= 1");
        }
        if matrix.ncols() != n {
            return input(format!(
                "matrix must be square, got {}x{}",
                n,
                matrix.ncols()
            ));
        }
        if rhs.len() != n {
            return input(format!(
                "rhs length {} does not match matrix order {n}",
                rhs.len()
            ));
        }
        if matrix.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
            return input("system contains non-finite entries");
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        for j in 0..n {
            for i in (j + 1)..n {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return input(format!("matrix is not symmetric at ({i}, {j})"));
                }
            }
        }
        Ok(SpdSystem { matrix, rhs })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    /// `|matrix * x - rhs|_inf`
    pub fn residual_inf(&self, x: &DVector<f64>) -> f64 {
        (&self.matrix * x - &self.rhs).amax()
    }
}

/// Solves a symmetric positive-definite system by Cholesky factorization.
///
/// If the factorization breaks down, `delta * mean_diag * I` is added for each
/// `delta` in [`JITTER_LEVELS`] in turn. A few steps of iterative refinement
/// against the original matrix tighten the residual on ill-conditioned input.
pub fn solve_spd(system: &SpdSystem) -> Result<DVector<f64>> {
    let chol = factor_with_jitter(&system.matrix)?;
    let mut x = chol.solve(&system.rhs);
    let tol = 1e-8 * system.rhs.amax().max(1.0);
    for _ in 0..MAX_REFINEMENT_STEPS {
        let r = &system.rhs - &system.matrix * &x;
        if r.amax() <= tol * 1e-2 {
            break;
        }
        x += chol.solve(&r);
    }
    Ok(x)
}

fn factor_with_jitter(matrix: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(matrix.clone()) {
        return Ok(c);
    }
    let n = matrix.nrows();
    let mean_diag = matrix.diagonal().sum() / n as f64;
    let scale = if mean_diag > 0.0 { mean_diag } else { 1.0 };
    let mut tried = Vec::with_capacity(JITTER_LEVELS.len());
    for delta in JITTER_LEVELS {
        let shift = delta * scale;
        tried.push(shift);
        let mut jittered = matrix.clone();
        for i in 0..n {
            jittered[(i, i)] += shift;
        }
        if let Some(c) = Cholesky::new(jittered) {
            return Ok(c);
        }
    }
    Err(Error::Numerical {
        message: format!("cholesky factorization of {n}x{n} matrix failed"),
        jitter: tried,
    })
}
