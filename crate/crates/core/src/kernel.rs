//! Kernel functions and kernel-matrix construction.
//!
//! The same [`KernelSpec`] is used for the inner kernel `K` (which defines the
//! RKHS) and the outer kernel `w` (which defines the empirical integral
//! operator). The gaussian kernel is `exp(-|x - y|^2 / sigma^2)`; note the
//! absence of the factor 2 found in the more common `2 sigma^2` convention.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Declarative description of a kernel function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `exp(-|x - y|^2 / sigma^2)`
    Gaussian { sigma: f64 },
    /// `x^T y`
    Linear,
}

impl KernelSpec {
    /// Gaussian kernel with a validated bandwidth.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let spec = KernelSpec::Gaussian { sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn linear() -> Self {
        KernelSpec::Linear
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            // sigma^2 must stay a normal float or the exponent degenerates to NaN or 0.
            KernelSpec::Gaussian { sigma } if !(sigma > 0.0 && (sigma * sigma).is_normal()) => {
                input(format!(
                    "gaussian bandwidth must be > 0 with a finite, normal square, got {sigma}"
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, KernelSpec::Gaussian { .. })
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Gaussian { sigma } => Some(sigma),
            KernelSpec::Linear => None,
        }
    }

    /// Evaluates the kernel on pre-validated points of equal dimension.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma } => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq / (sigma * sigma)).exp()
            }
            KernelSpec::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        }
    }
}

/// Evaluates `spec` at the pair `(x, y)`.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.validate()?;
    check_point(x, None)?;
    check_point(y, Some(x.len()))?;
    Ok(spec.eval_unchecked(x, y))
}

/// Builds the `|rows| x |cols|` matrix of kernel values.
///
/// Entry `(i, j)` is exactly `eval_kernel(spec, rows[i], cols[j])`, so for
/// `rows == cols` the result is bit-for-bit symmetric.
pub fn kernel_matrix(
    spec: &KernelSpec,
    rows: &[Vec<f64>],
    cols: &[Vec<f64>],
) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if rows.is_empty() || cols.is_empty() {
        return input("kernel matrix needs non-empty row and column point sets");
    }
    let dim = check_points(rows, None)?;
    check_points(cols, Some(dim))?;
    Ok(kernel_matrix_unchecked(spec, rows, cols))
}

pub(crate) fn kernel_matrix_unchecked(
    spec: &KernelSpec,
    rows: &[Vec<f64>],
    cols: &[Vec<f64>],
) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        spec.eval_unchecked(&rows[i], &cols[j])
    })
}

/// Largest kernel value over all pairs of `points`.
///
/// This is the empirical counterpart of the sup-bounds of `K` and `w`; it is
/// only used for diagnostics.
pub fn empirical_sup(spec: &KernelSpec, points: &[Vec<f64>]) -> Result<f64> {
    let m = kernel_matrix(spec, points, points)?;
    Ok(m.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

fn check_point(p: &[f64], dim: Option<usize>) -> Result<()> {
    if p.is_empty() {
        return input("points must have dimension >= 1");
    }
    if let Some(d) = dim {
        if p.len() != d {
            return input(format!("dimension mismatch: expected {d}, got {}", p.len()));
        }
    }
    if p.iter().any(|v| !v.is_finite()) {
        return input("non-finite coordinate");
    }
    Ok(())
}

/// Validates a point set and returns its common dimension.
pub(crate) fn check_points(points: &[Vec<f64>], dim: Option<usize>) -> Result<usize> {
    let d = match (dim, points.first()) {
        (Some(d), _) => d,
        (None, Some(p)) => p.len(),
        (None, None) => return Ok(0),
    };
    for p in points {
        check_point(p, Some(d))?;
    }
    Ok(d)
}
