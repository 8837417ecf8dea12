//! Kernel ridge regression in the RKHS of a single kernel.
//!
//! Uses the same `lambda` convention as [`crate::fredholm`]:
//! `alpha = (G + lambda I)^-1 y`, the minimizer of the sum of squared
//! residuals plus `lambda |f|_K^2`. Unlabeled inputs are ignored.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::fredholm::{check_lambda, Dataset};
use crate::kernel::{check_points, kernel_matrix_unchecked, KernelSpec};
use crate::linalg::{solve_spd, SpdSystem};

/// Gram matrix and labels, reusable across a `lambda` grid.
#[derive(Clone, Debug)]
pub struct PreparedKrr {
    kernel: KernelSpec,
    train_x: Vec<Vec<f64>>,
    labels: DVector<f64>,
    gram: DMatrix<f64>,
    clip_bound: f64,
}

impl PreparedKrr {
    pub fn new(data: &Dataset, kernel: KernelSpec) -> Result<Self> {
        kernel.validate()?;
        let train_x = data.labeled_x().to_vec();
        let gram = kernel_matrix_unchecked(&kernel, &train_x, &train_x);
        Ok(PreparedKrr {
            kernel,
            train_x,
            labels: DVector::from_column_slice(data.labeled_y()),
            gram,
            clip_bound: data.clip_bound(),
        })
    }

    pub fn fit(&self, lambda: f64) -> Result<KrrModel> {
        check_lambda(lambda)?;
        let n = self.train_x.len();
        let system = SpdSystem::new(
            &self.gram + DMatrix::identity(n, n) * lambda,
            self.labels.clone(),
        )?;
        let alpha = solve_spd(&system)?;
        Ok(KrrModel {
            kernel: self.kernel,
            lambda,
            train_x: self.train_x.clone(),
            alpha,
            clip_bound: self.clip_bound,
        })
    }
}

#[derive(Clone, Debug)]
pub struct KrrModel {
    kernel: KernelSpec,
    lambda: f64,
    train_x: Vec<Vec<f64>>,
    alpha: DVector<f64>,
    clip_bound: f64,
}

pub fn krr_fit(data: &Dataset, kernel: KernelSpec, lambda: f64) -> Result<KrrModel> {
    check_lambda(lambda)?;
    PreparedKrr::new(data, kernel)?.fit(lambda)
}

impl KrrModel {
    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn train_x(&self) -> &[Vec<f64>] {
        &self.train_x
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn clip_bound(&self) -> f64 {
        self.clip_bound
    }

    pub fn predict(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        if points.is_empty() {
            return Ok(Vec::new());
        }
        check_points(points, Some(self.train_x[0].len()))?;
        let k = kernel_matrix_unchecked(&self.kernel, points, &self.train_x);
        Ok((k * &self.alpha).iter().copied().collect())
    }
}

pub fn krr_predict(model: &KrrModel, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    model.predict(points)
}
