//! Least-squares regression with the Fredholm kernel.
//!
//! Given labeled inputs `x_1..x_l`, unlabeled inputs `x_{l+1}..x_{l+u}`, an
//! inner kernel `K` and an outer kernel `w`, the Fredholm kernel is
//!
//! ```text
//! Khat(x, x') = 1/(l+u)^2 * sum_{i,j} w(x, x_i) K(x_i, x_j) w(x', x_j)
//! ```
//!
//! where the sums run over all `l + u` anchors. The fitted predictor is
//! `sum_s Khat(x, x_s) alpha_s` with `alpha = (Khat_ll + lambda I)^-1 y`.
//!
//! `alpha` minimizes the *sum* of squared residuals plus `lambda |f|_K^2`.
//! In terms of the mean-squared empirical risk this is a regularization
//! parameter of `lambda / l`; cross-validation over a `lambda` grid absorbs
//! the difference.

use nalgebra::{DMatrix, DVector};

use crate::error::{input, Result};
use crate::kernel::{check_points, kernel_matrix_unchecked, KernelSpec};
use crate::linalg::{solve_spd, SpdSystem};

/// Labeled samples plus optional unlabeled inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    labeled_x: Vec<Vec<f64>>,
    labeled_y: Vec<f64>,
    unlabeled_x: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(
        labeled_x: Vec<Vec<f64>>,
        labeled_y: Vec<f64>,
        unlabeled_x: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if labeled_x.is_empty() {
            return input("dataset needs at least one labeled sample");
        }
        if labeled_x.len() != labeled_y.len() {
            return input(format!(
                "{} labeled inputs but {} labels",
                labeled_x.len(),
                labeled_y.len()
            ));
        }
        let d = check_points(&labeled_x, None)?;
        check_points(&unlabeled_x, Some(d))?;
        if labeled_y.iter().any(|y| !y.is_finite()) {
            return input("non-finite label");
        }
        Ok(Dataset {
            labeled_x,
            labeled_y,
            unlabeled_x,
        })
    }

    /// Univariate convenience constructor.
    pub fn from_scalars(x: &[f64], y: &[f64], unlabeled: &[f64]) -> Result<Self> {
        Dataset::new(
            x.iter().map(|&v| vec![v]).collect(),
            y.to_vec(),
            unlabeled.iter().map(|&v| vec![v]).collect(),
        )
    }

    pub fn labeled_x(&self) -> &[Vec<f64>] {
        &self.labeled_x
    }

    pub fn labeled_y(&self) -> &[f64] {
        &self.labeled_y
    }

    pub fn unlabeled_x(&self) -> &[Vec<f64>] {
        &self.unlabeled_x
    }

    pub fn labeled_count(&self) -> usize {
        self.labeled_x.len()
    }

    pub fn dim(&self) -> usize {
        self.labeled_x[0].len()
    }

    /// Labeled inputs followed by unlabeled inputs.
    pub fn anchors(&self) -> Vec<Vec<f64>> {
        self.labeled_x
            .iter()
            .chain(&self.unlabeled_x)
            .cloned()
            .collect()
    }

    /// `max_i |y_i|`, or 1 when every label is zero.
    pub fn clip_bound(&self) -> f64 {
        clip_bound_of(&self.labeled_y)
    }

    /// Subset of labeled samples at `indices`; unlabeled inputs are kept.
    pub fn select_labeled(&self, indices: &[usize]) -> Dataset {
        Dataset {
            labeled_x: indices.iter().map(|&i| self.labeled_x[i].clone()).collect(),
            labeled_y: indices.iter().map(|&i| self.labeled_y[i]).collect(),
            unlabeled_x: self.unlabeled_x.clone(),
        }
    }
}

pub(crate) fn clip_bound_of(labels: &[f64]) -> f64 {
    let m = labels.iter().fold(0.0f64, |acc, y| acc.max(y.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// The Fredholm kernel matrix between `rows` and `cols` over `anchors`.
///
/// Computed as `W_r G W_c^T / n^2` with `W_r = w(rows, anchors)`,
/// `W_c = w(cols, anchors)`, `G = K(anchors, anchors)` and `n = |anchors|`.
/// When `rows` and `cols` are the same set the result is symmetrized.
pub fn fredholm_kernel_matrix(
    inner: &KernelSpec,
    outer: &KernelSpec,
    anchors: &[Vec<f64>],
    rows: &[Vec<f64>],
    cols: &[Vec<f64>],
) -> Result<DMatrix<f64>> {
    inner.validate()?;
    outer.validate()?;
    if anchors.is_empty() {
        return input("fredholm kernel needs at least one anchor");
    }
    if rows.is_empty() || cols.is_empty() {
        return input("fredholm kernel needs non-empty rows and cols");
    }
    let d = check_points(anchors, None)?;
    check_points(rows, Some(d))?;
    check_points(cols, Some(d))?;

    let gram = kernel_matrix_unchecked(inner, anchors, anchors);
    let w_rows = kernel_matrix_unchecked(outer, rows, anchors);
    let scale = 1.0 / (anchors.len() as f64).powi(2);
    let left = &w_rows * &gram;
    if rows == cols {
        let mut m = &left * w_rows.transpose() * scale;
        symmetrize(&mut m);
        Ok(m)
    } else {
        let w_cols = kernel_matrix_unchecked(outer, cols, anchors);
        Ok(&left * w_cols.transpose() * scale)
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Kernel quantities that depend on the data and kernels but not on `lambda`.
///
/// Building this once and calling [`PreparedFredholm::fit`] for every
/// `lambda` on a grid avoids recomputing the `O(l (l+u)^2)` kernel product.
#[derive(Clone, Debug)]
pub struct PreparedFredholm {
    inner: KernelSpec,
    outer: KernelSpec,
    anchors: Vec<Vec<f64>>,
    labeled_count: usize,
    labels: DVector<f64>,
    clip_bound: f64,
    /// `G W_l^T / n^2`, shape `(l+u) x l`
    anchor_map: DMatrix<f64>,
    /// `Khat` over the labeled inputs, `l x l`
    train_gram: DMatrix<f64>,
}

impl PreparedFredholm {
    pub fn new(data: &Dataset, inner: KernelSpec, outer: KernelSpec) -> Result<Self> {
        inner.validate()?;
        outer.validate()?;
        let anchors = data.anchors();
        let n = anchors.len() as f64;
        let gram = kernel_matrix_unchecked(&inner, &anchors, &anchors);
        let w_lab = kernel_matrix_unchecked(&outer, data.labeled_x(), &anchors);
        let anchor_map = &gram * w_lab.transpose() * (1.0 / (n * n));
        let mut train_gram = &w_lab * &anchor_map;
        symmetrize(&mut train_gram);
        Ok(PreparedFredholm {
            inner,
            outer,
            anchors,
            labeled_count: data.labeled_count(),
            labels: DVector::from_column_slice(data.labeled_y()),
            clip_bound: data.clip_bound(),
            anchor_map,
            train_gram,
        })
    }

    pub fn train_gram(&self) -> &DMatrix<f64> {
        &self.train_gram
    }

    pub fn fit(&self, lambda: f64) -> Result<FredholmModel> {
        check_lambda(lambda)?;
        let l = self.labeled_count;
        let system = SpdSystem::new(
            &self.train_gram + DMatrix::identity(l, l) * lambda,
            self.labels.clone(),
        )?;
        let alpha = solve_spd(&system)?;
        let anchor_weights = &self.anchor_map * &alpha;
        Ok(FredholmModel {
            inner: self.inner,
            outer: self.outer,
            lambda,
            anchors: self.anchors.clone(),
            labeled_count: l,
            alpha,
            anchor_weights,
            clip_bound: self.clip_bound,
        })
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        input(format!("lambda must be finite and > 0, got {lambda}"))
    }
}

/// A fitted Fredholm-kernel regressor. Immutable once built.
#[derive(Clone, Debug)]
pub struct FredholmModel {
    inner: KernelSpec,
    outer: KernelSpec,
    lambda: f64,
    anchors: Vec<Vec<f64>>,
    labeled_count: usize,
    alpha: DVector<f64>,
    /// `G W_l^T alpha / n^2`: the predictor is `w(x, anchors) . anchor_weights`.
    anchor_weights: DVector<f64>,
    clip_bound: f64,
}

/// Fits the Fredholm-kernel regressor on `data`.
pub fn fit(
    data: &Dataset,
    inner: KernelSpec,
    outer: KernelSpec,
    lambda: f64,
) -> Result<FredholmModel> {
    check_lambda(lambda)?;
    PreparedFredholm::new(data, inner, outer)?.fit(lambda)
}

impl FredholmModel {
    pub fn inner(&self) -> KernelSpec {
        self.inner
    }

    pub fn outer(&self) -> KernelSpec {
        self.outer
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn anchors(&self) -> &[Vec<f64>] {
        &self.anchors
    }

    pub fn labeled_x(&self) -> &[Vec<f64>] {
        &self.anchors[..self.labeled_count]
    }

    pub fn labeled_count(&self) -> usize {
        self.labeled_count
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn clip_bound(&self) -> f64 {
        self.clip_bound
    }

    /// Evaluates `sum_s Khat(x, x_s) alpha_s` at each point, unclipped.
    pub fn predict(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        if points.is_empty() {
            return Ok(Vec::new());
        }
        check_points(points, Some(self.anchors[0].len()))?;
        let w = kernel_matrix_unchecked(&self.outer, points, &self.anchors);
        Ok((w * &self.anchor_weights).iter().copied().collect())
    }

    /// `|(Khat + lambda I) alpha - y|_inf` for the given training labels.
    pub fn coefficient_residual(&self, labels: &[f64]) -> Result<f64> {
        let lab = self.labeled_x();
        let k = fredholm_kernel_matrix(&self.inner, &self.outer, &self.anchors, lab, lab)?;
        let m = k + DMatrix::identity(self.labeled_count, self.labeled_count) * self.lambda;
        Ok((m * &self.alpha - DVector::from_column_slice(labels)).amax())
    }
}

/// Clips every value into `[-bound, bound]`.
pub fn project(values: &[f64], bound: f64) -> Result<Vec<f64>> {
    if bound.is_nan() || bound <= 0.0 {
        return input(format!("projection bound must be > 0, got {bound}"));
    }
    Ok(values.iter().map(|v| v.clamp(-bound, bound)).collect())
}
