//! k-fold cross-validation and grid search over kernel bandwidths and `lambda`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{KrrModel, PreparedKrr};
use crate::error::{input, Error, Result};
use crate::fredholm::{clip_bound_of, project, Dataset, FredholmModel, PreparedFredholm};
use crate::kernel::KernelSpec;

/// `{2^-5, 2^-4, ..., 2^5}`
pub fn default_sigma_grid() -> Vec<f64> {
    (-5..=5).map(|k| 2f64.powi(k)).collect()
}

/// `{1e-5, 1e-4, ..., 1e5}`, each value correctly rounded from its decimal literal.
pub fn default_lambda_grid() -> Vec<f64> {
    (-5..=5)
        .map(|k| format!("1e{k}").parse().unwrap())
        .collect()
}

/// Regression methods compared by the benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// linear outer kernel, gaussian inner kernel
    #[serde(rename = "LFK1")]
    Lfk1,
    /// gaussian outer kernel, linear inner kernel
    #[serde(rename = "LFK2")]
    Lfk2,
    /// gaussian outer and inner kernels
    #[serde(rename = "LFK3")]
    Lfk3,
    /// kernel ridge regression with a gaussian kernel
    #[serde(rename = "KRR")]
    Krr,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Lfk1, Method::Lfk2, Method::Lfk3, Method::Krr];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lfk1 => "LFK1",
            Method::Lfk2 => "LFK2",
            Method::Lfk3 => "LFK3",
            Method::Krr => "KRR",
        }
    }

    /// Bandwidth candidates for this method over `sigma_grid`.
    fn sigma_choices(self, sigma_grid: &[f64], independent: bool) -> Vec<SigmaChoice> {
        let one = |s: f64, inner: bool| SigmaChoice {
            inner: inner.then_some(s),
            outer: (!inner).then_some(s),
        };
        match self {
            Method::Lfk1 | Method::Krr => sigma_grid.iter().map(|&s| one(s, true)).collect(),
            Method::Lfk2 => sigma_grid.iter().map(|&s| one(s, false)).collect(),
            Method::Lfk3 if independent => sigma_grid
                .iter()
                .flat_map(|&si| {
                    sigma_grid.iter().map(move |&so| SigmaChoice {
                        inner: Some(si),
                        outer: Some(so),
                    })
                })
                .collect(),
            Method::Lfk3 => sigma_grid
                .iter()
                .map(|&s| SigmaChoice {
                    inner: Some(s),
                    outer: Some(s),
                })
                .collect(),
        }
    }

    /// Builds the lambda-independent part of the model for one bandwidth choice.
    pub fn prepare(self, data: &Dataset, sigma: SigmaChoice) -> Result<PreparedMethod> {
        let gauss = |s: Option<f64>| {
            KernelSpec::gaussian(
                s.ok_or_else(|| Error::Input(format!("{self} needs a bandwidth")))?,
            )
        };
        Ok(match self {
            Method::Lfk1 => PreparedMethod::Fredholm(PreparedFredholm::new(
                data,
                gauss(sigma.inner)?,
                KernelSpec::Linear,
            )?),
            Method::Lfk2 => PreparedMethod::Fredholm(PreparedFredholm::new(
                data,
                KernelSpec::Linear,
                gauss(sigma.outer)?,
            )?),
            Method::Lfk3 => PreparedMethod::Fredholm(PreparedFredholm::new(
                data,
                gauss(sigma.inner)?,
                gauss(sigma.outer)?,
            )?),
            Method::Krr => PreparedMethod::Krr(PreparedKrr::new(data, gauss(sigma.inner)?)?),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LFK1" => Ok(Method::Lfk1),
            "LFK2" => Ok(Method::Lfk2),
            "LFK3" => Ok(Method::Lfk3),
            "KRR" => Ok(Method::Krr),
            other => input(format!("unknown method {other:?}")),
        }
    }
}

/// Bandwidths of the gaussian kernels in play; `None` where the kernel is linear.
/// For KRR the single kernel is reported as `inner`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaChoice {
    pub inner: Option<f64>,
    pub outer: Option<f64>,
}

pub enum PreparedMethod {
    Fredholm(PreparedFredholm),
    Krr(PreparedKrr),
}

impl PreparedMethod {
    pub fn fit(&self, lambda: f64) -> Result<FittedMethod> {
        Ok(match self {
            PreparedMethod::Fredholm(p) => FittedMethod::Fredholm(p.fit(lambda)?),
            PreparedMethod::Krr(p) => FittedMethod::Krr(p.fit(lambda)?),
        })
    }
}

pub enum FittedMethod {
    Fredholm(FredholmModel),
    Krr(KrrModel),
}

impl FittedMethod {
    pub fn predict(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        match self {
            FittedMethod::Fredholm(m) => m.predict(points),
            FittedMethod::Krr(m) => m.predict(points),
        }
    }

    pub fn clip_bound(&self) -> f64 {
        match self {
            FittedMethod::Fredholm(m) => m.clip_bound(),
            FittedMethod::Krr(m) => m.clip_bound(),
        }
    }
}

fn default_folds() -> usize {
    4
}

/// Candidate grids and fold setup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchConfig {
    #[serde(default = "default_sigma_grid")]
    pub sigma_grid: Vec<f64>,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Search inner and outer bandwidths of LFK3 independently instead of tying them.
    #[serde(default)]
    pub independent_sigmas: bool,
}

impl Default for GridSearchConfig {
    fn default() -> Self {
        GridSearchConfig {
            sigma_grid: default_sigma_grid(),
            lambda_grid: default_lambda_grid(),
            folds: default_folds(),
            seed: 0,
            independent_sigmas: false,
        }
    }
}

impl GridSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |g: &[f64]| !g.is_empty() && g.iter().all(|v| v.is_finite() && *v > 0.0);
        if !positive(&self.sigma_grid) {
            return Err(Error::Config(
                "sigma_grid must be non-empty with finite positive values".into(),
            ));
        }
        if let Some(bad) = self
            .sigma_grid
            .iter()
            .find(|&&s| KernelSpec::gaussian(s).is_err())
        {
            return Err(Error::Config(format!(
                "sigma_grid value {bad} is not a usable bandwidth"
            )));
        }
        if !positive(&self.lambda_grid) {
            return Err(Error::Config(
                "lambda_grid must be non-empty with finite positive values".into(),
            ));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "folds must be >= 2, got {}",
                self.folds
            )));
        }
        Ok(())
    }
}

/// Cross-validated error of one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    pub sigma: SigmaChoice,
    pub lambda: f64,
    /// Mean over folds of the validation MSE after clipping to the fold's label bound.
    pub cv_mse: f64,
    pub cv_mse_unclipped: f64,
    /// Set when a fold failed; `cv_mse` is then `+inf`.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_sigma_inner: Option<f64>,
    pub best_sigma_outer: Option<f64>,
    pub best_lambda: f64,
    pub best_cv_mse: f64,
    /// Grid points in definition order: bandwidth-major, `lambda`-minor.
    pub table: Vec<CvEntry>,
}

impl CvResult {
    pub fn best_sigma(&self) -> SigmaChoice {
        SigmaChoice {
            inner: self.best_sigma_inner,
            outer: self.best_sigma_outer,
        }
    }
}

/// Seeded shuffle of `0..n` cut into `k` contiguous folds; the first `n % k`
/// folds get one extra index.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return input(format!(
            "fold count must satisfy 2 <= k <= n, got k={k}, n={n}"
        ));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

struct FoldSplit {
    train: Dataset,
    val_x: Vec<Vec<f64>>,
    val_y: Vec<f64>,
}

/// Grid-search cross-validation of `method` on the labeled part of `data`.
///
/// Each fold trains on the other folds with all unlabeled inputs kept as
/// anchors. Validation predictions are clipped to the training fold's label
/// bound before scoring. The minimum clipped CV-MSE wins; exact ties go to
/// the larger `lambda`, then the larger bandwidth.
pub fn cross_validate(
    data: &Dataset,
    method: Method,
    config: &GridSearchConfig,
) -> Result<CvResult> {
    config.validate()?;
    let n = data.labeled_count();
    if n < config.folds {
        return input(format!(
            "{n} labeled samples cannot fill {} folds",
            config.folds
        ));
    }
    let folds = kfold_indices(n, config.folds, config.seed)?;
    let splits: Vec<FoldSplit> = folds
        .iter()
        .enumerate()
        .map(|(f, val)| {
            let train_idx: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            FoldSplit {
                train: data.select_labeled(&train_idx),
                val_x: val.iter().map(|&i| data.labeled_x()[i].clone()).collect(),
                val_y: val.iter().map(|&i| data.labeled_y()[i]).collect(),
            }
        })
        .collect();

    let sigmas = method.sigma_choices(&config.sigma_grid, config.independent_sigmas);
    let lambdas = &config.lambda_grid;

    // One task per (bandwidth, fold); each yields per-lambda (clipped, unclipped) errors.
    let tasks: Vec<(usize, usize)> = (0..sigmas.len())
        .flat_map(|s| (0..splits.len()).map(move |f| (s, f)))
        .collect();
    let scores: Vec<Vec<Result<(f64, f64)>>> = tasks
        .par_iter()
        .map(|&(s, f)| score_fold(method, sigmas[s], &splits[f], lambdas))
        .collect();

    let mut table = Vec::with_capacity(sigmas.len() * lambdas.len());
    for (s, sigma) in sigmas.iter().enumerate() {
        for (li, &lambda) in lambdas.iter().enumerate() {
            let mut clipped = 0.0;
            let mut unclipped = 0.0;
            let mut error = None;
            for f in 0..splits.len() {
                match &scores[s * splits.len() + f][li] {
                    Ok((c, u)) => {
                        clipped += c;
                        unclipped += u;
                    }
                    Err(e) => {
                        error.get_or_insert_with(|| format!("fold {f}: {e}"));
                    }
                }
            }
            let k = splits.len() as f64;
            let (cv_mse, cv_mse_unclipped) = if error.is_some() {
                (f64::INFINITY, f64::INFINITY)
            } else {
                (clipped / k, unclipped / k)
            };
            table.push(CvEntry {
                sigma: *sigma,
                lambda,
                cv_mse,
                cv_mse_unclipped,
                error,
            });
        }
    }

    let best = table
        .iter()
        .filter(|e| e.cv_mse.is_finite())
        .min_by(|a, b| compare_entries(a, b))
        .ok_or_else(|| Error::Numerical {
            message: format!("every grid point failed during cross-validation of {method}"),
            jitter: crate::linalg::JITTER_LEVELS.to_vec(),
        })?;
    Ok(CvResult {
        best_sigma_inner: best.sigma.inner,
        best_sigma_outer: best.sigma.outer,
        best_lambda: best.lambda,
        best_cv_mse: best.cv_mse,
        table: table.clone(),
    })
}

/// Lower error first; on exact ties prefer larger lambda, then larger bandwidths.
fn compare_entries(a: &CvEntry, b: &CvEntry) -> Ordering {
    let key = |s: Option<f64>| s.unwrap_or(0.0);
    a.cv_mse
        .total_cmp(&b.cv_mse)
        .then(b.lambda.total_cmp(&a.lambda))
        .then(key(b.sigma.inner).total_cmp(&key(a.sigma.inner)))
        .then(key(b.sigma.outer).total_cmp(&key(a.sigma.outer)))
}

fn score_fold(
    method: Method,
    sigma: SigmaChoice,
    split: &FoldSplit,
    lambdas: &[f64],
) -> Vec<Result<(f64, f64)>> {
    let prepared = match method.prepare(&split.train, sigma) {
        Ok(p) => p,
        Err(e) => {
            let msg = e.to_string();
            return lambdas
                .iter()
                .map(|_| Err(Error::Input(msg.clone())))
                .collect();
        }
    };
    let bound = clip_bound_of(split.train.labeled_y());
    lambdas
        .iter()
        .map(|&lambda| {
            let pred = prepared.fit(lambda)?.predict(&split.val_x)?;
            let unclipped = mse(&pred, &split.val_y)?;
            let clipped = mse(&project(&pred, bound)?, &split.val_y)?;
            if !clipped.is_finite() {
                return Err(Error::Numerical {
                    message: "non-finite validation error".into(),
                    jitter: Vec::new(),
                });
            }
            Ok((clipped, unclipped))
        })
        .collect()
}

/// Mean squared error.
pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return input(format!(
            "length mismatch: {} predictions, {} targets",
            pred.len(),
            truth.len()
        ));
    }
    if pred.is_empty() {
        return input("mse of empty vectors");
    }
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / pred.len() as f64)
}

/// Arithmetic mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return input("mean_std of empty input");
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}
