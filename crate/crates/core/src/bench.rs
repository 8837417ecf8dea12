//! Benchmark orchestration: repeated train/test experiments on the synthetic
//! targets with cross-validated hyperparameters.
//!
//! Every repetition of a `(function, train_size)` cell draws its own pool
//! from a seed produced by [`repetition_seed`]. All methods in the cell see
//! the same pool and split, so their errors are paired.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{generate_pool, split_pool, NoiseSpec, TargetFunction};
use crate::error::{Error, Result};
use crate::fredholm::project;
use crate::model_selection::{cross_validate, mean_std, mse, GridSearchConfig, Method};

/// Column header of the benchmark CSV report.
pub const REPORT_HEADER: &str =
    "function,method,train_size,mse_mean,mse_std,best_sigma,best_lambda,wall_time_ms";
/// Column header of the learning-curve CSV.
pub const CURVE_HEADER: &str = "function,method,train_size,mse_mean,mse_std";

fn default_functions() -> Vec<TargetFunction> {
    TargetFunction::ALL.to_vec()
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_train_sizes() -> Vec<usize> {
    vec![25, 50, 100, 200, 300]
}
fn default_test_size() -> usize {
    300
}
fn default_pool_size() -> usize {
    1000
}
fn default_noise_variance() -> f64 {
    0.01
}
fn default_repetitions() -> usize {
    10
}

/// Experimental protocol. Every field has a default, so `{}` is a valid
/// config describing the full protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default = "default_functions")]
    pub functions: Vec<TargetFunction>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_train_sizes")]
    pub train_sizes: Vec<usize>,
    #[serde(default)]
    pub unlabeled_size: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    #[serde(default = "default_noise_variance")]
    pub noise_variance: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub grids: GridSearchConfig,
    /// Fill `wall_time_ms` with measured times. Off by default because
    /// timings make otherwise identical reports differ.
    #[serde(default)]
    pub record_timing: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl BenchmarkConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: BenchmarkConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.functions.is_empty() || self.methods.is_empty() || self.train_sizes.is_empty() {
            return bad("functions, methods and train_sizes must be non-empty".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1".into());
        }
        if self.test_size == 0 {
            return bad("test_size must be >= 1".into());
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return bad(format!(
                "noise_variance must be finite and >= 0, got {}",
                self.noise_variance
            ));
        }
        self.grids.validate()?;
        let max_l = *self.train_sizes.iter().max().unwrap();
        let min_l = *self.train_sizes.iter().min().unwrap();
        if min_l < self.grids.folds {
            return bad(format!(
                "train size {min_l} is smaller than the fold count {}",
                self.grids.folds
            ));
        }
        let need = max_l + self.unlabeled_size + self.test_size;
        if self.pool_size < need {
            return bad(format!(
                "pool_size {} < max(train_sizes) + unlabeled_size + test_size = {need}",
                self.pool_size
            ));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one repetition:
/// `h = splitmix64(master)`, then `h = splitmix64(h ^ v)` for `v` in
/// `[function id (1..=4), train_size, repetition]`.
///
/// This mixing is part of the report format; changing it changes every
/// published number.
pub fn repetition_seed(
    master_seed: u64,
    function: TargetFunction,
    train_size: usize,
    repetition: usize,
) -> u64 {
    [function.id(), train_size as u64, repetition as u64]
        .into_iter()
        .fold(splitmix64(master_seed), |h, v| splitmix64(h ^ v))
}

/// Independent streams derived from a repetition seed.
fn stream_seed(rep_seed: u64, stream: u64) -> u64 {
    splitmix64(rep_seed ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Outcome of one repetition of one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub repetition: usize,
    pub seed: u64,
    /// Test MSE after clipping predictions to the training label bound.
    pub mse: Option<f64>,
    pub mse_unclipped: Option<f64>,
    /// Clipped test MSE against the noise-free target values.
    pub mse_clean: Option<f64>,
    pub sigma_inner: Option<f64>,
    pub sigma_outer: Option<f64>,
    pub lambda: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    elapsed_ms: f64,
}

/// Aggregate of one `(function, method, train_size)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub function: TargetFunction,
    pub method: Method,
    pub train_size: usize,
    pub mse_mean: f64,
    pub mse_std: f64,
    /// Most frequently selected bandwidth (inner kernel where there are two).
    pub best_sigma: f64,
    pub best_lambda: f64,
    pub wall_time_ms: f64,
    pub mse_unclipped_mean: f64,
    pub mse_unclipped_std: f64,
    pub mse_clean_mean: f64,
    pub mse_clean_std: f64,
    pub failures: usize,
    pub repetitions: Vec<RepetitionRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    pub fn row(
        &self,
        function: TargetFunction,
        method: Method,
        train_size: usize,
    ) -> Option<&BenchmarkRow> {
        self.rows
            .iter()
            .find(|r| r.function == function && r.method == method && r.train_size == train_size)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{REPORT_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:?},{:?},{:?},{:?},{}",
                r.function,
                r.method,
                r.train_size,
                r.mse_mean,
                r.mse_std,
                r.best_sigma,
                r.best_lambda,
                r.wall_time_ms.round() as u64
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

struct CellRun {
    seed: u64,
    per_method: Vec<RepetitionRecord>,
}

fn run_repetition(
    config: &BenchmarkConfig,
    function: TargetFunction,
    train_size: usize,
    repetition: usize,
) -> Result<CellRun> {
    let seed = repetition_seed(config.master_seed, function, train_size, repetition);
    let noise = NoiseSpec::gaussian(config.noise_variance)?;
    let pool = generate_pool(function, config.pool_size, noise, stream_seed(seed, 1))?;
    let split = split_pool(
        &pool,
        train_size,
        config.unlabeled_size,
        config.test_size,
        stream_seed(seed, 2),
    )?;
    let grids = GridSearchConfig {
        seed: splitmix64(stream_seed(seed, 3) ^ config.grids.seed),
        ..config.grids.clone()
    };
    let test_x: Vec<Vec<f64>> = split.test.iter().map(|s| vec![s.x]).collect();
    let test_y: Vec<f64> = split.test.iter().map(|s| s.y).collect();
    let clean_y: Vec<f64> = split
        .test
        .iter()
        .map(|s| function.eval_unchecked(s.x))
        .collect();
    let bound = split.train.clip_bound();

    let per_method = config
        .methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let mut rec = RepetitionRecord {
                repetition,
                seed,
                mse: None,
                mse_unclipped: None,
                mse_clean: None,
                sigma_inner: None,
                sigma_outer: None,
                lambda: None,
                error: None,
                elapsed_ms: 0.0,
            };
            let outcome = (|| -> Result<()> {
                let cv = cross_validate(&split.train, method, &grids)?;
                rec.sigma_inner = cv.best_sigma_inner;
                rec.sigma_outer = cv.best_sigma_outer;
                rec.lambda = Some(cv.best_lambda);
                let model = method
                    .prepare(&split.train, cv.best_sigma())?
                    .fit(cv.best_lambda)?;
                let pred = model.predict(&test_x)?;
                let clipped = project(&pred, bound)?;
                rec.mse = Some(mse(&clipped, &test_y)?);
                rec.mse_unclipped = Some(mse(&pred, &test_y)?);
                rec.mse_clean = Some(mse(&clipped, &clean_y)?);
                Ok(())
            })();
            match outcome {
                Ok(()) => {}
                Err(e @ Error::Numerical { .. }) => rec.error = Some(e.to_string()),
                Err(e) => return Err(e),
            }
            rec.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CellRun { seed, per_method })
}

/// Most frequent value; ties go to the value seen first.
fn mode(values: &[f64]) -> f64 {
    let mut best = (0usize, f64::NAN);
    for (i, v) in values.iter().enumerate() {
        let count = values.iter().filter(|w| w.to_bits() == v.to_bits()).count();
        if count > best.0 && !values[..i].iter().any(|w| w.to_bits() == v.to_bits()) {
            best = (count, *v);
        }
    }
    best.1
}

fn aggregate(
    config: &BenchmarkConfig,
    function: TargetFunction,
    method: Method,
    train_size: usize,
    records: Vec<RepetitionRecord>,
) -> Result<BenchmarkRow> {
    let ok: Vec<&RepetitionRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let failures = records.len() - ok.len();
    if failures > 0 && (failures as f64) >= config.repetitions as f64 / 2.0 {
        let first = records
            .iter()
            .find_map(|r| r.error.clone())
            .unwrap_or_default();
        return Err(Error::Numerical {
            message: format!(
                "{function}/{method}/l={train_size}: {failures} of {} repetitions failed; first: {first}",
                config.repetitions
            ),
            jitter: crate::linalg::JITTER_LEVELS.to_vec(),
        });
    }
    let collect = |f: fn(&RepetitionRecord) -> Option<f64>| {
        ok.iter().filter_map(|r| f(r)).collect::<Vec<f64>>()
    };
    let (mse_mean, mse_std) = mean_std(&collect(|r| r.mse))?;
    let (mse_unclipped_mean, mse_unclipped_std) = mean_std(&collect(|r| r.mse_unclipped))?;
    let (mse_clean_mean, mse_clean_std) = mean_std(&collect(|r| r.mse_clean))?;
    let sigmas = collect(|r| r.sigma_inner.or(r.sigma_outer));
    let lambdas = collect(|r| r.lambda);
    let wall_time_ms = if config.record_timing {
        records.iter().map(|r| r.elapsed_ms).sum()
    } else {
        0.0
    };
    Ok(BenchmarkRow {
        function,
        method,
        train_size,
        mse_mean,
        mse_std,
        best_sigma: mode(&sigmas),
        best_lambda: mode(&lambdas),
        wall_time_ms,
        mse_unclipped_mean,
        mse_unclipped_std,
        mse_clean_mean,
        mse_clean_std,
        failures,
        repetitions: records,
    })
}

/// Runs every `(function, method, train_size)` cell of the config.
///
/// Rows are ordered by function, then method, then train size, each in
/// config order. Repetitions run in parallel; the result does not depend on
/// scheduling.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    let cells: Vec<(TargetFunction, usize, usize)> = config
        .functions
        .iter()
        .flat_map(|&f| {
            config
                .train_sizes
                .iter()
                .flat_map(move |&l| (0..config.repetitions).map(move |r| (f, l, r)))
        })
        .collect();
    let runs: Vec<CellRun> = cells
        .par_iter()
        .map(|&(f, l, r)| run_repetition(config, f, l, r))
        .collect::<Result<Vec<_>>>()?;

    let reps = config.repetitions;
    let mut rows = Vec::new();
    for (fi, &function) in config.functions.iter().enumerate() {
        for (mi, &method) in config.methods.iter().enumerate() {
            for (li, &train_size) in config.train_sizes.iter().enumerate() {
                let base = (fi * config.train_sizes.len() + li) * reps;
                let block = &runs[base..base + reps];
                let seeds: HashSet<u64> = block.iter().map(|c| c.seed).collect();
                if seeds.len() != reps {
                    return Err(Error::Config(format!(
                        "repetition seeds collide for {function}/l={train_size}; choose another master_seed"
                    )));
                }
                let records = block.iter().map(|c| c.per_method[mi].clone()).collect();
                rows.push(aggregate(config, function, method, train_size, records)?);
            }
        }
    }
    Ok(BenchmarkReport {
        config: config.clone(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub function: TargetFunction,
    pub method: Method,
    pub train_size: usize,
    pub mse_mean: f64,
    pub mse_std: f64,
}

/// Test error against training size, one series per `(function, method)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn from_report(report: &BenchmarkReport) -> Self {
        LearningCurve {
            points: report
                .rows
                .iter()
                .map(|r| CurvePoint {
                    function: r.function,
                    method: r.method,
                    train_size: r.train_size,
                    mse_mean: r.mse_mean,
                    mse_std: r.mse_std,
                })
                .collect(),
        }
    }

    pub fn series(&self, function: TargetFunction, method: Method) -> Vec<&CurvePoint> {
        self.points
            .iter()
            .filter(|p| p.function == function && p.method == method)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CURVE_HEADER}")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{:?},{:?}",
                p.function, p.method, p.train_size, p.mse_mean, p.mse_std
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

pub fn learning_curve(config: &BenchmarkConfig) -> Result<LearningCurve> {
    let distinct: HashSet<usize> = config.train_sizes.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::Config(
            "a learning curve needs at least two distinct train sizes".into(),
        ));
    }
    Ok(LearningCurve::from_report(&run_benchmark(config)?))
}
