//! Synthetic univariate regression targets, seeded sampling, and CSV I/O.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::fredholm::Dataset;

/// The four benchmark targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetFunction {
    /// `sin(9 pi / (0.35 x + 1))` on `[0, 10]`, highly oscillatory
    F1,
    /// `x cos x` on `[0, 10]`, smooth
    F2,
    /// `min(2|x| - 1, 1)` on `[-2, 2]`, continuous but not smooth
    F3,
    /// `sign(x)` on `[-3, 3]`, discontinuous
    F4,
}

impl TargetFunction {
    pub const ALL: [TargetFunction; 4] = [Self::F1, Self::F2, Self::F3, Self::F4];

    pub fn domain(self) -> (f64, f64) {
        match self {
            Self::F1 | Self::F2 => (0.0, 10.0),
            Self::F3 => (-2.0, 2.0),
            Self::F4 => (-3.0, 3.0),
        }
    }

    /// Sup of `|f|` over the domain.
    pub fn bound(self) -> f64 {
        match self {
            Self::F2 => 10.0,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
        }
    }

    /// Stable numeric id used in seed mixing.
    pub fn id(self) -> u64 {
        match self {
            Self::F1 => 1,
            Self::F2 => 2,
            Self::F3 => 3,
            Self::F4 => 4,
        }
    }

    pub(crate) fn eval_unchecked(self, x: f64) -> f64 {
        match self {
            Self::F1 => (9.0 * std::f64::consts::PI / (0.35 * x + 1.0)).sin(),
            Self::F2 => x * x.cos(),
            Self::F3 => (2.0 * x.abs() - 1.0).min(1.0),
            Self::F4 => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f1" => Ok(Self::F1),
            "f2" => Ok(Self::F2),
            "f3" => Ok(Self::F3),
            "f4" => Ok(Self::F4),
            other => input(format!("unknown target function {other:?}")),
        }
    }
}

pub fn target_value(func: TargetFunction, x: f64) -> Result<f64> {
    let (lo, hi) = func.domain();
    if !(x >= lo && x <= hi) {
        return input(format!("{x} is outside the domain [{lo}, {hi}] of {func}"));
    }
    Ok(func.eval_unchecked(x))
}

/// Additive gaussian noise with the given variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub variance: f64,
}

impl NoiseSpec {
    pub fn gaussian(variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance >= 0.0) {
            return input(format!(
                "noise variance must be finite and >= 0, got {variance}"
            ));
        }
        Ok(NoiseSpec { variance })
    }

    pub fn none() -> Self {
        NoiseSpec { variance: 0.0 }
    }
}

/// One labeled univariate sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
}

/// Draws `n` samples with `x` uniform on the domain and `y = f(x) + noise`.
///
/// Each sample consumes one uniform and one normal draw regardless of the
/// noise level, so pools that differ only in variance share their inputs.
pub fn generate_pool(
    func: TargetFunction,
    n: usize,
    noise: NoiseSpec,
    seed: u64,
) -> Result<Vec<Sample>> {
    if n == 0 {
        return input("pool size must be >= 1");
    }
    let noise = NoiseSpec::gaussian(noise.variance)?;
    let (lo, hi) = func.domain();
    let normal = Normal::new(0.0, noise.variance.sqrt()).expect("std is finite and >= 0");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let x = rng.random_range(lo..=hi);
            let eps = normal.sample(&mut rng);
            Sample {
                x,
                y: func.eval_unchecked(x) + eps,
            }
        })
        .collect())
}

/// Disjoint labeled / unlabeled / test subsets of a pool.
#[derive(Clone, Debug)]
pub struct Split {
    pub train: Dataset,
    pub test: Vec<Sample>,
    pub labeled_indices: Vec<usize>,
    pub unlabeled_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Shuffles pool indices with `seed` and takes the first `l` as labeled, the
/// next `u` as unlabeled (labels dropped) and the next `test_n` as test pairs.
pub fn split_pool(pool: &[Sample], l: usize, u: usize, test_n: usize, seed: u64) -> Result<Split> {
    if l == 0 {
        return input("need at least one labeled sample");
    }
    let need = l + u + test_n;
    if need > pool.len() {
        return input(format!(
            "split needs {need} samples but the pool has {}",
            pool.len()
        ));
    }
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let labeled_indices = idx[..l].to_vec();
    let unlabeled_indices = idx[l..l + u].to_vec();
    let test_indices = idx[l + u..need].to_vec();
    let train = Dataset::new(
        labeled_indices.iter().map(|&i| vec![pool[i].x]).collect(),
        labeled_indices.iter().map(|&i| pool[i].y).collect(),
        unlabeled_indices.iter().map(|&i| vec![pool[i].x]).collect(),
    )?;
    let test = test_indices.iter().map(|&i| pool[i]).collect();
    Ok(Split {
        train,
        test,
        labeled_indices,
        unlabeled_indices,
        test_indices,
    })
}

/// Writes `x,y` rows with a header. Floats use the shortest representation
/// that parses back to the same bits.
pub fn write_samples_csv<W: Write>(out: W, samples: &[Sample]) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "x,y")?;
    for s in samples {
        writeln!(out, "{:?},{:?}", s.x, s.y)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a single `x` column with a header.
pub fn write_inputs_csv<W: Write>(out: W, inputs: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "x")?;
    for x in inputs {
        writeln!(out, "{x:?}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_samples<P: AsRef<Path>>(path: P, samples: &[Sample]) -> Result<()> {
    write_samples_csv(File::create(path)?, samples)
}

pub fn read_samples<P: AsRef<Path>>(path: P) -> Result<Vec<Sample>> {
    read_samples_csv(File::open(path)?)
}

pub fn read_samples_csv<R: Read>(reader: R) -> Result<Vec<Sample>> {
    Ok(read_columns(reader, 2, "x,y")?
        .into_iter()
        .map(|r| Sample { x: r[0], y: r[1] })
        .collect())
}

pub fn read_inputs_csv<R: Read>(reader: R) -> Result<Vec<f64>> {
    Ok(read_columns(reader, 1, "x")?
        .into_iter()
        .map(|r| r[0])
        .collect())
}

/// Parses numeric rows of a fixed width. A first line equal to `header` is
/// skipped; error line numbers are physical 1-based file lines.
fn read_columns<R: Read>(reader: R, width: usize, header: &str) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if std::mem::take(&mut first)
            && record.iter().map(str::trim).collect::<Vec<_>>().join(",") == header
        {
            continue;
        }
        if record.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} columns, found {}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(width);
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value: {field:?}"),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(rows)
}
