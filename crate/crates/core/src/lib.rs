//! Semi-supervised kernel regression with the Fredholm kernel.
//!
//! - [`kernel`]: gaussian and linear kernels and their matrices.
//! - [`linalg`]: symmetric positive-definite solves with jitter fallback.
//! - [`fredholm`]: the data-dependent Fredholm kernel, closed-form fitting,
//!   prediction through the empirical integral operator, and clipping.
//! - [`baseline`]: kernel ridge regression.
//! - [`data`]: synthetic targets, seeded pools and splits, CSV I/O.
//! - [`model_selection`]: k-fold grid search and error metrics.
//! - [`bench`]: repeated experiments, reports and learning curves.

pub mod baseline;
pub mod bench;
pub mod data;
pub mod error;
pub mod fredholm;
pub mod kernel;
pub mod linalg;
pub mod model_selection;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use fredholm::{
    fit, fredholm_kernel_matrix, project, Dataset, FredholmModel, PreparedFredholm,
};
pub use kernel::{eval_kernel, kernel_matrix, KernelSpec};
pub use linalg::{solve_spd, SpdSystem};
