//! Full-reference image quality assessment with the gradient magnitude
//! similarity deviation (GMSD) index.
//!
//! - [`image`]: luminance images, PGM/PPM/PNG I/O and synthetic distortions
//! - [`gmsd`]: the metric kernel and the PSNR / MSE baselines
//! - [`eval`]: regression, correlation and significance testing against
//!   subjective scores
//! - [`bench`]: timing and scaling checks
//! - [`cli`]: the `gmsd` command-line tool

pub mod bench;
pub mod cli;
pub mod error;
pub mod eval;
pub mod gmsd;
pub mod image;

pub use error::{Error, Result};
pub use gmsd::{gmsd_index, Metric, MetricConfig, QualityResult};
pub use image::LuminanceImage;
