//! Timing harness for the metric kernels.
//!
//! Each measurement times the end-to-end metric on an in-memory image pair
//! (no file I/O), auto-batching calls until a batch takes at least 1 ms, and
//! the report keeps the median over repeats. The scaling exponent is the
//! least-squares slope of `ln(time)` against `ln(pixels)`; a linear-time
//! kernel sits near 1.
//!
//! Memory: with downsampling the GMSD kernel allocates two quarter-size
//! images and two quarter-size squared-magnitude maps, one of which is
//! reused for the GMS values: about 1·N samples of auxiliary storage for an
//! N-pixel input. Without downsampling it is the two full-size maps, 2·N.
//! The asserted bound is [`AUX_SAMPLES_PER_PIXEL`]·N.
//!
//! The nominal arithmetic budget of GMSD is 19N multiplications and 16N
//! additions; it is reported but not measured.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmsd::{Metric, MetricConfig};
use crate::image::{
    apply_distortion, textured_image, DistortionKind, DistortionSpec, LuminanceImage,
};

/// Upper bound on auxiliary `f64` samples the GMSD kernel holds at once,
/// per input pixel.
pub const AUX_SAMPLES_PER_PIXEL: usize = 3;

pub const MIN_REPEATS: usize = 5;

pub const DEFAULT_SIZES: [(usize, usize); 3] = [(256, 256), (512, 512), (1024, 1024)];

const MIN_BATCH_TIME: Duration = Duration::from_millis(1);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub metric: Metric,
    pub parallel: bool,
    pub repeats: usize,
    pub image_sizes: Vec<(usize, usize)>,
    /// Median seconds per metric evaluation, one per size.
    pub median_times: Vec<f64>,
    pub scaling_exponent: f64,
    pub op_budget: String,
}

impl BenchReport {
    /// `N,seconds` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pixels,seconds\n");
        for ((w, h), t) in self.image_sizes.iter().zip(&self.median_times) {
            out.push_str(&format!("{},{:e}\n", w * h, t));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchOptions {
    pub repeats: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            repeats: 7,
            seed: 0,
            parallel: false,
        }
    }
}

/// A seeded textured reference and a noisy copy of it.
pub fn image_pair(
    width: usize,
    height: usize,
    seed: u64,
) -> Result<(LuminanceImage, LuminanceImage)> {
    let reference = textured_image(width, height, seed)?;
    let distorted = apply_distortion(
        &reference,
        &DistortionSpec::new(DistortionKind::Awn, 0.05, seed.wrapping_add(1))?,
    )?;
    Ok((reference, distorted))
}

/// Seconds per call, batching calls until a batch lasts at least 1 ms.
fn time_once(mut f: impl FnMut() -> Result<f64>) -> Result<f64> {
    let mut batch = 1usize;
    loop {
        let start = Instant::now();
        for _ in 0..batch {
            std::hint::black_box(f()?);
        }
        let elapsed = start.elapsed();
        if elapsed >= MIN_BATCH_TIME {
            return Ok(elapsed.as_secs_f64() / batch as f64);
        }
        batch *= 2;
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `ln t` against `ln N`.
pub fn scaling_exponent(pixels: &[f64], times: &[f64]) -> f64 {
    let xs: Vec<f64> = pixels.iter().map(|p| p.ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn check_options(metric: Metric, sizes: &[(usize, usize)], opts: &BenchOptions) -> Result<()> {
    if opts.repeats < MIN_REPEATS {
        return Err(Error::InvalidParameter(format!(
            "repeats must be at least {MIN_REPEATS}, got {}",
            opts.repeats
        )));
    }
    if sizes.is_empty() {
        return Err(Error::InvalidParameter("no image sizes given".into()));
    }
    let min = match metric {
        Metric::Gmsd | Metric::Gmsm => 6,
        Metric::Psnr | Metric::MseSd => 1,
    };
    if let Some(&(w, h)) = sizes.iter().find(|(w, h)| *w < min || *h < min) {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            min_w: min,
            min_h: min,
        });
    }
    Ok(())
}

fn config_for(opts: &BenchOptions) -> MetricConfig {
    MetricConfig {
        parallel: opts.parallel,
        ..MetricConfig::default()
    }
}

pub fn bench_metric(
    metric: Metric,
    sizes: &[(usize, usize)],
    opts: &BenchOptions,
) -> Result<BenchReport> {
    check_options(metric, sizes, opts)?;
    let config = config_for(opts);
    let pairs = sizes
        .iter()
        .map(|&(w, h)| image_pair(w, h, opts.seed))
        .collect::<Result<Vec<_>>>()?;
    for (r, d) in &pairs {
        // warm-up
        metric.score(r, d, &config)?;
    }
    // round-robin over sizes so a burst of background load does not bend the slope
    let mut samples = vec![Vec::with_capacity(opts.repeats); sizes.len()];
    for _ in 0..opts.repeats {
        for (k, (r, d)) in pairs.iter().enumerate() {
            samples[k].push(time_once(|| metric.score(r, d, &config))?);
        }
    }
    let median_times: Vec<f64> = samples.into_iter().map(median).collect();
    let pixels: Vec<f64> = sizes.iter().map(|(w, h)| (w * h) as f64).collect();
    let scaling_exponent = if sizes.len() >= 2 {
        scaling_exponent(&pixels, &median_times)
    } else {
        f64::NAN
    };
    Ok(BenchReport {
        metric,
        parallel: opts.parallel,
        repeats: opts.repeats,
        image_sizes: sizes.to_vec(),
        median_times,
        scaling_exponent,
        op_budget: "GMSD nominal budget: 19N multiplications, 16N additions".into(),
    })
}

/// Median seconds per call for several metrics on one image pair, with
/// measurements interleaved round-robin so drift affects all alike.
pub fn compare_metrics(
    metrics: &[Metric],
    size: (usize, usize),
    opts: &BenchOptions,
) -> Result<Vec<f64>> {
    for &m in metrics {
        check_options(m, &[size], opts)?;
    }
    let config = config_for(opts);
    let (r, d) = image_pair(size.0, size.1, opts.seed)?;
    for &m in metrics {
        m.score(&r, &d, &config)?;
    }
    let mut samples = vec![Vec::with_capacity(opts.repeats); metrics.len()];
    for _ in 0..opts.repeats {
        for (k, &m) in metrics.iter().enumerate() {
            samples[k].push(time_once(|| m.score(&r, &d, &config))?);
        }
    }
    Ok(samples.into_iter().map(median).collect())
}
