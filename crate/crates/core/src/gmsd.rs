//! Gradient magnitude similarity and its mean/deviation pooling.
//!
//! The pipeline is: optional 2×2 block-mean downsampling of both images,
//! Prewitt gradient magnitudes, the per-pixel gradient magnitude similarity
//! (GMS) map, and finally pooling. Mean pooling yields GMSM (higher is
//! better); population standard deviation pooling yields GMSD (higher is
//! worse).
//!
//! Border handling: the 3×3 Prewitt correlation zero-pads the image and
//! produces a same-size output, and border pixels take part in pooling.
//! This matters on small images, where the artificial edge along the frame
//! is a sizeable fraction of the map.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::LuminanceImage;

/// Default stability constant for images normalized to `[0, 1]`.
///
/// For 8-bit images in `[0, 255]` the equivalent value is `0.0026 * 255²`,
/// roughly 169; inputs are always normalized, so only this one is used.
pub const DEFAULT_C: f64 = 0.0026;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientMagnitudeMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GradientMagnitudeMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Per-pixel gradient magnitude similarity, every value in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GmsMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GmsMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The map as a gray image (brighter means more similar).
    pub fn to_image(&self) -> LuminanceImage {
        LuminanceImage::new(self.width, self.height, self.values.clone())
            .expect("GMS values lie in (0, 1]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub c: f64,
    pub downsample: bool,
    pub retain_map: bool,
    /// Row-parallel gradient and similarity computation. Results are
    /// bit-identical to the sequential path.
    #[serde(default)]
    pub parallel: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            downsample: true,
            retain_map: false,
            parallel: false,
        }
    }
}

impl MetricConfig {
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "c must be positive, got {}",
                self.c
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityResult {
    pub gmsd: f64,
    pub gmsm: f64,
    pub map: Option<GmsMap>,
}

/// Non-overlapping 2×2 block means; a trailing odd row or column is dropped.
pub fn preprocess(image: &LuminanceImage) -> Result<LuminanceImage> {
    let (w, h) = (image.width(), image.height());
    if w < 2 || h < 2 {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            min_w: 2,
            min_h: 2,
        });
    }
    let (ow, oh) = (w / 2, h / 2);
    let src = image.samples();
    let mut out = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        let top = &src[2 * y * w..];
        let bottom = &src[(2 * y + 1) * w..];
        for x in 0..ow {
            let sum = (top[2 * x] + top[2 * x + 1]) + (bottom[2 * x] + bottom[2 * x + 1]);
            out.push(sum * 0.25);
        }
    }
    LuminanceImage::with_range(ow, oh, out, image.dynamic_range())
}

fn check_kernel_fits(image: &LuminanceImage) -> Result<()> {
    if image.width() < 3 || image.height() < 3 {
        return Err(Error::TooSmall {
            width: image.width(),
            height: image.height(),
            min_w: 3,
            min_h: 3,
        });
    }
    Ok(())
}

/// Squared gradient magnitude of one output row.
///
/// Both Prewitt kernels are separable: `h_x` is a vertical 3-sum followed by
/// a `[1, 0, -1] / 3` horizontal difference, and `h_y` is a horizontal
/// 3-sum followed by a vertical difference. `up`/`down` are `None` outside
/// the image (zero padding).
#[inline]
fn squared_magnitude_row(
    up: Option<&[f64]>,
    mid: &[f64],
    down: Option<&[f64]>,
    col_sum: &mut [f64],
    out: &mut [f64],
) {
    let w = mid.len();
    for x in 0..w {
        let a = up.map_or(0.0, |r| r[x]);
        let b = down.map_or(0.0, |r| r[x]);
        col_sum[x] = a + mid[x] + b;
    }
    let row_sum = |r: Option<&[f64]>, x: usize| -> f64 {
        match r {
            None => 0.0,
            Some(r) => {
                let left = if x > 0 { r[x - 1] } else { 0.0 };
                let right = if x + 1 < w { r[x + 1] } else { 0.0 };
                left + r[x] + right
            }
        }
    };
    for x in 0..w {
        let left = if x > 0 { col_sum[x - 1] } else { 0.0 };
        let right = if x + 1 < w { col_sum[x + 1] } else { 0.0 };
        let gx = (left - right) / 3.0;
        let gy = (row_sum(up, x) - row_sum(down, x)) / 3.0;
        out[x] = gx * gx + gy * gy;
    }
}

fn squared_magnitudes(image: &LuminanceImage, parallel: bool) -> Vec<f64> {
    let (w, h) = (image.width(), image.height());
    let src = image.samples();
    let row = |y: usize| &src[y * w..(y + 1) * w];
    let fill = |y: usize, col_sum: &mut Vec<f64>, out: &mut [f64]| {
        let up = (y > 0).then(|| row(y - 1));
        let down = (y + 1 < h).then(|| row(y + 1));
        squared_magnitude_row(up, row(y), down, col_sum, out);
    };
    let mut out = vec![0.0; w * h];
    if parallel {
        out.par_chunks_mut(w)
            .enumerate()
            .for_each_init(|| vec![0.0; w], |scratch, (y, dst)| fill(y, scratch, dst));
    } else {
        let mut scratch = vec![0.0; w];
        for (y, dst) in out.chunks_mut(w).enumerate() {
            fill(y, &mut scratch, dst);
        }
    }
    out
}

/// Prewitt gradient magnitude `sqrt(g_x² + g_y²)`, same size as the input.
pub fn prewitt_magnitude(image: &LuminanceImage) -> Result<GradientMagnitudeMap> {
    check_kernel_fits(image)?;
    let mut values = squared_magnitudes(image, false);
    for v in values.iter_mut() {
        *v = v.sqrt();
    }
    Ok(GradientMagnitudeMap {
        width: image.width(),
        height: image.height(),
        values,
    })
}

#[inline]
fn gms(mr: f64, md: f64, c: f64) -> f64 {
    (2.0 * mr * md + c) / (mr * mr + md * md + c)
}

pub fn gms_map(m_r: &GradientMagnitudeMap, m_d: &GradientMagnitudeMap, c: f64) -> Result<GmsMap> {
    if m_r.width != m_d.width || m_r.height != m_d.height {
        return Err(Error::DimensionMismatch {
            left_w: m_r.width,
            left_h: m_r.height,
            right_w: m_d.width,
            right_h: m_d.height,
        });
    }
    MetricConfig::default().with_c(c).validate()?;
    let values = m_r
        .values
        .iter()
        .zip(&m_d.values)
        .map(|(&r, &d)| gms(r, d, c))
        .collect();
    Ok(GmsMap {
        width: m_r.width,
        height: m_r.height,
        values,
    })
}

/// Arithmetic mean, summed left to right.
pub fn pool_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("cannot pool an empty map".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Population standard deviation (divisor `N`), two-pass.
pub fn pool_std(values: &[f64]) -> Result<f64> {
    let mean = pool_mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((ss / values.len() as f64).sqrt())
}

/// Runs the shared front half of the pipeline and returns the GMS map.
fn gms_pipeline(
    reference: &LuminanceImage,
    distorted: &LuminanceImage,
    config: &MetricConfig,
) -> Result<GmsMap> {
    config.validate()?;
    reference.same_dims(distorted)?;
    let (w, h) = (reference.width(), reference.height());
    let min = if config.downsample { 6 } else { 3 };
    if w < min || h < min {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            min_w: min,
            min_h: min,
        });
    }

    let (r, d);
    let (r, d) = if config.downsample {
        r = preprocess(reference)?;
        d = preprocess(distorted)?;
        (&r, &d)
    } else {
        (reference, distorted)
    };

    let mut values = squared_magnitudes(r, config.parallel);
    let md2 = squared_magnitudes(d, config.parallel);
    let c = config.c;
    // reuse the reference buffer for the GMS values
    let combine = |(v, &d2): (&mut f64, &f64)| {
        let (mr, md) = (v.sqrt(), d2.sqrt());
        *v = gms(mr, md, c);
    };
    if config.parallel {
        values.par_iter_mut().zip(md2.par_iter()).for_each(combine);
    } else {
        values.iter_mut().zip(md2.iter()).for_each(combine);
    }
    Ok(GmsMap {
        width: r.width(),
        height: r.height(),
        values,
    })
}

/// The GMSD index together with GMSM, and the GMS map if requested.
pub fn gmsd_index(
    reference: &LuminanceImage,
    distorted: &LuminanceImage,
    config: &MetricConfig,
) -> Result<QualityResult> {
    let map = gms_pipeline(reference, distorted, config)?;
    let gmsm = pool_mean(&map.values)?;
    let ss: f64 = map.values.iter().map(|v| (v - gmsm) * (v - gmsm)).sum();
    let gmsd = (ss / map.values.len() as f64).sqrt();
    Ok(QualityResult {
        gmsd,
        gmsm,
        map: config.retain_map.then_some(map),
    })
}

/// GMSM alone; skips the deviation pass.
pub fn gmsm_index(
    reference: &LuminanceImage,
    distorted: &LuminanceImage,
    config: &MetricConfig,
) -> Result<f64> {
    pool_mean(&gms_pipeline(reference, distorted, config)?.values)
}

/// Per-pixel squared difference, at full resolution.
pub fn mse_map(reference: &LuminanceImage, distorted: &LuminanceImage) -> Result<Vec<f64>> {
    reference.same_dims(distorted)?;
    Ok(reference
        .samples()
        .iter()
        .zip(distorted.samples())
        .map(|(a, b)| (a - b) * (a - b))
        .collect())
}

pub fn mse(reference: &LuminanceImage, distorted: &LuminanceImage) -> Result<f64> {
    pool_mean(&mse_map(reference, distorted)?)
}

/// Deviation pooling applied to the squared-error map.
pub fn mse_sd_index(reference: &LuminanceImage, distorted: &LuminanceImage) -> Result<f64> {
    pool_std(&mse_map(reference, distorted)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Decibels(f64),
    /// The images are identical.
    Infinite,
}

impl Psnr {
    pub fn as_f64(self) -> f64 {
        match self {
            Psnr::Decibels(db) => db,
            Psnr::Infinite => f64::INFINITY,
        }
    }
}

pub fn psnr(reference: &LuminanceImage, distorted: &LuminanceImage) -> Result<Psnr> {
    let err = mse(reference, distorted)?;
    if err == 0.0 {
        return Ok(Psnr::Infinite);
    }
    let peak = reference.dynamic_range();
    Ok(Psnr::Decibels(10.0 * (peak * peak / err).log10()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Gmsd,
    Gmsm,
    Psnr,
    MseSd,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Gmsd, Metric::Gmsm, Metric::Psnr, Metric::MseSd];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Gmsd => "gmsd",
            Metric::Gmsm => "gmsm",
            Metric::Psnr => "psnr",
            Metric::MseSd => "mse-sd",
        }
    }

    /// Scores a pair. PSNR of identical images is `f64::INFINITY`.
    pub fn score(
        self,
        reference: &LuminanceImage,
        distorted: &LuminanceImage,
        config: &MetricConfig,
    ) -> Result<f64> {
        match self {
            Metric::Gmsd => {
                let cfg = MetricConfig {
                    retain_map: false,
                    ..*config
                };
                Ok(gmsd_index(reference, distorted, &cfg)?.gmsd)
            }
            Metric::Gmsm => gmsm_index(reference, distorted, config),
            Metric::Psnr => Ok(psnr(reference, distorted)?.as_f64()),
            Metric::MseSd => mse_sd_index(reference, distorted),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric {s:?}")))
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
