//! Luminance images, file I/O and synthetic test stimuli.
//!
//! Every image handled by the metric is a single luminance plane with
//! samples normalized to `[0, L]`, where `L` is the nominal dynamic range
//! (1.0 for anything read from disk). Colour inputs are reduced to BT.601
//! luma before normalization.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A row-major plane of luminance samples.
#[derive(Debug, Clone, PartialEq)]
pub struct LuminanceImage {
    width: usize,
    height: usize,
    samples: Vec<f64>,
    dynamic_range: f64,
}

impl LuminanceImage {
    /// Builds a normalized image (`L = 1`); every sample must lie in `[0, 1]`.
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        Self::with_range(width, height, samples, 1.0)
    }

    /// Builds an image whose samples lie in `[0, dynamic_range]`.
    pub fn with_range(
        width: usize,
        height: usize,
        samples: Vec<f64>,
        dynamic_range: f64,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty image {width}x{height}")));
        }
        if samples.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} samples for a {width}x{height} image",
                samples.len()
            )));
        }
        if !(dynamic_range > 0.0 && dynamic_range.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "dynamic range must be positive, got {dynamic_range}"
            )));
        }
        if let Some((i, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(**s >= 0.0 && **s <= dynamic_range))
        {
            return Err(Error::InvalidImage(format!(
                "sample {i} = {s} outside [0, {dynamic_range}]"
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
            dynamic_range,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from a per-pixel function of `(x, y)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dynamic_range(&self) -> f64 {
        self.dynamic_range
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    /// Multiplies every sample, and the dynamic range, by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Self::with_range(
            self.width,
            self.height,
            self.samples.iter().map(|s| s * factor).collect(),
            self.dynamic_range * factor,
        )
    }

    pub(crate) fn same_dims(&self, other: &Self) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            });
        }
        Ok(())
    }
}

/// BT.601 luma of an 8-bit RGB triple, in 8-bit units and unrounded.
#[inline]
pub fn luma_601(r: u8, g: u8, b: u8) -> f64 {
    0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
}

/// Reads a binary PGM (P5), binary PPM (P6) or 8-bit PNG as a normalized
/// luminance image.
pub fn load_image(path: impl AsRef<Path>) -> Result<LuminanceImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let decode_err = |reason: String| Error::Decode {
        path: path.to_owned(),
        reason,
    };
    match bytes.get(..2) {
        Some(b"P5") | Some(b"P6") => decode_pnm(&bytes).map_err(|e| match e {
            PnmError::Depth(detail) => Error::UnsupportedDepth {
                path: path.to_owned(),
                detail,
            },
            PnmError::Malformed(reason) => decode_err(reason),
        }),
        _ if bytes.starts_with(b"\x89PNG\r\n\x1a\n") => decode_png(path, &bytes),
        _ => Err(decode_err(
            "unrecognized format (expected P5/P6 PNM or PNG)".into(),
        )),
    }
}

enum PnmError {
    Depth(String),
    Malformed(String),
}

fn decode_pnm(bytes: &[u8]) -> std::result::Result<LuminanceImage, PnmError> {
    let color = &bytes[..2] == b"P6";
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(PnmError::Malformed("malformed header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PnmError::Malformed("header value out of range".into()))?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(PnmError::Malformed("malformed header".into()));
    }
    pos += 1;

    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(PnmError::Depth(format!(
            "maxval {maxval}, only 255 is supported"
        )));
    }
    if width == 0 || height == 0 {
        return Err(PnmError::Malformed(format!("empty image {width}x{height}")));
    }
    let channels = if color { 3 } else { 1 };
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| PnmError::Malformed("image dimensions overflow".into()))?;
    let raster = bytes.get(pos..pos + needed).ok_or_else(|| {
        PnmError::Malformed(format!(
            "truncated raster: expected {needed} bytes, found {}",
            bytes.len() - pos
        ))
    })?;
    let samples = if color {
        raster
            .chunks_exact(3)
            .map(|p| luma_601(p[0], p[1], p[2]) / 255.0)
            .collect()
    } else {
        raster.iter().map(|&v| v as f64 / 255.0).collect()
    };
    LuminanceImage::new(width, height, samples).map_err(|e| PnmError::Malformed(e.to_string()))
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<LuminanceImage> {
    use image::{DynamicImage, ImageFormat};

    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| {
        Error::Decode {
            path: path.to_owned(),
            reason: e.to_string(),
        }
    })?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    let samples: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageRgb8(buf) => buf
            .pixels()
            .map(|p| luma_601(p.0[0], p.0[1], p.0[2]) / 255.0)
            .collect(),
        DynamicImage::ImageRgba8(buf) => buf
            .pixels()
            .map(|p| luma_601(p.0[0], p.0[1], p.0[2]) / 255.0)
            .collect(),
        other => {
            return Err(Error::UnsupportedDepth {
                path: path.to_owned(),
                detail: format!("{:?}", other.color()),
            })
        }
    };
    LuminanceImage::new(width, height, samples).map_err(|e| Error::Decode {
        path: path.to_owned(),
        reason: e.to_string(),
    })
}

/// Quantizes a sample to a byte: `round(s / L * 255)`, halves rounded up.
#[inline]
pub fn quantize(sample: f64, dynamic_range: f64) -> u8 {
    (sample / dynamic_range * 255.0 + 0.5)
        .floor()
        .clamp(0.0, 255.0) as u8
}

/// Encodes an image as binary PGM (P5, maxval 255).
pub fn encode_pgm(image: &LuminanceImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width, image.height);
    let mut out = Vec::with_capacity(header.len() + image.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(
        image
            .samples
            .iter()
            .map(|&s| quantize(s, image.dynamic_range)),
    );
    out
}

pub fn save_gray(image: &LuminanceImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(&encode_pgm(image)).map_err(io_err)?;
    file.flush().map_err(io_err)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionKind {
    /// Additive white Gaussian noise; level is the noise σ in luminance units.
    Awn,
    /// Gaussian blur; level is the kernel σ in pixels.
    GaussianBlur,
    /// Contrast change about mid-gray; level is the multiplier.
    ContrastScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionSpec {
    pub kind: DistortionKind,
    pub level: f64,
    pub seed: u64,
}

impl DistortionSpec {
    pub fn new(kind: DistortionKind, level: f64, seed: u64) -> Result<Self> {
        let spec = Self { kind, level, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level >= 0.0 && self.level.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "distortion level must be finite and nonnegative, got {}",
                self.level
            )));
        }
        if self.kind == DistortionKind::ContrastScale && self.level == 0.0 {
            return Err(Error::InvalidParameter(
                "contrast level must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Applies a synthetic distortion. Output samples stay within `[0, L]`.
pub fn apply_distortion(image: &LuminanceImage, spec: &DistortionSpec) -> Result<LuminanceImage> {
    spec.validate()?;
    let range = image.dynamic_range;
    let samples = match spec.kind {
        DistortionKind::Awn => {
            if spec.level == 0.0 {
                return Ok(image.clone());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            image
                .samples
                .iter()
                .map(|&s| {
                    let n: f64 = rng.sample(StandardNormal);
                    (s + spec.level * n).clamp(0.0, range)
                })
                .collect()
        }
        DistortionKind::GaussianBlur => {
            if spec.level == 0.0 {
                return Ok(image.clone());
            }
            gaussian_blur(image, spec.level)
        }
        DistortionKind::ContrastScale => {
            let mid = 0.5 * range;
            image
                .samples
                .iter()
                .map(|&s| (s + (spec.level - 1.0) * (s - mid)).clamp(0.0, range))
                .collect()
        }
    };
    LuminanceImage::with_range(image.width, image.height, samples, range)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Separable Gaussian blur with replicate-padded borders.
fn gaussian_blur(image: &LuminanceImage, sigma: f64) -> Vec<f64> {
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = (image.width as isize, image.height as isize);
    let src = &image.samples;
    let range = image.dynamic_range;

    let mut tmp = vec![0.0; src.len()];
    for y in 0..h {
        let row = &src[(y * w) as usize..((y + 1) * w) as usize];
        for x in 0..w {
            tmp[(y * w + x) as usize] = kernel
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * row[(x + k as isize - radius).clamp(0, w - 1) as usize])
                .sum();
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            let acc: f64 = kernel
                .iter()
                .enumerate()
                .map(|(k, wt)| {
                    let yy = (y + k as isize - radius).clamp(0, h - 1);
                    wt * tmp[(yy * w + x) as usize]
                })
                .sum();
            out[(y * w + x) as usize] = acc.clamp(0.0, range);
        }
    }
    out
}

/// Uniform i.i.d. samples in `[0, 1)`.
pub fn random_image(width: usize, height: usize, seed: u64) -> Result<LuminanceImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..width * height).map(|_| rng.random::<f64>()).collect();
    LuminanceImage::new(width, height, samples)
}

/// A seeded multi-scale texture: random-phase oriented sinusoids over a
/// range of frequencies plus mild fine-grain noise, mapped into `[0.1, 0.9]`.
pub fn textured_image(width: usize, height: usize, seed: u64) -> Result<LuminanceImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64, f64)> = (0..12)
        .map(|i| {
            let period = 3.0 * 1.45f64.powi(i);
            let theta = rng.random::<f64>() * std::f64::consts::PI;
            let phase = rng.random::<f64>() * std::f64::consts::TAU;
            let amp = 0.5 + rng.random::<f64>();
            let k = std::f64::consts::TAU / period;
            (k * theta.cos(), k * theta.sin(), phase, amp)
        })
        .collect();
    let norm: f64 = waves.iter().map(|w| w.3).sum();
    let mut samples = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let v: f64 = waves
                .iter()
                .map(|(kx, ky, ph, a)| a * (kx * x as f64 + ky * y as f64 + ph).sin())
                .sum::<f64>()
                / norm;
            let grain = 0.04 * (rng.random::<f64>() - 0.5);
            samples.push((0.5 + 0.35 * v + grain).clamp(0.1, 0.9));
        }
    }
    LuminanceImage::new(width, height, samples)
}
