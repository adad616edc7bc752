//! Straightforward reference implementations used as test oracles. They
//! follow the textbook definitions loop by loop and share no code with the
//! library kernels.

#![allow(dead_code)]

pub struct NaiveResult {
    pub map: Vec<f64>,
    pub gmsm: f64,
    pub gmsd: f64,
}

/// Explicit 2×2 block means.
pub fn naive_downsample(img: &[f64], w: usize, h: usize) -> (Vec<f64>, usize, usize) {
    let (ow, oh) = (w / 2, h / 2);
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut sum = 0.0;
            for dy in 0..2 {
                for dx in 0..2 {
                    sum += img[(2 * y + dy) * w + 2 * x + dx];
                }
            }
            out[y * ow + x] = sum / 4.0;
        }
    }
    (out, ow, oh)
}

const THIRD: f64 = 1.0 / 3.0;
pub const HX: [[f64; 3]; 3] = [
    [THIRD, 0.0, -THIRD],
    [THIRD, 0.0, -THIRD],
    [THIRD, 0.0, -THIRD],
];
pub const HY: [[f64; 3]; 3] = [
    [THIRD, THIRD, THIRD],
    [0.0, 0.0, 0.0],
    [-THIRD, -THIRD, -THIRD],
];

/// Direct 3×3 cross-correlation with zero padding.
pub fn naive_correlate(img: &[f64], w: usize, h: usize, k: &[[f64; 3]; 3]) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for i in 0..3isize {
                for j in 0..3isize {
                    let (yy, xx) = (y + i - 1, x + j - 1);
                    if yy >= 0 && yy < h as isize && xx >= 0 && xx < w as isize {
                        acc += k[i as usize][j as usize] * img[yy as usize * w + xx as usize];
                    }
                }
            }
            out[y as usize * w + x as usize] = acc;
        }
    }
    out
}

pub fn naive_magnitude(img: &[f64], w: usize, h: usize) -> Vec<f64> {
    let gx = naive_correlate(img, w, h, &HX);
    let gy = naive_correlate(img, w, h, &HY);
    gx.iter()
        .zip(&gy)
        .map(|(a, b)| (a * a + b * b).sqrt())
        .collect()
}

pub fn naive_mean(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x;
    }
    s / v.len() as f64
}

pub fn naive_population_std(v: &[f64]) -> f64 {
    let m = naive_mean(v);
    let mut s = 0.0;
    for x in v {
        s += (x - m) * (x - m);
    }
    (s / v.len() as f64).sqrt()
}

pub fn naive_gmsd(
    r: &[f64],
    d: &[f64],
    w: usize,
    h: usize,
    c: f64,
    downsample: bool,
) -> NaiveResult {
    let (r, d, w, h) = if downsample {
        let (r2, ow, oh) = naive_downsample(r, w, h);
        let (d2, _, _) = naive_downsample(d, w, h);
        (r2, d2, ow, oh)
    } else {
        (r.to_vec(), d.to_vec(), w, h)
    };
    let mr = naive_magnitude(&r, w, h);
    let md = naive_magnitude(&d, w, h);
    let mut map = Vec::with_capacity(w * h);
    for i in 0..w * h {
        map.push((2.0 * mr[i] * md[i] + c) / (mr[i] * mr[i] + md[i] * md[i] + c));
    }
    let gmsm = naive_mean(&map);
    let gmsd = naive_population_std(&map);
    NaiveResult { map, gmsm, gmsd }
}

/// Rank of each element by counting smaller elements (assumes no ties).
pub fn naive_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| 1.0 + v.iter().filter(|b| *b < a).count() as f64)
        .collect()
}

/// `1 - 6 Σd² / (n (n² - 1))`, valid without ties.
pub fn naive_spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (naive_ranks(a), naive_ranks(b));
    let n = a.len() as f64;
    let d2: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - y) * (x - y)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Raw-moment form `(nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²))`.
pub fn naive_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
}

pub fn naive_rmse(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]).powi(2);
    }
    (s / a.len() as f64).sqrt()
}

/// F(d1, d2) density.
pub fn f_density(x: f64, d1: f64, d2: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    if x <= 0.0 {
        return 0.0;
    }
    let ln_b = ln_gamma(d1 / 2.0) + ln_gamma(d2 / 2.0) - ln_gamma((d1 + d2) / 2.0);
    let ln = 0.5 * d1 * (d1 / d2).ln() + (0.5 * d1 - 1.0) * x.ln()
        - 0.5 * (d1 + d2) * (1.0 + d1 * x / d2).ln()
        - ln_b;
    ln.exp()
}

/// F CDF by composite Simpson quadrature of the density over `[0, x]`.
pub fn f_cdf_quadrature(x: f64, d1: f64, d2: f64) -> f64 {
    let n = 20_000;
    let h = x / n as f64;
    let mut s = f_density(0.0, d1, d2) + f_density(x, d1, d2);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f_density(i as f64 * h, d1, d2);
    }
    s * h / 3.0
}
