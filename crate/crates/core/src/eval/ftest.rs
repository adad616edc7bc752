//! Left-tailed F-test on regression residuals.
//!
//! Model A is judged better than model B when the ratio of their residual
//! sample variances falls in the lower `alpha` tail of the F distribution
//! with `(n_a − 1, n_b − 1)` degrees of freedom.

use serde::Serialize;

use crate::error::{Error, Result};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// CDF of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let z = d1 * x / (d1 * x + d2);
    regularized_incomplete_beta(d1 / 2.0, d2 / 2.0, z)
}

/// Quantile of the F distribution, by bisection on the CDF.
pub fn f_quantile(p: f64, d1: f64, d2: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while f_cdf(hi, d1, d2) < p {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_cdf(mid, d1, d2) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Sample variance with divisor `n − 1`.
pub fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FTestOutcome {
    pub statistic: f64,
    pub critical_value: f64,
    pub df: (usize, usize),
    /// H = 1: model A's residuals are significantly smaller than model B's.
    pub better: bool,
}

impl FTestOutcome {
    pub fn h(&self) -> u8 {
        self.better as u8
    }
}

pub fn f_test_better(residuals_a: &[f64], residuals_b: &[f64], alpha: f64) -> Result<FTestOutcome> {
    for r in [residuals_a, residuals_b] {
        if r.len() < 2 {
            return Err(Error::NotEnoughSamples {
                have: r.len(),
                need: 2,
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite residual".into()));
        }
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 0.5], got {alpha}"
        )));
    }
    let (va, vb) = (sample_variance(residuals_a), sample_variance(residuals_b));
    if va == 0.0 || vb == 0.0 {
        return Err(Error::Degenerate("residuals have zero variance".into()));
    }
    let df = (residuals_a.len() - 1, residuals_b.len() - 1);
    let statistic = va / vb;
    let critical_value = f_quantile(alpha, df.0 as f64, df.1 as f64);
    Ok(FTestOutcome {
        statistic,
        critical_value,
        df,
        better: statistic < critical_value,
    })
}

/// Pairwise H matrix over a set of residual vectors: entry `[i][j]` is 1
/// when model `i` is significantly better than model `j`.
pub fn significance_matrix(residuals: &[Vec<f64>], alpha: f64) -> Result<Vec<Vec<u8>>> {
    let n = residuals.len();
    let mut out = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i][j] = f_test_better(&residuals[i], &residuals[j], alpha)?.h();
            }
        }
    }
    Ok(out)
}
