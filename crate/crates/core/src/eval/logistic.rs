//! Five-parameter logistic mapping from objective scores to the subjective
//! scale, and its least-squares fit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::simplex::{self, SimplexOptions};
use super::stats::linear_fit;
use crate::error::{Error, Result};

/// Exponent arguments are clamped to this magnitude before `exp`.
const MAX_EXP_ARG: f64 = 700.0;

const JITTERED_STARTS: usize = 3;
const JITTER_SEED: u64 = 0x6d5d_0007;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub beta: [f64; 5],
}

impl LogisticParams {
    pub fn new(beta1: f64, beta2: f64, beta3: f64, beta4: f64, beta5: f64) -> Self {
        Self {
            beta: [beta1, beta2, beta3, beta4, beta5],
        }
    }

    /// Pure linear map `beta4·q + beta5`.
    pub fn linear(slope: f64, intercept: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, slope, intercept)
    }

    pub fn is_finite(&self) -> bool {
        self.beta.iter().all(|b| b.is_finite())
    }
}

/// Which logistic term to use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogisticForm {
    /// `β1·(1/2 − 1/(1 + exp(β2(q − β3)))) + β4·q + β5`
    #[default]
    Standard,
    /// `β1·(1/2 − 1/exp(β2(q − β3))) + β4·q + β5`, which is unbounded
    /// as the exponent goes negative.
    Literal,
}

impl LogisticForm {
    #[inline]
    pub fn eval(self, q: f64, p: &LogisticParams) -> f64 {
        let [b1, b2, b3, b4, b5] = p.beta;
        let t = (b2 * (q - b3)).clamp(-MAX_EXP_ARG, MAX_EXP_ARG);
        let term = match self {
            LogisticForm::Standard => 0.5 - 1.0 / (1.0 + t.exp()),
            LogisticForm::Literal => 0.5 - (-t).exp(),
        };
        b1 * term + b4 * q + b5
    }
}

pub fn logistic_apply(q: &[f64], params: &LogisticParams, form: LogisticForm) -> Vec<f64> {
    q.iter().map(|&v| form.eval(v, params)).collect()
}

fn sse(q: &[f64], s: &[f64], p: &LogisticParams, form: LogisticForm) -> f64 {
    q.iter()
        .zip(s)
        .map(|(&x, &y)| {
            let r = form.eval(x, p) - y;
            r * r
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub params: LogisticParams,
    /// Root mean square residual of the fitted curve.
    pub rmse: f64,
    /// Simplex iterations summed over all starts.
    pub iterations: usize,
    /// True when no simplex run beat the plain least-squares line.
    pub linear_fallback: bool,
}

/// The starting point: full-range logistic step centred on the mean score,
/// on top of the least-squares line.
pub fn initial_params(q: &[f64], s: &[f64]) -> Result<LogisticParams> {
    let (qmin, qmax) = min_max(q);
    let (smin, smax) = min_max(s);
    if qmax == qmin {
        return Err(Error::ConstantInput);
    }
    let (slope, intercept) = linear_fit(q, s)?;
    let qmean = q.iter().sum::<f64>() / q.len() as f64;
    Ok(LogisticParams::new(
        smax - smin,
        10.0 / (qmax - qmin),
        qmean,
        slope,
        intercept,
    ))
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Fits the logistic map by Nelder–Mead on the sum of squared residuals.
///
/// Runs from the initial guess and from three deterministic jittered copies
/// of it, and keeps the best result. The least-squares line (a member of
/// the family with `β1 = 0`) is always a candidate, so the fit is never
/// worse than a linear regression.
pub fn logistic_fit(q: &[f64], s: &[f64], form: LogisticForm) -> Result<LogisticFit> {
    if q.len() != s.len() {
        return Err(Error::LengthMismatch(q.len(), s.len()));
    }
    if q.len() < 5 {
        return Err(Error::NotEnoughSamples {
            have: q.len(),
            need: 5,
        });
    }
    if q.iter().chain(s).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite score".into()));
    }
    let init = initial_params(q, s)?;
    let (slope, intercept) = (init.beta[3], init.beta[4]);
    let linear = LogisticParams::linear(slope, intercept);

    let mut starts = vec![init];
    let mut rng = ChaCha8Rng::seed_from_u64(JITTER_SEED);
    for _ in 0..JITTERED_STARTS {
        let mut p = init;
        for b in p.beta.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *b *= 1.0 + 0.3 * z;
        }
        starts.push(p);
    }

    let objective = |x: &[f64]| {
        let p = LogisticParams {
            beta: x.try_into().expect("five parameters"),
        };
        sse(q, s, &p, form)
    };

    let mut best = (linear, sse(q, s, &linear, form));
    let mut linear_fallback = true;
    let mut iterations = 0;
    for start in starts {
        let r = refine(&objective, &start.beta, &mut iterations);
        if r.1 < best.1 {
            best = (
                LogisticParams {
                    beta: r.0.try_into().expect("five parameters"),
                },
                r.1,
            );
            linear_fallback = false;
        }
    }

    if !best.1.is_finite() || !best.0.is_finite() {
        return Err(Error::FitFailure("objective is not finite".into()));
    }
    Ok(LogisticFit {
        params: best.0,
        rmse: (best.1 / q.len() as f64).sqrt(),
        iterations,
        linear_fallback,
    })
}

/// Repeats simplex runs from the latest optimum until a restart no longer
/// improves the objective by more than the relative tolerance, or the
/// iteration budget is spent.
fn refine(objective: &impl Fn(&[f64]) -> f64, x0: &[f64], total: &mut usize) -> (Vec<f64>, f64) {
    let opts = SimplexOptions::default();
    let mut budget = opts.max_iter;
    let mut x = x0.to_vec();
    let mut fx = objective(&x);
    if !fx.is_finite() {
        fx = f64::INFINITY;
    }
    while budget > 0 {
        let r = simplex::minimize(
            objective,
            &x,
            SimplexOptions {
                max_iter: budget,
                ..opts
            },
        );
        budget -= r.iterations;
        *total += r.iterations;
        let improved = fx - r.f;
        if r.f < fx {
            x = r.x;
            fx = r.f;
        }
        let progressed = improved > opts.rel_tol * fx.abs() + 1e-300;
        if r.iterations == 0 || !progressed {
            break;
        }
    }
    (x, fx)
}
