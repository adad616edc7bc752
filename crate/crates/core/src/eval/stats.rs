//! Correlation and error measures used to score a metric against
//! subjective ratings.

use crate::error::{Error, Result};

fn check_pair(a: &[f64], b: &[f64], min: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < min {
        return Err(Error::NotEnoughSamples {
            have: a.len(),
            need: min,
        });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite value in input".into()));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson linear correlation: centered dot product over the product of the
/// centered norms.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b, 2)?;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of the ranks they span.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank-order correlation, computed as the Pearson correlation of
/// average ranks so that ties are handled. Without ties this equals
/// `1 - 6 Σd² / (n(n² - 1))`.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b, 2)?;
    pearson(&average_ranks(a), &average_ranks(b))
}

pub fn rmse(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    check_pair(predicted, observed, 1)?;
    let ss: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (p - o) * (p - o))
        .sum();
    Ok((ss / predicted.len() as f64).sqrt())
}

/// Least-squares line `b ≈ slope·a + intercept`.
pub fn linear_fit(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    check_pair(a, b, 2)?;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
    }
    if saa == 0.0 {
        return Err(Error::ConstantInput);
    }
    let slope = sab / saa;
    Ok((slope, mb - slope * ma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_examples() {
        assert_eq!(
            spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(),
            1.0
        );
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(), -0.5);
        assert_eq!(
            spearman(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]).unwrap(),
            -1.0
        );
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0, 3.0]),
            vec![4.0, 1.0, 4.0, 2.0, 4.0]
        );
        // ties: Pearson of average ranks
        let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r - 0.9486832980505138).abs() < 1e-12);
    }

    #[test]
    fn pearson_examples() {
        let s = [0.3, 1.2, -0.4, 2.5, 0.9];
        let affine: Vec<f64> = s.iter().map(|v| 2.0 * v + 7.0).collect();
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        assert!((pearson(&affine, &s).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&neg, &s).unwrap() + 1.0).abs() < 1e-15);
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.9819805060619657).abs() < 1e-12);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 3.5355339059327378).abs() < 1e-15);
        assert_eq!(
            rmse(&[0.0, 1.0], &[3.0, 4.0]).unwrap(),
            rmse(&[3.0, 4.0], &[0.0, 1.0]).unwrap()
        );
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch(2, 1))
        ));
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ConstantInput)
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0], &[5.0, 5.0]),
            Err(Error::ConstantInput)
        ));
        assert!(matches!(
            pearson(&[1.0], &[1.0]),
            Err(Error::NotEnoughSamples { .. })
        ));
        assert!(rmse(&[], &[]).is_err());
        assert!(pearson(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
            (3usize..40).prop_flat_map(|n| {
                (
                    proptest::collection::vec(-100.0f64..100.0, n),
                    proptest::collection::vec(-100.0f64..100.0, n),
                )
            })
        }

        proptest! {
            #[test]
            fn spearman_invariant_under_monotone_maps((a, b) in pairs()) {
                prop_assume!(pearson(&a, &b).is_ok());
                let r = spearman(&a, &b).unwrap();
                let ea: Vec<f64> = a.iter().map(|v| (v / 50.0).exp()).collect();
                let cb: Vec<f64> = b.iter().map(|v| v * v * v + 3.0 * v).collect();
                prop_assert!((spearman(&ea, &cb).unwrap() - r).abs() < 1e-12);
            }

            #[test]
            fn pearson_affine((a, b) in pairs(), k in 0.1f64..10.0, off in -5.0f64..5.0) {
                prop_assume!(pearson(&a, &b).is_ok());
                let r = pearson(&a, &b).unwrap();
                let pos: Vec<f64> = a.iter().map(|v| k * v + off).collect();
                let neg: Vec<f64> = a.iter().map(|v| -k * v + off).collect();
                prop_assert!((pearson(&pos, &b).unwrap() - r).abs() < 1e-10);
                prop_assert!((pearson(&neg, &b).unwrap() + r).abs() < 1e-10);
            }
        }
    }
}
