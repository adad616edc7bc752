//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion, and exits non-zero if any failed.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use gmsd_core::bench::{bench_metric, compare_metrics, BenchOptions};
use gmsd_core::eval::{
    f_test_better, logistic_apply, logistic_fit, pearson, rmse, spearman, weighted_average,
    EvalSummary, LogisticForm, LogisticParams,
};
use gmsd_core::gmsd::{gms_map, pool_std, prewitt_magnitude, GmsMap};
use gmsd_core::image::{
    apply_distortion, random_image, textured_image, DistortionKind, DistortionSpec,
};
use gmsd_core::{gmsd_index, LuminanceImage, Metric, MetricConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || {
        format!("took {elapsed:.2?}, limit {limit:?}")
    })?;
    Ok(elapsed)
}

fn retained() -> MetricConfig {
    MetricConfig {
        retain_map: true,
        ..MetricConfig::default()
    }
}

fn map_of(r: &gmsd_core::QualityResult) -> &GmsMap {
    r.map.as_ref().expect("map retained")
}

fn c01_identity_and_range() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_id: f64 = 0.0;
    let mut max_gmsd: f64 = 0.0;
    for seed in 0..100u64 {
        let (w, h) = (rng.random_range(12..80), rng.random_range(12..80));
        let x = random_image(w, h, seed).unwrap();
        let r = gmsd_index(&x, &x, &retained()).unwrap();
        worst_id = worst_id.max(r.gmsd.abs()).max((r.gmsm - 1.0).abs());

        let y = random_image(w, h, seed + 1000).unwrap();
        let other = gmsd_index(&x, &y, &retained()).unwrap();
        for res in [&r, &other] {
            let bad = map_of(res)
                .values()
                .iter()
                .find(|&&v| !(v > 0.0 && v <= 1.0));
            ensure(bad.is_none(), || {
                format!("seed {seed}: map value {bad:?} outside (0,1]")
            })?;
            ensure(res.gmsd >= 0.0 && res.gmsd <= 0.5, || {
                format!("seed {seed}: gmsd {} outside [0, 0.5]", res.gmsd)
            })?;
        }
        max_gmsd = max_gmsd.max(other.gmsd);
    }
    ensure(worst_id <= 1e-12, || format!("identity error {worst_id:e}"))?;
    let t = within_time(start, Duration::from_secs(10))?;
    Ok(format!(
        "identity error {worst_id:e}, max gmsd {max_gmsd:.4}, {t:.2?}"
    ))
}

fn c02_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let a = random_image(32, 32, 2 * seed).unwrap();
        let b = random_image(32, 32, 2 * seed + 1).unwrap();
        for downsample in [true, false] {
            let cfg = MetricConfig {
                downsample,
                ..retained()
            };
            let fast = gmsd_index(&a, &b, &cfg).unwrap();
            let slow = naive_gmsd(a.samples(), b.samples(), 32, 32, cfg.c, downsample);
            let fmap = map_of(&fast).values();
            ensure(fmap.len() == slow.map.len(), || "map size differs".into())?;
            for (p, q) in fmap.iter().zip(&slow.map) {
                worst = worst.max((p - q).abs());
            }
            worst = worst
                .max((fast.gmsm - slow.gmsm).abs())
                .max((fast.gmsd - slow.gmsd).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max abs difference {worst:e}"))?;
    let t = within_time(start, Duration::from_secs(30))?;
    Ok(format!(
        "max abs difference {worst:e} over 200 runs, {t:.2?}"
    ))
}

fn c03_hand_values() -> Outcome {
    let ramp = LuminanceImage::from_fn(10, 10, |x, _| 0.1 * x as f64).unwrap();
    let m = prewitt_magnitude(&ramp).unwrap();
    let mut worst: f64 = 0.0;
    for y in 1..9 {
        for x in 1..9 {
            worst = worst.max((m.values()[y * 10 + x] - 0.2).abs());
        }
    }
    // the brute-force correlation agrees with g_x = -0.2, g_y = 0 inside
    let gx = naive_correlate(ramp.samples(), 10, 10, &HX);
    let gy = naive_correlate(ramp.samples(), 10, 10, &HY);
    ensure((gx[55] + 0.2).abs() < 1e-12 && gy[55].abs() < 1e-12, || {
        format!("oracle gradients {} {}", gx[55], gy[55])
    })?;
    ensure(worst < 1e-12, || format!("ramp magnitude error {worst:e}"))?;

    // centre of a 3x3 image with columns (0, 0, v): g_x = -v, g_y = 0
    let edge = |v: f64| LuminanceImage::from_fn(3, 3, |x, _| if x == 2 { v } else { 0.0 }).unwrap();
    let ma = prewitt_magnitude(&edge(0.5)).unwrap();
    let mb = prewitt_magnitude(&edge(0.25)).unwrap();
    ensure(
        (ma.values()[4] - 0.5).abs() < 1e-15 && (mb.values()[4] - 0.25).abs() < 1e-15,
        || format!("centre magnitudes {} {}", ma.values()[4], mb.values()[4]),
    )?;
    let g = gms_map(&ma, &mb, 0.0026).unwrap().values()[4];
    ensure((g - 0.80165).abs() <= 1e-5, || {
        format!("GMS(0.5, 0.25) = {g}")
    })?;

    let sd = pool_std(&[1.0, 0.5]).unwrap();
    ensure(sd == 0.25, || format!("pool_std = {sd}"))?;
    Ok(format!(
        "ramp 0.2 (err {worst:e}), GMS(0.5,0.25) = {g:.5}, pool_std = {sd}"
    ))
}

fn c04_scale_covariance() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let pairs = [
            (
                random_image(40, 36, seed).unwrap(),
                random_image(40, 36, seed + 50).unwrap(),
            ),
            {
                let t = textured_image(48, 48, seed).unwrap();
                let d = apply_distortion(
                    &t,
                    &DistortionSpec::new(DistortionKind::GaussianBlur, 1.0, 0).unwrap(),
                )
                .unwrap();
                (t, d)
            },
        ];
        for (a, b) in &pairs {
            let base = gmsd_index(a, b, &retained()).unwrap();
            for s in [0.25, 0.5, 2.0] {
                let cfg = MetricConfig {
                    c: retained().c * s * s,
                    ..retained()
                };
                let r = gmsd_index(&a.scaled(s).unwrap(), &b.scaled(s).unwrap(), &cfg).unwrap();
                worst = worst
                    .max((r.gmsd - base.gmsd).abs())
                    .max((r.gmsm - base.gmsm).abs());
                for (p, q) in map_of(&r).values().iter().zip(map_of(&base).values()) {
                    worst = worst.max((p - q).abs());
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max change {worst:e}"))?;
    Ok(format!("max change {worst:e} over 120 scaled pairs"))
}

fn c05_monotonicity() -> Outcome {
    let cfg = MetricConfig::default();
    let awn = [0.01, 0.03, 0.05, 0.10];
    let blur = [0.5, 1.0, 2.0, 4.0];
    let reference = textured_image(128, 128, 7).unwrap();
    let mut min_gap = f64::INFINITY;
    for seed in 0..20u64 {
        let mut last = 0.0;
        for (k, &level) in awn.iter().enumerate() {
            let d = apply_distortion(
                &reference,
                &DistortionSpec::new(DistortionKind::Awn, level, seed).unwrap(),
            )
            .unwrap();
            let g = gmsd_index(&reference, &d, &cfg).unwrap().gmsd;
            ensure(k == 0 || g > last, || {
                format!("AWN seed {seed}: gmsd {g} at {level} not above {last}")
            })?;
            if k > 0 {
                min_gap = min_gap.min(g - last);
            }
            last = g;
        }

        let textured = textured_image(128, 128, 1000 + seed).unwrap();
        let mut last = 0.0;
        for (k, &level) in blur.iter().enumerate() {
            let d = apply_distortion(
                &textured,
                &DistortionSpec::new(DistortionKind::GaussianBlur, level, seed).unwrap(),
            )
            .unwrap();
            let g = gmsd_index(&textured, &d, &cfg).unwrap().gmsd;
            ensure(k == 0 || g > last, || {
                format!("blur seed {seed}: gmsd {g} at {level} not above {last}")
            })?;
            if k > 0 {
                min_gap = min_gap.min(g - last);
            }
            last = g;
        }
    }
    Ok(format!(
        "strictly increasing in all 40 ladders, smallest step {min_gap:.4}"
    ))
}

fn c06_protocol_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(5..150);
        let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0 - 3.0).collect();
        worst = worst
            .max((spearman(&a, &b).unwrap() - naive_spearman(&a, &b)).abs())
            .max((pearson(&a, &b).unwrap() - naive_pearson(&a, &b)).abs())
            .max((rmse(&a, &b).unwrap() - naive_rmse(&a, &b)).abs());
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    let r = spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap();
    ensure(r == -0.5, || format!("spearman example gave {r}"))?;
    ensure(
        naive_spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]) == -0.5,
        || "oracle disagrees on the hand example".into(),
    )?;
    Ok(format!(
        "max deviation {worst:e} over 1000 vector pairs; example = {r}"
    ))
}

fn c07_regression_recovery() -> Outcome {
    let truth = LogisticParams::new(1.0, 0.5, 0.0, 0.2, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let q: Vec<f64> = (0..200).map(|_| rng.random_range(-10.0..10.0)).collect();
    let s: Vec<f64> = q
        .iter()
        .map(|&x| {
            let z: f64 = rng.sample(StandardNormal);
            LogisticForm::Standard.eval(x, &truth) + 0.01 * z
        })
        .collect();
    let fit = logistic_fit(&q, &s, LogisticForm::Standard).unwrap();
    let refit = rmse(&logistic_apply(&q, &fit.params, LogisticForm::Standard), &s).unwrap();
    ensure(refit <= 0.015, || format!("noisy refit rmse {refit}"))?;

    let ident = logistic_fit(&q, &q, LogisticForm::Standard).unwrap();
    let id_rmse = rmse(
        &logistic_apply(&q, &ident.params, LogisticForm::Standard),
        &q,
    )
    .unwrap();
    ensure(id_rmse <= 1e-6, || {
        format!("identity refit rmse {id_rmse:e}")
    })?;
    Ok(format!("noisy rmse {refit:.5}, identity rmse {id_rmse:e}"))
}

fn c08_weighted_average() -> Outcome {
    let entry = |srocc: f64, w: f64| {
        (
            EvalSummary {
                srocc,
                plcc: srocc,
                rmse: 0.0,
                params: LogisticParams::linear(1.0, 0.0),
                n: w as usize,
            },
            w,
        )
    };
    let (s, _) = weighted_average(&[
        entry(0.960, 779.0),
        entry(0.957, 886.0),
        entry(0.891, 1700.0),
    ])
    .unwrap();
    ensure((s - 0.924).abs() <= 0.001, || format!("weighted SRC {s}"))?;
    Ok(format!("weighted SRC {s:.5}"))
}

fn c09_f_test() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut draw = |sigma: f64| -> Vec<f64> {
        (0..100)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect()
    };
    let a = draw(1.0);
    let b = draw(2.0);
    let ab = f_test_better(&a, &b, 0.05).unwrap();
    let ba = f_test_better(&b, &a, 0.05).unwrap();
    ensure(ab.h() == 1 && ba.h() == 0, || {
        format!("H(a,b) = {}, H(b,a) = {}", ab.h(), ba.h())
    })?;
    // the critical value really is the 5% point of F(99, 99)
    let tail = f_cdf_quadrature(ab.critical_value, 99.0, 99.0);
    ensure((tail - 0.05).abs() < 1e-6, || {
        format!("quadrature CDF at critical value {tail}")
    })?;
    ensure((ab.critical_value - 0.717).abs() < 0.005, || {
        format!("critical value {}", ab.critical_value)
    })?;
    Ok(format!(
        "F = {:.4} < {:.4} -> H=1; swapped F = {:.4} -> H=0",
        ab.statistic, ab.critical_value, ba.statistic
    ))
}

fn c10_complexity() -> Outcome {
    let start = Instant::now();
    let opts = BenchOptions {
        repeats: 11,
        ..Default::default()
    };
    let report =
        bench_metric(Metric::Gmsd, &[(256, 256), (512, 512), (1024, 1024)], &opts).unwrap();
    let k = report.scaling_exponent;
    ensure((0.85..=1.15).contains(&k), || {
        format!("scaling exponent {k:.3}, times {:?}", report.median_times)
    })?;
    let times = &report.median_times;
    ensure(times.windows(2).all(|p| p[1] >= 0.9 * p[0]), || {
        format!("median times not monotone in pixel count: {times:?}")
    })?;
    let t = compare_metrics(
        &[Metric::Psnr, Metric::Gmsm, Metric::Gmsd],
        (512, 512),
        &BenchOptions {
            repeats: 41,
            ..Default::default()
        },
    )
    .unwrap();
    ensure(t[0] < t[1] && t[1] <= t[2], || {
        format!("psnr {:.3e}s, gmsm {:.3e}s, gmsd {:.3e}s", t[0], t[1], t[2])
    })?;
    let elapsed = within_time(start, Duration::from_secs(120))?;
    Ok(format!(
        "exponent {k:.3}; 512²: psnr {:.2e}s < gmsm {:.2e}s <= gmsd {:.2e}s; {elapsed:.2?}",
        t[0], t[1], t[2]
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("C1 identity and range", c01_identity_and_range),
        ("C2 oracle equivalence", c02_oracle_equivalence),
        ("C3 hand-computed kernel values", c03_hand_values),
        ("C4 scale covariance", c04_scale_covariance),
        ("C5 distortion monotonicity", c05_monotonicity),
        ("C6 evaluation protocol oracles", c06_protocol_oracles),
        ("C7 regression recovery", c07_regression_recovery),
        ("C8 weighted average", c08_weighted_average),
        ("C9 F-test decisions", c09_f_test),
        ("C10 complexity and timing order", c10_complexity),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "C11 database reproduction: optional, see tests/databases.rs (needs user-supplied manifests)"
    );
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
