mod common;

use common::{oracle_psnr, oracle_ssim, rng};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use trisr_core::metrics::{evaluate, nrmse, psnr, ssim3d, MetricConfig, MetricReport, PSNR_CAP};
use trisr_core::Volume;

fn random_volume(r: &mut ChaCha8Rng, dims: [usize; 3]) -> Volume {
    Volume::from_fn(dims, [1.0; 3], |_, _, _| r.random_range(0.0..1.0)).unwrap()
}

fn perturbed(r: &mut ChaCha8Rng, v: &Volume, amp: f32) -> Volume {
    let data = v.data().iter().map(|x| x + amp * r.random_range(-1.0f32..1.0)).collect();
    Volume::new(v.dims(), [1.0; 3], data).unwrap()
}

#[test]
fn psnr_and_nrmse_match_definitions() {
    let mut r = rng(31);
    for _ in 0..50 {
        let dims = [r.random_range(2..10), r.random_range(2..10), r.random_range(2..10)];
        let a = random_volume(&mut r, dims);
        let b = perturbed(&mut r, &a, 0.2);
        let range = r.random_range(0.5..3.0);
        assert!((psnr(&a, &b, range).unwrap() - oracle_psnr(&a, &b, range)).abs() < 1e-9);
        let (lo, hi) = a.intensity_range();
        let rmse = (a.data().iter().zip(b.data()).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum::<f64>()
            / a.len() as f64)
            .sqrt();
        assert!((nrmse(&a, &b).unwrap() - rmse / (hi - lo) as f64).abs() < 1e-9);
    }
}

#[test]
fn ssim_matches_sliding_window_oracle() {
    let mut r = rng(32);
    for i in 0..20 {
        let dims = [r.random_range(7..12), r.random_range(7..12), r.random_range(7..12)];
        let a = random_volume(&mut r, dims);
        let b = perturbed(&mut r, &a, 0.05 * (i % 5 + 1) as f32);
        let got = ssim3d(&a, &b, &MetricConfig::default()).unwrap();
        let want = oracle_ssim(&a, &b, 7, 1.0);
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    let a = random_volume(&mut r, [9, 8, 10]);
    let b = perturbed(&mut r, &a, 0.3);
    let cfg = MetricConfig { window: 3, data_range: 2.0, ..MetricConfig::default() };
    assert!((ssim3d(&a, &b, &cfg).unwrap() - oracle_ssim(&a, &b, 3, 2.0)).abs() < 1e-6);
}

#[test]
fn constant_offset_of_a_tenth_is_twenty_db() {
    let a = Volume::from_fn([8, 8, 8], [1.0; 3], |w, h, d| ((w + h + d) % 2) as f32 * 0.5).unwrap();
    let b = Volume::new(a.dims(), [1.0; 3], a.data().iter().map(|v| v + 0.1).collect()).unwrap();
    assert!((psnr(&a, &b, 1.0).unwrap() - 20.0).abs() < 1e-5);
}

#[test]
fn inverted_checkerboard_has_negative_ssim() {
    let a = Volume::from_fn([8, 8, 8], [1.0; 3], |w, h, d| ((w + h + d) % 2) as f32).unwrap();
    let b = Volume::new(a.dims(), [1.0; 3], a.data().iter().map(|v| 1.0 - v).collect()).unwrap();
    let s = ssim3d(&a, &b, &MetricConfig::default()).unwrap();
    assert!(s < 0.0, "{s}");
}

#[test]
fn psnr_falls_as_noise_grows() {
    let mut r = rng(33);
    let a = random_volume(&mut r, [10, 10, 10]);
    let mut last = PSNR_CAP + 1.0;
    for k in 1..=10 {
        let b = perturbed(&mut rng(34), &a, 0.02 * k as f32);
        let p = psnr(&a, &b, 1.0).unwrap();
        assert!(p < last);
        last = p;
    }
}

#[test]
fn identical_volumes_hit_the_cap() {
    let a = random_volume(&mut rng(35), [8, 8, 8]);
    let rep = evaluate(&a, &a, &MetricConfig::default()).unwrap();
    assert_eq!(rep.psnr, PSNR_CAP);
    assert!((rep.ssim - 1.0).abs() < 1e-12);
    assert_eq!(rep.nrmse, 0.0);
    assert_eq!(rep.csv_row().split(',').count(), MetricReport::CSV_HEADER.split(',').count());
}

#[test]
fn mismatched_dims_are_rejected() {
    let a = Volume::zeros([8, 8, 8], [1.0; 3]).unwrap();
    let b = Volume::zeros([8, 8, 9], [1.0; 3]).unwrap();
    assert!(matches!(psnr(&a, &b, 1.0), Err(trisr_core::Error::DimMismatch(..))));
}

fn permute(v: &Volume, p: [usize; 3]) -> Volume {
    let src = v.dims();
    let dims = [src[p[0]], src[p[1]], src[p[2]]];
    Volume::from_fn(dims, [1.0; 3], |w, h, d| {
        let mut s = [0; 3];
        for (axis, &i) in [w, h, d].iter().enumerate() {
            s[p[axis]] = i;
        }
        v.get(s[0], s[1], s[2])
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn metrics_ignore_axis_order(seed in 0u64..1000, perm in 0usize..6) {
        let p = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]][perm];
        let mut r = rng(seed);
        let a = random_volume(&mut r, [7, 8, 9]);
        let b = perturbed(&mut r, &a, 0.2);
        let (pa, pb) = (permute(&a, p), permute(&b, p));
        let cfg = MetricConfig::default();
        let (x, y) = (evaluate(&a, &b, &cfg).unwrap(), evaluate(&pa, &pb, &cfg).unwrap());
        prop_assert!((x.psnr - y.psnr).abs() < 1e-9);
        prop_assert!((x.ssim - y.ssim).abs() < 1e-9);
        prop_assert!((x.nrmse - y.nrmse).abs() < 1e-12);
    }

    #[test]
    fn ssim_is_bounded_and_symmetric(seed in 0u64..1000, amp in 0.0f32..2.0) {
        let mut r = rng(seed);
        let a = random_volume(&mut r, [7, 7, 8]);
        let b = perturbed(&mut r, &a, amp);
        let cfg = MetricConfig::default();
        let s = ssim3d(&a, &b, &cfg).unwrap();
        prop_assert!((-1.0..=1.0 + 1e-12).contains(&s));
        prop_assert!((s - ssim3d(&b, &a, &cfg).unwrap()).abs() < 1e-12);
    }
}
