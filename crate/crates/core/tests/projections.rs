use ms_swd::projections::{sample_projections, ProjectionSet};
use proptest::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

#[test]
fn coordinate_means_vanish() {
    let (count, side) = (10_000, 11);
    let set = sample_projections(0, count, side).unwrap();
    let d = set.kernel_len();
    let bound = 3.0 / ((d * count) as f64).sqrt();
    let mut sums = vec![0.0; d];
    for k in set.kernels() {
        for (s, w) in sums.iter_mut().zip(k) {
            *s += w;
        }
    }
    let worst = sums.iter().map(|s| (s / count as f64).abs()).fold(0.0, f64::max);
    assert!(worst <= bound, "largest coordinate mean {worst} exceeds {bound}");
}

#[test]
fn distinct_kernels_are_nearly_orthogonal() {
    let set = sample_projections(1, 300, 11).unwrap();
    let d = set.kernel_len() as f64;
    let (mut total, mut n, mut worst) = (0.0, 0, 0.0f64);
    for i in 0..set.count() {
        for j in i + 1..set.count() {
            let dot: f64 = set.kernel(i).iter().zip(set.kernel(j)).map(|(a, b)| a * b).sum();
            total += dot.abs();
            worst = worst.max(dot.abs());
            n += 1;
        }
    }
    // |<w_i, w_j>| has mean about sqrt(2 / (pi d)) and standard deviation about 1/sqrt(d).
    let expected = (2.0 / (std::f64::consts::PI * d)).sqrt();
    let mean = total / n as f64;
    assert!((mean - expected).abs() < 0.05 * expected, "mean |dot| {mean}, expected {expected}");
    assert!(worst < 6.0 / d.sqrt(), "max |dot| {worst}");
}

#[test]
fn projection_onto_fixed_direction_has_sphere_marginal() {
    let (count, side) = (10_000, 11);
    let set = sample_projections(7, count, side).unwrap();
    let d = set.kernel_len();
    // A fixed unit direction that is not a coordinate axis.
    let raw: Vec<f64> = (0..d).map(|i| ((i * 37 % 11) as f64 - 5.0) + 0.5).collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: Vec<f64> = raw.iter().map(|v| v / norm).collect();
    let mut t: Vec<f64> = set
        .kernels()
        .map(|k| (k.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() + 1.0) / 2.0)
        .collect();
    t.sort_by(f64::total_cmp);
    // (1 + <w, u>) / 2 ~ Beta((d - 1) / 2, (d - 1) / 2) for w uniform on the sphere.
    let a = (d as f64 - 1.0) / 2.0;
    let beta = Beta::new(a, a).unwrap();
    let n = t.len() as f64;
    let ks = t
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = beta.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // Asymptotic two-sided Kolmogorov-Smirnov critical value at alpha = 0.001.
    let critical = 1.9495 / n.sqrt();
    assert!(ks < critical, "KS statistic {ks} >= {critical}");
}

#[test]
fn binary_export_header_and_payload() {
    let set = sample_projections(99, 3, 5).unwrap();
    let mut buf = Vec::new();
    set.write_to(&mut buf).unwrap();
    assert_eq!(&buf[..8], b"MSWDPROJ");
    assert_eq!(u64::from_le_bytes(buf[12..20].try_into().unwrap()), 99);
    assert_eq!(u32::from_le_bytes(buf[20..24].try_into().unwrap()), 3);
    assert_eq!(u32::from_le_bytes(buf[24..28].try_into().unwrap()), 5);
    assert_eq!(buf.len(), 28 + 3 * 75 * 4);
    let back = ProjectionSet::read_from(buf.as_slice()).unwrap();
    for (a, b) in back.weights().iter().zip(set.weights()) {
        assert_eq!(*a, *b as f32 as f64);
    }
    assert!(ProjectionSet::read_from(&buf[..40]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernels_are_unit_and_deterministic(seed in any::<u64>(), count in 1usize..20, half in 0usize..7) {
        let side = 2 * half + 1;
        let a = sample_projections(seed, count, side).unwrap();
        prop_assert_eq!(&a, &sample_projections(seed, count, side).unwrap());
        for k in a.kernels() {
            let n = k.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() <= 1e-6);
        }
        prop_assert_eq!(a.kernel_len(), 3 * side * side);
    }

    #[test]
    fn kernel_depends_only_on_its_index(seed in any::<u64>(), count in 2usize..30) {
        let long = sample_projections(seed, count, 3).unwrap();
        let short = sample_projections(seed, 1, 3).unwrap();
        prop_assert_eq!(long.kernel(0), short.kernel(0));
    }
}
