use ms_swd::buffer::{ImageLab, ImageSrgb};
use ms_swd::color::{lab_pixel_to_srgb, lab_to_srgb, srgb_pixel_to_lab, srgb_to_lab};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Chromaticity of a primary or white point as an XYZ column with Y = 1.
fn xyz_of(x: f64, y: f64) -> [f64; 3] {
    [x / y, 1.0, (1.0 - x - y) / y]
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// RGB -> XYZ rebuilt from the sRGB primaries and D65 by Cramer's rule.
fn srgb_matrix() -> [[f64; 3]; 3] {
    let cols = [xyz_of(0.64, 0.33), xyz_of(0.30, 0.60), xyz_of(0.15, 0.06)];
    let white = xyz_of(0.3127, 0.3290);
    let p = [0, 1, 2].map(|r| [cols[0][r], cols[1][r], cols[2][r]]);
    let d = det3(p);
    let scale = [0, 1, 2].map(|k| {
        let mut q = p;
        for r in 0..3 {
            q[r][k] = white[r];
        }
        det3(q) / d
    });
    [0, 1, 2].map(|r| [0, 1, 2].map(|k| p[r][k] * scale[k]))
}

/// Direct transcription of the CIE formulas, kept separate from the library.
fn lab_reference(rgb: [f64; 3]) -> [f64; 3] {
    let m = srgb_matrix();
    let lin = rgb.map(|v| if v <= 0.04045 { v / 12.92 } else { ((v + 0.055) / 1.055).powf(2.4) });
    let xyz = [0, 1, 2].map(|r| m[r][0] * lin[0] + m[r][1] * lin[1] + m[r][2] * lin[2]);
    let white = [0, 1, 2].map(|r| m[r][0] + m[r][1] + m[r][2]);
    let f = |t: f64| {
        let d = 6.0 / 29.0;
        if t > d * d * d {
            t.cbrt()
        } else {
            t / (3.0 * d * d) + 4.0 / 29.0
        }
    };
    let (fx, fy, fz) = (f(xyz[0] / white[0]), f(xyz[1] / white[1]), f(xyz[2] / white[2]));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

#[test]
fn anchor_colors() {
    assert_eq!(srgb_pixel_to_lab([0.0; 3]), [0.0, 0.0, 0.0]);
    let white = srgb_pixel_to_lab([1.0; 3]);
    assert!((white[0] - 100.0).abs() < 1e-3 && white[1].abs() < 1e-3 && white[2].abs() < 1e-3);
    let gray = srgb_pixel_to_lab([0.5; 3]);
    assert!((gray[0] - 53.39).abs() < 0.01, "{gray:?}");
    assert_eq!(lab_pixel_to_srgb([0.0; 3]), [0.0; 3]);
    assert_eq!(lab_pixel_to_srgb([200.0, 0.0, 0.0]), [1.0; 3]);
}

#[test]
fn agrees_with_scalar_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let v = [rng.random(), rng.random(), rng.random()];
        let (got, want) = (srgb_pixel_to_lab(v), lab_reference(v));
        for ch in 0..3 {
            assert!((got[ch] - want[ch]).abs() < 1e-9, "{v:?}: {got:?} vs {want:?}");
        }
    }
}

#[test]
fn round_trip_ten_thousand_triplets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let data: Vec<f64> = (0..30_000).map(|_| rng.random()).collect();
    let img = ImageSrgb::new(100, 100, data.clone()).unwrap();
    let back = lab_to_srgb(&srgb_to_lab(&img));
    let worst = back.data().iter().zip(&data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "max round-trip error {worst}");
}

#[test]
fn gray_axis_is_neutral_and_monotone() {
    let mut prev = -1.0;
    for i in 0..=1000 {
        let g = i as f64 / 1000.0;
        let lab = srgb_pixel_to_lab([g; 3]);
        assert!(lab[1].abs() <= 1e-6 && lab[2].abs() <= 1e-6);
        assert!(lab[0] > prev);
        prev = lab[0];
    }
}

#[test]
fn converted_lightness_stays_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data: Vec<f64> = (0..3 * 64 * 64).map(|_| rng.random()).collect();
    let lab = srgb_to_lab(&ImageSrgb::new(64, 64, data).unwrap());
    assert!(lab.pixels().all(|p| (0.0..=100.0).contains(&p[0])));
}

#[test]
fn out_of_gamut_lab_is_clipped() {
    let lab = ImageLab::new(1, 2, vec![50.0, 300.0, -300.0, 150.0, 0.0, 0.0]).unwrap();
    let rgb = lab_to_srgb(&lab);
    assert!(rgb.data().iter().all(|v| (0.0..=1.0).contains(v)));
    assert_eq!(rgb.pixel(0, 1), [1.0; 3]);
}

proptest! {
    #[test]
    fn round_trip_any_in_gamut(r in 0.0f64..=1.0, g in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let back = lab_pixel_to_srgb(srgb_pixel_to_lab([r, g, b]));
        for (x, y) in back.iter().zip([r, g, b]) {
            prop_assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn lightness_monotone_in_gray(a in 0.0f64..1.0, d in 1e-6f64..1.0) {
        let b = (a + d).min(1.0);
        prop_assume!(b > a);
        prop_assert!(srgb_pixel_to_lab([b; 3])[0] > srgb_pixel_to_lab([a; 3])[0]);
    }
}
