//! sRGB <-> CIELAB under D65 with the 2 degree observer.
//!
//! Decoding uses the piecewise IEC 61966-2-1 transfer function. The
//! RGB -> XYZ matrix is derived from the sRGB primaries and the D65
//! chromaticity (0.3127, 0.3290); the reference white is the image of
//! `(1, 1, 1)` under that matrix, so white maps to `a* = b* = 0` exactly.

use std::sync::LazyLock;

use rayon::prelude::*;

use crate::buffer::{ImageLab, ImageSrgb};
use crate::error::Result;

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_390_799_265_959_5, 0.357_584_339_383_878, 0.180_480_788_401_834_3],
    [0.212_639_005_871_510_36, 0.715_168_678_767_755_9, 0.072_192_315_360_733_71],
    [0.019_330_818_715_591_85, 0.119_194_779_794_625_99, 0.950_532_152_249_660_6],
];

static XYZ_TO_RGB: LazyLock<[[f64; 3]; 3]> = LazyLock::new(|| invert3(&RGB_TO_XYZ));

static WHITE: LazyLock<[f64; 3]> = LazyLock::new(|| {
    let mut w = [0.0; 3];
    for (wi, row) in w.iter_mut().zip(RGB_TO_XYZ.iter()) {
        *wi = row.iter().sum();
    }
    w
});

const DELTA: f64 = 6.0 / 29.0;

/// Inverse sRGB transfer function.
#[inline]
pub fn srgb_decode(v: f64) -> f64 {
    if v <= 0.040_45 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
fn srgb_decode_deriv(v: f64) -> f64 {
    if v <= 0.040_45 {
        1.0 / 12.92
    } else {
        (2.4 / 1.055) * ((v + 0.055) / 1.055).powf(1.4)
    }
}

/// Forward sRGB transfer function.
#[inline]
pub fn srgb_encode(l: f64) -> f64 {
    if l <= 0.003_130_8 {
        12.92 * l
    } else {
        1.055 * l.powf(1.0 / 2.4) - 0.055
    }
}

#[inline]
fn lab_f(t: f64) -> f64 {
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

#[inline]
fn lab_f_deriv(t: f64) -> f64 {
    if t > DELTA * DELTA * DELTA {
        let c = t.cbrt();
        1.0 / (3.0 * c * c)
    } else {
        1.0 / (3.0 * DELTA * DELTA)
    }
}

#[inline]
fn lab_f_inv(f: f64) -> f64 {
    if f > DELTA {
        f * f * f
    } else {
        3.0 * DELTA * DELTA * (f - 4.0 / 29.0)
    }
}

/// Converts one sRGB triplet to `(L*, a*, b*)`.
pub fn srgb_pixel_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_decode);
    let white = &*WHITE;
    let mut f = [0.0; 3];
    for k in 0..3 {
        let xyz = RGB_TO_XYZ[k][0] * lin[0] + RGB_TO_XYZ[k][1] * lin[1] + RGB_TO_XYZ[k][2] * lin[2];
        f[k] = lab_f(xyz / white[k]);
    }
    [116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])]
}

/// Converts one Lab triplet to sRGB, clipping each channel to `[0, 1]`.
pub fn lab_pixel_to_srgb(lab: [f64; 3]) -> [f64; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let f = [fy + lab[1] / 500.0, fy, fy - lab[2] / 200.0];
    let white = &*WHITE;
    let xyz = [0, 1, 2].map(|k| white[k] * lab_f_inv(f[k]));
    let m = &*XYZ_TO_RGB;
    [0, 1, 2].map(|k| {
        let lin = m[k][0] * xyz[0] + m[k][1] * xyz[1] + m[k][2] * xyz[2];
        srgb_encode(lin).clamp(0.0, 1.0)
    })
}

/// Jacobian `d(L*, a*, b*) / d(r, g, b)` at one sRGB triplet; `jac[i][j]`
/// is the derivative of Lab channel `i` with respect to sRGB channel `j`.
pub fn srgb_to_lab_jacobian(rgb: [f64; 3]) -> [[f64; 3]; 3] {
    let lin = rgb.map(srgb_decode);
    let dlin = rgb.map(srgb_decode_deriv);
    let white = &*WHITE;
    // df[k][j] = d f_k / d rgb_j
    let mut df = [[0.0; 3]; 3];
    for k in 0..3 {
        let t = (RGB_TO_XYZ[k][0] * lin[0] + RGB_TO_XYZ[k][1] * lin[1] + RGB_TO_XYZ[k][2] * lin[2])
            / white[k];
        let s = lab_f_deriv(t) / white[k];
        for j in 0..3 {
            df[k][j] = s * RGB_TO_XYZ[k][j] * dlin[j];
        }
    }
    let mut jac = [[0.0; 3]; 3];
    for j in 0..3 {
        jac[0][j] = 116.0 * df[1][j];
        jac[1][j] = 500.0 * (df[0][j] - df[1][j]);
        jac[2][j] = 200.0 * (df[1][j] - df[2][j]);
    }
    jac
}

/// Per-pixel sRGB to CIELAB conversion.
///
/// Input validity (finite, in range) is guaranteed by [`ImageSrgb`]'s
/// constructors, so non-finite pixels are rejected when the image is built.
pub fn srgb_to_lab(img: &ImageSrgb) -> ImageLab {
    let mut out = vec![0.0; img.data().len()];
    out.par_chunks_mut(3)
        .zip(img.data().par_chunks(3))
        .for_each(|(o, p)| o.copy_from_slice(&srgb_pixel_to_lab([p[0], p[1], p[2]])));
    ImageLab::from_parts_unchecked(img.height(), img.width(), out)
}

/// Per-pixel CIELAB to sRGB conversion with channel-wise gamut clipping.
pub fn lab_to_srgb(img: &ImageLab) -> ImageSrgb {
    let mut out = vec![0.0; img.data().len()];
    out.par_chunks_mut(3)
        .zip(img.data().par_chunks(3))
        .for_each(|(o, p)| o.copy_from_slice(&lab_pixel_to_srgb([p[0], p[1], p[2]])));
    ImageSrgb::from_parts_unchecked(img.height(), img.width(), out)
}

/// Checked variant of [`srgb_to_lab`] for raw buffers.
pub fn srgb_buffer_to_lab(height: usize, width: usize, data: Vec<f64>) -> Result<ImageLab> {
    Ok(srgb_to_lab(&ImageSrgb::new(height, width, data)?))
}

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    let inv = 1.0 / det;
    [
        [
            c00 * inv,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv,
        ],
        [
            c01 * inv,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv,
        ],
        [
            c02 * inv,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv,
        ],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn black_and_white() {
        assert_eq!(srgb_pixel_to_lab([0.0; 3]), [0.0, 0.0, 0.0]);
        let w = srgb_pixel_to_lab([1.0; 3]);
        assert!((w[0] - 100.0).abs() < 1e-9);
        assert!(w[1].abs() < 1e-3 && w[2].abs() < 1e-3);
    }

    #[test]
    fn mid_gray_matches_scalar_cie_formula() {
        // Gray has X/Xn = Y/Yn = Z/Zn = decoded value; L* = 116 cbrt(Y) - 16.
        let y: f64 = ((0.5 + 0.055) / 1.055f64).powf(2.4);
        let expected = 116.0 * y.cbrt() - 16.0;
        assert!((expected - 53.389).abs() < 1e-3);
        let lab = srgb_pixel_to_lab([0.5; 3]);
        assert!((lab[0] - expected).abs() < 1e-9, "{lab:?}");
        assert!(lab[1].abs() < 1e-9 && lab[2].abs() < 1e-9);
    }

    #[test]
    fn inverse_special_values() {
        assert_eq!(lab_pixel_to_srgb([0.0, 0.0, 0.0]), [0.0; 3]);
        assert_eq!(lab_pixel_to_srgb([200.0, 0.0, 0.0]), [1.0; 3]);
    }

    #[test]
    fn round_trip_10k_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let v: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let back = lab_pixel_to_srgb(srgb_pixel_to_lab(v));
            for k in 0..3 {
                worst = worst.max((back[k] - v[k]).abs());
            }
        }
        assert!(worst <= 1e-6, "worst round-trip error {worst}");
    }

    #[test]
    fn gray_axis_monotone_and_neutral() {
        let mut prev = -1.0;
        for i in 0..=255 {
            let g = i as f64 / 255.0;
            let lab = srgb_pixel_to_lab([g; 3]);
            assert!(lab[0] > prev);
            assert!(lab[1].abs() <= 1e-6 && lab[2].abs() <= 1e-6);
            prev = lab[0];
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let h = 1e-6;
        for rgb in [[0.2, 0.5, 0.9], [0.01, 0.02, 0.03], [0.7, 0.3, 0.1]] {
            let jac = srgb_to_lab_jacobian(rgb);
            for j in 0..3 {
                let mut up = rgb;
                let mut dn = rgb;
                up[j] += h;
                dn[j] -= h;
                let (lu, ld) = (srgb_pixel_to_lab(up), srgb_pixel_to_lab(dn));
                for i in 0..3 {
                    let fd = (lu[i] - ld[i]) / (2.0 * h);
                    assert!((fd - jac[i][j]).abs() <= 1e-5 * (1.0 + fd.abs()), "{i},{j}");
                }
            }
        }
    }

    #[test]
    fn image_conversion_rejects_nan_at_build_time() {
        let err = srgb_buffer_to_lab(1, 1, vec![0.0, f64::NAN, 0.0]).unwrap_err();
        assert!(err.to_string().contains("channel 1"));
    }

    proptest! {
        #[test]
        fn lightness_stays_in_range(r in 0.0f64..=1.0, g in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let lab = srgb_pixel_to_lab([r, g, b]);
            prop_assert!((0.0..=100.0 + 1e-9).contains(&lab[0]));
        }
    }
}
