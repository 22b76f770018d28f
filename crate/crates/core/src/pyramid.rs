//! Gaussian pyramid with the separable binomial filter `(1, 4, 6, 4, 1) / 16`.
//!
//! Level 1 is the input itself. Every further level filters the previous
//! one with reflect boundaries and keeps samples `0, R, 2R, ...` along each
//! axis, which gives `floor(H / R^(i-1)) x floor(W / R^(i-1))` levels.

use crate::buffer::{reflect, ImageLab};
use crate::error::{Error, Result};

pub const BINOMIAL5: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
const RADIUS: isize = 2;

#[derive(Clone, Debug)]
pub struct Pyramid {
    levels: Vec<ImageLab>,
    factor: usize,
}

impl Pyramid {
    pub fn levels(&self) -> &[ImageLab] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> &ImageLab {
        &self.levels[i]
    }

    pub fn scale_count(&self) -> usize {
        self.levels.len()
    }

    pub fn downsample_factor(&self) -> usize {
        self.factor
    }

    pub fn into_levels(self) -> Vec<ImageLab> {
        self.levels
    }
}

/// Dimensions of every level, or the underflow error for the first level
/// that would be smaller than `min_side` in either axis.
pub fn level_dims(
    height: usize,
    width: usize,
    scales: usize,
    factor: usize,
    min_side: usize,
) -> Result<Vec<(usize, usize)>> {
    if scales == 0 || factor < 2 {
        return Err(Error::InvalidConfig(format!(
            "pyramid needs scales >= 1 and factor >= 2 (got {scales}, {factor})"
        )));
    }
    let min_side = min_side.max(1);
    let mut dims = Vec::with_capacity(scales);
    let (mut h, mut w) = (height, width);
    for level in 1..=scales {
        // Filtering a level needs at least RADIUS + 1 samples per axis for reflection.
        let too_small_to_filter = level > 1 && dims.last().is_some_and(|&(ph, pw): &(usize, usize)| {
            ph <= RADIUS as usize || pw <= RADIUS as usize
        });
        if h < min_side || w < min_side || h == 0 || w == 0 || too_small_to_filter {
            return Err(Error::PyramidUnderflow {
                level,
                height: h,
                width: w,
                min_side,
            });
        }
        dims.push((h, w));
        h /= factor;
        w /= factor;
    }
    Ok(dims)
}

/// Builds a `scales`-level pyramid. `min_side` is the smallest admissible
/// level side (the projection patch side when used by the metric).
pub fn gaussian_pyramid(
    img: &ImageLab,
    scales: usize,
    factor: usize,
    min_side: usize,
) -> Result<Pyramid> {
    let dims = level_dims(img.height(), img.width(), scales, factor, min_side)?;
    let mut levels = Vec::with_capacity(scales);
    levels.push(img.clone());
    for &(h, w) in &dims[1..] {
        let prev = levels.last().expect("non-empty");
        let next = reduce(prev.data(), prev.height(), prev.width(), factor);
        debug_assert_eq!(next.len(), h * w * 3);
        levels.push(ImageLab::from_parts_unchecked(h, w, next));
    }
    Ok(Pyramid { levels, factor })
}

/// Filter + subsample one interleaved 3-channel level.
pub(crate) fn reduce(src: &[f64], h: usize, w: usize, factor: usize) -> Vec<f64> {
    let (oh, ow) = (h / factor, w / factor);
    // horizontal pass: h x ow
    let mut tmp = vec![0.0; h * ow * 3];
    for r in 0..h {
        let row = &src[r * w * 3..(r + 1) * w * 3];
        let out = &mut tmp[r * ow * 3..(r + 1) * ow * 3];
        for x in 0..ow {
            let center = (x * factor) as isize;
            let mut acc = [0.0; 3];
            for (t, &k) in BINOMIAL5.iter().enumerate() {
                let sx = reflect(center + t as isize - RADIUS, w) * 3;
                for ch in 0..3 {
                    acc[ch] += k * row[sx + ch];
                }
            }
            out[x * 3..x * 3 + 3].copy_from_slice(&acc);
        }
    }
    // vertical pass: oh x ow
    let stride = ow * 3;
    let mut out = vec![0.0; oh * stride];
    for y in 0..oh {
        let center = (y * factor) as isize;
        let dst = &mut out[y * stride..(y + 1) * stride];
        for (t, &k) in BINOMIAL5.iter().enumerate() {
            let sy = reflect(center + t as isize - RADIUS, h);
            let src_row = &tmp[sy * stride..(sy + 1) * stride];
            for (d, s) in dst.iter_mut().zip(src_row) {
                *d += k * s;
            }
        }
    }
    out
}

/// Adjoint of [`reduce`]: maps a gradient on the `floor(h/R) x floor(w/R)`
/// level back onto the `h x w` level it was computed from, accumulating into `dst`.
pub(crate) fn reduce_adjoint(grad: &[f64], h: usize, w: usize, factor: usize, dst: &mut [f64]) {
    let (oh, ow) = (h / factor, w / factor);
    debug_assert_eq!(grad.len(), oh * ow * 3);
    debug_assert_eq!(dst.len(), h * w * 3);
    let stride = ow * 3;
    let mut tmp = vec![0.0; h * stride];
    for y in 0..oh {
        let center = (y * factor) as isize;
        let g_row = &grad[y * stride..(y + 1) * stride];
        for (t, &k) in BINOMIAL5.iter().enumerate() {
            let sy = reflect(center + t as isize - RADIUS, h);
            let t_row = &mut tmp[sy * stride..(sy + 1) * stride];
            for (d, g) in t_row.iter_mut().zip(g_row) {
                *d += k * g;
            }
        }
    }
    for r in 0..h {
        let t_row = &tmp[r * stride..(r + 1) * stride];
        let d_row = &mut dst[r * w * 3..(r + 1) * w * 3];
        for x in 0..ow {
            let center = (x * factor) as isize;
            for (t, &k) in BINOMIAL5.iter().enumerate() {
                let sx = reflect(center + t as isize - RADIUS, w) * 3;
                for ch in 0..3 {
                    d_row[sx + ch] += k * t_row[x * 3 + ch];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lab(h: usize, w: usize, seed: u64) -> ImageLab {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageLab::from_fn(h, w, |_, _| {
            [
                rng.random_range(0.0..100.0),
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
            ]
        })
        .unwrap()
    }

    #[test]
    fn default_dimensions() {
        let img = ImageLab::filled(256, 256, [50.0, 0.0, 0.0]).unwrap();
        let p = gaussian_pyramid(&img, 5, 2, 11).unwrap();
        let sides: Vec<_> = p.levels().iter().map(|l| l.dims()).collect();
        assert_eq!(sides, vec![(256, 256), (128, 128), (64, 64), (32, 32), (16, 16)]);
    }

    #[test]
    fn odd_dimensions_floor() {
        let img = random_lab(37, 50, 1);
        let p = gaussian_pyramid(&img, 3, 2, 3).unwrap();
        assert_eq!(p.level(1).dims(), (18, 25));
        assert_eq!(p.level(2).dims(), (9, 12));
    }

    #[test]
    fn constant_survives() {
        let c = [42.5, -7.25, 13.0];
        let img = ImageLab::filled(64, 48, c).unwrap();
        let p = gaussian_pyramid(&img, 4, 2, 3).unwrap();
        for level in p.levels() {
            for px in level.pixels() {
                for ch in 0..3 {
                    assert!((px[ch] - c[ch]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_level_is_bit_exact_copy() {
        let img = random_lab(20, 20, 3);
        let p = gaussian_pyramid(&img, 1, 2, 11).unwrap();
        assert_eq!(p.level(0), &img);
    }

    #[test]
    fn impulse_gives_subsampled_kernel_taps() {
        // Impulse at (16, 16) of a 32x32 image; level 2 sample (y, x) reads
        // source rows/cols 2y-2..=2y+2, so only y, x in {7, 8, 9} are hit.
        let mut data = vec![0.0; 32 * 32 * 3];
        data[(16 * 32 + 16) * 3] = 1.0;
        let img = ImageLab::new(32, 32, data).unwrap();
        let l2 = gaussian_pyramid(&img, 2, 2, 1).unwrap().into_levels().remove(1);
        let taps = |d: isize| -> f64 {
            // tap index t with 2y + t - 2 = 16
            let t = 16 - 2 * d + 2;
            if (0..5).contains(&t) {
                BINOMIAL5[t as usize]
            } else {
                0.0
            }
        };
        for y in 0..16 {
            for x in 0..16 {
                let expect = taps(y as isize) * taps(x as isize);
                let got = l2.pixel(y, x)[0];
                assert!((got - expect).abs() < 1e-15, "({y},{x}) {got} vs {expect}");
            }
        }
        assert!((l2.pixel(8, 8)[0] - 36.0 / 256.0).abs() < 1e-15);
        assert!((l2.pixel(7, 8)[0] - 6.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn mean_roughly_preserved() {
        for seed in 0..5 {
            // offset chroma so that a relative tolerance is meaningful
            let img = random_lab(64, 64, seed);
            let img = ImageLab::from_fn(64, 64, |r, c| {
                let p = img.pixel(r, c);
                [p[0], p[1] + 60.0, p[2] + 60.0]
            })
            .unwrap();
            let p = gaussian_pyramid(&img, 4, 2, 3).unwrap();
            for pair in p.levels().windows(2) {
                let (a, b) = (pair[0].channel_means(), pair[1].channel_means());
                for ch in 0..3 {
                    assert!((a[ch] - b[ch]).abs() <= 0.02 * a[ch].abs(), "{a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn shift_by_factor_shifts_next_level_by_one() {
        let base = random_lab(40, 40, 9);
        let shifted = ImageLab::from_fn(40, 40, |r, c| base.pixel(r, c.saturating_sub(2))).unwrap();
        let a = gaussian_pyramid(&base, 2, 2, 1).unwrap().into_levels().remove(1);
        let b = gaussian_pyramid(&shifted, 2, 2, 1).unwrap().into_levels().remove(1);
        for y in 3..17 {
            for x in 3..17 {
                assert_eq!(a.pixel(y, x), b.pixel(y, x + 1));
            }
        }
    }

    #[test]
    fn underflow_names_level() {
        let img = random_lab(64, 64, 0);
        match gaussian_pyramid(&img, 5, 2, 11) {
            Err(Error::PyramidUnderflow { level, height, .. }) => {
                assert_eq!(level, 4);
                assert_eq!(height, 8);
            }
            other => panic!("expected underflow, got {other:?}"),
        }
    }

    #[test]
    fn adjoint_identity() {
        // <reduce(x), g> == <x, reduce_adjoint(g)>
        let (h, w) = (13, 10);
        let x = random_lab(h, w, 4);
        let y = reduce(x.data(), h, w, 2);
        let g = random_lab(h / 2, w / 2, 5);
        let mut back = vec![0.0; h * w * 3];
        reduce_adjoint(g.data(), h, w, 2, &mut back);
        let lhs: f64 = y.iter().zip(g.data()).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.data().iter().zip(&back).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }
}
