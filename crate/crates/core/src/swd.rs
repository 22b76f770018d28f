//! Patch projection and sort-based one-dimensional transport.
//!
//! Projecting a level onto a kernel is a stride-1 cross-correlation over
//! all three channels with reflect padding, so every pixel is the center of
//! one patch. The patches are never materialized for the whole level: rows
//! are unfolded in chunks and multiplied against the kernel matrix.

use std::ops::Range;

use ndarray::{linalg::general_mat_mul, ArrayView2, ArrayViewMut2, ShapeBuilder};
use rayon::prelude::*;

use crate::buffer::{reflect, ImageLab};
use crate::error::{Error, Result};
use crate::projections::ProjectionSet;

/// Target number of patches unfolded per chunk.
const CHUNK_PATCHES: usize = 2048;
/// Upper bound on projected values held per block (`projections x pixels`).
const BLOCK_VALUES: usize = 1 << 24;

/// One projection of one level, flattened row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedSamples {
    pub values: Vec<f64>,
    pub scale_index: usize,
    pub projection_index: usize,
}

/// Reflect-padded copy of a level.
pub(crate) struct Padded {
    pub data: Vec<f64>,
    pub height: usize,
    pub width: usize,
}

pub(crate) fn check_kernel_fits(h: usize, w: usize, side: usize) -> Result<()> {
    if h < side || w < side {
        return Err(Error::KernelTooLarge {
            height: h,
            width: w,
            side,
        });
    }
    Ok(())
}

pub(crate) fn pad_reflect(level: &ImageLab, radius: usize) -> Padded {
    let (h, w) = level.dims();
    let (ph, pw) = (h + 2 * radius, w + 2 * radius);
    let src = level.data();
    let mut data = vec![0.0; ph * pw * 3];
    let r = radius as isize;
    for py in 0..ph {
        let sy = reflect(py as isize - r, h);
        let dst = &mut data[py * pw * 3..(py + 1) * pw * 3];
        for px in 0..pw {
            let sx = reflect(px as isize - r, w);
            let s = (sy * w + sx) * 3;
            dst[px * 3..px * 3 + 3].copy_from_slice(&src[s..s + 3]);
        }
    }
    Padded {
        data,
        height: ph,
        width: pw,
    }
}

/// Rows of output per chunk for an image `width` wide.
pub(crate) fn chunk_rows(width: usize) -> usize {
    (CHUNK_PATCHES / width).max(1)
}

/// Unfolds the patches centered on output rows `rows` into `cols`
/// (`rows.len() * width` patches by `3 * side^2`).
pub(crate) fn unfold_rows(padded: &Padded, width: usize, side: usize, rows: Range<usize>, cols: &mut [f64]) {
    let d = 3 * side * side;
    let seg = 3 * side;
    let pw = padded.width;
    let mut patch = 0;
    for y in rows {
        for x in 0..width {
            let dst = &mut cols[patch * d..(patch + 1) * d];
            for dy in 0..side {
                let s = ((y + dy) * pw + x) * 3;
                dst[dy * seg..(dy + 1) * seg].copy_from_slice(&padded.data[s..s + seg]);
            }
            patch += 1;
        }
    }
}

/// Inverse of [`unfold_rows`] for gradients: adds every patch row of `cols`
/// back onto the padded buffer.
pub(crate) fn fold_rows(cols: &[f64], width: usize, side: usize, rows: Range<usize>, padded: &mut Padded) {
    let d = 3 * side * side;
    let seg = 3 * side;
    let pw = padded.width;
    let mut patch = 0;
    for y in rows {
        for x in 0..width {
            let src = &cols[patch * d..(patch + 1) * d];
            for dy in 0..side {
                let s = ((y + dy) * pw + x) * 3;
                for (a, b) in padded.data[s..s + seg].iter_mut().zip(&src[dy * seg..(dy + 1) * seg]) {
                    *a += b;
                }
            }
            patch += 1;
        }
    }
}

/// Adds the padded buffer onto the `h x w` image it was padded from.
pub(crate) fn unpad_adjoint(padded: &Padded, h: usize, w: usize, radius: usize, dst: &mut [f64]) {
    let r = radius as isize;
    for py in 0..padded.height {
        let sy = reflect(py as isize - r, h);
        for px in 0..padded.width {
            let sx = reflect(px as isize - r, w);
            let s = (py * padded.width + px) * 3;
            let d = (sy * w + sx) * 3;
            for ch in 0..3 {
                dst[d + ch] += padded.data[s + ch];
            }
        }
    }
}

/// Projection blocks used for a level with `m` pixels. Every code path that
/// projects a level walks the same blocks, so results agree bit for bit.
pub(crate) fn projection_blocks(m: usize, count: usize) -> Vec<Range<usize>> {
    let per = (BLOCK_VALUES / m.max(1)).clamp(1, count);
    (0..count)
        .step_by(per)
        .map(|s| s..(s + per).min(count))
        .collect()
}

/// Projects `level` onto kernels `block` of `projs`. Returns a
/// `block.len() x M` row-major matrix (unsorted).
pub(crate) fn project_block(level: &ImageLab, projs: &ProjectionSet, block: Range<usize>) -> Result<Vec<f64>> {
    let side = projs.patch_side();
    let (h, w) = level.dims();
    check_kernel_fits(h, w, side)?;
    let d = projs.kernel_len();
    let m = h * w;
    let p = block.len();
    let weights = ArrayView2::from_shape((p, d), &projs.weights()[block.start * d..block.end * d])
        .expect("kernel matrix shape");
    let padded = pad_reflect(level, side / 2);
    let rows_per = chunk_rows(w);
    let mut cols = vec![0.0; rows_per * w * d];
    let mut values = vec![0.0; p * m];
    for start in (0..h).step_by(rows_per) {
        let rows = start..(start + rows_per).min(h);
        let cm = rows.len() * w;
        unfold_rows(&padded, w, side, rows.clone(), &mut cols[..cm * d]);
        let patches = ArrayView2::from_shape((cm, d), &cols[..cm * d]).expect("patch matrix shape");
        let base = start * w;
        let mut out = ArrayViewMut2::from_shape((p, cm).strides((m, 1)), &mut values[base..])
            .expect("output view");
        general_mat_mul(1.0, &weights, &patches.t(), 0.0, &mut out);
    }
    Ok(values)
}

/// Gradient of the projections with respect to the level: `grad` is
/// `block.len() x M`, the result is added onto `dst` (`h x w x 3`).
pub(crate) fn project_block_adjoint(
    h: usize,
    w: usize,
    projs: &ProjectionSet,
    block: Range<usize>,
    grad: &[f64],
    dst: &mut [f64],
) {
    let side = projs.patch_side();
    let radius = side / 2;
    let d = projs.kernel_len();
    let m = h * w;
    let p = block.len();
    debug_assert_eq!(grad.len(), p * m);
    let weights = ArrayView2::from_shape((p, d), &projs.weights()[block.start * d..block.end * d])
        .expect("kernel matrix shape");
    let mut padded = Padded {
        data: vec![0.0; (h + 2 * radius) * (w + 2 * radius) * 3],
        height: h + 2 * radius,
        width: w + 2 * radius,
    };
    let rows_per = chunk_rows(w);
    let mut cols = vec![0.0; rows_per * w * d];
    for start in (0..h).step_by(rows_per) {
        let rows = start..(start + rows_per).min(h);
        let cm = rows.len() * w;
        let base = start * w;
        let g = ArrayView2::from_shape((p, cm).strides((m, 1)), &grad[base..]).expect("grad view");
        let mut dcols = ArrayViewMut2::from_shape((cm, d), &mut cols[..cm * d]).expect("patch grad view");
        general_mat_mul(1.0, &g.t(), &weights, 0.0, &mut dcols);
        fold_rows(&cols[..cm * d], w, side, rows, &mut padded);
    }
    unpad_adjoint(&padded, h, w, radius, dst);
}

/// Sorts each length-`m` row in place (radix sort on the IEEE key order).
pub(crate) fn sort_rows(values: &mut [f64], m: usize) {
    values.par_chunks_mut(m).for_each(radsort::sort);
}

/// Mean absolute difference of two already sorted, equal-length vectors.
#[inline]
pub(crate) fn sorted_l1_mean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    sum / a.len() as f64
}

/// Projects a level onto kernel `j`.
pub fn project_image(level: &ImageLab, projs: &ProjectionSet, j: usize) -> Result<ProjectedSamples> {
    if j >= projs.count() {
        return Err(Error::InvalidConfig(format!(
            "projection index {j} out of range for {} kernels",
            projs.count()
        )));
    }
    let values = project_block(level, &projs.single(j), 0..1)?;
    Ok(ProjectedSamples {
        values,
        scale_index: 0,
        projection_index: j,
    })
}

/// One-dimensional Wasserstein-1 distance between two equal-size empirical
/// measures: the mean absolute difference of the sorted samples.
pub fn wd1d(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(Error::Degenerate("empty sample vectors".into()));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    radsort::sort(&mut xs);
    radsort::sort(&mut ys);
    Ok(sorted_l1_mean(&xs, &ys))
}

/// Exact minimum-cost matching by enumerating all `n!` pairings.
/// Reference implementation for small `n` only.
pub fn wd1d_oracle(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::LengthMismatch(n, y.len()));
    }
    if n > 10 {
        return Err(Error::OracleTooLarge(n));
    }
    if n == 0 {
        return Err(Error::Degenerate("empty sample vectors".into()));
    }
    // Heap's algorithm over permutations of y's indices.
    let mut perm: Vec<usize> = (0..n).collect();
    let cost = |perm: &[usize]| -> f64 { x.iter().zip(perm).map(|(a, &j)| (a - y[j]).abs()).sum() };
    let mut best = cost(&perm);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best / n as f64)
}

/// Per-projection distances between two same-size levels, in projection order.
pub(crate) fn level_distances(a: &ImageLab, b: &ImageLab, projs: &ProjectionSet) -> Result<Vec<f64>> {
    a.ensure_same_dims(b)?;
    let m = a.pixel_count();
    let mut out = Vec::with_capacity(projs.count());
    for block in projection_blocks(m, projs.count()) {
        let (xa, xb) = rayon::join(
            || project_block(a, projs, block.clone()),
            || project_block(b, projs, block.clone()),
        );
        let (mut xa, mut xb) = (xa?, xb?);
        sort_rows(&mut xa, m);
        sort_rows(&mut xb, m);
        out.extend(xa.chunks_exact(m).zip(xb.chunks_exact(m)).map(|(r, s)| sorted_l1_mean(r, s)));
    }
    Ok(out)
}

/// Sliced Wasserstein distance at a single scale, averaged over the kernels.
pub fn swd_at_scale(a: &ImageLab, b: &ImageLab, projs: &ProjectionSet) -> Result<f64> {
    let d = level_distances(a, b, projs)?;
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}
