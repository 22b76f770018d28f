//! End-to-end multiscale sliced Wasserstein distance and spatial maps.
//!
//! Both images are converted to CIELAB, decomposed into Gaussian pyramids
//! and projected onto one shared set of random patch kernels. Each
//! (scale, kernel) pair contributes the sorted l1 transport cost between the
//! two projected sample sets; the score is the mean over all pairs.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::buffer::{ImageLab, ImageSrgb};
use crate::color::srgb_to_lab;
use crate::error::{Error, Result};
use crate::projections::{sample_projections, ProjectionSet, DEFAULT_PATCH_SIDE, DEFAULT_PROJECTIONS};
use crate::pyramid::gaussian_pyramid;
use crate::swd::{project_block, projection_blocks, sort_rows, sorted_l1_mean};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Pyramid levels `K`.
    pub scales: usize,
    /// Downsampling factor `R` between levels.
    pub factor: usize,
    /// Odd side length of the square projection patches.
    pub patch_side: usize,
    /// Number of random kernels `P`.
    pub projections: usize,
    pub seed: u64,
    /// When false the metric runs on raw sRGB values.
    pub convert_to_lab: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            scales: 5,
            factor: 2,
            patch_side: DEFAULT_PATCH_SIDE,
            projections: DEFAULT_PROJECTIONS,
            seed: 0,
            convert_to_lab: true,
        }
    }
}

impl MetricConfig {
    pub fn with_scales(mut self, scales: usize) -> Self {
        self.scales = scales;
        self
    }

    pub fn with_projections(mut self, projections: usize) -> Self {
        self.projections = projections;
        self
    }

    pub fn with_patch_side(mut self, patch_side: usize) -> Self {
        self.patch_side = patch_side;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_lab(mut self, convert_to_lab: bool) -> Self {
        self.convert_to_lab = convert_to_lab;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.scales < 1 {
            return bad(format!("scales must be >= 1 (got {})", self.scales));
        }
        if self.factor < 2 {
            return bad(format!("downsampling factor must be >= 2 (got {})", self.factor));
        }
        if self.patch_side < 3 || self.patch_side % 2 == 0 {
            return bad(format!("patch side must be odd and >= 3 (got {})", self.patch_side));
        }
        if self.projections < 1 {
            return bad("at least one projection is required".into());
        }
        Ok(())
    }

    /// Stable hex digest of every field, seed included.
    pub fn fingerprint(&self) -> String {
        let canonical = format!(
            "ms-swd/v1;scales={};factor={};patch_side={};projections={};seed={};lab={}",
            self.scales, self.factor, self.patch_side, self.projections, self.seed, self.convert_to_lab
        );
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A color-difference prediction and the configuration that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdScore {
    pub value: f64,
    pub fingerprint: String,
}

impl fmt::Display for CdScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Per-pixel attribution of the score at full input resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct CdMap {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl CdMap {
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Mean over the window `rows x cols`.
    pub fn region_mean(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> f64 {
        let n = rows.len() * cols.len();
        let mut acc = 0.0;
        for r in rows {
            for c in cols.clone() {
                acc += self.get(r, c);
            }
        }
        acc / n as f64
    }
}

/// The image the metric actually measures: CIELAB, or the raw sRGB values
/// relabelled when conversion is disabled.
pub fn working_image(img: &ImageSrgb, cfg: &MetricConfig) -> ImageLab {
    if cfg.convert_to_lab {
        srgb_to_lab(img)
    } else {
        ImageLab::from_parts_unchecked(img.height(), img.width(), img.data().to_vec())
    }
}

/// Sum of per-(scale, kernel) costs in scale-major, kernel-ascending order,
/// normalized by `K * P`.
pub(crate) fn reduce_slots(slots: &[f64], scales: usize, projections: usize) -> f64 {
    debug_assert_eq!(slots.len(), scales * projections);
    let mut total = 0.0;
    for &s in slots {
        total += s;
    }
    total / (scales * projections) as f64
}

/// A configured metric with its projection set sampled once.
#[derive(Clone, Debug)]
pub struct Metric {
    cfg: MetricConfig,
    projs: ProjectionSet,
}

impl Metric {
    pub fn new(cfg: MetricConfig) -> Result<Self> {
        cfg.validate()?;
        let projs = sample_projections(cfg.seed, cfg.projections, cfg.patch_side)?;
        Ok(Self { cfg, projs })
    }

    /// Uses an explicit projection set, e.g. one read back from disk.
    pub fn with_projections(mut cfg: MetricConfig, projs: ProjectionSet) -> Result<Self> {
        cfg.projections = projs.count();
        cfg.patch_side = projs.patch_side();
        cfg.seed = projs.seed();
        cfg.validate()?;
        Ok(Self { cfg, projs })
    }

    pub fn config(&self) -> &MetricConfig {
        &self.cfg
    }

    pub fn projections(&self) -> &ProjectionSet {
        &self.projs
    }

    pub(crate) fn pyramid_levels(&self, img: &ImageLab) -> Result<Vec<ImageLab>> {
        Ok(gaussian_pyramid(img, self.cfg.scales, self.cfg.factor, self.cfg.patch_side)?.into_levels())
    }

    /// Score between two images in the working space.
    pub fn score_lab(&self, x: &ImageLab, y: &ImageLab) -> Result<f64> {
        x.ensure_same_dims(y)?;
        let (px, py) = rayon::join(|| self.pyramid_levels(x), || self.pyramid_levels(y));
        let (px, py) = (px?, py?);
        let p = self.cfg.projections;
        let mut slots = Vec::with_capacity(self.cfg.scales * p);
        for (lx, ly) in px.iter().zip(&py) {
            let m = lx.pixel_count();
            for block in projection_blocks(m, p) {
                let (a, b) = rayon::join(
                    || sorted_block(lx, &self.projs, block.clone()),
                    || sorted_block(ly, &self.projs, block.clone()),
                );
                let (a, b) = (a?, b?);
                slots.extend(a.chunks_exact(m).zip(b.chunks_exact(m)).map(|(r, s)| sorted_l1_mean(r, s)));
            }
        }
        Ok(reduce_slots(&slots, self.cfg.scales, p))
    }

    pub fn score(&self, x: &ImageSrgb, y: &ImageSrgb) -> Result<CdScore> {
        x.ensure_same_dims(y)?;
        let value = self.score_lab(&working_image(x, &self.cfg), &working_image(y, &self.cfg))?;
        Ok(CdScore {
            value,
            fingerprint: self.cfg.fingerprint(),
        })
    }

    /// Precomputes the sorted projections of one image for repeated comparisons.
    pub fn signature(&self, img: &ImageSrgb) -> Result<Signature> {
        self.signature_lab(&working_image(img, &self.cfg))
    }

    pub fn signature_lab(&self, img: &ImageLab) -> Result<Signature> {
        let levels = self.pyramid_levels(img)?;
        let p = self.cfg.projections;
        let mut scales = Vec::with_capacity(levels.len());
        for level in &levels {
            let m = level.pixel_count();
            let mut sorted = Vec::with_capacity(m * p);
            for block in projection_blocks(m, p) {
                sorted.extend(sorted_block(level, &self.projs, block)?);
            }
            scales.push(SortedLevel {
                height: level.height(),
                width: level.width(),
                sorted,
            });
        }
        Ok(Signature {
            fingerprint: self.cfg.fingerprint(),
            scales,
            projections: p,
        })
    }

    /// Spatial color-difference map whose mean equals the score.
    ///
    /// For every scale and kernel, the cost of the k-th ranked pair is
    /// credited to the pixel of `x` holding rank k. Per-scale maps are
    /// replicated to full resolution with each level pixel's mass spread
    /// evenly over the block of full-resolution pixels it covers.
    pub fn map(&self, x: &ImageSrgb, y: &ImageSrgb) -> Result<CdMap> {
        x.ensure_same_dims(y)?;
        let (lx, ly) = (working_image(x, &self.cfg), working_image(y, &self.cfg));
        let (px, py) = (self.pyramid_levels(&lx)?, self.pyramid_levels(&ly)?);
        let (h, w) = x.dims();
        let norm = 1.0 / (self.cfg.scales * self.cfg.projections) as f64;
        let mut out = vec![0.0; h * w];
        for (i, (a, b)) in px.iter().zip(&py).enumerate() {
            let m = a.pixel_count();
            let mut mass = vec![0.0; m];
            for block in projection_blocks(m, self.cfg.projections) {
                let xa = project_block(a, &self.projs, block.clone())?;
                let mut xb = project_block(b, &self.projs, block.clone())?;
                sort_rows(&mut xb, m);
                let per_kernel: Vec<Vec<f64>> = xa
                    .par_chunks(m)
                    .zip(xb.par_chunks(m))
                    .map(|(ra, sb)| {
                        let order = argsort(ra);
                        let mut credit = vec![0.0; m];
                        for (k, &pos) in order.iter().enumerate() {
                            credit[pos as usize] = (ra[pos as usize] - sb[k]).abs() / m as f64;
                        }
                        credit
                    })
                    .collect();
                for credit in per_kernel {
                    for (acc, c) in mass.iter_mut().zip(credit) {
                        *acc += c;
                    }
                }
            }
            let (lh, lw) = a.dims();
            let shift = i as u32;
            let level_of = |full: usize, n: usize| -> usize {
                (full / (self.cfg.factor.pow(shift))).min(n - 1)
            };
            let mut block_size = vec![0usize; m];
            for r in 0..h {
                for c in 0..w {
                    block_size[level_of(r, lh) * lw + level_of(c, lw)] += 1;
                }
            }
            let full = (h * w) as f64;
            for r in 0..h {
                for c in 0..w {
                    let p = level_of(r, lh) * lw + level_of(c, lw);
                    out[r * w + c] += norm * mass[p] * full / block_size[p] as f64;
                }
            }
        }
        Ok(CdMap {
            height: h,
            width: w,
            data: out,
        })
    }
}

/// Indices that sort `v` ascending; the sort is stable, so ties keep index order.
pub(crate) fn argsort(v: &[f64]) -> Vec<u32> {
    let mut keyed: Vec<(f64, u32)> = v.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
    radsort::sort_by_key(&mut keyed, |p| p.0);
    keyed.into_iter().map(|(_, i)| i).collect()
}

pub(crate) fn sorted_block(
    level: &ImageLab,
    projs: &ProjectionSet,
    block: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    let mut v = project_block(level, projs, block)?;
    sort_rows(&mut v, level.pixel_count());
    Ok(v)
}

#[derive(Clone, Debug)]
pub(crate) struct SortedLevel {
    pub height: usize,
    pub width: usize,
    /// `P x M`, each row sorted ascending.
    pub sorted: Vec<f64>,
}

/// Sorted projections of one image at every scale. Distances between two
/// signatures equal [`Metric::score`] on the underlying images bit for bit.
#[derive(Clone, Debug)]
pub struct Signature {
    fingerprint: String,
    pub(crate) scales: Vec<SortedLevel>,
    projections: usize,
}

impl Signature {
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Sorted samples of kernel `j` at scale `i`.
    pub fn sorted_samples(&self, i: usize, j: usize) -> &[f64] {
        let s = &self.scales[i];
        let m = s.height * s.width;
        &s.sorted[j * m..(j + 1) * m]
    }

    pub fn distance(&self, other: &Signature) -> Result<f64> {
        if self.fingerprint != other.fingerprint {
            return Err(Error::InvalidConfig(
                "signatures were computed with different configurations".into(),
            ));
        }
        let (a, b) = (&self.scales[0], &other.scales[0]);
        if (a.height, a.width) != (b.height, b.width) {
            return Err(Error::DimensionMismatch(a.height, a.width, b.height, b.width));
        }
        let p = self.projections;
        let mut slots = Vec::with_capacity(self.scales.len() * p);
        for (la, lb) in self.scales.iter().zip(&other.scales) {
            let m = la.height * la.width;
            slots.extend(
                la.sorted
                    .chunks_exact(m)
                    .zip(lb.sorted.chunks_exact(m))
                    .map(|(r, s)| sorted_l1_mean(r, s)),
            );
        }
        Ok(reduce_slots(&slots, self.scales.len(), p))
    }
}

/// Multiscale sliced Wasserstein distance between two same-size sRGB images.
pub fn ms_swd(x: &ImageSrgb, y: &ImageSrgb, cfg: &MetricConfig) -> Result<CdScore> {
    Metric::new(cfg.clone())?.score(x, y)
}

/// Spatial map of [`ms_swd`]; its mean equals the score.
pub fn cd_map(x: &ImageSrgb, y: &ImageSrgb, cfg: &MetricConfig) -> Result<CdMap> {
    Metric::new(cfg.clone())?.map(x, y)
}
