//! Reverse-mode gradient of the metric with respect to its second image,
//! and Adam-based descent for reference recovery and color transfer.
//!
//! The backward pass mirrors the forward one stage by stage: the sorted l1
//! term sends `sign(y_(k) - x_(k)) / (K P M)` to the pixel holding rank k,
//! the projection adjoint correlates that with the kernels and folds the
//! patches back, and the pyramid adjoint carries coarse levels to level 1.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::buffer::{ImageLab, ImageSrgb};
use crate::color::{lab_to_srgb, srgb_to_lab_jacobian};
use crate::error::{Error, Result};
use crate::metric::{argsort, reduce_slots, working_image, CdScore, Metric, MetricConfig, Signature};
use crate::pyramid::reduce_adjoint;
use crate::swd::{project_block, project_block_adjoint, projection_blocks, sorted_l1_mean};

/// Gradient with respect to every channel of every pixel, interleaved like
/// the image it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl GradientField {
    pub fn linf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, g| m.max(g.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|g| g.is_finite())
    }
}

/// Evaluates score and gradient against one fixed reference.
///
/// The reference's sorted projections are computed once, so each call only
/// projects, sorts and back-propagates the moving image. Scores are bit
/// identical to [`Metric::score_lab`].
pub struct GradientEvaluator {
    metric: Metric,
    reference: Signature,
}

impl GradientEvaluator {
    pub fn new(metric: Metric, reference: &ImageLab) -> Result<Self> {
        let reference_sig = metric.signature_lab(reference)?;
        Ok(Self {
            metric,
            reference: reference_sig,
        })
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// Score and gradient with respect to `y` in the working space.
    pub fn evaluate(&self, y: &ImageLab) -> Result<(f64, GradientField)> {
        let top = &self.reference.scales[0];
        if (top.height, top.width) != y.dims() {
            return Err(Error::DimensionMismatch(top.height, top.width, y.height(), y.width()));
        }
        let cfg = self.metric.config();
        let projs = self.metric.projections();
        let p = cfg.projections;
        let levels = self.metric.pyramid_levels(y)?;
        let weight = 1.0 / (cfg.scales * p) as f64;
        let mut slots = Vec::with_capacity(cfg.scales * p);
        let mut level_grads: Vec<Vec<f64>> = Vec::with_capacity(levels.len());
        for (i, level) in levels.iter().enumerate() {
            let (h, w) = level.dims();
            let m = h * w;
            let per_sample = weight / m as f64;
            let mut grad = vec![0.0; m * 3];
            for block in projection_blocks(m, p) {
                let mut values = project_block(level, projs, block.clone())?;
                let costs: Vec<f64> = values
                    .par_chunks_mut(m)
                    .enumerate()
                    .map(|(r, row)| {
                        let sorted_ref = self.reference.sorted_samples(i, block.start + r);
                        let order = argsort(row);
                        let sorted_y: Vec<f64> = order.iter().map(|&k| row[k as usize]).collect();
                        let cost = sorted_l1_mean(sorted_ref, &sorted_y);
                        for (k, &pos) in order.iter().enumerate() {
                            let diff = sorted_y[k] - sorted_ref[k];
                            row[pos as usize] = if diff > 0.0 {
                                per_sample
                            } else if diff < 0.0 {
                                -per_sample
                            } else {
                                0.0
                            };
                        }
                        cost
                    })
                    .collect();
                slots.extend(costs);
                project_block_adjoint(h, w, projs, block, &values, &mut grad);
            }
            level_grads.push(grad);
        }
        for i in (1..levels.len()).rev() {
            let coarse = std::mem::take(&mut level_grads[i]);
            let (h, w) = levels[i - 1].dims();
            reduce_adjoint(&coarse, h, w, cfg.factor, &mut level_grads[i - 1]);
        }
        let score = reduce_slots(&slots, cfg.scales, p);
        let data = level_grads.swap_remove(0);
        Ok((
            score,
            GradientField {
                height: y.height(),
                width: y.width(),
                data,
            },
        ))
    }

    /// Score and gradient with respect to the sRGB values of `y`, chaining
    /// through the color conversion when the metric uses CIELAB.
    pub fn evaluate_srgb(&self, y: &ImageSrgb) -> Result<(f64, GradientField)> {
        let cfg = self.metric.config();
        let (score, mut grad) = self.evaluate(&working_image(y, cfg))?;
        if cfg.convert_to_lab {
            grad.data
                .par_chunks_mut(3)
                .zip(y.data().par_chunks(3))
                .for_each(|(g, rgb)| {
                    let jac = srgb_to_lab_jacobian([rgb[0], rgb[1], rgb[2]]);
                    let gl = [g[0], g[1], g[2]];
                    for (j, gj) in g.iter_mut().enumerate() {
                        *gj = (0..3).map(|i| jac[i][j] * gl[i]).sum();
                    }
                });
        }
        Ok((score, grad))
    }
}

/// Score of `(x, y)` and its gradient with respect to the sRGB values of `y`.
pub fn ms_swd_grad(x: &ImageSrgb, y: &ImageSrgb, cfg: &MetricConfig) -> Result<(CdScore, GradientField)> {
    x.ensure_same_dims(y)?;
    let eval = GradientEvaluator::new(Metric::new(cfg.clone())?, &working_image(x, cfg))?;
    let (value, grad) = eval.evaluate_srgb(y)?;
    Ok((
        CdScore {
            value,
            fingerprint: cfg.fingerprint(),
        },
        grad,
    ))
}

/// Score of `(x, y)` and its gradient with respect to `y`, both already in
/// the working space.
pub fn ms_swd_grad_lab(x: &ImageLab, y: &ImageLab, cfg: &MetricConfig) -> Result<(f64, GradientField)> {
    x.ensure_same_dims(y)?;
    GradientEvaluator::new(Metric::new(cfg.clone())?, x)?.evaluate(y)
}

/// Space in which the optimized image is parameterized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableSpace {
    /// Optimize the working-space values directly and convert once at the end.
    Lab,
    /// Optimize sRGB values, clipped to `[0, 1]` after every step.
    Srgb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    pub steps: usize,
    /// Initial Adam step size, in units of the optimized variable.
    pub learning_rate: f64,
    /// Learning rate after the last step as a fraction of the initial one;
    /// the rate decays geometrically in between. 1.0 keeps it constant.
    pub final_lr_fraction: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub variable_space: VariableSpace,
    /// Redraw the projection set every this many steps (0 = never).
    pub resample_projections_every: usize,
    /// Base seed for redrawn projection sets.
    pub seed: u64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            steps: 500,
            learning_rate: 0.05,
            final_lr_fraction: 1.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            variable_space: VariableSpace::Lab,
            resample_projections_every: 0,
            seed: 0,
        }
    }
}

impl OptimConfig {
    /// Schedule for recovering an image from noise: a large initial step that
    /// decays geometrically, with a fresh projection set every step so the
    /// iterate does not settle on a kink of one fixed set's objective.
    pub fn recovery() -> Self {
        Self {
            steps: 2000,
            learning_rate: 100.0,
            final_lr_fraction: 0.003,
            resample_projections_every: 1,
            seed: 1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::InvalidConfig("step count must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive (got {})",
                self.learning_rate
            )));
        }
        if !(self.final_lr_fraction > 0.0 && self.final_lr_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "final learning-rate fraction must be in (0, 1] (got {})",
                self.final_lr_fraction
            )));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.epsilon <= 0.0 {
            return Err(Error::InvalidConfig("Adam parameters out of range".into()));
        }
        Ok(())
    }

    fn lr_at(&self, step: usize) -> f64 {
        if self.steps <= 1 {
            return self.learning_rate;
        }
        let t = step as f64 / (self.steps - 1) as f64;
        self.learning_rate * self.final_lr_fraction.powf(t)
    }
}

/// One logged iteration: the score and gradient norm at the iterate before the step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub score: f64,
    pub grad_linf: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimStatus {
    Completed,
    /// A non-finite score, gradient or iterate appeared at this step; the
    /// result holds the last finite iterate.
    Diverged { step: usize },
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    /// Final iterate in sRGB, gamut-clipped.
    pub image: ImageSrgb,
    /// Final iterate in the working space, before clipping.
    pub working: ImageLab,
    pub trajectory: Vec<TrajectoryPoint>,
    pub initial_score: f64,
    /// Score of the returned `image` under the configured (unresampled) metric.
    pub final_score: f64,
    pub status: OptimStatus,
}

impl OptimResult {
    /// One line per iteration: `iteration score grad_linf`.
    pub fn trajectory_log(&self) -> String {
        let mut s = String::new();
        for p in &self.trajectory {
            let _ = writeln!(s, "{} {:.12e} {:.6e}", p.iteration, p.score, p.grad_linf);
        }
        s
    }

    /// Errors out if the run diverged.
    pub fn into_completed(self) -> Result<Self> {
        match self.status {
            OptimStatus::Completed => Ok(self),
            OptimStatus::Diverged { step } => Err(Error::Diverged { step }),
        }
    }
}

/// Adam state over a flat parameter vector.
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64, ocfg: &OptimConfig) {
        self.t += 1;
        let (b1, b2) = (ocfg.beta1, ocfg.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        for (((x, &g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *x -= lr * (*m / c1) / ((*v / c2).sqrt() + ocfg.epsilon);
        }
    }
}

fn metric_for_step(cfg: &MetricConfig, ocfg: &OptimConfig, step: usize) -> MetricConfig {
    let every = ocfg.resample_projections_every;
    if every == 0 || step < every {
        return cfg.clone();
    }
    let round = (step / every) as u64;
    cfg.clone().with_seed(ocfg.seed.wrapping_add(round))
}

/// Minimizes the metric between `reference` and an image started at `init`.
pub fn optimize(reference: &ImageSrgb, init: &ImageSrgb, cfg: &MetricConfig, ocfg: &OptimConfig) -> Result<OptimResult> {
    ocfg.validate()?;
    reference.ensure_same_dims(init)?;
    let reference_working = working_image(reference, cfg);
    let base = GradientEvaluator::new(Metric::new(cfg.clone())?, &reference_working)?;
    let mut evaluator_seed = cfg.seed;
    let mut resampled: Option<GradientEvaluator> = None;

    let (h, w) = init.dims();
    // Gradients scale like 1 / pixel count; rescaling keeps Adam's epsilon meaningful.
    let grad_scale = (h * w) as f64;
    let mut params: Vec<f64> = match ocfg.variable_space {
        VariableSpace::Lab => working_image(init, cfg).into_data(),
        VariableSpace::Srgb => init.data().to_vec(),
    };
    let mut adam = Adam::new(params.len());
    let mut trajectory = Vec::with_capacity(ocfg.steps);
    let mut status = OptimStatus::Completed;
    let mut initial_score = f64::NAN;

    for step in 0..ocfg.steps {
        let step_cfg = metric_for_step(cfg, ocfg, step);
        let evaluator = if step_cfg.seed == cfg.seed {
            &base
        } else {
            if evaluator_seed != step_cfg.seed {
                resampled = Some(GradientEvaluator::new(Metric::new(step_cfg.clone())?, &reference_working)?);
                evaluator_seed = step_cfg.seed;
            }
            resampled.as_ref().expect("resampled evaluator")
        };
        let (score, grad) = match ocfg.variable_space {
            VariableSpace::Lab => evaluator.evaluate(&ImageLab::from_parts_unchecked(h, w, params.clone()))?,
            VariableSpace::Srgb => evaluator.evaluate_srgb(&ImageSrgb::from_parts_unchecked(h, w, params.clone()))?,
        };
        if step == 0 {
            initial_score = score;
        }
        if !score.is_finite() || !grad.is_finite() {
            status = OptimStatus::Diverged { step };
            break;
        }
        trajectory.push(TrajectoryPoint {
            iteration: step,
            score,
            grad_linf: grad.linf(),
        });
        let scaled: Vec<f64> = grad.data.iter().map(|g| g * grad_scale).collect();
        let mut next = params.clone();
        adam.step(&mut next, &scaled, ocfg.lr_at(step), ocfg);
        if ocfg.variable_space == VariableSpace::Srgb {
            next.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        }
        if next.iter().any(|v| !v.is_finite()) {
            status = OptimStatus::Diverged { step };
            break;
        }
        params = next;
    }

    let (image, working) = match ocfg.variable_space {
        VariableSpace::Lab => {
            let working = ImageLab::from_parts_unchecked(h, w, params);
            let image = if cfg.convert_to_lab {
                lab_to_srgb(&working)
            } else {
                let clipped = working.data().iter().map(|v| v.clamp(0.0, 1.0)).collect();
                ImageSrgb::from_parts_unchecked(h, w, clipped)
            };
            (image, working)
        }
        VariableSpace::Srgb => {
            let image = ImageSrgb::from_parts_unchecked(h, w, params);
            let working = working_image(&image, cfg);
            (image, working)
        }
    };
    let final_score = base.metric().score(reference, &image)?.value;
    Ok(OptimResult {
        image,
        working,
        trajectory,
        initial_score,
        final_score,
        status,
    })
}

/// Recovers `reference` from `init` by descending the metric.
pub fn recover_reference(
    reference: &ImageSrgb,
    init: &ImageSrgb,
    cfg: &MetricConfig,
    ocfg: &OptimConfig,
) -> Result<OptimResult> {
    optimize(reference, init, cfg, ocfg)
}

/// Moves the colors of `target_init` toward those of `source`.
pub fn color_transfer(
    source: &ImageSrgb,
    target_init: &ImageSrgb,
    cfg: &MetricConfig,
    ocfg: &OptimConfig,
) -> Result<OptimResult> {
    optimize(source, target_init, cfg, ocfg)
}

/// Frame-wise transfer. Frame `t > 0` starts from itself plus the working-space
/// correction the previous frame received, so each run warm-starts near the
/// previous result while keeping the current frame's content.
pub fn transfer_video(
    source: &ImageSrgb,
    frames: &[ImageSrgb],
    cfg: &MetricConfig,
    ocfg: &OptimConfig,
) -> Result<Vec<OptimResult>> {
    let mut results: Vec<OptimResult> = Vec::with_capacity(frames.len());
    for (t, frame) in frames.iter().enumerate() {
        let init = match results.last() {
            None => frame.clone(),
            Some(prev) => {
                frame.ensure_same_dims(&prev.image)?;
                let prev_frame = working_image(&frames[t - 1], cfg);
                let current = working_image(frame, cfg);
                let data: Vec<f64> = current
                    .data()
                    .iter()
                    .zip(prev.working.data())
                    .zip(prev_frame.data())
                    .map(|((c, r), f)| c + (r - f))
                    .collect();
                let warm = ImageLab::from_parts_unchecked(frame.height(), frame.width(), data);
                if cfg.convert_to_lab {
                    lab_to_srgb(&warm)
                } else {
                    let clipped = warm.data().iter().map(|v| v.clamp(0.0, 1.0)).collect();
                    ImageSrgb::from_parts_unchecked(frame.height(), frame.width(), clipped)
                }
            }
        };
        results.push(optimize(source, &init, cfg, ocfg)?);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::srgb_to_lab;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_srgb(h: usize, w: usize, seed: u64) -> ImageSrgb {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageSrgb::from_fn(h, w, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap()
    }

    fn small_cfg() -> MetricConfig {
        MetricConfig::default().with_scales(2).with_patch_side(5).with_projections(8)
    }

    #[test]
    fn zero_gradient_at_reference() {
        let x = srgb_to_lab(&random_srgb(20, 20, 1));
        let (score, grad) = ms_swd_grad_lab(&x, &x, &small_cfg()).unwrap();
        assert_eq!(score, 0.0);
        assert!(grad.data.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn score_matches_forward_bit_for_bit() {
        let cfg = small_cfg();
        let (x, y) = (random_srgb(24, 20, 2), random_srgb(24, 20, 3));
        let (score, _) = ms_swd_grad(&x, &y, &cfg).unwrap();
        assert_eq!(score.value, crate::metric::ms_swd(&x, &y, &cfg).unwrap().value);
    }

    #[test]
    fn finite_differences_in_lab() {
        let cfg = small_cfg();
        let x = srgb_to_lab(&random_srgb(16, 16, 4));
        let y = srgb_to_lab(&random_srgb(16, 16, 5));
        let (_, grad) = ms_swd_grad_lab(&x, &y, &cfg).unwrap();
        let metric = Metric::new(cfg).unwrap();
        let h = 1e-3;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut checked = 0;
        let mut good = 0;
        for _ in 0..40 {
            let i = rng.random_range(0..y.data().len());
            let mut up = y.data().to_vec();
            let mut dn = y.data().to_vec();
            up[i] += h;
            dn[i] -= h;
            let fu = metric.score_lab(&x, &ImageLab::from_parts_unchecked(16, 16, up)).unwrap();
            let fd = metric.score_lab(&x, &ImageLab::from_parts_unchecked(16, 16, dn)).unwrap();
            let numeric = (fu - fd) / (2.0 * h);
            if grad.data[i].abs() > 1e-6 {
                checked += 1;
                if (numeric - grad.data[i]).abs() <= 1e-3 * grad.data[i].abs() {
                    good += 1;
                }
            }
        }
        assert!(checked > 20);
        assert!(good as f64 >= 0.95 * checked as f64, "{good}/{checked}");
    }

    #[test]
    fn srgb_gradient_matches_finite_differences() {
        let cfg = small_cfg();
        let (x, y) = (random_srgb(16, 16, 7), random_srgb(16, 16, 8));
        let (_, grad) = ms_swd_grad(&x, &y, &cfg).unwrap();
        let metric = Metric::new(cfg).unwrap();
        let h = 1e-6;
        let mut good = 0;
        let idx = [5usize, 100, 333, 500, 767];
        for &i in &idx {
            let mut up = y.data().to_vec();
            let mut dn = y.data().to_vec();
            up[i] += h;
            dn[i] -= h;
            let fu = metric.score(&x, &ImageSrgb::new(16, 16, up).unwrap()).unwrap().value;
            let fd = metric.score(&x, &ImageSrgb::new(16, 16, dn).unwrap()).unwrap().value;
            let numeric = (fu - fd) / (2.0 * h);
            if (numeric - grad.data[i]).abs() <= 1e-3 * grad.data[i].abs().max(1e-9) {
                good += 1;
            }
        }
        assert!(good >= 4, "{good}/5");
    }

    #[test]
    fn constant_pair_gradient_ignores_offset_size() {
        // scaling (y - x) keeps the sign pattern, hence the gradient
        let cfg = small_cfg();
        let x = ImageLab::filled(16, 16, [50.0, 0.0, 0.0]).unwrap();
        let y1 = ImageLab::filled(16, 16, [53.0, 1.0, -2.0]).unwrap();
        let y2 = ImageLab::filled(16, 16, [56.0, 2.0, -4.0]).unwrap();
        let (_, g1) = ms_swd_grad_lab(&x, &y1, &cfg).unwrap();
        let (_, g2) = ms_swd_grad_lab(&x, &y2, &cfg).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn single_term_gradient_sums_to_signed_kernel_mass() {
        // one scale, one kernel: sum over y of d cost / d y_c equals
        // (1/M) sum_k sign(y_(k) - x_(k)) times the kernel's channel-c weight sum
        let cfg = MetricConfig::default().with_scales(1).with_patch_side(5).with_projections(1);
        let x = srgb_to_lab(&random_srgb(12, 12, 9));
        let y = srgb_to_lab(&random_srgb(12, 12, 10));
        let metric = Metric::new(cfg.clone()).unwrap();
        let (_, grad) = ms_swd_grad_lab(&x, &y, &cfg).unwrap();
        let m = 144;
        let mut xs = project_block(&x, metric.projections(), 0..1).unwrap();
        let mut ys = project_block(&y, metric.projections(), 0..1).unwrap();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let signs: f64 = xs.iter().zip(&ys).map(|(a, b)| (b - a).signum()).sum();
        let sums = metric.projections().channel_sums(0);
        for ch in 0..3 {
            let total: f64 = grad.data.iter().skip(ch).step_by(3).sum();
            let expect = signs / m as f64 * sums[ch];
            assert!((total - expect).abs() < 1e-12, "channel {ch}: {total} vs {expect}");
        }
    }

    #[test]
    fn optimization_is_deterministic_and_makes_progress() {
        let cfg = small_cfg();
        let ocfg = OptimConfig {
            steps: 30,
            learning_rate: 0.5,
            ..OptimConfig::default()
        };
        let x = random_srgb(16, 16, 11);
        let y0 = random_srgb(16, 16, 12);
        let a = recover_reference(&x, &y0, &cfg, &ocfg).unwrap();
        let b = recover_reference(&x, &y0, &cfg, &ocfg).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.image, b.image);
        assert!(a.final_score < a.initial_score);
        assert_eq!(a.trajectory_log().lines().count(), 30);
    }

    #[test]
    fn starting_at_reference_returns_it() {
        let cfg = small_cfg();
        let x = random_srgb(16, 16, 13);
        let ocfg = OptimConfig {
            steps: 5,
            ..OptimConfig::default()
        };
        let r = recover_reference(&x, &x, &cfg, &ocfg).unwrap();
        assert_eq!(r.initial_score, 0.0);
        assert_eq!(r.working, srgb_to_lab(&x));
        for (a, b) in r.image.data().iter().zip(x.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn srgb_space_stays_in_gamut() {
        let cfg = small_cfg();
        let ocfg = OptimConfig {
            steps: 10,
            learning_rate: 0.05,
            variable_space: VariableSpace::Srgb,
            ..OptimConfig::default()
        };
        let r = color_transfer(&random_srgb(16, 16, 14), &random_srgb(16, 16, 15), &cfg, &ocfg).unwrap();
        assert!(r.image.data().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(r.final_score < r.initial_score);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = OptimConfig {
            steps: 0,
            ..OptimConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimConfig {
            learning_rate: -1.0,
            ..OptimConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
