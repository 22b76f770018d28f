//! Correlation criteria, geometric augmentations and the benchmark runner.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::buffer::{reflect, ImageSrgb};
use crate::color::srgb_to_lab;
use crate::error::{Error, Result};
use crate::io::{load_image, resize_bilinear};
use crate::metric::{Metric, MetricConfig};

fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < min {
        return Err(Error::Degenerate(format!("need at least {min} values, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite value".into()));
    }
    Ok(())
}

/// STRESS and its scale factor `F = sum(de^2) / sum(de * dv)`.
pub fn stress(de: &[f64], dv: &[f64]) -> Result<(f64, f64)> {
    check_pair(de, dv, 2)?;
    let see: f64 = de.iter().map(|e| e * e).sum();
    let sev: f64 = de.iter().zip(dv).map(|(e, v)| e * v).sum();
    let svv: f64 = dv.iter().map(|v| v * v).sum();
    if see == 0.0 || svv == 0.0 || sev == 0.0 {
        return Err(Error::Degenerate(
            "STRESS is undefined when predictions or targets vanish or are orthogonal".into(),
        ));
    }
    let f = see / sev;
    let residual: f64 = de.iter().zip(dv).map(|(e, v)| (e - f * v).powi(2)).sum();
    Ok((100.0 * (residual / (f * f * svv)).sqrt(), f))
}

/// Pearson linear correlation.
pub fn plcc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation of a constant vector".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn srcc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    plcc(&average_ranks(x), &average_ranks(y))
}

/// `(b1 - b2) / (1 + exp(-(x - b3) / |b4|)) + b2`.
pub fn logistic4(params: &[f64; 4], x: f64) -> f64 {
    let [b1, b2, b3, b4] = *params;
    (b1 - b2) / (1.0 + (-(x - b3) / b4.abs()).exp()) + b2
}

/// How predictions were linearized before computing PLCC.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Linearization {
    Logistic { params: [f64; 4] },
    /// Used when the logistic fit fails or fits worse than a straight line.
    Affine { slope: f64, intercept: f64 },
}

impl Linearization {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Linearization::Logistic { params } => logistic4(params, x),
            Linearization::Affine { slope, intercept } => slope * x + intercept,
        }
    }

    pub fn is_fallback(&self) -> bool {
        matches!(self, Linearization::Affine { .. })
    }
}

fn sse(fit: &Linearization, de: &[f64], dv: &[f64]) -> f64 {
    de.iter().zip(dv).map(|(&x, &y)| (fit.apply(x) - y).powi(2)).sum()
}

/// Least-squares line `dv ~ slope * de + intercept`.
pub fn fit_affine(de: &[f64], dv: &[f64]) -> Result<Linearization> {
    check_pair(de, dv, 2)?;
    let (slope, intercept) = linear_least_squares(de, dv)
        .ok_or_else(|| Error::Degenerate("affine fit needs non-constant predictions".into()))?;
    Ok(Linearization::Affine { slope, intercept })
}

/// `(a, b)` minimizing `sum (a * s_i + b - y_i)^2`, or `None` if `s` is constant.
fn linear_least_squares(s: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = s.len() as f64;
    let (ms, my) = (s.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in s.iter().zip(y) {
        sxy += (a - ms) * (b - my);
        sxx += (a - ms) * (a - ms);
    }
    if !(sxx > 0.0) {
        return None;
    }
    let a = sxy / sxx;
    Some((a, my - a * ms))
}

/// Four-parameter logistic fit of `dv` against `de` by Levenberg-Marquardt.
///
/// After the damped iteration the two amplitude parameters are re-solved
/// exactly by linear least squares for the fitted shape. If the iteration
/// produces a non-finite residual, or a straight line fits at least as well,
/// the affine fit is returned instead.
pub fn fit_logistic4(de: &[f64], dv: &[f64]) -> Result<Linearization> {
    check_pair(de, dv, 5)?;
    let affine = fit_affine(de, dv)?;
    let logistic = levenberg_marquardt(de, dv).and_then(|p| refit_amplitudes(p, de, dv));
    Ok(match logistic {
        Some(fit) if sse(&fit, de, dv) < sse(&affine, de, dv) => fit,
        _ => affine,
    })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt()
}

fn levenberg_marquardt(x: &[f64], y: &[f64]) -> Option<[f64; 4]> {
    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = y.iter().copied().fold(f64::INFINITY, f64::min);
    let mut p = [max, min, median(x), std_dev(x).max(f64::MIN_POSITIVE)];
    let cost = |p: &[f64; 4]| -> f64 { x.iter().zip(y).map(|(&a, &b)| (logistic4(p, a) - b).powi(2)).sum() };
    let mut current = cost(&p);
    if !current.is_finite() {
        return None;
    }
    let mut lambda = 1e-3;
    for _ in 0..1000 {
        // normal equations J^T J and J^T r
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        let scale = p[3].abs();
        for (&a, &b) in x.iter().zip(y) {
            let z = (a - p[2]) / scale;
            let s = 1.0 / (1.0 + (-z).exp());
            let ds = s * (1.0 - s);
            let amp = p[0] - p[1];
            let j = [s, 1.0 - s, -amp * ds / scale, -amp * ds * z / scale * p[3].signum()];
            let r = logistic4(&p, a) - b;
            for u in 0..4 {
                jtr[u] += j[u] * r;
                for v in 0..4 {
                    jtj[u][v] += j[u] * j[v];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for (u, row) in a.iter_mut().enumerate() {
                row[u] += lambda * (jtj[u][u] + 1e-12);
            }
            let Some(step) = solve4(a, jtr.map(|v| -v)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
            let c = cost(&trial);
            if c.is_finite() && c < current && trial[3] != 0.0 {
                let rel = (current - c) / current.max(f64::MIN_POSITIVE);
                p = trial;
                current = c;
                lambda = (lambda * 0.3).max(1e-15);
                improved = true;
                if rel < 1e-15 {
                    return Some(p);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    current.is_finite().then_some(p)
}

fn refit_amplitudes(p: [f64; 4], x: &[f64], y: &[f64]) -> Option<Linearization> {
    let shape: Vec<f64> = x.iter().map(|&a| logistic4(&[1.0, 0.0, p[2], p[3]], a)).collect();
    let (a, b) = linear_least_squares(&shape, y)?;
    // a * s + b = (b1 - b2) s + b2
    let params = [a + b, b, p[2], p[3]];
    params.iter().all(|v| v.is_finite()).then_some(Linearization::Logistic { params })
}

/// Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut out = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * out[k]).sum();
        out[row] = (b[row] - s) / a[row][row];
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Geometric perturbation applied to the test image of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentKind {
    Translate,
    Dilate,
    Flip,
}

impl FromStr for AugmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translate" => Ok(Self::Translate),
            "dilate" => Ok(Self::Dilate),
            "flip" => Ok(Self::Flip),
            other => Err(Error::InvalidConfig(format!("unknown augmentation '{other}'"))),
        }
    }
}

impl fmt::Display for AugmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Translate => "translate",
            Self::Dilate => "dilate",
            Self::Flip => "flip",
        })
    }
}

pub const TRANSLATE_FRACTION: f64 = 0.05;
pub const DILATE_FACTOR: f64 = 1.1;

/// Integer shift `(rows, cols)` drawn for `translate` with this seed.
pub fn translation_offset(height: usize, width: usize, seed: u64) -> (isize, isize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_r = (TRANSLATE_FRACTION * height as f64).floor() as i64;
    let max_c = (TRANSLATE_FRACTION * width as f64).floor() as i64;
    let dr = rng.random_range(-max_r..=max_r);
    let dc = rng.random_range(-max_c..=max_c);
    (dr as isize, dc as isize)
}

pub fn augment(img: &ImageSrgb, kind: AugmentKind, seed: u64) -> Result<ImageSrgb> {
    let (h, w) = img.dims();
    match kind {
        AugmentKind::Flip => Ok(img.flip_horizontal()),
        AugmentKind::Translate => {
            let (dr, dc) = translation_offset(h, w, seed);
            ImageSrgb::from_fn(h, w, |r, c| {
                img.pixel(reflect(r as isize - dr, h), reflect(c as isize - dc, w))
            })
        }
        AugmentKind::Dilate => {
            let bh = ((h as f64 * DILATE_FACTOR).round() as usize).max(h);
            let bw = ((w as f64 * DILATE_FACTOR).round() as usize).max(w);
            let big = resize_bilinear(img, bh, bw)?;
            big.crop((bh - h) / 2, (bw - w) / 2, h, w)
        }
    }
}

/// Mean over pixels of the CIELAB Euclidean distance.
pub fn pixelwise_de76(x: &ImageSrgb, y: &ImageSrgb) -> Result<f64> {
    x.ensure_same_dims(y)?;
    let (lx, ly) = (srgb_to_lab(x), srgb_to_lab(y));
    let total: f64 = lx
        .pixels()
        .zip(ly.pixels())
        .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt())
        .sum();
    Ok(total / x.pixel_count() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    Aligned,
    NonAligned,
    Unknown,
}

impl FromStr for Alignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aligned" => Ok(Self::Aligned),
            "non_aligned" | "non-aligned" | "nonaligned" => Ok(Self::NonAligned),
            "unknown" | "" => Ok(Self::Unknown),
            other => Err(Error::Format(format!("unknown alignment tag '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub reference: PathBuf,
    pub test: PathBuf,
    pub dv: f64,
    pub alignment: Alignment,
}

#[derive(Deserialize)]
struct ManifestRow {
    reference: String,
    test: String,
    dv: f64,
    #[serde(default)]
    alignment: Option<String>,
}

/// Reads a `reference,test,dv,alignment` CSV; relative paths resolve
/// against the manifest's directory.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let path = path.as_ref();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<ManifestRow>().enumerate() {
        let row = row?;
        if !(row.dv >= 0.0 && row.dv.is_finite()) {
            return Err(Error::Format(format!("row {}: dv must be finite and >= 0, got {}", i + 1, row.dv)));
        }
        out.push(EvalRecord {
            reference: base.join(&row.reference),
            test: base.join(&row.test),
            dv: row.dv,
            alignment: row.alignment.as_deref().unwrap_or("").parse()?,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOptions {
    pub metric: MetricConfig,
    pub augmentation: Option<AugmentKind>,
    /// Square side both images are resized to; `None` keeps native size.
    pub size: Option<usize>,
    /// Seed for augmentation draws; pair `i` uses `seed + i`.
    pub seed: u64,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self {
            metric: MetricConfig::default(),
            augmentation: None,
            size: Some(256),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub reference: PathBuf,
    pub test: PathBuf,
    pub alignment: Alignment,
    pub de: f64,
    pub dv: f64,
    pub de76: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedRecord {
    pub reference: PathBuf,
    pub test: PathBuf,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub stress: f64,
    pub plcc: f64,
    pub srcc: f64,
    pub scale_factor_f: f64,
    /// Pearson correlation before linearization.
    pub raw_plcc: f64,
    pub linearization: Linearization,
    pub pair_count: usize,
    pub fingerprint: String,
}

/// Criteria for one group of pairs.
pub fn summarize(de: &[f64], dv: &[f64], fingerprint: &str) -> Result<EvalSummary> {
    let (s, f) = stress(de, dv)?;
    let raw_plcc = plcc(de, dv)?;
    let linearization = if de.len() >= 5 {
        fit_logistic4(de, dv)?
    } else {
        fit_affine(de, dv)?
    };
    let fitted: Vec<f64> = de.iter().map(|&x| linearization.apply(x)).collect();
    Ok(EvalSummary {
        stress: s,
        plcc: plcc(&fitted, dv)?,
        srcc: srcc(de, dv)?,
        scale_factor_f: f,
        raw_plcc,
        linearization,
        pair_count: de.len(),
        fingerprint: fingerprint.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgroupReport {
    pub name: String,
    pub pair_count: usize,
    pub summary: Option<EvalSummary>,
    /// Why no summary was produced.
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub fingerprint: String,
    pub options: BenchmarkOptions,
    pub scored: usize,
    pub skipped: Vec<SkippedRecord>,
    pub subgroups: Vec<SubgroupReport>,
    #[serde(skip)]
    pub scores: Vec<PairScore>,
}

impl BenchmarkReport {
    pub fn subgroup(&self, name: &str) -> Option<&SubgroupReport> {
        self.subgroups.iter().find(|g| g.name == name)
    }

    /// Per-pair table with a fixed column order.
    pub fn write_scores_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["reference", "test", "alignment", "de", "dv", "de76"])?;
        for s in &self.scores {
            w.write_record([
                s.reference.display().to_string(),
                s.test.display().to_string(),
                alignment_name(s.alignment).to_string(),
                format!("{}", s.de),
                format!("{}", s.dv),
                format!("{}", s.de76),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

fn alignment_name(a: Alignment) -> &'static str {
    match a {
        Alignment::Aligned => "aligned",
        Alignment::NonAligned => "non_aligned",
        Alignment::Unknown => "unknown",
    }
}

fn prepare(path: &Path, size: Option<usize>) -> Result<ImageSrgb> {
    let img = load_image(path)?;
    match size {
        Some(s) => resize_bilinear(&img, s, s),
        None => Ok(img),
    }
}

fn score_record(metric: &Metric, opts: &BenchmarkOptions, index: usize, rec: &EvalRecord) -> Result<PairScore> {
    let reference = prepare(&rec.reference, opts.size)?;
    let mut test = prepare(&rec.test, opts.size)?;
    if let Some(kind) = opts.augmentation {
        test = augment(&test, kind, opts.seed.wrapping_add(index as u64))?;
    }
    Ok(PairScore {
        reference: rec.reference.clone(),
        test: rec.test.clone(),
        alignment: rec.alignment,
        de: metric.score(&reference, &test)?.value,
        dv: rec.dv,
        de76: pixelwise_de76(&reference, &test)?,
    })
}

/// Scores every record with one shared projection set and summarizes the
/// aligned, non-aligned and combined groups. Records whose images cannot
/// be read or scored are skipped and listed in the report.
pub fn run_benchmark(records: &[EvalRecord], opts: &BenchmarkOptions) -> Result<BenchmarkReport> {
    let metric = Metric::new(opts.metric.clone())?;
    let results: Vec<Result<PairScore>> = records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| score_record(&metric, opts, i, rec))
        .collect();
    let mut scores = Vec::new();
    let mut skipped = Vec::new();
    for (rec, res) in records.iter().zip(results) {
        match res {
            Ok(s) => scores.push(s),
            Err(e) => skipped.push(SkippedRecord {
                reference: rec.reference.clone(),
                test: rec.test.clone(),
                reason: e.to_string(),
            }),
        }
    }
    let fingerprint = opts.metric.fingerprint();
    let groups: [(&str, Option<Alignment>); 3] = [
        ("aligned", Some(Alignment::Aligned)),
        ("non_aligned", Some(Alignment::NonAligned)),
        ("all", None),
    ];
    let subgroups = groups
        .iter()
        .map(|&(name, tag)| {
            let members: Vec<&PairScore> = scores.iter().filter(|s| tag.is_none_or(|t| s.alignment == t)).collect();
            let de: Vec<f64> = members.iter().map(|s| s.de).collect();
            let dv: Vec<f64> = members.iter().map(|s| s.dv).collect();
            let (summary, note) = if members.len() < 2 {
                (None, Some(format!("{} scored pairs; at least 2 are required", members.len())))
            } else {
                match summarize(&de, &dv, &fingerprint) {
                    Ok(s) => (Some(s), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            };
            SubgroupReport {
                name: name.to_string(),
                pair_count: members.len(),
                summary,
                note,
            }
        })
        .collect();
    Ok(BenchmarkReport {
        fingerprint,
        options: opts.clone(),
        scored: scores.len(),
        skipped,
        subgroups,
        scores,
    })
}
