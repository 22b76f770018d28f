//! Accuracy and cost as a function of the projection count.
//!
//! Scores a fixed set of distorted pairs with 16 to 256 projections, reporting
//! the rank correlation with the ground truth, the rank correlation with the
//! 256-projection scores, and the best-of-five time per 256x256 evaluation.
//!
//! ```text
//! cargo run --release --example projection_ablation
//! ```

use std::path::PathBuf;
use std::time::Instant;

use ms_swd::buffer::ImageSrgb;
use ms_swd::eval::srcc;
use ms_swd::io::{load_image, resize_bilinear};
use ms_swd::metric::{Metric, MetricConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let photos = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/photos");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&photos)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    paths.sort();

    let mut pairs = Vec::new();
    let mut truth = Vec::new();
    for (i, path) in paths.iter().enumerate() {
        let reference = resize_bilinear(&load_image(path)?, 64, 64)?;
        let gain = 1.0 + 0.02 * (i % 7) as f64;
        let shift = 0.015 * (i % 5) as f64;
        let test = ImageSrgb::from_fn(64, 64, |r, c| {
            let [red, green, blue] = reference.pixel(r, c);
            [(red * gain).min(1.0), (green + shift).min(1.0), blue]
        })?;
        truth.push((gain - 1.0) * 50.0 + shift * 100.0);
        pairs.push((reference, test));
    }

    let scores_for = |p: usize| -> Result<Vec<f64>, ms_swd::error::Error> {
        let metric = Metric::new(MetricConfig::default().with_scales(3).with_projections(p))?;
        pairs.iter().map(|(x, y)| Ok(metric.score(x, y)?.value)).collect()
    };
    let dense = scores_for(256)?;
    let big = [resize_bilinear(&load_image(&paths[0])?, 256, 256)?, resize_bilinear(&load_image(&paths[6])?, 256, 256)?];

    println!("{:>5} {:>10} {:>12} {:>10}", "P", "SRCC(gt)", "SRCC(P=256)", "ms/eval");
    for p in [16, 32, 64, 128, 256] {
        let scores = scores_for(p)?;
        let metric = Metric::new(MetricConfig::default().with_projections(p))?;
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let t = Instant::now();
            std::hint::black_box(metric.score(&big[0], &big[1])?);
            best = best.min(t.elapsed().as_secs_f64() * 1e3);
        }
        println!("{p:>5} {:>10.4} {:>12.4} {best:>10.1}", srcc(&scores, &truth)?, srcc(&scores, &dense)?);
    }
    Ok(())
}
