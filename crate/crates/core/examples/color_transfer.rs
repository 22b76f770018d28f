//! Transfers the colors of one photograph onto another, then onto a short
//! synthetic clip made of shifted crops.
//!
//! ```text
//! cargo run --release --example color_transfer -- [OUT_DIR]
//! ```

use std::path::PathBuf;

use ms_swd::buffer::ImageSrgb;
use ms_swd::grad::{color_transfer, transfer_video, OptimConfig};
use ms_swd::io::{load_image, resize_bilinear, save_png, BitDepth};
use ms_swd::metric::{Metric, MetricConfig};

fn grayscale(img: &ImageSrgb) -> Result<ImageSrgb, ms_swd::error::Error> {
    ImageSrgb::from_fn(img.height(), img.width(), |r, c| {
        let [red, green, blue] = img.pixel(r, c);
        [0.299 * red + 0.587 * green + 0.114 * blue; 3]
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ms-swd-transfer"));
    std::fs::create_dir_all(&out)?;
    let photos = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/photos");
    let source = resize_bilinear(&load_image(photos.join("13_rocket.png"))?, 96, 96)?;
    let target = grayscale(&resize_bilinear(&load_image(photos.join("06_coffee.png"))?, 96, 96)?)?;

    let cfg = MetricConfig::default().with_scales(3).with_patch_side(5).with_projections(64);
    let ocfg = OptimConfig { steps: 300, ..OptimConfig::default() };
    let result = color_transfer(&source, &target, &cfg, &ocfg)?.into_completed()?;
    println!("image: score {:.3} -> {:.3}", result.initial_score, result.final_score);
    save_png(&result.image, out.join("transfer.png"), BitDepth::Eight)?;

    // A clip panning across a larger grayscale frame.
    let wide = grayscale(&resize_bilinear(&load_image(photos.join("07_coffee.png"))?, 128, 128)?)?;
    let frames = (0..4).map(|t| wide.crop(16, 8 * t, 96, 96)).collect::<Result<Vec<_>, _>>()?;
    let results = transfer_video(&source, &frames, &cfg, &OptimConfig { steps: 100, ..ocfg })?;
    let metric = Metric::new(cfg)?;
    for (t, r) in results.iter().enumerate() {
        let before = metric.score(&source, &frames[t])?.value;
        println!("frame {t}: score {before:.3} -> {:.3}", r.final_score);
        save_png(&r.image, out.join(format!("frame_{t:02}.png")), BitDepth::Eight)?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
