//! Runs the correlation benchmark on a synthetic manifest.
//!
//! Each pair is a photograph and a copy with a color cast whose strength is
//! the ground-truth difference. The run is repeated with each geometric
//! augmentation applied to the test image, and the pixelwise baseline is
//! reported next to the metric to show which one tolerates misalignment.
//!
//! ```text
//! cargo run --release --example benchmark -- [OUT_DIR]
//! ```

use std::io::Write;
use std::path::PathBuf;

use ms_swd::buffer::ImageSrgb;
use ms_swd::eval::{read_manifest, run_benchmark, srcc, AugmentKind, BenchmarkOptions};
use ms_swd::io::{load_image, resize_bilinear, save_png, BitDepth};
use ms_swd::metric::MetricConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ms-swd-benchmark"));
    std::fs::create_dir_all(&out)?;
    let photos = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/photos");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&photos)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    paths.sort();

    let mut manifest = std::fs::File::create(out.join("manifest.csv"))?;
    writeln!(manifest, "reference,test,dv,alignment")?;
    for (i, path) in paths.iter().enumerate() {
        let reference = resize_bilinear(&load_image(path)?, 96, 96)?;
        for level in 1..=3 {
            let strength = 0.04 * level as f64 + 0.01 * (i % 4) as f64;
            let test = ImageSrgb::from_fn(96, 96, |r, c| {
                let [red, green, blue] = reference.pixel(r, c);
                [(red + strength).min(1.0), green, (blue - strength).max(0.0)]
            })?;
            let (rp, tp) = (format!("r{i:02}.png"), format!("t{i:02}_{level}.png"));
            save_png(&reference, out.join(&rp), BitDepth::Sixteen)?;
            save_png(&test, out.join(&tp), BitDepth::Sixteen)?;
            let alignment = if i % 2 == 0 { "aligned" } else { "non_aligned" };
            writeln!(manifest, "{rp},{tp},{:.4},{alignment}", 100.0 * strength)?;
        }
    }
    drop(manifest);

    let records = read_manifest(out.join("manifest.csv"))?;
    let metric = MetricConfig::default().with_scales(3);
    for augmentation in [None, Some(AugmentKind::Translate), Some(AugmentKind::Dilate), Some(AugmentKind::Flip)] {
        let opts = BenchmarkOptions { metric: metric.clone(), augmentation, size: None, seed: 0 };
        let report = run_benchmark(&records, &opts)?;
        let all = report.subgroup("all").and_then(|g| g.summary.as_ref()).ok_or("no summary")?;
        let de76: Vec<f64> = report.scores.iter().map(|s| s.de76).collect();
        let dv: Vec<f64> = report.scores.iter().map(|s| s.dv).collect();
        println!(
            "{:<10} STRESS {:6.2}  PLCC {:.3}  SRCC {:.3}  | pixelwise SRCC {:.3}",
            augmentation.map_or("none".into(), |a| a.to_string()),
            all.stress,
            all.plcc,
            all.srcc,
            srcc(&de76, &dv)?
        );
        if augmentation.is_none() {
            report.write_scores_csv(out.join("scores.csv"))?;
            report.write_summary_json(out.join("summary.json"))?;
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
