//! Scores image pairs.
//!
//! ```text
//! cargo run --release --example score -- A.png B.png
//! cargo run --release --example score            # bundled photographs
//! ```
//!
//! Without arguments, the first photograph is compared against every other one
//! through a precomputed signature, so its pyramid and sorted projections are
//! built once.

use std::path::PathBuf;

use ms_swd::io::{load_image, resize_bilinear};
use ms_swd::metric::{Metric, MetricConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<PathBuf> = std::env::args_os().skip(1).map(PathBuf::from).collect();
    let metric = Metric::new(MetricConfig::default())?;
    let prepare = |p: &PathBuf| -> Result<_, Box<dyn std::error::Error>> { Ok(resize_bilinear(&load_image(p)?, 256, 256)?) };

    if let [a, b] = args.as_slice() {
        let score = metric.score(&prepare(a)?, &prepare(b)?)?;
        println!("{:.6}  ({})", score.value, score.fingerprint);
        return Ok(());
    }

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/photos");
    let mut photos: Vec<PathBuf> = std::fs::read_dir(&dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    photos.sort();
    let reference = metric.signature(&prepare(&photos[0])?)?;
    println!("reference {}", photos[0].display());
    for p in &photos[1..] {
        let d = reference.distance(&metric.signature(&prepare(p)?)?)?;
        println!("{d:>10.4}  {}", p.file_name().unwrap_or_default().to_string_lossy());
    }
    Ok(())
}
