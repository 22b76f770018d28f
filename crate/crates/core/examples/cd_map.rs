//! Localizes a color difference.
//!
//! Tints the upper-left quadrant of a photograph, computes the per-pixel
//! difference map against the original and writes it as a viridis PNG plus
//! the raw float layout.
//!
//! The map credits each rank's transport cost to the reference pixel that
//! holds that rank, so it redistributes the score rather than pinpointing the
//! edit: a tint shifts ranks everywhere, and unedited pixels with similar
//! colors pick up part of the cost.
//!
//! ```text
//! cargo run --release --example cd_map -- [OUT_DIR]
//! ```

use std::path::PathBuf;

use ms_swd::buffer::ImageSrgb;
use ms_swd::io::{load_image, save_map_png, save_png, save_raw_map, BitDepth};
use ms_swd::metric::{cd_map, MetricConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ms-swd-cd-map"));
    std::fs::create_dir_all(&out)?;

    let photo = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/photos/03_chelsea.png");
    let reference = load_image(photo)?;
    let (h, w) = (reference.height(), reference.width());
    let edited = ImageSrgb::from_fn(h, w, |r, c| {
        let [red, green, blue] = reference.pixel(r, c);
        if r < h / 2 && c < w / 2 {
            [(red * 1.15).min(1.0), green * 0.9, blue * 0.8]
        } else {
            [red, green, blue]
        }
    })?;

    let map = cd_map(&reference, &edited, &MetricConfig::default())?;
    let quadrant = map.region_mean(0..h / 2, 0..w / 2);
    let rest = map.region_mean(h / 2..h, 0..w);
    println!("map mean {:.4}, max {:.4}", map.mean(), map.max());
    println!("edited quadrant {quadrant:.4}, untouched lower half {rest:.4}");

    save_png(&edited, out.join("edited.png"), BitDepth::Eight)?;
    save_map_png(&map, out.join("map.png"))?;
    save_raw_map(&map, out.join("map.raw"))?;
    println!("wrote {}", out.display());
    Ok(())
}
