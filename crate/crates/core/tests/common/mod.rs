#![allow(dead_code)]

use std::path::PathBuf;

use ms_swd::buffer::ImageSrgb;
use ms_swd::io::{load_image, resize_bilinear};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn photo_dir() -> PathBuf {
    // Shared with the acceptance crate, so resolve through the workspace layout.
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/assets/photos")
}

pub fn photo_paths() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(photo_dir())
        .expect("fixture directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    paths.sort();
    paths
}

/// Fixture `index` resized to `side x side`.
pub fn photo(index: usize, side: usize) -> ImageSrgb {
    let img = load_image(&photo_paths()[index]).expect("fixture loads");
    resize_bilinear(&img, side, side).expect("resize")
}

pub fn random_srgb(h: usize, w: usize, seed: u64) -> ImageSrgb {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageSrgb::from_fn(h, w, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap()
}

/// Smooth random field: a few random sinusoids per channel.
pub fn smooth_srgb(h: usize, w: usize, seed: u64) -> ImageSrgb {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<[f64; 5]> = (0..9)
        .map(|_| {
            [
                rng.random_range(0.0..0.4),
                rng.random_range(0.0..0.4),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.05..0.2),
                rng.random_range(0.2..0.8),
            ]
        })
        .collect();
    ImageSrgb::from_fn(h, w, |r, c| {
        [0, 1, 2].map(|ch| {
            let v: f64 = waves[ch * 3..ch * 3 + 3]
                .iter()
                .map(|&[fr, fc, ph, amp, _]| amp * (fr * r as f64 + fc * c as f64 + ph).sin())
                .sum::<f64>()
                + waves[ch * 3][4];
            v.clamp(0.0, 1.0)
        })
    })
    .unwrap()
}
