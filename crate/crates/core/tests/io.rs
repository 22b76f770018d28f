mod common;

use std::fs;

use common::smooth_srgb;
use ms_swd::buffer::ImageSrgb;
use ms_swd::error::Error;
use ms_swd::io::{load_image, load_raw_map, resize_bilinear, save_map_png, save_png, save_raw_map, BitDepth};
use ms_swd::metric::CdMap;
use proptest::prelude::*;

#[test]
fn white_png_loads_as_ones() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("white.png");
    image::RgbImage::from_pixel(5, 3, image::Rgb([255, 255, 255])).save(&path).unwrap();
    let img = load_image(&path).unwrap();
    assert_eq!(img.dims(), (3, 5));
    assert!(img.data().iter().all(|&v| v == 1.0));
}

#[test]
fn sixteen_bit_round_trip_within_quantization() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.png");
    let img = smooth_srgb(17, 23, 4);
    save_png(&img, &path, BitDepth::Sixteen).unwrap();
    let back = load_image(&path).unwrap();
    let worst = back.data().iter().zip(img.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1.0 / 65535.0, "{worst}");
}

#[test]
fn grayscale_and_alpha_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let gray = dir.path().join("g.png");
    image::GrayImage::from_fn(4, 2, |x, _| image::Luma([(x * 60) as u8])).save(&gray).unwrap();
    let img = load_image(&gray).unwrap();
    for p in img.pixels() {
        assert!(p[0] == p[1] && p[1] == p[2]);
    }
    assert_eq!(img.pixel(0, 3)[0], 180.0 / 255.0);

    let rgba = dir.path().join("a.png");
    image::RgbaImage::from_pixel(2, 2, image::Rgba([10, 20, 30, 0])).save(&rgba).unwrap();
    assert_eq!(load_image(&rgba).unwrap().pixel(1, 1), [10.0 / 255.0, 20.0 / 255.0, 30.0 / 255.0]);
}

#[test]
fn ppm_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.ppm");
    fs::write(&path, b"P3\n2 1\n255\n255 0 0 0 0 255\n").unwrap();
    let img = load_image(&path).unwrap();
    assert_eq!(img.pixel(0, 0), [1.0, 0.0, 0.0]);
    assert_eq!(img.pixel(0, 1), [0.0, 0.0, 1.0]);
}

#[test]
fn truncated_and_foreign_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("x.png");
    save_png(&smooth_srgb(20, 20, 1), &good, BitDepth::Eight).unwrap();
    let bytes = fs::read(&good).unwrap();
    let cut = dir.path().join("cut.png");
    fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
    let err = load_image(&cut).unwrap_err();
    assert!(err.is_io() && err.to_string().contains("cut.png"), "{err}");

    let jpeg = dir.path().join("x.jpg");
    fs::write(&jpeg, [0xFF, 0xD8, 0xFF, 0xE0, 0, 16, b'J', b'F', b'I', b'F', 0]).unwrap();
    assert!(matches!(load_image(&jpeg), Err(Error::UnsupportedFormat(_))));
    assert!(matches!(load_image(dir.path().join("none.png")), Err(Error::Image { .. })));
}

#[test]
fn map_exports() {
    let dir = tempfile::tempdir().unwrap();
    let map = CdMap {
        height: 3,
        width: 2,
        data: vec![0.0, 1.0, 2.0, 3.0, 4.0, 8.0],
    };
    save_raw_map(&map, dir.path().join("m.f32")).unwrap();
    let raw = fs::read(dir.path().join("m.f32")).unwrap();
    assert_eq!(&raw[..8], &[3, 0, 0, 0, 2, 0, 0, 0]);
    assert_eq!(f32::from_le_bytes(raw[28..32].try_into().unwrap()), 8.0);
    assert_eq!(load_raw_map(dir.path().join("m.f32")).unwrap(), map);

    save_map_png(&map, dir.path().join("m.png")).unwrap();
    let png = image::open(dir.path().join("m.png")).unwrap().to_rgb8();
    assert_eq!(png.dimensions(), (2, 3));
    assert_eq!(png.get_pixel(0, 0).0, ms_swd::io::VIRIDIS_STOPS[0]);
    assert_eq!(png.get_pixel(1, 2).0, ms_swd::io::VIRIDIS_STOPS[4]);
}

#[test]
fn resize_examples() {
    let img = ImageSrgb::new(2, 1, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
    let up: Vec<f64> = resize_bilinear(&img, 4, 1).unwrap().pixels().map(|p| p[0]).collect();
    assert_eq!(up, vec![0.0, 0.25, 0.75, 1.0]);
    assert!(resize_bilinear(&img, 0, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn resize_keeps_constants_and_identity(h in 1usize..30, w in 1usize..30, oh in 1usize..40, ow in 1usize..40, seed in any::<u64>()) {
        let img = smooth_srgb(h, w, seed);
        prop_assert_eq!(resize_bilinear(&img, h, w).unwrap(), img);
        let c = [0.1, 0.5, 0.9];
        let flat = ImageSrgb::filled(h, w, c).unwrap();
        for p in resize_bilinear(&flat, oh, ow).unwrap().pixels() {
            for ch in 0..3 {
                prop_assert!((p[ch] - c[ch]).abs() <= 1e-12);
            }
        }
    }
}
