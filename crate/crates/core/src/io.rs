//! Image files, resizing and map export.
//!
//! Only PNG and binary/ASCII PNM are read. Grayscale inputs are replicated
//! to three channels and alpha is discarded.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use crate::buffer::ImageSrgb;
use crate::error::{Error, Result};
use crate::metric::CdMap;

/// Sample depth of a written PNG.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

fn image_err(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

/// Decodes a PNG or PNM file into `[0, 1]` sRGB.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageSrgb> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .and_then(|r| r.with_guessed_format())
        .map_err(|e| image_err(path)(image::ImageError::IoError(e)))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Pnm) => {}
        Some(other) => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: {other:?} (only PNG and PNM are read)",
                path.display()
            )))
        }
        None => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: unrecognized file signature",
                path.display()
            )))
        }
    }
    let decoded = reader.decode().map_err(image_err(path))?;
    from_dynamic(decoded, path)
}

fn from_dynamic(img: DynamicImage, path: &Path) -> Result<ImageSrgb> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) => gray(img.to_luma8().into_raw(), 255.0),
        DynamicImage::ImageRgb8(_) | DynamicImage::ImageRgba8(_) => {
            img.to_rgb8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect()
        }
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => {
            gray(img.to_luma16().into_raw(), 65535.0)
        }
        DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_) => {
            img.to_rgb16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect()
        }
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: sample type {:?} is not 8- or 16-bit integer",
                path.display(),
                other.color()
            )))
        }
    };
    ImageSrgb::new(h, w, data)
}

fn gray<T: Into<f64> + Copy>(raw: Vec<T>, max: f64) -> Vec<f64> {
    raw.into_iter()
        .flat_map(|v| {
            let g = v.into() / max;
            [g, g, g]
        })
        .collect()
}

/// Writes an RGB PNG, rounding to the nearest code value.
pub fn save_png(img: &ImageSrgb, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let dynamic = match depth {
        BitDepth::Eight => {
            let raw = img.data().iter().map(|&v| (v * 255.0).round() as u8).collect();
            DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, raw).expect("buffer size"))
        }
        BitDepth::Sixteen => {
            let raw = img.data().iter().map(|&v| (v * 65535.0).round() as u16).collect();
            DynamicImage::ImageRgb16(image::ImageBuffer::from_raw(w, h, raw).expect("buffer size"))
        }
    };
    dynamic.save_with_format(path, ImageFormat::Png).map_err(image_err(path))
}

/// Separable bilinear resize with half-pixel-centered sampling and edge clamping.
pub fn resize_bilinear(img: &ImageSrgb, height: usize, width: usize) -> Result<ImageSrgb> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidConfig(format!("cannot resize to {height}x{width}")));
    }
    if img.dims() == (height, width) {
        return Ok(img.clone());
    }
    let (ih, iw) = img.dims();
    let xs = taps(iw, width);
    let ys = taps(ih, height);
    let src = img.data();
    // horizontal pass: ih x width
    let mut tmp = vec![0.0; ih * width * 3];
    for r in 0..ih {
        for (x, &(i0, i1, t)) in xs.iter().enumerate() {
            for ch in 0..3 {
                let a = src[(r * iw + i0) * 3 + ch];
                let b = src[(r * iw + i1) * 3 + ch];
                tmp[(r * width + x) * 3 + ch] = a + t * (b - a);
            }
        }
    }
    let mut out = vec![0.0; height * width * 3];
    for (y, &(i0, i1, t)) in ys.iter().enumerate() {
        for k in 0..width * 3 {
            let a = tmp[i0 * width * 3 + k];
            let b = tmp[i1 * width * 3 + k];
            out[y * width * 3 + k] = (a + t * (b - a)).clamp(0.0, 1.0);
        }
    }
    ImageSrgb::new(height, width, out)
}

/// For each output index: the two source indices and the weight of the second.
fn taps(n_in: usize, n_out: usize) -> Vec<(usize, usize, f64)> {
    let scale = n_in as f64 / n_out as f64;
    let last = (n_in - 1) as f64;
    (0..n_out)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(n_in - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

/// Stops of the viridis colormap, evenly spaced on `[0, 1]`.
pub const VIRIDIS_STOPS: [[u8; 3]; 5] = [
    [0x44, 0x01, 0x54],
    [0x3b, 0x52, 0x8b],
    [0x21, 0x91, 0x8c],
    [0x5e, 0xc9, 0x62],
    [0xfd, 0xe7, 0x25],
];

/// Maps `t` in `[0, 1]` to an 8-bit color by linear interpolation between stops.
pub fn viridis(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (VIRIDIS_STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(VIRIDIS_STOPS.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (VIRIDIS_STOPS[i], VIRIDIS_STOPS[i + 1]);
    [0, 1, 2].map(|c| (a[c] as f64 + f * (b[c] as f64 - a[c] as f64)).round() as u8)
}

/// Writes the map as an 8-bit PNG, normalized so that 0 is the first stop
/// and the map maximum the last.
pub fn save_map_png(map: &CdMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let max = map.max();
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    let raw: Vec<u8> = map.data.iter().flat_map(|&v| viridis(v * scale)).collect();
    let img = image::RgbImage::from_raw(map.width as u32, map.height as u32, raw).expect("buffer size");
    img.save_with_format(path, ImageFormat::Png).map_err(image_err(path))
}

/// Raw map layout: `u32` height, `u32` width, then `height * width` f32
/// values row-major, all little-endian.
pub fn write_raw_map(map: &CdMap, mut w: impl Write) -> Result<()> {
    w.write_all(&(map.height as u32).to_le_bytes())?;
    w.write_all(&(map.width as u32).to_le_bytes())?;
    for &v in &map.data {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_raw_map(mut r: impl Read) -> Result<CdMap> {
    let mut header = [0u8; 8];
    r.read_exact(&mut header)?;
    let height = u32::from_le_bytes(header[..4].try_into().expect("4 bytes")) as usize;
    let width = u32::from_le_bytes(header[4..].try_into().expect("4 bytes")) as usize;
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)?;
    if raw.len() != height * width * 4 {
        return Err(Error::Format(format!(
            "raw map body has {} bytes, expected {} for {height}x{width}",
            raw.len(),
            height * width * 4
        )));
    }
    let data = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    Ok(CdMap { height, width, data })
}

pub fn save_raw_map(map: &CdMap, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_raw_map(map, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_raw_map(path: impl AsRef<Path>) -> Result<CdMap> {
    read_raw_map(BufReader::new(File::open(path)?))
}
