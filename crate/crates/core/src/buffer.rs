//! Interleaved three-channel image buffers tagged with their color space.

use std::fmt;
use std::marker::PhantomData;

use crate::error::{Error, Result};

/// Marker for display-referred sRGB with channels in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Srgb;

/// Marker for CIELAB `(L*, a*, b*)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lab;

pub trait ColorSpace: Copy + fmt::Debug + Send + Sync + 'static {
    const NAME: &'static str;
    /// Whether every channel must lie in `[0, 1]`.
    const UNIT_RANGE: bool;
}

impl ColorSpace for Srgb {
    const NAME: &'static str = "sRGB";
    const UNIT_RANGE: bool = true;
}

impl ColorSpace for Lab {
    const NAME: &'static str = "CIELAB";
    const UNIT_RANGE: bool = false;
}

/// Row-major `height x width x 3` image, channels interleaved.
#[derive(Clone, PartialEq)]
pub struct Image3<S: ColorSpace> {
    height: usize,
    width: usize,
    data: Vec<f64>,
    _space: PhantomData<S>,
}

pub type ImageSrgb = Image3<Srgb>;
pub type ImageLab = Image3<Lab>;

impl<S: ColorSpace> fmt::Debug for Image3<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Image3")
            .field("space", &S::NAME)
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

impl<S: ColorSpace> Image3<S> {
    /// Wraps a buffer after checking its shape and the space's value invariants.
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width * 3 {
            return Err(Error::BadBuffer {
                height,
                width,
                len: data.len(),
            });
        }
        validate::<S>(width, &data)?;
        Ok(Self::from_parts_unchecked(height, width, data))
    }

    pub(crate) fn from_parts_unchecked(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width * 3);
        Self {
            height,
            width,
            data,
            _space: PhantomData,
        }
    }

    /// Constant-color image.
    pub fn filled(height: usize, width: usize, color: [f64; 3]) -> Result<Self> {
        let data = (0..height * width).flat_map(|_| color).collect();
        Self::new(height, width, data)
    }

    /// Builds an image by evaluating `f(row, col)` for every pixel.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * 3);
        for r in 0..height {
            for c in 0..width {
                data.extend_from_slice(&f(r, c));
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixels(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// Per-channel mean.
    pub fn channel_means(&self) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for p in self.pixels() {
            for ch in 0..3 {
                acc[ch] += p[ch];
            }
        }
        let n = self.pixel_count() as f64;
        acc.map(|a| a / n)
    }

    /// Exact horizontal mirror.
    pub fn flip_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.height {
            let row = &self.data[r * self.width * 3..(r + 1) * self.width * 3];
            for px in row.chunks_exact(3).rev() {
                data.extend_from_slice(px);
            }
        }
        Self::from_parts_unchecked(self.height, self.width, data)
    }

    /// Copies out a `height x width` window starting at `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || top + height > self.height || left + width > self.width {
            return Err(Error::InvalidConfig(format!(
                "crop {height}x{width}+{top}+{left} outside {}x{}",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width * 3);
        for r in top..top + height {
            let start = (r * self.width + left) * 3;
            data.extend_from_slice(&self.data[start..start + width * 3]);
        }
        Ok(Self::from_parts_unchecked(height, width, data))
    }

    pub(crate) fn ensure_same_dims<T: ColorSpace>(&self, other: &Image3<T>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(
                self.height,
                self.width,
                other.height(),
                other.width(),
            ));
        }
        Ok(())
    }
}

fn validate<S: ColorSpace>(width: usize, data: &[f64]) -> Result<()> {
    for (i, &v) in data.iter().enumerate() {
        let (px, channel) = (i / 3, i % 3);
        let (row, col) = (px / width, px % width);
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col, channel });
        }
        if S::UNIT_RANGE && !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange {
                row,
                col,
                channel,
                value: v,
            });
        }
    }
    Ok(())
}

/// Mirror-without-repeat index into `0..n`; valid while `-(n-1) <= i <= 2(n-1)`.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let last = n as isize - 1;
    let r = if i < 0 {
        -i
    } else if i > last {
        2 * last - i
    } else {
        i
    };
    debug_assert!((0..=last).contains(&r), "reflect({i}, {n}) out of range");
    r as usize
}
