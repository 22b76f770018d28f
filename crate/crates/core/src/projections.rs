//! Random unit patch kernels shared by both images and every scale.
//!
//! Kernel `j` is drawn from the ChaCha8 stream `j` of the generator seeded
//! with `seed`, so it is reproducible without generating kernels `0..j`.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const DEFAULT_PROJECTIONS: usize = 128;
pub const DEFAULT_PATCH_SIDE: usize = 11;

const MAGIC: &[u8; 8] = b"MSWDPROJ";
const FORMAT_VERSION: u32 = 1;
/// Streams above this offset are reserved for redraws of degenerate kernels.
const REDRAW_STREAM_OFFSET: u64 = 1 << 40;

/// `count` kernels of shape `patch_side x patch_side x 3`, each flattened
/// row-major (row, column, channel) and of unit l2 norm.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionSet {
    seed: u64,
    patch_side: usize,
    count: usize,
    weights: Vec<f64>,
}

impl ProjectionSet {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn patch_side(&self) -> usize {
        self.patch_side
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Length of one flattened kernel, `3 * patch_side^2`.
    pub fn kernel_len(&self) -> usize {
        3 * self.patch_side * self.patch_side
    }

    pub fn kernel(&self, j: usize) -> &[f64] {
        let d = self.kernel_len();
        &self.weights[j * d..(j + 1) * d]
    }

    pub fn kernels(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.kernel_len())
    }

    /// All kernels as one `count x kernel_len` row-major matrix.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Per-channel weight sums of kernel `j`.
    pub fn channel_sums(&self, j: usize) -> [f64; 3] {
        let mut s = [0.0; 3];
        for (i, w) in self.kernel(j).iter().enumerate() {
            s[i % 3] += w;
        }
        s
    }

    /// A set holding only kernel `j`.
    pub fn single(&self, j: usize) -> ProjectionSet {
        ProjectionSet {
            seed: self.seed,
            patch_side: self.patch_side,
            count: 1,
            weights: self.kernel(j).to_vec(),
        }
    }

    /// Wraps explicit kernels, normalizing each to unit norm.
    pub fn from_kernels(patch_side: usize, kernels: &[Vec<f64>]) -> Result<Self> {
        validate(kernels.len(), patch_side)?;
        let d = 3 * patch_side * patch_side;
        let mut weights = Vec::with_capacity(d * kernels.len());
        for k in kernels {
            if k.len() != d {
                return Err(Error::LengthMismatch(k.len(), d));
            }
            let norm = l2(k);
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::Degenerate("kernel with zero or non-finite norm".into()));
            }
            weights.extend(k.iter().map(|w| w / norm));
        }
        Ok(Self {
            seed: 0,
            patch_side,
            count: kernels.len(),
            weights,
        })
    }

    /// Little-endian export: magic, version (u32), seed (u64), count (u32),
    /// patch side (u32), then `count * 3 * side^2` f32 weights.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.count as u32).to_le_bytes())?;
        w.write_all(&(self.patch_side as u32).to_le_bytes())?;
        for &v in &self.weights {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a set written by [`write_to`](Self::write_to). Weights come back
    /// at f32 precision and are not renormalized.
    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a projection set file".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported projection set version {version}")));
        }
        let mut seed = [0u8; 8];
        r.read_exact(&mut seed)?;
        let count = read_u32(&mut r)? as usize;
        let patch_side = read_u32(&mut r)? as usize;
        validate(count, patch_side)?;
        let n = count * 3 * patch_side * patch_side;
        let mut raw = vec![0u8; n * 4];
        r.read_exact(&mut raw)?;
        let weights = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        Ok(Self {
            seed: u64::from_le_bytes(seed),
            patch_side,
            count,
            weights,
        })
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn validate(count: usize, patch_side: usize) -> Result<()> {
    if count == 0 || patch_side == 0 {
        return Err(Error::InvalidConfig(format!(
            "projection count and patch side must be positive (got {count}, {patch_side})"
        )));
    }
    Ok(())
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Draws kernel `j` into `out` (length `3 * patch_side^2`).
fn draw_kernel(seed: u64, j: usize, out: &mut [f64]) {
    let mut attempt = 0u64;
    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64 + attempt * REDRAW_STREAM_OFFSET);
        for w in out.iter_mut() {
            *w = rng.sample(StandardNormal);
        }
        let norm = l2(out);
        if norm > f64::MIN_POSITIVE && norm.is_finite() {
            out.iter_mut().for_each(|w| *w /= norm);
            return;
        }
        attempt += 1;
    }
}

/// Samples `count` kernels uniformly on the unit sphere of dimension `3 * patch_side^2`.
pub fn sample_projections(seed: u64, count: usize, patch_side: usize) -> Result<ProjectionSet> {
    validate(count, patch_side)?;
    let d = 3 * patch_side * patch_side;
    let mut weights = vec![0.0; d * count];
    for (j, k) in weights.chunks_exact_mut(d).enumerate() {
        draw_kernel(seed, j, k);
    }
    Ok(ProjectionSet {
        seed,
        patch_side,
        count,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_norm() {
        let set = sample_projections(3, 64, 11).unwrap();
        for k in set.kernels() {
            assert!((l2(k) - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let a = sample_projections(99, 16, 5).unwrap();
        let b = sample_projections(99, 16, 5).unwrap();
        assert_eq!(a, b);
        let c = sample_projections(99, 4, 5).unwrap();
        assert_eq!(c.weights(), &a.weights()[..4 * 75]);
        let d = sample_projections(100, 4, 5).unwrap();
        assert_ne!(c.weights(), d.weights());
    }

    #[test]
    fn rejects_empty() {
        assert!(sample_projections(0, 0, 11).is_err());
        assert!(sample_projections(0, 4, 0).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let set = sample_projections(12345, 3, 3).unwrap();
        let mut buf = Vec::new();
        set.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 8 + 4 + 4 + 3 * 27 * 4);
        let back = ProjectionSet::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.seed(), 12345);
        assert_eq!(back.count(), 3);
        assert_eq!(back.patch_side(), 3);
        for (a, b) in set.weights().iter().zip(back.weights()) {
            assert_eq!(*a as f32, *b as f32);
        }
        assert!(ProjectionSet::read_from(&buf[..20]).is_err());
    }

    #[test]
    fn channel_sums_add_up() {
        let set = sample_projections(1, 2, 3).unwrap();
        let s = set.channel_sums(1);
        let total: f64 = set.kernel(1).iter().sum();
        assert!((s.iter().sum::<f64>() - total).abs() < 1e-12);
    }
}
