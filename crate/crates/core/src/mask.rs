//! Binary masks and their run-length encoding.
//!
//! Runs are taken in row-major order and always start with a background run,
//! which is 0 when the top-left pixel is foreground. COCO uses column-major
//! order; adapters talking to COCO tooling must transpose.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major boolean grid.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BinaryMask({}x{}, {} fg)",
            self.width,
            self.height,
            self.count()
        )
    }
}

impl BinaryMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("mask", "width and height must be >= 1"));
        }
        if bits.len() != width * height {
            return Err(Error::invalid(
                "mask",
                format!("{} bits for a {width}x{height} grid", bits.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    /// Number of foreground pixels.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    pub fn union_count(&self, other: &BinaryMask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a || b)
            .count()
    }

    pub fn ensure_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.dims() != (width, height) {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                actual: self.dims(),
            });
        }
        Ok(())
    }

    /// Coordinates of foreground pixels in scan order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn to_rle(&self) -> RleMask {
        rle_encode(self)
    }

    /// Foreground pixels with a 4-neighbor in the background; pixels on the
    /// image border count as touching background.
    pub fn boundary(&self) -> BinaryMask {
        let (w, h) = self.dims();
        BinaryMask::from_fn(w, h, |x, y| {
            self.get(x, y)
                && (x == 0
                    || y == 0
                    || x + 1 == w
                    || y + 1 == h
                    || !self.get(x - 1, y)
                    || !self.get(x + 1, y)
                    || !self.get(x, y - 1)
                    || !self.get(x, y + 1))
        })
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of the foreground.
    pub fn bbox(&self) -> Option<(usize, usize, usize, usize)> {
        let mut it = self.foreground();
        let (x, y) = it.next()?;
        Some(it.fold((x, y, x, y), |(x0, y0, x1, y1), (x, y)| {
            (x0.min(x), y0.min(y), x1.max(x), y1.max(y))
        }))
    }
}

/// Row-major, zero-first run-length document: `{"size":[H,W],"counts":[...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMask {
    pub size: [usize; 2],
    pub counts: Vec<u64>,
}

impl RleMask {
    pub fn height(&self) -> usize {
        self.size[0]
    }

    pub fn width(&self) -> usize {
        self.size[1]
    }

    pub fn decode(&self) -> Result<BinaryMask> {
        rle_decode(self)
    }
}

pub fn rle_encode(mask: &BinaryMask) -> RleMask {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u64;
    for &bit in &mask.bits {
        if bit != current {
            counts.push(run);
            run = 0;
            current = bit;
        }
        run += 1;
    }
    counts.push(run);
    RleMask {
        size: [mask.height, mask.width],
        counts,
    }
}

pub fn rle_decode(rle: &RleMask) -> Result<BinaryMask> {
    let [height, width] = rle.size;
    let expected = width * height;
    let actual: u64 = rle.counts.iter().sum();
    if actual != expected as u64 {
        return Err(Error::CountMismatch {
            expected,
            actual: actual as usize,
        });
    }
    let mut bits = Vec::with_capacity(expected);
    let mut value = false;
    for &run in &rle.counts {
        bits.extend(std::iter::repeat_n(value, run as usize));
        value = !value;
    }
    BinaryMask::from_bits(width, height, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(w: usize, h: usize, bits: &[u8]) -> BinaryMask {
        BinaryMask::from_bits(w, h, bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn encode_small_grids() {
        assert_eq!(rle_encode(&BinaryMask::empty(2, 2)).counts, vec![4]);
        assert_eq!(rle_encode(&BinaryMask::full(2, 2)).counts, vec![0, 4]);
        assert_eq!(
            rle_encode(&mask(2, 2, &[1, 0, 0, 1])).counts,
            vec![0, 1, 2, 1]
        );
    }

    #[test]
    fn size_is_height_then_width() {
        let rle = rle_encode(&BinaryMask::empty(3, 2));
        assert_eq!(rle.size, [2, 3]);
    }

    #[test]
    fn decode_small_grids() {
        let empty = RleMask {
            size: [2, 2],
            counts: vec![4],
        };
        assert_eq!(empty.decode().unwrap(), BinaryMask::empty(2, 2));
        let full = RleMask {
            size: [2, 2],
            counts: vec![0, 4],
        };
        assert_eq!(full.decode().unwrap(), BinaryMask::full(2, 2));
    }

    #[test]
    fn decode_rejects_bad_total() {
        let rle = RleMask {
            size: [2, 2],
            counts: vec![1, 2],
        };
        assert!(matches!(
            rle.decode(),
            Err(Error::CountMismatch {
                expected: 4,
                actual: 3
            })
        ));
    }

    #[test]
    fn from_bits_checks_length() {
        assert!(BinaryMask::from_bits(2, 2, vec![true; 3]).is_err());
        assert!(BinaryMask::from_bits(0, 2, vec![]).is_err());
    }
}
