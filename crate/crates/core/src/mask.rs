//! Binary masks: packed row-major bit grids with the overlap measures used for
//! scoring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::RasterImage;

/// Binarization threshold for 0/255 mask PNGs.
pub const DEFAULT_MASK_THRESHOLD: u8 = 127;

const WORD_BITS: usize = 64;

/// A `width x height` grid of active/inactive pixels.
///
/// Bits are packed row-major into 64-bit words (`bit = y * width + x`). Bits
/// past `width * height` in the last word are always zero, so popcounts over
/// whole words are exact.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("active", &self.active_count())
            .finish()
    }
}

impl BinaryMask {
    /// All-false mask.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroSize { width, height });
        }
        let words = vec![0; (width * height).div_ceil(WORD_BITS)];
        Ok(Self { width, height, words })
    }

    /// All-true mask.
    pub fn full(width: usize, height: usize) -> Result<Self> {
        let mut m = Self::new(width, height)?;
        m.words.iter_mut().for_each(|w| *w = u64::MAX);
        m.clear_tail();
        Ok(m)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut m = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    m.set(x, y, true);
                }
            }
        }
        Ok(m)
    }

    /// Builds a mask from a row-major slice of booleans.
    pub fn from_bools(width: usize, height: usize, bits: &[bool]) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                actual: bits.len(),
            });
        }
        Self::from_fn(width, height, |x, y| bits[y * width + x])
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

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        debug_assert!(x < self.width && y < self.height);
        let bit = y * self.width + x;
        self.words[bit / WORD_BITS] >> (bit % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        assert!(x < self.width && y < self.height, "pixel ({x},{y}) out of bounds");
        let bit = y * self.width + x;
        let word = &mut self.words[bit / WORD_BITS];
        let flag = 1u64 << (bit % WORD_BITS);
        if value {
            *word |= flag;
        } else {
            *word &= !flag;
        }
    }

    /// Row-major booleans, one per pixel.
    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.pixel_count())
            .map(|bit| self.words[bit / WORD_BITS] >> (bit % WORD_BITS) & 1 == 1)
            .collect()
    }

    /// Coordinates `(x, y)` of active pixels in row-major order.
    pub fn active_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.words.iter().enumerate().flat_map(move |(wi, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let bit = wi * WORD_BITS + tz;
                Some((bit % w, bit / w))
            })
        })
    }

    /// Number of active pixels.
    pub fn active_count(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Active pixels as a fraction of all pixels.
    pub fn normalized_area(&self) -> f64 {
        self.active_count() as f64 / self.pixel_count() as f64
    }

    fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(self.dims(), other.dims()));
        }
        Ok(())
    }

    /// `(|A ∩ B|, |A ∪ B|)`.
    pub fn overlap_counts(&self, other: &Self) -> Result<(u64, u64)> {
        self.check_same_dims(other)?;
        let (mut inter, mut union) = (0u64, 0u64);
        for (&a, &b) in self.words.iter().zip(&other.words) {
            inter += u64::from((a & b).count_ones());
            union += u64::from((a | b).count_ones());
        }
        Ok((inter, union))
    }

    /// Jaccard index `|A ∩ B| / |A ∪ B|`; two empty masks score 1.0.
    pub fn jaccard(&self, other: &Self) -> Result<f64> {
        let (inter, union) = self.overlap_counts(other)?;
        if union == 0 {
            return Ok(1.0);
        }
        Ok(inter as f64 / union as f64)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a | b)
    }

    /// `true` if every active pixel of `self` is active in `other`.
    pub fn is_subset_of(&self, other: &Self) -> Result<bool> {
        self.check_same_dims(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0))
    }

    pub fn inverted(&self) -> Self {
        let mut out = self.clone();
        out.words.iter_mut().for_each(|w| *w = !*w);
        out.clear_tail();
        out
    }

    fn zip_words(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self {
            width: self.width,
            height: self.height,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect(),
        })
    }

    fn clear_tail(&mut self) {
        let used = self.pixel_count() % WORD_BITS;
        if used != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }

    /// 1-channel raster with 255 for active pixels and 0 elsewhere.
    pub fn to_raster(&self) -> RasterImage {
        let samples = self.to_bools().into_iter().map(|b| if b { 255 } else { 0 }).collect();
        RasterImage::new(self.width, self.height, 1, samples).expect("mask dimensions are valid")
    }
}

/// Marks a pixel active iff its sample is strictly above `threshold`.
pub fn mask_from_grayscale(img: &RasterImage, threshold: u8) -> Result<BinaryMask> {
    if img.channels() != 1 {
        return Err(Error::UnsupportedChannels(img.channels()));
    }
    let w = img.width();
    let samples = img.samples();
    BinaryMask::from_fn(w, img.height(), |x, y| samples[y * w + x] > threshold)
}

/// Free-function form of [`BinaryMask::jaccard`].
pub fn jaccard(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.jaccard(b)
}
