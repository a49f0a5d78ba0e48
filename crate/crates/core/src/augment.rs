//! Training-time augmentation: flips, quarter turns, luminosity scaling and
//! Gaussian blur.
//!
//! Geometric transforms act identically on an image and its masks.
//! Photometric transforms touch only the image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PixelGrid;
use crate::mask::BinaryMask;
use crate::raster::RasterImage;
use crate::rng::SplitMix64;

pub const LUMINOSITY_MIN: f64 = 0.8;
pub const LUMINOSITY_MAX: f64 = 1.5;
pub const BLUR_SIGMA: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Mirror left-right.
    Horizontal,
    /// Mirror top-bottom.
    Vertical,
}

pub fn flip<G: PixelGrid>(grid: &G, axis: Axis) -> G {
    let (w, h) = (grid.grid_width(), grid.grid_height());
    match axis {
        Axis::Horizontal => grid.remap(w, h, |x, y| Some((w - 1 - x, y))),
        Axis::Vertical => grid.remap(w, h, |x, y| Some((x, h - 1 - y))),
    }
}

/// Counter-clockwise rotation by `quarter_turns * 90` degrees. Any integer is
/// accepted and reduced modulo 4.
///
/// For one turn, source pixel `(x, y)` of a `W x H` grid lands at
/// `(y, W - 1 - x)` of the `H x W` result.
pub fn rotate90<G: PixelGrid>(grid: &G, quarter_turns: i64) -> G {
    let (w, h) = (grid.grid_width(), grid.grid_height());
    match quarter_turns.rem_euclid(4) {
        0 => grid.remap(w, h, |x, y| Some((x, y))),
        // out (x', y') = (y, w-1-x)  =>  x = w-1-y', y = x'
        1 => grid.remap(h, w, |xo, yo| Some((w - 1 - yo, xo))),
        2 => grid.remap(w, h, |x, y| Some((w - 1 - x, h - 1 - y))),
        // inverse of one turn: (x, y) -> (h-1-y, x)
        _ => grid.remap(h, w, |xo, yo| Some((yo, h - 1 - xo))),
    }
}

fn check_luminosity(factor: f64) -> Result<()> {
    if !(LUMINOSITY_MIN..=LUMINOSITY_MAX).contains(&factor) {
        return Err(Error::InvalidParameter(format!(
            "luminosity factor {factor} outside [{LUMINOSITY_MIN}, {LUMINOSITY_MAX}]"
        )));
    }
    Ok(())
}

/// Multiplies every sample by `factor`, rounding and clamping to 8 bits.
pub fn scale_luminosity(img: &RasterImage, factor: f64) -> Result<RasterImage> {
    check_luminosity(factor)?;
    let samples = img
        .samples()
        .iter()
        .map(|&s| (f64::from(s) * factor).round().clamp(0.0, 255.0) as u8)
        .collect();
    RasterImage::new(img.width(), img.height(), img.channels(), samples)
}

/// Normalized 1-D Gaussian of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "blur sigma must be positive, got {sigma}"
        )));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    Ok(k)
}

/// Separable Gaussian blur of one `width x height` float plane with
/// clamp-to-edge borders. No rounding is applied.
pub fn blur_plane(plane: &[f64], width: usize, height: usize, sigma: f64) -> Result<Vec<f64>> {
    if plane.len() != width * height {
        return Err(Error::BufferLength {
            expected: width * height,
            actual: plane.len(),
        });
    }
    let kernel = gaussian_kernel(sigma)?;
    let r = (kernel.len() / 2) as isize;
    let clamp = |v: isize, len: usize| v.clamp(0, len as isize - 1) as usize;

    let mut horizontal = vec![0.0; plane.len()];
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for x in 0..width {
            horizontal[y * width + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * row[clamp(x as isize + k as isize - r, width)])
                .sum();
        }
    }
    let mut out = vec![0.0; plane.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * horizontal[clamp(y as isize + k as isize - r, height) * width + x])
                .sum();
        }
    }
    Ok(out)
}

/// Gaussian blur applied per channel, rounded back to 8 bits.
pub fn gaussian_blur(img: &RasterImage, sigma: f64) -> Result<RasterImage> {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let mut samples = vec![0u8; w * h * c];
    for ch in 0..c {
        let plane: Vec<f64> = img
            .samples()
            .iter()
            .skip(ch)
            .step_by(c)
            .map(|&s| f64::from(s))
            .collect();
        let blurred = blur_plane(&plane, w, h, sigma)?;
        for (i, v) in blurred.into_iter().enumerate() {
            samples[i * c + ch] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    RasterImage::new(w, h, c, samples)
}

/// One sampled augmentation. Applied in the order flips, rotation,
/// luminosity, blur.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub flip_h: bool,
    pub flip_v: bool,
    pub quarter_turns: u8,
    pub luminosity: f64,
    /// 0 disables blur.
    pub blur_sigma: f64,
}

impl Default for AugmentationSpec {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl AugmentationSpec {
    pub const IDENTITY: AugmentationSpec = AugmentationSpec {
        flip_h: false,
        flip_v: false,
        quarter_turns: 0,
        luminosity: 1.0,
        blur_sigma: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        if self.quarter_turns > 3 {
            return Err(Error::InvalidParameter(format!(
                "quarter_turns must be in 0..=3, got {}",
                self.quarter_turns
            )));
        }
        check_luminosity(self.luminosity)?;
        if self.blur_sigma < 0.0 || !self.blur_sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "invalid blur sigma {}",
                self.blur_sigma
            )));
        }
        Ok(())
    }

    pub fn is_geometric_only(&self) -> bool {
        self.luminosity == 1.0 && self.blur_sigma == 0.0
    }

    /// Applies the geometric part (flips, then rotation) to one grid.
    pub fn apply_geometric<G: PixelGrid>(&self, grid: &G) -> G {
        let mut out = match (self.flip_h, self.flip_v) {
            (true, true) => flip(&flip(grid, Axis::Horizontal), Axis::Vertical),
            (true, false) => flip(grid, Axis::Horizontal),
            (false, true) => flip(grid, Axis::Vertical),
            (false, false) => return rotate90(grid, i64::from(self.quarter_turns)),
        };
        if self.quarter_turns != 0 {
            out = rotate90(&out, i64::from(self.quarter_turns));
        }
        out
    }
}

/// Applies `spec` to an image and its masks.
pub fn apply(
    spec: &AugmentationSpec,
    img: &RasterImage,
    masks: &[BinaryMask],
) -> Result<(RasterImage, Vec<BinaryMask>)> {
    spec.validate()?;
    if let Some(bad) = masks.iter().find(|m| m.dims() != img.dims()) {
        return Err(Error::dims(img.dims(), bad.dims()));
    }
    let mut out = spec.apply_geometric(img);
    if spec.luminosity != 1.0 {
        out = scale_luminosity(&out, spec.luminosity)?;
    }
    if spec.blur_sigma > 0.0 {
        out = gaussian_blur(&out, spec.blur_sigma)?;
    }
    let masks = masks.iter().map(|m| spec.apply_geometric(m)).collect();
    Ok((out, masks))
}

/// Deterministic spec for draw `index` under `seed`: each flip with
/// probability 0.5, quarter turns uniform over 0..=3, luminosity uniform on
/// [0.8, 1.5], blur at sigma 2.5 with probability 0.5.
pub fn sample_spec(seed: u64, index: u64) -> AugmentationSpec {
    let mut rng = SplitMix64::for_stream(seed, index);
    let flip_h = rng.bernoulli(0.5);
    let flip_v = rng.bernoulli(0.5);
    let quarter_turns = rng.below(4) as u8;
    let luminosity = LUMINOSITY_MIN + (LUMINOSITY_MAX - LUMINOSITY_MIN) * rng.next_f64();
    let blur_sigma = if rng.bernoulli(0.5) { BLUR_SIGMA } else { 0.0 };
    AugmentationSpec {
        flip_h,
        flip_v,
        quarter_turns,
        luminosity,
        blur_sigma,
    }
}
