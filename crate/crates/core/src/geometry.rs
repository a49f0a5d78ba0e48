//! Resize-to-longest-side and pad-to-square preprocessing, plus the exact
//! inverse used to bring predictions back to the original resolution.
//!
//! Images resample bilinearly; masks resample nearest-neighbour so they stay
//! binary. Padding is centered, with the odd remainder on the bottom/right.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PixelGrid;
use crate::mask::BinaryMask;
use crate::raster::RasterImage;

/// Network input side used for the boundary and attribute models.
pub const DEFAULT_TARGET_SIDE: usize = 768;

/// Everything needed to undo a resize + pad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryRecord {
    pub original_width: usize,
    pub original_height: usize,
    /// `target_side / max(original_width, original_height)`.
    pub scale: f64,
    pub resized_width: usize,
    pub resized_height: usize,
    pub pad_left: usize,
    pub pad_top: usize,
    pub pad_right: usize,
    pub pad_bottom: usize,
    pub target_side: usize,
}

impl GeometryRecord {
    /// Record for a grid that was neither resized nor padded.
    pub fn identity(width: usize, height: usize) -> Self {
        Self {
            original_width: width,
            original_height: height,
            scale: 1.0,
            resized_width: width,
            resized_height: height,
            pad_left: 0,
            pad_top: 0,
            pad_right: 0,
            pad_bottom: 0,
            target_side: width.max(height),
        }
    }

    /// Dimensions of the grid after resize and padding.
    pub fn canvas_dims(&self) -> (usize, usize) {
        (
            self.pad_left + self.resized_width + self.pad_right,
            self.pad_top + self.resized_height + self.pad_bottom,
        )
    }

    fn for_resize(width: usize, height: usize, target: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroSize { width, height });
        }
        if target == 0 {
            return Err(Error::InvalidParameter("resize target must be positive".into()));
        }
        let longest = width.max(height);
        let scale = target as f64 / longest as f64;
        let side = |len: usize| {
            if len == longest {
                target
            } else {
                ((len as f64 * scale).round() as usize).clamp(1, target)
            }
        };
        Ok(Self {
            original_width: width,
            original_height: height,
            scale,
            resized_width: side(width),
            resized_height: side(height),
            pad_left: 0,
            pad_top: 0,
            pad_right: 0,
            pad_bottom: 0,
            target_side: target,
        })
    }
}

/// Source coordinate for nearest-neighbour resampling from `src_len` to
/// `dst_len` samples, matching pixel centres.
#[inline]
fn nearest_source(dst: usize, src_len: usize, dst_len: usize) -> usize {
    let s = ((dst as f64 + 0.5) * src_len as f64 / dst_len as f64).floor() as usize;
    s.min(src_len - 1)
}

pub fn resize_nearest<G: PixelGrid>(grid: &G, width: usize, height: usize) -> G {
    let (sw, sh) = (grid.grid_width(), grid.grid_height());
    grid.remap(width, height, |x, y| {
        Some((nearest_source(x, sw, width), nearest_source(y, sh, height)))
    })
}

/// Bilinear resampling with pixel-centre alignment and clamped borders.
pub fn resize_bilinear(img: &RasterImage, width: usize, height: usize) -> RasterImage {
    let (sw, sh, c) = (img.width(), img.height(), img.channels());
    if (sw, sh) == (width, height) {
        return img.clone();
    }
    let taps = |dst_len: usize, src_len: usize| -> Vec<(usize, usize, f64)> {
        let ratio = src_len as f64 / dst_len as f64;
        (0..dst_len)
            .map(|d| {
                let s = ((d as f64 + 0.5) * ratio - 0.5).clamp(0.0, (src_len - 1) as f64);
                let lo = s.floor() as usize;
                let hi = (lo + 1).min(src_len - 1);
                (lo, hi, s - lo as f64)
            })
            .collect()
    };
    let xs = taps(width, sw);
    let ys = taps(height, sh);
    let src = img.samples();
    let mut out = Vec::with_capacity(width * height * c);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for ch in 0..c {
                let at = |x: usize, y: usize| f64::from(src[(y * sw + x) * c + ch]);
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                out.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RasterImage::new(width, height, c, out).expect("resize target is non-zero")
}

/// Scales an image so its longest side equals `target` (bilinear).
pub fn resize_longest_side(img: &RasterImage, target: usize) -> Result<(RasterImage, GeometryRecord)> {
    let record = GeometryRecord::for_resize(img.width(), img.height(), target)?;
    Ok((
        resize_bilinear(img, record.resized_width, record.resized_height),
        record,
    ))
}

/// Scales a mask so its longest side equals `target` (nearest-neighbour).
pub fn resize_mask_longest_side(mask: &BinaryMask, target: usize) -> Result<(BinaryMask, GeometryRecord)> {
    let record = GeometryRecord::for_resize(mask.width(), mask.height(), target)?;
    Ok((
        resize_nearest(mask, record.resized_width, record.resized_height),
        record,
    ))
}

/// Centers `grid` on a zero-filled `side x side` canvas.
///
/// `record` must describe the grid as it is now (typically the output of a
/// resize); the returned record gains the pad offsets.
pub fn pad_to_square<G: PixelGrid>(grid: &G, side: usize, record: GeometryRecord) -> Result<(G, GeometryRecord)> {
    let (w, h) = (grid.grid_width(), grid.grid_height());
    if w > side || h > side {
        return Err(Error::DoesNotFit {
            width: w,
            height: h,
            side,
        });
    }
    if (w, h) != (record.resized_width, record.resized_height) {
        return Err(Error::dims((w, h), (record.resized_width, record.resized_height)));
    }
    let pad_left = (side - w) / 2;
    let pad_top = (side - h) / 2;
    let out = grid.remap(side, side, |x, y| {
        let (sx, sy) = (x.checked_sub(pad_left)?, y.checked_sub(pad_top)?);
        (sx < w && sy < h).then_some((sx, sy))
    });
    let record = GeometryRecord {
        pad_left,
        pad_top,
        pad_right: side - w - pad_left,
        pad_bottom: side - h - pad_top,
        target_side: side,
        ..record
    };
    Ok((out, record))
}

/// Removes the padding described by `record`, leaving the resized content.
pub fn crop_padding<G: PixelGrid>(grid: &G, record: &GeometryRecord) -> Result<G> {
    let dims = (grid.grid_width(), grid.grid_height());
    if dims != record.canvas_dims() {
        return Err(Error::dims(dims, record.canvas_dims()));
    }
    let (l, t) = (record.pad_left, record.pad_top);
    Ok(grid.remap(record.resized_width, record.resized_height, |x, y| Some((x + l, y + t))))
}

/// Maps a mask predicted on the padded canvas back to original resolution.
pub fn restore_geometry(mask: &BinaryMask, record: &GeometryRecord) -> Result<BinaryMask> {
    let cropped = crop_padding(mask, record)?;
    Ok(resize_nearest(&cropped, record.original_width, record.original_height))
}

/// Resize + pad in one step, for images.
pub fn preprocess_image(img: &RasterImage, side: usize) -> Result<(RasterImage, GeometryRecord)> {
    let (resized, record) = resize_longest_side(img, side)?;
    pad_to_square(&resized, side, record)
}

/// Resize + pad in one step, for masks.
pub fn preprocess_mask(mask: &BinaryMask, side: usize) -> Result<(BinaryMask, GeometryRecord)> {
    let (resized, record) = resize_mask_longest_side(mask, side)?;
    pad_to_square(&resized, side, record)
}
