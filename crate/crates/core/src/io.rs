//! PNG/JPEG ingestion and PNG output for rasters and masks.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, Luma, Rgb};

use crate::error::{Error, Result};
use crate::mask::{mask_from_grayscale, BinaryMask, DEFAULT_MASK_THRESHOLD};
use crate::raster::RasterImage;

fn image_err(path: &Path, source: image::ImageError) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads an 8-bit gray or RGB image. Alpha channels are dropped; 16-bit and
/// float formats are rejected.
pub fn read_raster(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => RasterImage::new(w, h, 1, buf.into_raw()),
        DynamicImage::ImageLumaA8(_) => RasterImage::new(w, h, 1, img.to_luma8().into_raw()),
        DynamicImage::ImageRgb8(buf) => RasterImage::new(w, h, 3, buf.into_raw()),
        DynamicImage::ImageRgba8(_) => RasterImage::new(w, h, 3, img.to_rgb8().into_raw()),
        other => Err(Error::UnsupportedBitDepth {
            path: path.to_path_buf(),
            format: format!("{:?}", other.color()),
        }),
    }
}

pub fn write_raster(path: impl AsRef<Path>, img: &RasterImage) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let data = img.samples().to_vec();
    let res = if img.channels() == 1 {
        ImageBuffer::<Luma<u8>, _>::from_raw(w, h, data)
            .expect("raster buffer length is validated")
            .save_with_format(path, image::ImageFormat::Png)
    } else {
        ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, data)
            .expect("raster buffer length is validated")
            .save_with_format(path, image::ImageFormat::Png)
    };
    res.map_err(|e| image_err(path, e))
}

/// Reads a 1-channel mask PNG, binarizing at [`DEFAULT_MASK_THRESHOLD`].
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let img = read_raster(path)?;
    mask_from_grayscale(&img, DEFAULT_MASK_THRESHOLD)
}

/// Writes a mask as a 1-channel PNG with values 0 and 255.
pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    let path = path.as_ref();
    let buf: GrayImage = ImageBuffer::from_fn(mask.width() as u32, mask.height() as u32, |x, y| {
        Luma([if mask.get(x as usize, y as usize) { 255 } else { 0 }])
    });
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}

/// Width and height from the file header, without decoding pixels.
pub fn image_dimensions(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let (w, h) = image::image_dimensions(path).map_err(|e| image_err(path, e))?;
    Ok((w as usize, h as usize))
}
