use crate::mask::BinaryMask;
use crate::raster::RasterImage;

/// Anything laid out as a `width x height` pixel grid that can be rebuilt by
/// pulling pixels from source coordinates.
///
/// `remap` builds a new `width x height` grid whose pixel `(x, y)` copies the
/// source pixel `source(x, y)`, or is zero (inactive) when `source` returns
/// `None`. Flips, quarter turns, padding, cropping and nearest-neighbour
/// resampling are all expressed through it, so they behave identically on
/// images and masks.
pub trait PixelGrid: Sized {
    fn grid_width(&self) -> usize;
    fn grid_height(&self) -> usize;
    fn remap<F>(&self, width: usize, height: usize, source: F) -> Self
    where
        F: Fn(usize, usize) -> Option<(usize, usize)>;
}

impl PixelGrid for RasterImage {
    fn grid_width(&self) -> usize {
        self.width()
    }

    fn grid_height(&self) -> usize {
        self.height()
    }

    fn remap<F>(&self, width: usize, height: usize, source: F) -> Self
    where
        F: Fn(usize, usize) -> Option<(usize, usize)>,
    {
        let c = self.channels();
        let mut samples = Vec::with_capacity(width * height * c);
        let zero = [0u8; 3];
        for y in 0..height {
            for x in 0..width {
                match source(x, y) {
                    Some((sx, sy)) => samples.extend_from_slice(self.pixel(sx, sy)),
                    None => samples.extend_from_slice(&zero[..c]),
                }
            }
        }
        RasterImage::new(width, height, c, samples).expect("remap target dimensions are non-zero")
    }
}

impl PixelGrid for BinaryMask {
    fn grid_width(&self) -> usize {
        self.width()
    }

    fn grid_height(&self) -> usize {
        self.height()
    }

    fn remap<F>(&self, width: usize, height: usize, source: F) -> Self
    where
        F: Fn(usize, usize) -> Option<(usize, usize)>,
    {
        BinaryMask::from_fn(width, height, |x, y| {
            source(x, y).is_some_and(|(sx, sy)| self.get(sx, sy))
        })
        .expect("remap target dimensions are non-zero")
    }
}
