//! Deterministic non-learned lesion segmenter: Otsu threshold on luminance,
//! keep the darker class, keep the largest 4-connected component, fill holes.

use crate::mask::BinaryMask;
use crate::raster::RasterImage;

pub fn histogram(gray: &RasterImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &s in gray.samples() {
        hist[s as usize] += 1;
    }
    hist
}

/// Otsu's threshold: the `t` maximizing between-class variance for the split
/// `{<= t}` / `{> t}`. `None` when the histogram has a single occupied bin.
pub fn otsu_threshold(hist: &[u64; 256]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let total_f = total as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best = (f64::NEG_INFINITY, 0u8);
    for (t, &c) in hist.iter().enumerate().take(255) {
        w0 += c as f64;
        sum0 += t as f64 * c as f64;
        let w1 = total_f - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best.0 {
            best = (between, t as u8);
        }
    }
    Some(best.1)
}

/// Pixels of the largest 4-connected component. Equal-size components are
/// resolved in favour of the one reached first in row-major order.
pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut label = vec![0u32; w * h];
    let mut best: Option<(u32, usize)> = None;
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if label[start] != 0 || !mask.get(start % w, start / w) {
            continue;
        }
        next += 1;
        label[start] = next;
        stack.push(start);
        let mut size = 0usize;
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if label[j] == 0 && mask.get(j % w, j / w) {
                    label[j] = next;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((next, size));
        }
    }
    match best {
        Some((keep, _)) => BinaryMask::from_fn(w, h, |x, y| label[y * w + x] == keep).expect("non-zero dims"),
        None => BinaryMask::new(w, h).expect("non-zero dims"),
    }
}

/// Activates every inactive pixel not 4-connected to the image border.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut outside = vec![false; w * h];
    let mut stack: Vec<usize> = Vec::new();
    let seed = |x: usize, y: usize, outside: &mut Vec<bool>, stack: &mut Vec<usize>| {
        let i = y * w + x;
        if !outside[i] && !mask.get(x, y) {
            outside[i] = true;
            stack.push(i);
        }
    };
    for x in 0..w {
        seed(x, 0, &mut outside, &mut stack);
        seed(x, h - 1, &mut outside, &mut stack);
    }
    for y in 0..h {
        seed(0, y, &mut outside, &mut stack);
        seed(w - 1, y, &mut outside, &mut stack);
    }
    while let Some(i) = stack.pop() {
        let (x, y) = (i % w, i / w);
        let neighbours = [
            (x > 0).then(|| i - 1),
            (x + 1 < w).then(|| i + 1),
            (y > 0).then(|| i - w),
            (y + 1 < h).then(|| i + w),
        ];
        for j in neighbours.into_iter().flatten() {
            if !outside[j] && !mask.get(j % w, j / w) {
                outside[j] = true;
                stack.push(j);
            }
        }
    }
    BinaryMask::from_fn(w, h, |x, y| !outside[y * w + x]).expect("non-zero dims")
}

/// Lesion mask for a gray or RGB image. A single-intensity image yields an
/// all-false mask.
pub fn baseline_segment(img: &RasterImage) -> BinaryMask {
    let gray = img.to_luma();
    let (w, h) = gray.dims();
    let Some(t) = otsu_threshold(&histogram(&gray)) else {
        return BinaryMask::new(w, h).expect("non-zero dims");
    };
    let samples = gray.samples();
    let dark = BinaryMask::from_fn(w, h, |x, y| samples[y * w + x] <= t).expect("non-zero dims");
    fill_holes(&largest_component(&dark))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            dx * dx + dy * dy <= r * r
        })
        .unwrap()
    }

    fn paint(mask: &BinaryMask, fg: u8, bg: u8) -> RasterImage {
        let samples = mask.to_bools().into_iter().map(|b| if b { fg } else { bg }).collect();
        RasterImage::new(mask.width(), mask.height(), 1, samples).unwrap()
    }

    #[test]
    fn otsu_splits_bimodal_histogram() {
        let mut hist = [0u64; 256];
        hist[40] = 500;
        hist[200] = 500;
        let t = otsu_threshold(&hist).unwrap();
        assert!((40..200).contains(&t));
        let mut flat = [0u64; 256];
        flat[77] = 10;
        assert_eq!(otsu_threshold(&flat), None);
    }

    #[test]
    fn black_disk_on_white() {
        let truth = disk(120, 90, 60.0, 45.0, 30.0);
        let img = paint(&truth, 0, 255);
        let mask = baseline_segment(&img);
        assert!(mask.jaccard(&truth).unwrap() >= 0.95);
    }

    #[test]
    fn constant_image_gives_empty_mask() {
        let img = RasterImage::filled(30, 20, 3, 128).unwrap();
        assert!(baseline_segment(&img).is_empty());
    }

    #[test]
    fn only_larger_blob_survives() {
        let big = disk(200, 100, 50.0, 50.0, 30.0);
        let small = disk(200, 100, 150.0, 50.0, 15.0);
        assert!(big.active_count() > 3 * small.active_count());
        let img = paint(&big.union(&small).unwrap(), 20, 230);
        let mask = baseline_segment(&img);
        assert_eq!(mask, big);
    }

    #[test]
    fn holes_are_filled() {
        let ring = disk(60, 60, 30.0, 30.0, 20.0)
            .intersection(&disk(60, 60, 30.0, 30.0, 8.0).inverted())
            .unwrap();
        let img = paint(&ring, 10, 240);
        assert_eq!(baseline_segment(&img), disk(60, 60, 30.0, 30.0, 20.0));
    }

    #[test]
    fn largest_component_uses_four_connectivity() {
        // two diagonal pixels are separate components
        let m = BinaryMask::from_fn(3, 3, |x, y| (x, y) == (0, 0) || (x, y) == (1, 1)).unwrap();
        assert_eq!(largest_component(&m).active_count(), 1);
        assert!(largest_component(&BinaryMask::new(3, 3).unwrap()).is_empty());
    }
}
