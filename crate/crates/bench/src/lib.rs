//! Fixtures shared by the criterion benchmarks in `benches/`.

use lesion_core::diagnose::{build_class_training_mask, ClassMaskSet};
use lesion_core::rng::SplitMix64;
use lesion_core::synth::{generate_lesion, SynthConfig};
use lesion_core::{BinaryMask, DiagnosisLabel, RasterImage};

/// Filled disk of radius `r` centred at (`cx`, `cy`).
pub fn disk(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| {
        (x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2) <= r * r
    })
    .unwrap()
}

/// Uniform noise raster.
pub fn noise_image(w: usize, h: usize, channels: usize, seed: u64) -> RasterImage {
    let mut rng = SplitMix64::new(seed);
    RasterImage::new(
        w,
        h,
        channels,
        (0..w * h * channels).map(|_| rng.next_u64() as u8).collect(),
    )
    .unwrap()
}

/// A synthetic lesion image of the given size.
pub fn lesion_image(w: usize, h: usize) -> RasterImage {
    let config = SynthConfig {
        width: w,
        height: h,
        ..SynthConfig::default()
    };
    generate_lesion(1, 0, &config).image
}

/// Seven class masks with a melanoma-sized disk for MEL and smaller ones for
/// the rest.
pub fn class_masks(w: usize, h: usize) -> ClassMaskSet {
    let boundary = disk(w, h, w as f64 / 2.0, h as f64 / 2.0, h as f64 / 3.0);
    let mut set = build_class_training_mask(&boundary, DiagnosisLabel::Mel);
    for (i, label) in DiagnosisLabel::ALL.into_iter().enumerate().skip(1) {
        let r = h as f64 / (4.0 + i as f64);
        set.set(label, disk(w, h, w as f64 / 3.0, h as f64 / 3.0, r)).unwrap();
    }
    set
}
