#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use lesion_cli::{EvalMaskArgs, MissingPolicy, ReportFormat};
use lesion_core::io::{write_mask, write_raster};
use lesion_core::{BinaryMask, RasterImage};
use serde::de::DeserializeOwned;

/// Mask with the first `n` pixels in row-major order active.
pub fn first_n(w: usize, h: usize, n: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| y * w + x < n).unwrap()
}

pub fn put_mask(dir: &Path, name: &str, mask: &BinaryMask) {
    fs::create_dir_all(dir).unwrap();
    write_mask(dir.join(name), mask).unwrap();
}

pub fn put_image(dir: &Path, id: &str, w: usize, h: usize) {
    fs::create_dir_all(dir).unwrap();
    write_raster(
        dir.join(format!("{id}.png")),
        &RasterImage::filled(w, h, 3, 200).unwrap(),
    )
    .unwrap();
}

pub fn read_report<T: DeserializeOwned>(path: impl AsRef<Path>) -> T {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

pub fn eval_args(truth: &Path, pred: &Path, out: &Path) -> EvalMaskArgs {
    EvalMaskArgs {
        truth: truth.to_path_buf(),
        pred: pred.to_path_buf(),
        ids: None,
        missing: MissingPolicy::default(),
        format: ReportFormat::Json,
        out: out.to_path_buf(),
    }
}

pub fn skip_missing() -> MissingPolicy {
    MissingPolicy {
        strict: false,
        skip_missing: true,
    }
}

pub fn sub(root: &Path, name: &str) -> PathBuf {
    root.join(name)
}
