use std::path::PathBuf;

use crate::labels::{AttributeClass, DiagnosisLabel};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("zero-size input ({width}x{height})")]
    ZeroSize { width: usize, height: usize },

    #[error("sample buffer holds {actual} values, expected {expected}")]
    BufferLength { expected: usize, actual: usize },

    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannels(usize),

    #[error("unsupported pixel format in {path}: {format} (only 8-bit gray/RGB accepted)")]
    UnsupportedBitDepth { path: PathBuf, format: String },

    #[error("image {width}x{height} does not fit in a {side}x{side} square")]
    DoesNotFit { width: usize, height: usize, side: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} predictions vs {right} truths")]
    LengthMismatch { left: usize, right: usize },

    #[error("score for attribute class {0} is undefined (no non-empty ground truth masks)")]
    UndefinedClassScore(AttributeClass),

    #[error("no class row has any samples")]
    NoSamples,

    #[error("ground truth CSV {path}: missing column {column}")]
    MissingColumn { path: PathBuf, column: String },

    #[error("ground truth CSV {path}, row {row}: {message}")]
    InvalidRow { path: PathBuf, row: usize, message: String },

    #[error("duplicate image id {0}")]
    DuplicateId(String),

    #[error("image {image_id}: missing {what}")]
    MissingAnnotation { image_id: String, what: String },

    #[error("dataset discovery found {} problem(s): {}", problems.len(), problems.join("; "))]
    Discovery { problems: Vec<String> },

    #[error("mask {0} has no matching image")]
    OrphanMask(PathBuf),

    #[error("image {image_id}: mask {mask} is {mask_width}x{mask_height}, image is {image_width}x{image_height}")]
    MaskImageMismatch {
        image_id: String,
        mask: PathBuf,
        mask_width: usize,
        mask_height: usize,
        image_width: usize,
        image_height: usize,
    },

    #[error("split counts {train}+{test} do not match {available} available ids")]
    SplitCountMismatch {
        train: usize,
        test: usize,
        available: usize,
    },

    #[error("no prediction available for image {image_id}: {reason}")]
    MissingPrediction { image_id: String, reason: String },

    #[error("label {0} has no class mask")]
    MissingClassMask(DiagnosisLabel),

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            left_width: left.0,
            left_height: left.1,
            right_width: right.0,
            right_height: right.1,
        }
    }
}
