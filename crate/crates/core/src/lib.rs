//! Scoring, preprocessing and area-voting diagnosis for dermoscopic lesion
//! analysis.
//!
//! * [`mask`], [`raster`], [`geometry`], [`io`]: binary masks, images, Jaccard
//!   index, resize/pad and its inverse, PNG I/O.
//! * [`metrics`]: boundary and attribute scores, diagnosis accuracy,
//!   confusion matrix and balanced accuracy.
//! * [`augment`]: flips, quarter turns, luminosity scaling, Gaussian blur.
//! * [`dataset`]: ground-truth CSV, directory discovery, seeded splits.
//! * [`diagnose`]: class-mask construction, area vote, predictor contract.
//! * [`baseline`]: deterministic Otsu-based lesion segmenter.

pub mod augment;
pub mod baseline;
pub mod dataset;
pub mod diagnose;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod labels;
pub mod mask;
pub mod metrics;
pub mod model_config;
pub mod raster;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::GeometryRecord;
pub use grid::PixelGrid;
pub use labels::{AttributeClass, DiagnosisLabel};
pub use mask::{jaccard, BinaryMask};
pub use metrics::{ConfusionMatrix, MaskPair};
pub use raster::RasterImage;
