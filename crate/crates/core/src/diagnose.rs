//! Hybrid diagnosis: per-disease class masks are built from lesion boundary
//! masks for training, and an image is classified by the class whose
//! predicted mask covers the most pixels.
//!
//! Neural mask predictors are external. They hand masks over through the
//! [`BoundaryPredictor`] and [`ClassMaskPredictor`] traits, usually via the
//! directory layout read by [`PredictorDir`]:
//!
//! ```text
//! <root>/task1/<image_id>_segmentation.png
//! <root>/task2/<image_id>_attribute_<name>.png
//! <root>/task3/<image_id>_<LABEL>.png        (a missing file is an empty mask)
//! ```

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::baseline_segment;
use crate::error::{Error, Result};
use crate::geometry::{preprocess_image, restore_geometry};
use crate::io::{read_mask, read_raster};
use crate::labels::{AttributeClass, DiagnosisLabel};
use crate::mask::BinaryMask;

const N: usize = DiagnosisLabel::COUNT;

/// Returned when every class mask is empty.
pub const FALLBACK_LABEL: DiagnosisLabel = DiagnosisLabel::Nv;

/// Exactly one mask per diagnosis label, all the same size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMaskSet {
    masks: Vec<BinaryMask>,
}

impl ClassMaskSet {
    /// `masks` in [`DiagnosisLabel::ALL`] order.
    pub fn new(masks: Vec<BinaryMask>) -> Result<Self> {
        if masks.len() != N {
            return Err(Error::InvalidParameter(format!(
                "class mask set needs {N} masks, got {}",
                masks.len()
            )));
        }
        let dims = masks[0].dims();
        if let Some(bad) = masks.iter().find(|m| m.dims() != dims) {
            return Err(Error::dims(dims, bad.dims()));
        }
        Ok(Self { masks })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        let blank = BinaryMask::new(width, height)?;
        Ok(Self { masks: vec![blank; N] })
    }

    pub fn get(&self, label: DiagnosisLabel) -> &BinaryMask {
        &self.masks[label.index()]
    }

    pub fn set(&mut self, label: DiagnosisLabel, mask: BinaryMask) -> Result<()> {
        if mask.dims() != self.dims() {
            return Err(Error::dims(self.dims(), mask.dims()));
        }
        self.masks[label.index()] = mask;
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.masks[0].dims()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DiagnosisLabel, &BinaryMask)> {
        DiagnosisLabel::ALL.into_iter().zip(&self.masks)
    }

    /// Every class mask clipped to `boundary`.
    pub fn intersect(&self, boundary: &BinaryMask) -> Result<Self> {
        let masks = self
            .masks
            .iter()
            .map(|m| m.intersection(boundary))
            .collect::<Result<_>>()?;
        Ok(Self { masks })
    }

    pub fn total_active(&self) -> u64 {
        self.masks.iter().map(BinaryMask::active_count).sum()
    }
}

/// Training target for the class-mask model: the boundary mask under the
/// image's label, empty masks elsewhere.
pub fn build_class_training_mask(boundary: &BinaryMask, label: DiagnosisLabel) -> ClassMaskSet {
    let (w, h) = boundary.dims();
    let mut set = ClassMaskSet::empty(w, h).expect("boundary has non-zero dims");
    set.masks[label.index()] = boundary.clone();
    set
}

/// Seven non-negative confidences summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceVector(pub [f64; N]);

impl ConfidenceVector {
    pub fn uniform() -> Self {
        Self([1.0 / N as f64; N])
    }

    /// Counts normalized to sum one, or uniform when all are zero.
    pub fn from_counts(counts: &[u64; N]) -> Self {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Self::uniform();
        }
        Self(counts.map(|c| c as f64 / total as f64))
    }

    pub fn get(&self, label: DiagnosisLabel) -> f64 {
        self.0[label.index()]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vote {
    pub label: DiagnosisLabel,
    pub confidences: ConfidenceVector,
    /// Active pixels per class.
    pub counts: [u64; N],
    /// Active pixels per class as a fraction of the image area.
    pub areas: [f64; N],
    /// All masks were empty; `label` is the fallback class.
    pub fallback: bool,
}

impl Vote {
    fn uniform_fallback() -> Self {
        Self {
            label: FALLBACK_LABEL,
            confidences: ConfidenceVector::uniform(),
            counts: [0; N],
            areas: [0.0; N],
            fallback: true,
        }
    }
}

/// Index of the largest value; the earliest index wins ties. `None` if every
/// value is zero.
fn argmax_first<T: PartialOrd + Default + Copy>(values: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v > T::default() && best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Picks the class whose mask has the largest active area.
///
/// Ties go to the earliest label (MEL first). Confidences are the areas
/// normalized to sum one. With every mask empty the result is [`FALLBACK_LABEL`]
/// with uniform confidences.
pub fn vote(set: &ClassMaskSet) -> Vote {
    let counts: [u64; N] = std::array::from_fn(|i| set.masks[i].active_count());
    let pixels = set.masks[0].pixel_count() as f64;
    match argmax_first(&counts) {
        None => Vote::uniform_fallback(),
        Some(best) => Vote {
            label: DiagnosisLabel::ALL[best],
            confidences: ConfidenceVector::from_counts(&counts),
            counts,
            areas: counts.map(|c| c as f64 / pixels),
            fallback: false,
        },
    }
}

/// Source of lesion boundary masks.
pub trait BoundaryPredictor: Sync {
    fn boundary_mask(&self, image_id: &str) -> Result<BinaryMask>;
}

/// Source of the seven per-class masks. `dims` is the expected mask size,
/// used when a class has no mask at all.
pub trait ClassMaskPredictor: Sync {
    fn class_masks(&self, image_id: &str, dims: (usize, usize)) -> Result<ClassMaskSet>;
}

/// Predictions stored under the directory layout described in the module docs.
#[derive(Debug, Clone)]
pub struct PredictorDir {
    root: PathBuf,
}

impl PredictorDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn boundary_path(&self, image_id: &str) -> PathBuf {
        self.root.join("task1").join(format!("{image_id}_segmentation.png"))
    }

    pub fn attribute_path(&self, image_id: &str, class: AttributeClass) -> PathBuf {
        self.root
            .join("task2")
            .join(format!("{image_id}_attribute_{}.png", class.file_name()))
    }

    pub fn class_path(&self, image_id: &str, label: DiagnosisLabel) -> PathBuf {
        self.root.join("task3").join(format!("{image_id}_{}.png", label.code()))
    }

    /// The attribute mask if its file exists.
    pub fn attribute_mask(&self, image_id: &str, class: AttributeClass) -> Result<Option<BinaryMask>> {
        let path = self.attribute_path(image_id, class);
        if !path.is_file() {
            return Ok(None);
        }
        read_mask(path).map(Some)
    }

    /// Image ids that have at least one prediction file, sorted.
    pub fn image_ids(&self) -> Result<Vec<String>> {
        let mut ids = std::collections::BTreeSet::new();
        let read = |sub: &str| -> Result<Vec<String>> {
            let dir = self.root.join(sub);
            if !dir.is_dir() {
                return Ok(Vec::new());
            }
            let mut names = Vec::new();
            for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                let entry = entry.map_err(|e| Error::io(&dir, e))?;
                if let Some(name) = entry.file_name().to_str() {
                    names.push(name.to_string());
                }
            }
            Ok(names)
        };
        for name in read("task1")? {
            if let Some(id) = name.strip_suffix("_segmentation.png") {
                ids.insert(id.to_string());
            }
        }
        for name in read("task3")? {
            let Some(stem) = name.strip_suffix(".png") else {
                continue;
            };
            if let Some((id, code)) = stem.rsplit_once('_') {
                if code.parse::<DiagnosisLabel>().is_ok_and(|l| l.code() == code) {
                    ids.insert(id.to_string());
                }
            }
        }
        Ok(ids.into_iter().collect())
    }
}

impl BoundaryPredictor for PredictorDir {
    fn boundary_mask(&self, image_id: &str) -> Result<BinaryMask> {
        let path = self.boundary_path(image_id);
        if !path.is_file() {
            return Err(Error::MissingPrediction {
                image_id: image_id.to_string(),
                reason: format!("{} not found", path.display()),
            });
        }
        read_mask(path)
    }
}

impl ClassMaskPredictor for PredictorDir {
    fn class_masks(&self, image_id: &str, dims: (usize, usize)) -> Result<ClassMaskSet> {
        let mut set = ClassMaskSet::empty(dims.0, dims.1)?;
        for label in DiagnosisLabel::ALL {
            let path = self.class_path(image_id, label);
            if path.is_file() {
                set.set(label, read_mask(path)?)?;
            }
        }
        Ok(set)
    }
}

/// Boundary masks computed on the fly by [`baseline_segment`] from the lesion
/// images in a directory.
#[derive(Debug, Clone)]
pub struct BaselinePredictor {
    image_dir: PathBuf,
    /// When set, images are resized and padded to this side before
    /// segmentation and the mask is mapped back to original resolution.
    pub target_side: Option<usize>,
}

impl BaselinePredictor {
    pub fn new(image_dir: impl Into<PathBuf>) -> Self {
        Self {
            image_dir: image_dir.into(),
            target_side: None,
        }
    }

    pub fn with_target_side(mut self, side: usize) -> Self {
        self.target_side = Some(side);
        self
    }

    pub fn image_path(&self, image_id: &str) -> Option<PathBuf> {
        ["png", "jpg", "jpeg", "JPG", "JPEG", "PNG"]
            .iter()
            .map(|ext| self.image_dir.join(format!("{image_id}.{ext}")))
            .find(|p| p.is_file())
    }
}

impl BoundaryPredictor for BaselinePredictor {
    fn boundary_mask(&self, image_id: &str) -> Result<BinaryMask> {
        let path = self.image_path(image_id).ok_or_else(|| Error::MissingPrediction {
            image_id: image_id.to_string(),
            reason: format!("no image in {}", self.image_dir.display()),
        })?;
        let img = read_raster(path)?;
        match self.target_side {
            None => Ok(baseline_segment(&img)),
            Some(side) => {
                let (canvas, record) = preprocess_image(&img, side)?;
                restore_geometry(&baseline_segment(&canvas), &record)
            }
        }
    }
}

/// Classifies one image: boundary mask, seven class masks, optional clipping
/// of the class masks to the boundary, then the area vote.
pub fn classify(
    image_id: &str,
    boundary: &dyn BoundaryPredictor,
    classes: &dyn ClassMaskPredictor,
    intersect_boundary: bool,
) -> Result<Vote> {
    let boundary_mask = boundary.boundary_mask(image_id)?;
    let set = classes.class_masks(image_id, boundary_mask.dims())?;
    if set.dims() != boundary_mask.dims() {
        return Err(Error::dims(boundary_mask.dims(), set.dims()));
    }
    let set = if intersect_boundary {
        set.intersect(&boundary_mask)?
    } else {
        set
    };
    Ok(vote(&set))
}

/// Per-image vote record, written one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteTrace {
    pub image_id: String,
    pub areas: [f64; N],
    pub label: DiagnosisLabel,
    pub confidences: ConfidenceVector,
    pub fallback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VoteTrace {
    /// The label implied by `areas` under the vote's tie and fallback rules.
    pub fn rederive_label(&self) -> DiagnosisLabel {
        argmax_first(&self.areas).map_or(FALLBACK_LABEL, |i| DiagnosisLabel::ALL[i])
    }
}

/// Classifies every id in parallel; output order follows `ids`. A failed
/// image is recorded with its error and the uniform fallback vote.
pub fn classify_batch(
    ids: &[String],
    boundary: &dyn BoundaryPredictor,
    classes: &dyn ClassMaskPredictor,
    intersect_boundary: bool,
) -> Vec<VoteTrace> {
    ids.par_iter()
        .map(|id| {
            let (vote, error) = match classify(id, boundary, classes, intersect_boundary) {
                Ok(v) => (v, None),
                Err(e) => {
                    log::error!("{id}: {e}");
                    (Vote::uniform_fallback(), Some(e.to_string()))
                }
            };
            if vote.fallback && error.is_none() {
                log::warn!("{id}: all class masks empty, falling back to {FALLBACK_LABEL}");
            }
            VoteTrace {
                image_id: id.clone(),
                areas: vote.areas,
                label: vote.label,
                confidences: vote.confidences,
                fallback: vote.fallback,
                error,
            }
        })
        .collect()
}
