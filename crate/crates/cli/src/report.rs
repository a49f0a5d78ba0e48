//! Machine-readable run reports.

use std::fs;
use std::path::Path;

use anyhow::Context;
use lesion_core::augment::AugmentationSpec;
use lesion_core::dataset::SplitStrategy;
use lesion_core::diagnose::VoteTrace;
use lesion_core::metrics::round_half_up;
use lesion_core::{AttributeClass, DiagnosisLabel};
use serde::{Deserialize, Serialize};

pub const TOOL_NAME: &str = "lesion-bench";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Digits kept in the `*_rounded` report fields.
pub const REPORT_DECIMALS: u32 = 4;

/// Envelope shared by every subcommand. `R` is the per-image record type and
/// `A` the aggregate block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report<R, A> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub records: Vec<R>,
    pub aggregates: A,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

impl<R: Serialize, A: Serialize> Report<R, A> {
    pub fn new(command: &str, config: &impl Serialize, records: Vec<R>, aggregates: A) -> anyhow::Result<Self> {
        Ok(Self {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            records,
            aggregates,
            warnings: Vec::new(),
            errors: Vec::new(),
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn write_json(&self, path: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn rounded(value: Option<f64>) -> Option<f64> {
    value.map(|v| round_half_up(v, REPORT_DECIMALS))
}

// ---------------------------------------------------------------------------
// eval-boundary

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRecord {
    pub image_id: String,
    pub jaccard: f64,
    pub truth_active: u64,
    pub predicted_active: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryAggregates {
    /// Images scored.
    pub n: usize,
    /// Mean Jaccard; absent when the run has errors.
    pub s1: Option<f64>,
    pub s1_rounded: Option<f64>,
}

pub type BoundaryReport = Report<BoundaryRecord, BoundaryAggregates>;

// ---------------------------------------------------------------------------
// eval-attributes

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeRecord {
    pub image_id: String,
    pub class: AttributeClass,
    pub jaccard: f64,
    /// Pairs with an empty ground truth do not count towards the class score.
    pub truth_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: AttributeClass,
    /// Images with a non-empty ground truth for this class.
    pub n: usize,
    /// `None` marks an undefined score (`n == 0`).
    pub score: Option<f64>,
    pub score_rounded: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeAggregates {
    pub images: usize,
    pub per_class: Vec<ClassScore>,
    pub undefined: Vec<AttributeClass>,
    /// Mean of the defined class scores; absent when the run has errors.
    pub s2: Option<f64>,
    pub s2_rounded: Option<f64>,
}

pub type AttributeReport = Report<AttributeRecord, AttributeAggregates>;

// ---------------------------------------------------------------------------
// diagnose

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseAggregates {
    pub images: usize,
    /// Predicted images per label, in label order.
    pub label_counts: Vec<(DiagnosisLabel, usize)>,
    pub fallbacks: usize,
    pub failures: usize,
}

pub type DiagnoseReport = Report<VoteTrace, DiagnoseAggregates>;

// ---------------------------------------------------------------------------
// eval-diagnosis

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisRecord {
    pub image_id: String,
    pub truth: DiagnosisLabel,
    pub predicted: DiagnosisLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisAggregates {
    pub n: usize,
    pub s3: Option<f64>,
    pub s3_rounded: Option<f64>,
    /// Rows are true labels, columns predictions, both in label order.
    pub confusion_counts: [[u64; DiagnosisLabel::COUNT]; DiagnosisLabel::COUNT],
    pub confusion_normalized: [[f64; DiagnosisLabel::COUNT]; DiagnosisLabel::COUNT],
    pub balanced_accuracy: Option<f64>,
    pub balanced_accuracy_rounded: Option<f64>,
    /// Labels absent from the ground truth, left out of the balanced accuracy.
    pub excluded_labels: Vec<DiagnosisLabel>,
}

pub type DiagnosisReport = Report<DiagnosisRecord, DiagnosisAggregates>;

// ---------------------------------------------------------------------------
// split, augment, baseline-segment, synth

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub seed: u64,
    pub strategy: SplitStrategy,
    pub available: usize,
    pub train: usize,
    pub test: usize,
}

/// A mask written by `baseline-segment` or `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub image_id: String,
    pub file: String,
    pub width: usize,
    pub height: usize,
    pub active: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSummary {
    pub images: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentRecord {
    pub image_id: String,
    pub variant: usize,
    /// Stream index passed to the spec sampler.
    pub draw_index: u64,
    pub spec: AugmentationSpec,
    pub image: String,
    pub masks: Vec<String>,
    /// Active pixels of each written mask, in `masks` order.
    pub mask_active: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub seed: u64,
    pub count: usize,
    pub images: usize,
    pub variants: usize,
}
