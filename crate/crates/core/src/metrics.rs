//! Challenge scores: mean Jaccard for boundaries (S1), per-attribute mean
//! Jaccard over non-empty ground truths (S2(j)) and their mean (S2), diagnosis
//! accuracy (S3), the 7x7 confusion matrix and balanced accuracy.
//!
//! Per-pair Jaccards may be computed in parallel; every mean sums in input
//! order so reports are bit-reproducible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{AttributeClass, DiagnosisLabel};
use crate::mask::BinaryMask;

const N: usize = DiagnosisLabel::COUNT;

/// Ground truth and prediction for one image.
#[derive(Debug, Clone)]
pub struct MaskPair {
    pub image_id: String,
    pub ground_truth: BinaryMask,
    pub predicted: BinaryMask,
}

impl MaskPair {
    pub fn new(image_id: impl Into<String>, ground_truth: BinaryMask, predicted: BinaryMask) -> Result<Self> {
        if ground_truth.dims() != predicted.dims() {
            return Err(Error::dims(ground_truth.dims(), predicted.dims()));
        }
        Ok(Self {
            image_id: image_id.into(),
            ground_truth,
            predicted,
        })
    }

    pub fn jaccard(&self) -> f64 {
        self.ground_truth
            .jaccard(&self.predicted)
            .expect("pair shapes are validated on construction")
    }
}

/// Jaccard of every pair, in input order.
pub fn pair_jaccards(pairs: &[MaskPair]) -> Vec<f64> {
    pairs.par_iter().map(MaskPair::jaccard).collect()
}

fn ordered_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// S1: mean Jaccard over all pairs.
pub fn boundary_score(pairs: &[MaskPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("boundary score needs at least one mask pair"));
    }
    Ok(ordered_mean(&pair_jaccards(pairs)))
}

/// S2(j): mean Jaccard over the pairs of class `class` whose ground truth is
/// non-empty. Pairs with empty ground truth are left out of both the sum and
/// the count; if none remain the score is undefined.
pub fn attribute_class_score(pairs: &[MaskPair], class: AttributeClass) -> Result<f64> {
    let scored: Vec<f64> = pairs
        .par_iter()
        .filter(|p| !p.ground_truth.is_empty())
        .map(MaskPair::jaccard)
        .collect();
    if scored.is_empty() {
        return Err(Error::UndefinedClassScore(class));
    }
    Ok(ordered_mean(&scored))
}

/// S2: unweighted mean of the five per-class scores, indexed in
/// [`AttributeClass::ALL`] order. `None` marks an undefined class.
pub fn attribute_overall_score(per_class: &[Option<f64>; AttributeClass::COUNT]) -> Result<f64> {
    let mut values = [0.0; AttributeClass::COUNT];
    for (class, (slot, score)) in AttributeClass::ALL.iter().zip(values.iter_mut().zip(per_class)) {
        *slot = score.ok_or(Error::UndefinedClassScore(*class))?;
    }
    Ok(ordered_mean(&values))
}

fn check_lengths(predictions: &[DiagnosisLabel], truths: &[DiagnosisLabel]) -> Result<()> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    Ok(())
}

/// S3: fraction of positions where the prediction equals the truth.
pub fn diagnosis_accuracy(predictions: &[DiagnosisLabel], truths: &[DiagnosisLabel]) -> Result<f64> {
    check_lengths(predictions, truths)?;
    if truths.is_empty() {
        return Err(Error::EmptyInput("diagnosis accuracy needs at least one sample"));
    }
    let correct = predictions.iter().zip(truths).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / truths.len() as f64)
}

/// Actual-vs-predicted counts over the seven diagnosis classes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// `counts[actual][predicted]`
    pub counts: [[u64; N]; N],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; N]; N]) -> Self {
        Self { counts }
    }

    pub fn record(&mut self, actual: DiagnosisLabel, predicted: DiagnosisLabel) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn get(&self, actual: DiagnosisLabel, predicted: DiagnosisLabel) -> u64 {
        self.counts[actual.index()][predicted.index()]
    }

    pub fn row_total(&self, actual: DiagnosisLabel) -> u64 {
        self.counts[actual.index()].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..N).map(|i| self.counts[i][i]).sum()
    }

    /// Each row divided by its total; rows without samples stay zero.
    pub fn row_normalized(&self) -> [[f64; N]; N] {
        let mut out = [[0.0; N]; N];
        for (row, counts) in out.iter_mut().zip(&self.counts) {
            let total: u64 = counts.iter().sum();
            if total > 0 {
                for (cell, &c) in row.iter_mut().zip(counts) {
                    *cell = c as f64 / total as f64;
                }
            }
        }
        out
    }
}

pub fn confusion(predictions: &[DiagnosisLabel], truths: &[DiagnosisLabel]) -> Result<ConfusionMatrix> {
    check_lengths(predictions, truths)?;
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predictions.iter().zip(truths) {
        cm.record(t, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedAccuracy {
    pub value: f64,
    /// Classes with no samples, left out of the mean.
    pub excluded: Vec<DiagnosisLabel>,
}

/// Mean per-class recall (mean diagonal of the row-normalized matrix) over
/// classes that have at least one sample.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<BalancedAccuracy> {
    let normalized = cm.row_normalized();
    let mut recalls = Vec::with_capacity(N);
    let mut excluded = Vec::new();
    for label in DiagnosisLabel::ALL {
        if cm.row_total(label) == 0 {
            log::warn!("class {label} has no samples; excluded from balanced accuracy");
            excluded.push(label);
        } else {
            recalls.push(normalized[label.index()][label.index()]);
        }
    }
    if recalls.is_empty() {
        return Err(Error::NoSamples);
    }
    Ok(BalancedAccuracy {
        value: ordered_mean(&recalls),
        excluded,
    })
}

/// Rounds half away from zero to `decimals` places, for report display.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let factor = 10f64.powi(decimals as i32);
    (value * factor).round() / factor
}
