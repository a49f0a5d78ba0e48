//! `eval-boundary`, `eval-attributes` and `eval-diagnosis`.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context};
use lesion_core::dataset::{argmax_label, load_confidence_csv, load_ground_truth_csv, parse_mask_file_name, MaskRole};
use lesion_core::diagnose::PredictorDir;
use lesion_core::io::read_mask;
use lesion_core::metrics::{attribute_overall_score, balanced_accuracy, ConfusionMatrix};
use lesion_core::{AttributeClass, BinaryMask};
use rayon::prelude::*;
use serde::Serialize;

use crate::report::*;
use crate::{
    create_out_dir, finish, read_id_list, require_dir, require_file, EvalDiagnosisArgs, EvalMaskArgs, Outcome,
    ReportFormat,
};

/// Per-image result before it is sorted into records, warnings and errors.
enum Scored<R> {
    Done(R),
    Missing(String),
    Failed(String),
}

/// Splits per-image results, keeping record order. Missing predictions are
/// errors under the strict policy and warnings otherwise.
fn partition<R>(results: Vec<Scored<R>>, strict: bool, warnings: &mut Vec<String>, errors: &mut Vec<String>) -> Vec<R> {
    let mut done = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Scored::Done(rec) => done.push(rec),
            Scored::Missing(msg) if strict => errors.push(msg),
            Scored::Missing(msg) => warnings.push(format!("{msg}; skipped")),
            Scored::Failed(msg) => errors.push(msg),
        }
    }
    done
}

/// Sorted ids of the masks with a matching role in `dir`.
fn truth_ids(dir: &Path, want: impl Fn(MaskRole) -> bool) -> anyhow::Result<Vec<String>> {
    let mut ids = BTreeSet::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let name = entry?.file_name();
        if let Some((id, role)) = name.to_str().and_then(parse_mask_file_name) {
            if want(role) {
                ids.insert(id);
            }
        }
    }
    Ok(ids.into_iter().collect())
}

fn select_ids(args: &EvalMaskArgs, want: impl Fn(MaskRole) -> bool) -> anyhow::Result<Vec<String>> {
    let ids = match &args.ids {
        Some(path) => read_id_list(path)?,
        None => truth_ids(&args.truth, want)?,
    };
    if ids.is_empty() {
        bail!("no ground-truth masks found in {}", args.truth.display());
    }
    Ok(ids)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn ordered_mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn fmt_score(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"))
}

// ---------------------------------------------------------------------------

/// S1 over the ground-truth ids. Writes `report.json` (and `per_image.csv`
/// with `--format csv`) into `--out`.
pub fn eval_boundary(args: &EvalMaskArgs) -> anyhow::Result<Outcome> {
    require_dir(&args.truth, "ground-truth")?;
    require_dir(&args.pred, "predictor root")?;
    let ids = select_ids(args, |r| r == MaskRole::Segmentation)?;
    let pred = PredictorDir::new(&args.pred);
    if !ids.iter().any(|id| pred.boundary_path(id).is_file()) {
        bail!(
            "no overlapping ids between predictions in {} and ground truth",
            args.pred.display()
        );
    }
    create_out_dir(&args.out)?;

    let results: Vec<Scored<BoundaryRecord>> = ids
        .par_iter()
        .map(|id| {
            let pred_path = pred.boundary_path(id);
            if !pred_path.is_file() {
                return Scored::Missing(format!("{id}: no boundary prediction"));
            }
            let load = || -> lesion_core::Result<BoundaryRecord> {
                let truth = read_mask(args.truth.join(MaskRole::Segmentation.file_name(id)))?;
                let predicted = read_mask(&pred_path)?;
                Ok(BoundaryRecord {
                    image_id: id.clone(),
                    jaccard: truth.jaccard(&predicted)?,
                    truth_active: truth.active_count(),
                    predicted_active: predicted.active_count(),
                })
            };
            match load() {
                Ok(r) => Scored::Done(r),
                Err(e) => Scored::Failed(format!("{id}: {e}")),
            }
        })
        .collect();

    let (mut warnings, mut errors) = (Vec::new(), Vec::new());
    let records = partition(results, args.missing.is_strict(), &mut warnings, &mut errors);
    let s1 = if errors.is_empty() {
        ordered_mean(records.iter().map(|r| r.jaccard))
    } else {
        None
    };
    let aggregates = BoundaryAggregates {
        n: records.len(),
        s1,
        s1_rounded: rounded(s1),
    };
    if args.format == ReportFormat::Csv {
        write_csv(&args.out.join("per_image.csv"), &records)?;
    }
    let mut report = BoundaryReport::new("eval-boundary", args, records, aggregates)?;
    report.warnings = warnings;
    report.errors = errors;
    let summary = format!("S1 = {} over {} images", fmt_score(s1), report.aggregates.n);
    finish(&report, &args.out.join("report.json"), summary)
}

// ---------------------------------------------------------------------------

fn attribute_records(
    id: &str,
    truth_dir: &Path,
    pred: &PredictorDir,
) -> lesion_core::Result<Option<Vec<AttributeRecord>>> {
    let mut truths = Vec::with_capacity(AttributeClass::COUNT);
    for class in AttributeClass::ALL {
        truths.push(read_mask(truth_dir.join(MaskRole::Attribute(class).file_name(id)))?);
    }
    let mut predictions: Vec<Option<BinaryMask>> = Vec::with_capacity(AttributeClass::COUNT);
    for class in AttributeClass::ALL {
        predictions.push(pred.attribute_mask(id, class)?);
    }
    if predictions.iter().all(Option::is_none) {
        return Ok(None);
    }
    let mut records = Vec::with_capacity(AttributeClass::COUNT);
    for ((class, truth), predicted) in AttributeClass::ALL.into_iter().zip(&truths).zip(predictions) {
        let predicted = match predicted {
            Some(m) => m,
            None => BinaryMask::new(truth.width(), truth.height())?,
        };
        records.push(AttributeRecord {
            image_id: id.to_string(),
            class,
            jaccard: truth.jaccard(&predicted)?,
            truth_empty: truth.is_empty(),
        });
    }
    Ok(Some(records))
}

/// Per-class scores from attribute records: mean Jaccard over the records
/// whose ground truth is non-empty, in record order.
pub fn class_scores(records: &[AttributeRecord]) -> Vec<ClassScore> {
    AttributeClass::ALL
        .into_iter()
        .map(|class| {
            let scored: Vec<f64> = records
                .iter()
                .filter(|r| r.class == class && !r.truth_empty)
                .map(|r| r.jaccard)
                .collect();
            let score = ordered_mean(scored.iter().copied());
            ClassScore {
                class,
                n: scored.len(),
                score,
                score_rounded: rounded(score),
            }
        })
        .collect()
}

/// S2(j) per class and S2. Prediction files live under `<pred>/task2/`; an
/// image with some but not all five files gets empty masks for the rest.
pub fn eval_attributes(args: &EvalMaskArgs) -> anyhow::Result<Outcome> {
    require_dir(&args.truth, "ground-truth")?;
    require_dir(&args.pred, "predictor root")?;
    let ids = select_ids(args, |r| matches!(r, MaskRole::Attribute(_)))?;
    let pred = PredictorDir::new(&args.pred);
    let has_any = |id: &String| {
        AttributeClass::ALL
            .iter()
            .any(|&c| pred.attribute_path(id, c).is_file())
    };
    if !ids.iter().any(has_any) {
        bail!(
            "no overlapping ids between predictions in {} and ground truth",
            args.pred.display()
        );
    }
    create_out_dir(&args.out)?;

    let results: Vec<Scored<Vec<AttributeRecord>>> = ids
        .par_iter()
        .map(|id| match attribute_records(id, &args.truth, &pred) {
            Ok(Some(r)) => Scored::Done(r),
            Ok(None) => Scored::Missing(format!("{id}: no attribute predictions")),
            Err(e) => Scored::Failed(format!("{id}: {e}")),
        })
        .collect();

    let (mut warnings, mut errors) = (Vec::new(), Vec::new());
    let per_image = partition(results, args.missing.is_strict(), &mut warnings, &mut errors);
    let images = per_image.len();
    let records: Vec<AttributeRecord> = per_image.into_iter().flatten().collect();
    let per_class = class_scores(&records);
    let undefined: Vec<AttributeClass> = per_class
        .iter()
        .filter(|c| c.score.is_none())
        .map(|c| c.class)
        .collect();
    for class in &undefined {
        let msg = format!("class {class} is undefined: no image has a non-empty ground truth");
        if args.missing.is_strict() {
            errors.push(msg);
        } else {
            warnings.push(msg);
        }
    }
    let s2 = if !errors.is_empty() {
        None
    } else if undefined.is_empty() {
        let scores: [Option<f64>; AttributeClass::COUNT] = std::array::from_fn(|i| per_class[i].score);
        Some(attribute_overall_score(&scores)?)
    } else {
        warnings.push(format!(
            "S2 averages the {} defined classes only",
            AttributeClass::COUNT - undefined.len()
        ));
        ordered_mean(per_class.iter().filter_map(|c| c.score))
    };
    let aggregates = AttributeAggregates {
        images,
        per_class,
        undefined,
        s2,
        s2_rounded: rounded(s2),
    };
    if args.format == ReportFormat::Csv {
        write_csv(&args.out.join("per_image.csv"), &records)?;
    }
    let mut report = AttributeReport::new("eval-attributes", args, records, aggregates)?;
    report.warnings = warnings;
    report.errors = errors;
    let summary = format!("S2 = {} over {} images", fmt_score(s2), images);
    finish(&report, &args.out.join("report.json"), summary)
}

// ---------------------------------------------------------------------------

/// Confusion matrix built from diagnosis records.
pub fn confusion_from_records(records: &[DiagnosisRecord]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for r in records {
        cm.record(r.truth, r.predicted);
    }
    cm
}

/// S3, confusion matrix and balanced accuracy. Predicted labels are the
/// argmax of each confidence row (earliest label on ties).
pub fn eval_diagnosis(args: &EvalDiagnosisArgs) -> anyhow::Result<Outcome> {
    require_file(&args.pred, "prediction")?;
    require_file(&args.truth, "ground-truth")?;
    let predictions = load_confidence_csv(&args.pred)?;
    let truth = load_ground_truth_csv(&args.truth)?;
    create_out_dir(&args.out)?;

    let (mut warnings, mut errors) = (Vec::new(), Vec::new());
    let missing: Vec<&str> = truth
        .rows
        .keys()
        .filter(|id| !predictions.contains_key(*id))
        .map(String::as_str)
        .collect();
    let extra: Vec<&str> = predictions
        .keys()
        .filter(|id| truth.get(id).is_none())
        .map(String::as_str)
        .collect();
    let sink = if args.missing.is_strict() {
        &mut errors
    } else {
        &mut warnings
    };
    for id in &missing {
        sink.push(format!("{id}: no prediction"));
    }
    for id in &extra {
        sink.push(format!("{id}: prediction without ground truth"));
    }

    let records: Vec<DiagnosisRecord> = truth
        .rows
        .iter()
        .filter_map(|(id, &label)| {
            predictions.get(id).map(|conf| DiagnosisRecord {
                image_id: id.clone(),
                truth: label,
                predicted: argmax_label(conf),
            })
        })
        .collect();
    if records.is_empty() {
        bail!("prediction and ground-truth CSVs share no image ids");
    }

    let cm = confusion_from_records(&records);
    let clean = errors.is_empty();
    let s3 = clean.then(|| cm.correct() as f64 / cm.total() as f64);
    let balanced = if clean { Some(balanced_accuracy(&cm)?) } else { None };
    let excluded_labels = balanced.as_ref().map(|b| b.excluded.clone()).unwrap_or_default();
    for label in &excluded_labels {
        warnings.push(format!(
            "class {label} has no samples; left out of the balanced accuracy"
        ));
    }
    let bacc = balanced.map(|b| b.value);
    let aggregates = DiagnosisAggregates {
        n: records.len(),
        s3,
        s3_rounded: rounded(s3),
        confusion_counts: cm.counts,
        confusion_normalized: cm.row_normalized(),
        balanced_accuracy: bacc,
        balanced_accuracy_rounded: rounded(bacc),
        excluded_labels,
    };
    if args.format == ReportFormat::Csv {
        write_csv(&args.out.join("per_image.csv"), &records)?;
    }
    let mut report = DiagnosisReport::new("eval-diagnosis", args, records, aggregates)?;
    report.warnings = warnings;
    report.errors = errors;
    let summary = format!(
        "S3 = {}, balanced accuracy = {} over {} images",
        fmt_score(s3),
        fmt_score(bacc),
        report.aggregates.n
    );
    finish(&report, &args.out.join("report.json"), summary)
}
