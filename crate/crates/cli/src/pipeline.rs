//! `split`, `augment`, `diagnose`, `baseline-segment` and `synth`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use lesion_core::augment::{apply, sample_spec};
use lesion_core::dataset::{
    list_images, load_ground_truth_csv, parse_mask_file_name, split as split_index, write_diagnosis_predictions,
    DatasetIndex, MaskRole, SplitStrategy, Task,
};
use lesion_core::diagnose::{classify_batch, BaselinePredictor, BoundaryPredictor, PredictorDir, VoteTrace};
use lesion_core::io::{read_mask, read_raster, write_mask, write_raster};
use lesion_core::synth::{generate_lesion, SynthConfig};
use lesion_core::{BinaryMask, DiagnosisLabel};
use rayon::prelude::*;

use crate::report::*;
use crate::{
    create_out_dir, finish, require_dir, require_file, AugmentArgs, BaselineArgs, DiagnoseArgs, Outcome, SplitArgs,
    SynthArgs,
};

fn file_name_of(path: &Path) -> String {
    path.file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default()
        .to_string()
}

// ---------------------------------------------------------------------------

fn split_counts(args: &SplitArgs, available: usize) -> anyhow::Result<(usize, usize)> {
    let (default_train, default_test) = args.task.default_split();
    Ok(match (args.train, args.test) {
        (Some(train), Some(test)) => (train, test),
        (Some(train), None) => (
            train,
            available
                .checked_sub(train)
                .context("--train exceeds the available images")?,
        ),
        (None, Some(test)) => (
            available
                .checked_sub(test)
                .context("--test exceeds the available images")?,
            test,
        ),
        (None, None) => (default_train, default_test),
    })
}

/// Writes `train.txt`, `test.txt` and `split.json` into `--out`.
pub fn split(args: &SplitArgs) -> anyhow::Result<Outcome> {
    require_dir(&args.images, "image")?;
    let strategy = if args.stratified {
        SplitStrategy::Stratified
    } else {
        SplitStrategy::Uniform
    };
    if strategy == SplitStrategy::Stratified && args.task != Task::Diagnosis {
        bail!("--stratified needs diagnosis labels (task 3)");
    }
    let index = match args.task {
        Task::Diagnosis => {
            let csv = args
                .truth
                .as_ref()
                .context("task 3 needs --truth pointing at the ground-truth CSV")?;
            require_file(csv, "ground-truth")?;
            DatasetIndex::discover_diagnosis(&args.images, &load_ground_truth_csv(csv)?)?
        }
        task => {
            let masks = args.truth.as_deref().unwrap_or(&args.images);
            require_dir(masks, "mask")?;
            DatasetIndex::discover(task, &args.images, masks)?
        }
    };
    let (train, test) = split_counts(args, index.len())?;
    let assignment = split_index(&index, train, test, args.seed, strategy)?;
    create_out_dir(&args.out)?;
    assignment.write(&args.out)?;

    let summary = SplitSummary {
        seed: args.seed,
        strategy,
        available: index.len(),
        train,
        test,
    };
    let mut report = Report::<serde_json::Value, _>::new("split", args, Vec::new(), summary)?;
    report.warnings = index
        .unmatched
        .iter()
        .map(|p| format!("ignored {}", p.display()))
        .collect();
    report.write_json(&args.out.join("split.json"))?;
    Ok(Outcome {
        summary: format!("split {} images into {train} train / {test} test", index.len()),
        warnings: report.warnings.len(),
        errors: 0,
    })
}

// ---------------------------------------------------------------------------

/// Masks in `dir` grouped by image id, roles in sorted order.
fn masks_by_image(dir: &Path) -> anyhow::Result<BTreeMap<String, Vec<(MaskRole, PathBuf)>>> {
    let mut map: BTreeMap<String, Vec<(MaskRole, PathBuf)>> = BTreeMap::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if let Some((id, role)) = parse_mask_file_name(&file_name_of(&path)) {
            map.entry(id).or_default().push((role, path));
        }
    }
    for masks in map.values_mut() {
        masks.sort();
    }
    Ok(map)
}

fn augment_image(
    args: &AugmentArgs,
    ordinal: usize,
    image_id: &str,
    image_path: &Path,
    masks: &[(MaskRole, PathBuf)],
) -> lesion_core::Result<Vec<AugmentRecord>> {
    let img = read_raster(image_path)?;
    let originals = masks
        .iter()
        .map(|(_, p)| read_mask(p))
        .collect::<lesion_core::Result<Vec<_>>>()?;
    let mut records = Vec::with_capacity(args.count);
    for variant in 0..args.count {
        let draw_index = (ordinal * args.count + variant) as u64;
        let spec = sample_spec(args.seed, draw_index);
        let (out_img, out_masks) = apply(&spec, &img, &originals)?;
        let new_id = format!("{image_id}_aug{variant}");
        let image_name = format!("{new_id}.png");
        write_raster(args.out.join(&image_name), &out_img)?;
        let mut names = Vec::with_capacity(masks.len());
        for ((role, _), mask) in masks.iter().zip(&out_masks) {
            let name = role.file_name(&new_id);
            write_mask(args.out.join(&name), mask)?;
            names.push(name);
        }
        records.push(AugmentRecord {
            image_id: image_id.to_string(),
            variant,
            draw_index,
            spec,
            image: image_name,
            masks: names,
            mask_active: out_masks.iter().map(BinaryMask::active_count).collect(),
        });
    }
    Ok(records)
}

/// Writes `--count` variants of every image as `<id>_augN.png`, masks as
/// `<id>_augN_<role>.png`, and `manifest.json` with every sampled spec.
///
/// Variant `n` of the image at position `k` in sorted id order uses draw
/// index `k * count + n`.
pub fn augment(args: &AugmentArgs) -> anyhow::Result<Outcome> {
    require_dir(&args.images, "image")?;
    if let Some(dir) = &args.truth {
        require_dir(dir, "mask")?;
    }
    create_out_dir(&args.out)?;
    let images = list_images(&args.images)?;
    let masks = match &args.truth {
        Some(dir) => masks_by_image(dir)?,
        None => BTreeMap::new(),
    };
    let no_masks = Vec::new();
    let entries: Vec<(&String, &PathBuf)> = images.iter().collect();
    let results: Vec<Result<Vec<AugmentRecord>, String>> = entries
        .par_iter()
        .enumerate()
        .map(|(ordinal, (id, path))| {
            let m = masks.get(*id).unwrap_or(&no_masks);
            augment_image(args, ordinal, id, path, m).map_err(|e| format!("{id}: {e}"))
        })
        .collect();

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(r) => records.extend(r),
            Err(e) => errors.push(e),
        }
    }
    let summary = AugmentSummary {
        seed: args.seed,
        count: args.count,
        images: images.len(),
        variants: records.len(),
    };
    let mut report = Report::new("augment", args, records, summary)?;
    report.errors = errors;
    let line = format!(
        "wrote {} variants of {} images",
        report.aggregates.variants,
        images.len()
    );
    finish(&report, &args.out.join("manifest.json"), line)
}

// ---------------------------------------------------------------------------

fn write_votes(path: &Path, traces: &[VoteTrace]) -> anyhow::Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    for t in traces {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Counts per label in label order.
pub fn label_counts(traces: &[VoteTrace]) -> Vec<(DiagnosisLabel, usize)> {
    DiagnosisLabel::ALL
        .into_iter()
        .map(|l| (l, traces.iter().filter(|t| t.label == l).count()))
        .collect()
}

/// Area-vote diagnosis of every image. Writes `predictions.csv`,
/// `votes.jsonl` and `report.json` into `--out`.
pub fn diagnose(args: &DiagnoseArgs) -> anyhow::Result<Outcome> {
    require_dir(&args.pred, "predictor root")?;
    if let Some(dir) = &args.images {
        require_dir(dir, "image")?;
    }
    let pred = PredictorDir::new(&args.pred);
    let predicted_ids = pred.image_ids()?;
    if predicted_ids.is_empty() {
        bail!("predictor root {} holds no task1/ or task3/ masks", args.pred.display());
    }
    let ids: Vec<String> = match &args.images {
        Some(dir) => list_images(dir)?.into_keys().collect(),
        None => predicted_ids,
    };
    let baseline = if args.baseline {
        let dir = args.images.as_ref().context("--baseline needs --images")?;
        let mut b = BaselinePredictor::new(dir);
        b.target_side = args.target_side;
        Some(b)
    } else {
        None
    };
    let boundary: &dyn BoundaryPredictor = match &baseline {
        Some(b) => b,
        None => &pred,
    };
    create_out_dir(&args.out)?;

    let traces = classify_batch(&ids, boundary, &pred, args.intersect_boundary);
    let (mut warnings, mut errors) = (Vec::new(), Vec::new());
    let mut kept = Vec::with_capacity(traces.len());
    for t in traces {
        let Some(err) = &t.error else {
            if t.fallback {
                warnings.push(format!(
                    "{}: all class masks empty, fell back to {}",
                    t.image_id, t.label
                ));
            }
            kept.push(t);
            continue;
        };
        let missing = baseline.is_none() && !pred.boundary_path(&t.image_id).is_file();
        let msg = format!("{}: {err}", t.image_id);
        if missing && !args.missing.is_strict() {
            warnings.push(format!("{msg}; skipped"));
            continue;
        }
        errors.push(msg);
        kept.push(t);
    }

    write_diagnosis_predictions(
        args.out.join("predictions.csv"),
        kept.iter().map(|t| (&t.image_id, t.confidences.0)),
    )?;
    write_votes(&args.out.join("votes.jsonl"), &kept)?;
    let aggregates = DiagnoseAggregates {
        images: kept.len(),
        label_counts: label_counts(&kept),
        fallbacks: kept.iter().filter(|t| t.fallback).count(),
        failures: kept.iter().filter(|t| t.error.is_some()).count(),
    };
    let mut report = DiagnoseReport::new("diagnose", args, kept, aggregates)?;
    report.warnings = warnings;
    report.errors = errors;
    let line = format!("classified {} images", report.aggregates.images);
    finish(&report, &args.out.join("report.json"), line)
}

// ---------------------------------------------------------------------------

fn mask_record(image_id: &str, file: String, mask: &BinaryMask) -> MaskRecord {
    MaskRecord {
        image_id: image_id.to_string(),
        file,
        width: mask.width(),
        height: mask.height(),
        active: mask.active_count(),
    }
}

/// Otsu baseline for every image, written as `<out>/task1/<id>_segmentation.png`
/// so that `--out` can serve as a predictor root.
pub fn baseline_segment(args: &BaselineArgs) -> anyhow::Result<Outcome> {
    require_dir(&args.images, "image")?;
    let images = list_images(&args.images)?;
    if images.is_empty() {
        bail!("no images in {}", args.images.display());
    }
    let mask_dir = args.out.join("task1");
    create_out_dir(&mask_dir)?;
    let mut predictor = BaselinePredictor::new(&args.images);
    predictor.target_side = args.target_side;

    let results: Vec<Result<MaskRecord, String>> = images
        .par_iter()
        .map(|(id, _)| {
            let run = || -> lesion_core::Result<MaskRecord> {
                let mask = predictor.boundary_mask(id)?;
                let name = MaskRole::Segmentation.file_name(id);
                write_mask(mask_dir.join(&name), &mask)?;
                Ok(mask_record(id, format!("task1/{name}"), &mask))
            };
            run().map_err(|e| format!("{id}: {e}"))
        })
        .collect();
    let (records, errors): (Vec<_>, Vec<_>) = results.into_iter().partition(Result::is_ok);
    let records: Vec<MaskRecord> = records.into_iter().map(Result::unwrap).collect();
    let errors: Vec<String> = errors.into_iter().map(Result::unwrap_err).collect();
    let summary = MaskSummary {
        images: records.len(),
        failures: errors.len(),
    };
    let mut report = Report::new("baseline-segment", args, records, summary)?;
    report.errors = errors;
    let line = format!("segmented {} images", report.aggregates.images);
    finish(&report, &args.out.join("report.json"), line)
}

/// Synthetic lesions: `<out>/images/<id>.png` and
/// `<out>/truth/<id>_segmentation.png`.
pub fn synth(args: &SynthArgs) -> anyhow::Result<Outcome> {
    let config = SynthConfig {
        width: args.width,
        height: args.height,
        noise: args.noise,
        ..SynthConfig::default()
    };
    if config.width == 0 || config.height == 0 {
        bail!("--width and --height must be positive");
    }
    let (image_dir, truth_dir) = (args.out.join("images"), args.out.join("truth"));
    create_out_dir(&image_dir)?;
    create_out_dir(&truth_dir)?;
    let records = (0..args.count as u64)
        .into_par_iter()
        .map(|i| {
            let lesion = generate_lesion(args.seed, i, &config);
            write_raster(image_dir.join(format!("{}.png", lesion.image_id)), &lesion.image)?;
            let name = MaskRole::Segmentation.file_name(&lesion.image_id);
            write_mask(truth_dir.join(&name), &lesion.mask)?;
            Ok(mask_record(&lesion.image_id, format!("truth/{name}"), &lesion.mask))
        })
        .collect::<lesion_core::Result<Vec<_>>>()?;
    let summary = MaskSummary {
        images: records.len(),
        failures: 0,
    };
    let report = Report::new("synth", args, records, summary)?;
    let line = format!("generated {} synthetic lesions", report.aggregates.images);
    finish(&report, &args.out.join("report.json"), line)
}
