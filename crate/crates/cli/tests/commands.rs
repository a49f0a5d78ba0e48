mod common;

use std::fs;
use std::path::Path;
use std::process::Command as Process;

use common::*;
use lesion_cli::eval::{class_scores, confusion_from_records, eval_attributes, eval_boundary, eval_diagnosis};
use lesion_cli::pipeline::{augment, diagnose, label_counts, split};
use lesion_cli::report::*;
use lesion_cli::{AugmentArgs, DiagnoseArgs, EvalDiagnosisArgs, MissingPolicy, ReportFormat, SplitArgs};
use lesion_core::dataset::{load_ground_truth_csv, write_diagnosis_predictions, GroundTruthTable, MaskRole, Task};
use lesion_core::diagnose::VoteTrace;
use lesion_core::metrics::{attribute_overall_score, balanced_accuracy};
use lesion_core::{AttributeClass, BinaryMask, DiagnosisLabel};
use tempfile::TempDir;

const W: usize = 20;
const H: usize = 10;

fn boundary_fixture(root: &Path, preds: &[(&str, Option<BinaryMask>)]) {
    for (i, (id, pred)) in preds.iter().enumerate() {
        put_mask(
            &root.join("truth"),
            &MaskRole::Segmentation.file_name(id),
            &first_n(W, H, 50 + i),
        );
        if let Some(p) = pred {
            put_mask(&root.join("pred/task1"), &MaskRole::Segmentation.file_name(id), p);
        }
    }
}

fn run_boundary(root: &Path, missing: MissingPolicy) -> (lesion_cli::Outcome, BoundaryReport) {
    let mut args = eval_args(&root.join("truth"), &root.join("pred"), &root.join("out"));
    args.missing = missing;
    args.format = ReportFormat::Csv;
    let outcome = eval_boundary(&args).unwrap();
    (outcome, read_report(root.join("out/report.json")))
}

fn audit_boundary(r: &BoundaryReport) {
    assert_eq!(r.aggregates.n, r.records.len());
    if r.errors.is_empty() {
        let mean = r.records.iter().map(|x| x.jaccard).sum::<f64>() / r.records.len() as f64;
        assert_eq!(r.aggregates.s1, Some(mean));
    } else {
        assert_eq!(r.aggregates.s1, None);
    }
}

#[test]
fn boundary_perfect_empty_and_half() {
    let tmp = TempDir::new().unwrap();
    let ids = ["ISIC_0000001", "ISIC_0000002", "ISIC_0000003", "ISIC_0000004"];
    let perfect: Vec<_> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, Some(first_n(W, H, 50 + i))))
        .collect();
    boundary_fixture(tmp.path(), &perfect);
    let (outcome, report) = run_boundary(tmp.path(), MissingPolicy::default());
    assert!(outcome.success());
    assert_eq!(report.aggregates.s1, Some(1.0));
    audit_boundary(&report);
    assert_eq!(report.tool, TOOL_NAME);
    assert_eq!(report.version, TOOL_VERSION);
    assert_eq!(report.config["format"], "csv");
    assert_eq!(report.config["missing"], "strict");
    let csv = fs::read_to_string(tmp.path().join("out/per_image.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    let tmp = TempDir::new().unwrap();
    let empty: Vec<_> = ids
        .iter()
        .map(|id| (*id, Some(BinaryMask::new(W, H).unwrap())))
        .collect();
    boundary_fixture(tmp.path(), &empty);
    assert_eq!(
        run_boundary(tmp.path(), MissingPolicy::default()).1.aggregates.s1,
        Some(0.0)
    );

    let tmp = TempDir::new().unwrap();
    let half: Vec<_> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let m = if i % 2 == 0 {
                first_n(W, H, 50 + i)
            } else {
                BinaryMask::new(W, H).unwrap()
            };
            (*id, Some(m))
        })
        .collect();
    boundary_fixture(tmp.path(), &half);
    let (_, report) = run_boundary(tmp.path(), MissingPolicy::default());
    assert_eq!(report.aggregates.s1, Some(0.5));
    audit_boundary(&report);
}

#[test]
fn boundary_missing_prediction_strict_and_skip() {
    let tmp = TempDir::new().unwrap();
    boundary_fixture(tmp.path(), &[("A", Some(first_n(W, H, 50))), ("B", None)]);
    let (outcome, report) = run_boundary(tmp.path(), MissingPolicy::default());
    assert!(!outcome.success());
    assert_eq!(report.errors.len(), 1);
    audit_boundary(&report);

    let (outcome, report) = run_boundary(tmp.path(), skip_missing());
    assert!(outcome.success());
    assert_eq!(report.warnings.len(), 1);
    assert_eq!(report.aggregates.n, 1);
    assert_eq!(report.aggregates.s1, Some(1.0));
    audit_boundary(&report);
}

#[test]
fn boundary_without_overlap_is_an_error() {
    let tmp = TempDir::new().unwrap();
    boundary_fixture(tmp.path(), &[("A", None)]);
    put_mask(&tmp.path().join("pred/task1"), "Z_segmentation.png", &first_n(W, H, 3));
    let args = eval_args(
        &tmp.path().join("truth"),
        &tmp.path().join("pred"),
        &tmp.path().join("out"),
    );
    assert!(eval_boundary(&args).is_err());
}

#[test]
fn boundary_dimension_mismatch_is_an_error_even_when_skipping() {
    let tmp = TempDir::new().unwrap();
    boundary_fixture(tmp.path(), &[("A", Some(first_n(H, W, 50)))]);
    let (outcome, report) = run_boundary(tmp.path(), skip_missing());
    assert_eq!(outcome.errors, 1);
    assert!(report.errors[0].contains("dimension mismatch"));
}

// ---------------------------------------------------------------------------

const SIDE: usize = 100;

/// Full ground truth for every class; prediction covers `active[j]` pixels,
/// so each class Jaccard is `active[j] / 10_000`.
fn attribute_fixture(root: &Path, ids: &[&str], active: [usize; 5], empty_truth: Option<AttributeClass>) {
    for id in ids {
        for (class, n) in AttributeClass::ALL.into_iter().zip(active) {
            let name = MaskRole::Attribute(class).file_name(id);
            let truth = if Some(class) == empty_truth {
                BinaryMask::new(SIDE, SIDE).unwrap()
            } else {
                BinaryMask::full(SIDE, SIDE).unwrap()
            };
            put_mask(&root.join("truth"), &name, &truth);
            put_mask(&root.join("pred/task2"), &name, &first_n(SIDE, SIDE, n));
        }
    }
}

fn run_attributes(root: &Path, missing: MissingPolicy) -> (lesion_cli::Outcome, AttributeReport) {
    let mut args = eval_args(&root.join("truth"), &root.join("pred"), &root.join("out"));
    args.missing = missing;
    let outcome = eval_attributes(&args).unwrap();
    (outcome, read_report(root.join("out/report.json")))
}

fn audit_attributes(r: &AttributeReport) {
    assert_eq!(class_scores(&r.records), r.aggregates.per_class);
    if r.errors.is_empty() && r.aggregates.undefined.is_empty() {
        let scores: [Option<f64>; 5] = std::array::from_fn(|i| r.aggregates.per_class[i].score);
        assert_eq!(r.aggregates.s2, Some(attribute_overall_score(&scores).unwrap()));
    }
}

#[test]
fn attributes_perfect_predictions_score_one() {
    let tmp = TempDir::new().unwrap();
    attribute_fixture(tmp.path(), &["A", "B"], [SIDE * SIDE; 5], None);
    let (outcome, report) = run_attributes(tmp.path(), MissingPolicy::default());
    assert!(outcome.success());
    assert!(report
        .aggregates
        .per_class
        .iter()
        .all(|c| c.score == Some(1.0) && c.n == 2));
    assert_eq!(report.aggregates.s2, Some(1.0));
    audit_attributes(&report);
}

#[test]
fn attributes_published_class_scores_average_to_0_2800() {
    let tmp = TempDir::new().unwrap();
    attribute_fixture(tmp.path(), &["ISIC_0012345"], [2610, 2120, 3082, 3725, 2462], None);
    let (_, report) = run_attributes(tmp.path(), MissingPolicy::default());
    let rounded: Vec<f64> = report
        .aggregates
        .per_class
        .iter()
        .map(|c| c.score_rounded.unwrap())
        .collect();
    assert_eq!(rounded, vec![0.2610, 0.2120, 0.3082, 0.3725, 0.2462]);
    assert!((report.aggregates.s2.unwrap() - 0.2800).abs() < 5e-5);
    assert_eq!(report.aggregates.s2_rounded, Some(0.2800));
    audit_attributes(&report);
}

#[test]
fn attributes_empty_streaks_truth_is_undefined() {
    let tmp = TempDir::new().unwrap();
    attribute_fixture(tmp.path(), &["A", "B"], [5000; 5], Some(AttributeClass::Streaks));
    let (outcome, report) = run_attributes(tmp.path(), MissingPolicy::default());
    assert!(!outcome.success());
    assert_eq!(report.aggregates.undefined, vec![AttributeClass::Streaks]);
    assert_eq!(report.aggregates.per_class[4].score, None);
    assert_eq!(report.aggregates.s2, None);
    let json = fs::read_to_string(tmp.path().join("out/report.json")).unwrap();
    assert!(json.contains("\"undefined\": [\n      \"streaks\""));

    let (outcome, report) = run_attributes(tmp.path(), skip_missing());
    assert!(outcome.success());
    assert_eq!(report.aggregates.s2, Some(0.5));
    assert!(report.warnings.iter().any(|w| w.contains("streaks")));
    audit_attributes(&report);
}

#[test]
fn attributes_partial_prediction_files_count_as_empty() {
    let tmp = TempDir::new().unwrap();
    attribute_fixture(tmp.path(), &["A"], [SIDE * SIDE; 5], None);
    fs::remove_file(tmp.path().join("pred/task2/A_attribute_streaks.png")).unwrap();
    let (outcome, report) = run_attributes(tmp.path(), MissingPolicy::default());
    assert!(outcome.success());
    assert_eq!(report.aggregates.per_class[4].score, Some(0.0));
    assert_eq!(report.aggregates.s2, Some(0.8));
}

// ---------------------------------------------------------------------------

fn diagnose_args(root: &Path) -> DiagnoseArgs {
    DiagnoseArgs {
        pred: root.join("pred"),
        images: None,
        baseline: false,
        target_side: None,
        intersect_boundary: true,
        missing: MissingPolicy::default(),
        out: root.join("out"),
    }
}

fn class_mask(root: &Path, id: &str, label: DiagnosisLabel, mask: &BinaryMask) {
    put_mask(&root.join("pred/task3"), &format!("{id}_{}.png", label.code()), mask);
}

fn audit_diagnose(r: &DiagnoseReport) {
    assert_eq!(r.aggregates.images, r.records.len());
    assert_eq!(r.aggregates.label_counts, label_counts(&r.records));
    for t in &r.records {
        assert_eq!(t.rederive_label(), t.label, "{}", t.image_id);
    }
}

#[test]
fn diagnose_figure_fixture_picks_akiec() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path();
    put_mask(
        &root.join("pred/task1"),
        "ISIC_0034321_segmentation.png",
        &BinaryMask::full(SIDE, SIDE).unwrap(),
    );
    class_mask(root, "ISIC_0034321", DiagnosisLabel::Akiec, &first_n(SIDE, SIDE, 3688));
    class_mask(root, "ISIC_0034321", DiagnosisLabel::Mel, &first_n(SIDE, SIDE, 3658));
    let outcome = diagnose(&diagnose_args(root)).unwrap();
    assert!(outcome.success());

    let csv = fs::read_to_string(root.join("out/predictions.csv")).unwrap();
    assert_eq!(
        csv,
        "image,MEL,NV,BCC,AKIEC,BKL,DF,VASC\nISIC_0034321,0.4980,0.0000,0.0000,0.5020,0.0000,0.0000,0.0000\n"
    );
    let report: DiagnoseReport = read_report(root.join("out/report.json"));
    assert_eq!(report.records[0].label, DiagnosisLabel::Akiec);
    assert_eq!(report.records[0].areas[3], 0.3688);
    assert_eq!(report.records[0].areas[0], 0.3658);
    audit_diagnose(&report);
    let votes = fs::read_to_string(root.join("out/votes.jsonl")).unwrap();
    let trace: VoteTrace = serde_json::from_str(votes.lines().next().unwrap()).unwrap();
    assert_eq!(trace, report.records[0]);
}

#[test]
fn diagnose_single_class_gives_one_hot_and_reruns_identically() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path();
    for (i, id) in ["A", "B", "C"].iter().enumerate() {
        put_mask(
            &root.join("pred/task1"),
            &format!("{id}_segmentation.png"),
            &BinaryMask::full(W, H).unwrap(),
        );
        class_mask(root, id, DiagnosisLabel::ALL[i + 2], &first_n(W, H, 40 + i));
    }
    diagnose(&diagnose_args(root)).unwrap();
    let first = fs::read(root.join("out/predictions.csv")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.contains("\nA,0.0000,0.0000,1.0000,0.0000,0.0000,0.0000,0.0000\n"));
    let first_report = fs::read(root.join("out/report.json")).unwrap();
    diagnose(&diagnose_args(root)).unwrap();
    assert_eq!(fs::read(root.join("out/predictions.csv")).unwrap(), first);
    assert_eq!(fs::read(root.join("out/report.json")).unwrap(), first_report);
}

#[test]
fn diagnose_intersection_flag_changes_the_vote() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path();
    // boundary covers the first row only; BCC lies outside it
    put_mask(&root.join("pred/task1"), "A_segmentation.png", &first_n(W, H, W));
    class_mask(root, "A", DiagnosisLabel::Mel, &first_n(W, H, W));
    class_mask(
        root,
        "A",
        DiagnosisLabel::Bcc,
        &BinaryMask::from_fn(W, H, |_, y| y >= 2).unwrap(),
    );
    let mut args = diagnose_args(root);
    diagnose(&args).unwrap();
    let on: DiagnoseReport = read_report(root.join("out/report.json"));
    assert_eq!(on.records[0].label, DiagnosisLabel::Mel);
    args.intersect_boundary = false;
    diagnose(&args).unwrap();
    let off: DiagnoseReport = read_report(root.join("out/report.json"));
    assert_eq!(off.records[0].label, DiagnosisLabel::Bcc);
}

#[test]
fn diagnose_empty_root_and_missing_boundary() {
    let tmp = TempDir::new().unwrap();
    fs::create_dir_all(tmp.path().join("pred")).unwrap();
    assert!(diagnose(&diagnose_args(tmp.path())).is_err());

    class_mask(tmp.path(), "A", DiagnosisLabel::Mel, &first_n(W, H, 5));
    let outcome = diagnose(&diagnose_args(tmp.path())).unwrap();
    assert_eq!(outcome.errors, 1);
    let report: DiagnoseReport = read_report(tmp.path().join("out/report.json"));
    assert!(report.records[0].error.is_some());
    assert_eq!(report.records[0].label, DiagnosisLabel::Nv);

    let mut args = diagnose_args(tmp.path());
    args.missing = skip_missing();
    let outcome = diagnose(&args).unwrap();
    assert!(outcome.success());
    assert_eq!(outcome.warnings, 1);
    let csv = fs::read_to_string(tmp.path().join("out/predictions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn diagnose_all_empty_masks_fall_back_uniform() {
    let tmp = TempDir::new().unwrap();
    put_mask(
        &tmp.path().join("pred/task1"),
        "A_segmentation.png",
        &BinaryMask::full(W, H).unwrap(),
    );
    let outcome = diagnose(&diagnose_args(tmp.path())).unwrap();
    assert!(outcome.success());
    assert_eq!(outcome.warnings, 1);
    let csv = fs::read_to_string(tmp.path().join("out/predictions.csv")).unwrap();
    assert!(csv.ends_with("A,0.1429,0.1429,0.1429,0.1429,0.1429,0.1429,0.1429\n"));
}

// ---------------------------------------------------------------------------

fn write_truth_csv(path: &Path, rows: &[(String, DiagnosisLabel)]) {
    let table = GroundTruthTable {
        rows: rows.iter().cloned().collect(),
    };
    write_diagnosis_predictions(path, table.one_hot_rows().iter()).unwrap();
    assert_eq!(load_ground_truth_csv(path).unwrap(), table);
}

fn write_pred_csv(path: &Path, rows: &[(String, DiagnosisLabel)]) {
    let table = GroundTruthTable {
        rows: rows.iter().cloned().collect(),
    };
    let soft: Vec<(String, [f64; 7])> = table
        .rows
        .iter()
        .map(|(id, l)| {
            let mut v = [0.05; 7];
            v[l.index()] = 0.7;
            (id.clone(), v)
        })
        .collect();
    write_diagnosis_predictions(path, soft.iter().map(|(id, v)| (id, v))).unwrap();
}

fn eval_diagnosis_args(root: &Path) -> EvalDiagnosisArgs {
    EvalDiagnosisArgs {
        pred: root.join("pred.csv"),
        truth: root.join("truth.csv"),
        missing: MissingPolicy::default(),
        format: ReportFormat::Json,
        out: root.join("out"),
    }
}

fn audit_diagnosis(r: &DiagnosisReport) {
    let cm = confusion_from_records(&r.records);
    assert_eq!(cm.counts, r.aggregates.confusion_counts);
    assert_eq!(cm.row_normalized(), r.aggregates.confusion_normalized);
    if r.errors.is_empty() {
        let correct = r.records.iter().filter(|x| x.truth == x.predicted).count();
        assert_eq!(r.aggregates.s3, Some(correct as f64 / r.records.len() as f64));
        assert_eq!(
            r.aggregates.balanced_accuracy,
            Some(balanced_accuracy(&cm).unwrap().value)
        );
    }
}

/// `counts[t][p]` images of truth `t` predicted as `p`.
fn confusion_fixture(root: &Path, counts: &[[u64; 7]; 7]) {
    let (mut truth, mut pred) = (Vec::new(), Vec::new());
    let mut k = 0;
    for (t, row) in counts.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            for _ in 0..n {
                let id = format!("IMG_{k:05}");
                truth.push((id.clone(), DiagnosisLabel::ALL[t]));
                pred.push((id, DiagnosisLabel::ALL[p]));
                k += 1;
            }
        }
    }
    write_truth_csv(&root.join("truth.csv"), &truth);
    write_pred_csv(&root.join("pred.csv"), &pred);
}

#[test]
fn diagnosis_perfect_predictions() {
    let tmp = TempDir::new().unwrap();
    let mut counts = [[0u64; 7]; 7];
    for (i, row) in counts.iter_mut().enumerate() {
        row[i] = 3 + i as u64;
    }
    confusion_fixture(tmp.path(), &counts);
    let outcome = eval_diagnosis(&eval_diagnosis_args(tmp.path())).unwrap();
    assert!(outcome.success());
    let r: DiagnosisReport = read_report(tmp.path().join("out/report.json"));
    assert_eq!(r.aggregates.s3, Some(1.0));
    for i in 0..7 {
        for j in 0..7 {
            assert_eq!(r.aggregates.confusion_normalized[i][j], if i == j { 1.0 } else { 0.0 });
        }
    }
    audit_diagnosis(&r);
}

#[test]
fn diagnosis_published_matrix_balanced_accuracy() {
    let counts = [
        [172, 40, 3, 3, 9, 0, 1],
        [69, 1217, 9, 2, 14, 3, 2],
        [7, 4, 73, 6, 6, 3, 2],
        [15, 1, 5, 30, 10, 4, 0],
        [37, 29, 7, 2, 151, 6, 0],
        [2, 7, 1, 2, 0, 16, 0],
        [0, 2, 0, 0, 0, 1, 27],
    ];
    let tmp = TempDir::new().unwrap();
    confusion_fixture(tmp.path(), &counts);
    eval_diagnosis(&eval_diagnosis_args(tmp.path())).unwrap();
    let r: DiagnosisReport = read_report(tmp.path().join("out/report.json"));
    assert!((r.aggregates.balanced_accuracy.unwrap() - 0.7123).abs() < 1e-3);
    assert_eq!(r.aggregates.confusion_counts, counts);
    assert_eq!(r.aggregates.n, 2000);
    audit_diagnosis(&r);
}

#[test]
fn diagnosis_all_nevus_on_balanced_set_is_one_seventh() {
    let mut counts = [[0u64; 7]; 7];
    for row in counts.iter_mut() {
        row[DiagnosisLabel::Nv.index()] = 4;
    }
    let tmp = TempDir::new().unwrap();
    confusion_fixture(tmp.path(), &counts);
    eval_diagnosis(&eval_diagnosis_args(tmp.path())).unwrap();
    let r: DiagnosisReport = read_report(tmp.path().join("out/report.json"));
    assert!((r.aggregates.balanced_accuracy.unwrap() - 1.0 / 7.0).abs() < 1e-12);
    assert!((r.aggregates.s3.unwrap() - 1.0 / 7.0).abs() < 1e-12);
    audit_diagnosis(&r);
}

#[test]
fn diagnosis_id_mismatch() {
    let tmp = TempDir::new().unwrap();
    let truth: Vec<_> = (0..4).map(|i| (format!("I{i}"), DiagnosisLabel::Mel)).collect();
    write_truth_csv(&tmp.path().join("truth.csv"), &truth);
    write_pred_csv(&tmp.path().join("pred.csv"), &truth[..3]);
    let outcome = eval_diagnosis(&eval_diagnosis_args(tmp.path())).unwrap();
    assert_eq!(outcome.errors, 1);
    let r: DiagnosisReport = read_report(tmp.path().join("out/report.json"));
    assert_eq!(r.aggregates.s3, None);
    audit_diagnosis(&r);

    let mut args = eval_diagnosis_args(tmp.path());
    args.missing = skip_missing();
    let outcome = eval_diagnosis(&args).unwrap();
    assert!(outcome.success());
    let r: DiagnosisReport = read_report(tmp.path().join("out/report.json"));
    assert_eq!(r.aggregates.n, 3);
    assert!(r.aggregates.excluded_labels.len() == 6);

    let other: Vec<_> = (0..4).map(|i| (format!("J{i}"), DiagnosisLabel::Mel)).collect();
    write_pred_csv(&tmp.path().join("pred.csv"), &other);
    assert!(eval_diagnosis(&args).is_err());
}

// ---------------------------------------------------------------------------

fn augment_fixture(root: &Path) {
    let dir = root.join("in");
    fs::create_dir_all(&dir).unwrap();
    for (i, id) in ["A", "B"].iter().enumerate() {
        let samples = (0..W * H * 3).map(|v| (v * 7 + i) as u8).collect();
        let img = lesion_core::RasterImage::new(W, H, 3, samples).unwrap();
        lesion_core::io::write_raster(dir.join(format!("{id}.png")), &img).unwrap();
        put_mask(&dir, &MaskRole::Segmentation.file_name(id), &first_n(W, H, 30 + i));
        put_mask(
            &dir,
            &MaskRole::Attribute(AttributeClass::Globules).file_name(id),
            &first_n(W, H, 7),
        );
    }
}

fn augment_args(root: &Path, count: usize, out: &str) -> AugmentArgs {
    AugmentArgs {
        images: root.join("in"),
        truth: Some(root.join("in")),
        seed: 2018,
        count,
        out: root.join(out),
    }
}

#[test]
fn augment_zero_count_writes_manifest_only() {
    let tmp = TempDir::new().unwrap();
    augment_fixture(tmp.path());
    augment(&augment_args(tmp.path(), 0, "out")).unwrap();
    let files: Vec<_> = fs::read_dir(tmp.path().join("out")).unwrap().collect();
    assert_eq!(files.len(), 1);
    let m: Report<AugmentRecord, AugmentSummary> = read_report(tmp.path().join("out/manifest.json"));
    assert!(m.records.is_empty());
    assert_eq!(m.aggregates.images, 2);
}

#[test]
fn augment_is_reproducible_and_preserves_mask_counts() {
    let tmp = TempDir::new().unwrap();
    augment_fixture(tmp.path());
    augment(&augment_args(tmp.path(), 4, "a")).unwrap();
    augment(&augment_args(tmp.path(), 4, "b")).unwrap();
    let mut names: Vec<_> = fs::read_dir(tmp.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 2 * 4 * 3 + 1);
    assert!(names.contains(&"A_aug3.png".to_string()));
    assert!(names.contains(&"B_aug0_segmentation.png".to_string()));
    for name in &names {
        if name == "manifest.json" {
            continue;
        }
        assert_eq!(
            fs::read(tmp.path().join("a").join(name)).unwrap(),
            fs::read(tmp.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
    let m: Report<AugmentRecord, AugmentSummary> = read_report(tmp.path().join("a/manifest.json"));
    assert_eq!(m.records.len(), 8);
    for r in &m.records {
        let i = if r.image_id == "A" { 0 } else { 1 };
        assert_eq!(r.masks.len(), 2);
        assert_eq!(r.mask_active, vec![30 + i as u64, 7]);
        assert_eq!(r.draw_index, (i * 4 + r.variant) as u64);
        assert_eq!(r.spec, lesion_core::augment::sample_spec(2018, r.draw_index));
    }
}

// ---------------------------------------------------------------------------

fn split_args(task: Task, images: &Path, truth: &Path, out: &Path) -> SplitArgs {
    SplitArgs {
        task,
        images: images.to_path_buf(),
        truth: Some(truth.to_path_buf()),
        seed: 7,
        train: None,
        test: None,
        stratified: false,
        out: out.to_path_buf(),
    }
}

fn id_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn split_task1_layout_uses_published_sizes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("data");
    let mask = first_n(2, 2, 1);
    for i in 0..2594 {
        let id = format!("ISIC_{i:07}");
        put_image(&dir, &id, 2, 2);
        put_mask(&dir, &MaskRole::Segmentation.file_name(&id), &mask);
    }
    split(&split_args(Task::Boundary, &dir, &dir, &tmp.path().join("a"))).unwrap();
    split(&split_args(Task::Boundary, &dir, &dir, &tmp.path().join("b"))).unwrap();
    let train = id_lines(&tmp.path().join("a/train.txt"));
    let test = id_lines(&tmp.path().join("a/test.txt"));
    assert_eq!((train.len(), test.len()), (2294, 300));
    assert!(test.iter().all(|id| train.binary_search(id).is_err()));
    for f in ["train.txt", "test.txt"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap()
        );
    }
    let report = fs::read(tmp.path().join("a/split.json")).unwrap();
    split(&split_args(Task::Boundary, &dir, &dir, &tmp.path().join("a"))).unwrap();
    assert_eq!(fs::read(tmp.path().join("a/split.json")).unwrap(), report);
    let mut args = split_args(Task::Boundary, &dir, &dir, &tmp.path().join("c"));
    args.test = Some(3000);
    assert!(split(&args).is_err());
}

#[test]
fn split_task3_layout_uses_published_sizes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("images");
    let mut rows = Vec::new();
    for i in 0..10_015 {
        let id = format!("ISIC_{i:07}");
        put_image(&dir, &id, 1, 1);
        rows.push((id, DiagnosisLabel::ALL[i % 7]));
    }
    let csv = tmp.path().join("truth.csv");
    write_truth_csv(&csv, &rows);
    for strat in [false, true] {
        let mut args = split_args(Task::Diagnosis, &dir, &csv, &tmp.path().join(format!("out{strat}")));
        args.stratified = strat;
        split(&args).unwrap();
        let train = id_lines(&args.out.join("train.txt"));
        let test = id_lines(&args.out.join("test.txt"));
        assert_eq!((train.len(), test.len()), (8015, 2000));
        assert!(test.iter().all(|id| train.binary_search(id).is_err()));
    }
}

// ---------------------------------------------------------------------------

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_lesion-bench"))
}

#[test]
fn binary_exit_codes_follow_errors_not_warnings() {
    let tmp = TempDir::new().unwrap();
    boundary_fixture(tmp.path(), &[("A", Some(first_n(W, H, 50))), ("B", None)]);
    let base = |extra: &[&str]| {
        let mut cmd = binary();
        cmd.arg("eval-boundary")
            .arg("--truth")
            .arg(tmp.path().join("truth"))
            .arg("--pred")
            .arg(tmp.path().join("pred"))
            .arg("--out")
            .arg(tmp.path().join("out"))
            .args(extra);
        cmd.output().unwrap()
    };
    assert!(!base(&[]).status.success());
    let ok = base(&["--skip-missing"]);
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("S1 = 1.0000 over 1 images"));
    assert!(!base(&["--strict", "--skip-missing"]).status.success());

    let missing = binary()
        .args([
            "eval-boundary",
            "--truth",
            "/nonexistent",
            "--pred",
            "/nonexistent",
            "--out",
        ])
        .arg(tmp.path().join("x"))
        .output()
        .unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("does not exist"));
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn binary_rejects_bad_thread_setting() {
    let out = binary()
        .env(lesion_cli::THREADS_ENV, "zero")
        .args(["synth", "--seed", "1", "--count", "1", "--out"])
        .arg(TempDir::new().unwrap().path())
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn binary_synth_then_split_with_thread_cap() {
    let tmp = TempDir::new().unwrap();
    let out = binary()
        .env(lesion_cli::THREADS_ENV, "2")
        .args(["synth", "--seed", "3", "--count", "5", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let status = binary()
        .args([
            "split", "--task", "1", "--seed", "9", "--train", "4", "--test", "1", "--images",
        ])
        .arg(tmp.path().join("images"))
        .arg("--truth")
        .arg(tmp.path().join("truth"))
        .arg("--out")
        .arg(tmp.path().join("split"))
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(id_lines(&tmp.path().join("split/test.txt")).len(), 1);
}
