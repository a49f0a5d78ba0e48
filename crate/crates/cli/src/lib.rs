//! Subcommands of the `lesion-bench` tool. Each command validates its paths,
//! does its per-image work in parallel and writes a JSON report whose
//! aggregates can be recomputed from its own records.

use std::path::{Path, PathBuf};

use anyhow::bail;
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use lesion_core::dataset::Task;
use serde::Serialize;

use crate::report::Report;

pub mod eval;
pub mod pipeline;
pub mod report;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "LESION_BENCH_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "lesion-bench",
    version,
    about = "Scoring and diagnosis harness for dermoscopic lesion masks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seeded train/test split of a dataset directory.
    Split(SplitArgs),
    /// Writes randomly augmented copies of images and their masks.
    Augment(AugmentArgs),
    /// Scores lesion boundary predictions (mean Jaccard).
    EvalBoundary(EvalMaskArgs),
    /// Scores attribute mask predictions per class and overall.
    EvalAttributes(EvalMaskArgs),
    /// Classifies images by the largest predicted class-mask area.
    Diagnose(DiagnoseArgs),
    /// Scores diagnosis predictions: accuracy, confusion matrix, balanced accuracy.
    EvalDiagnosis(EvalDiagnosisArgs),
    /// Segments lesions with the Otsu baseline into a predictor directory.
    BaselineSegment(BaselineArgs),
    /// Generates synthetic lesion images with known masks.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    /// report.json only.
    #[default]
    Json,
    /// report.json plus per_image.csv.
    Csv,
}

/// Behaviour when an image has no prediction. Strict is the default.
#[derive(Debug, Clone, Default, Args)]
pub struct MissingPolicy {
    /// Treat missing predictions as errors (default).
    #[arg(long, conflicts_with = "skip_missing")]
    pub strict: bool,
    /// Warn about images without predictions and score the rest.
    #[arg(long)]
    pub skip_missing: bool,
}

impl MissingPolicy {
    pub fn is_strict(&self) -> bool {
        !self.skip_missing
    }
}

/// Echoed as the effective policy, `"strict"` or `"skip-missing"`.
impl Serialize for MissingPolicy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(if self.is_strict() { "strict" } else { "skip-missing" })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    /// 1 = boundary, 2 = attributes, 3 = diagnosis.
    #[arg(long)]
    pub task: Task,
    #[arg(long)]
    pub images: PathBuf,
    /// Mask directory (tasks 1 and 2, defaults to --images) or ground-truth CSV (task 3).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    /// Training-set size; defaults to the task's published split.
    #[arg(long)]
    pub train: Option<usize>,
    /// Test-set size; defaults to the task's published split.
    #[arg(long)]
    pub test: Option<usize>,
    /// Keep diagnosis proportions in both lists (task 3).
    #[arg(long)]
    pub stratified: bool,
    /// Output directory for train.txt, test.txt and split.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AugmentArgs {
    #[arg(long)]
    pub images: PathBuf,
    /// Mask directory; masks named after an image are augmented with it.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    /// Variants per image.
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalMaskArgs {
    /// Ground-truth mask directory.
    #[arg(long)]
    pub truth: PathBuf,
    /// Predictor root holding task1/ or task2/.
    #[arg(long)]
    pub pred: PathBuf,
    /// File with one image id per line; defaults to every ground-truth id.
    #[arg(long)]
    pub ids: Option<PathBuf>,
    #[command(flatten)]
    pub missing: MissingPolicy,
    #[arg(long, value_enum, default_value_t)]
    pub format: ReportFormat,
    /// Output directory for the report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagnoseArgs {
    /// Predictor root holding task1/ and task3/.
    #[arg(long)]
    pub pred: PathBuf,
    /// Lesion images; required with --baseline, otherwise selects the ids.
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// Compute boundaries with the Otsu baseline instead of reading task1/.
    #[arg(long)]
    pub baseline: bool,
    /// Working side for the baseline (resize and pad, then map back).
    #[arg(long)]
    pub target_side: Option<usize>,
    /// Clip class masks to the boundary mask before measuring areas.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub intersect_boundary: bool,
    #[command(flatten)]
    pub missing: MissingPolicy,
    /// Output directory for predictions.csv, votes.jsonl and report.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalDiagnosisArgs {
    /// Predicted confidence CSV.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth one-hot CSV.
    #[arg(long)]
    pub truth: PathBuf,
    #[command(flatten)]
    pub missing: MissingPolicy,
    #[arg(long, value_enum, default_value_t)]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BaselineArgs {
    #[arg(long)]
    pub images: PathBuf,
    /// Predictor root; masks go to <out>/task1/.
    #[arg(long)]
    pub out: PathBuf,
    /// Working side (resize and pad, then map back to original resolution).
    #[arg(long)]
    pub target_side: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 240)]
    pub width: usize,
    #[arg(long, default_value_t = 180)]
    pub height: usize,
    /// Half-width of the uniform per-channel noise.
    #[arg(long, default_value_t = 40)]
    pub noise: u8,
    /// Writes <out>/images/ and <out>/truth/.
    #[arg(long)]
    pub out: PathBuf,
}

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// One-line human summary.
    pub summary: String,
    pub warnings: usize,
    pub errors: usize,
}

impl Outcome {
    pub fn success(&self) -> bool {
        self.errors == 0
    }
}

pub fn run(command: &Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Split(a) => pipeline::split(a),
        Command::Augment(a) => pipeline::augment(a),
        Command::EvalBoundary(a) => eval::eval_boundary(a),
        Command::EvalAttributes(a) => eval::eval_attributes(a),
        Command::Diagnose(a) => pipeline::diagnose(a),
        Command::EvalDiagnosis(a) => eval::eval_diagnosis(a),
        Command::BaselineSegment(a) => pipeline::baseline_segment(a),
        Command::Synth(a) => pipeline::synth(a),
    }
}

/// Writes the report to `path`, logs its warnings and errors and returns the
/// outcome.
pub(crate) fn finish<R: Serialize, A: Serialize>(
    report: &Report<R, A>,
    path: &Path,
    summary: String,
) -> anyhow::Result<Outcome> {
    report.write_json(path)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    for e in &report.errors {
        log::error!("{e}");
    }
    Ok(Outcome {
        summary,
        warnings: report.warnings.len(),
        errors: report.errors.len(),
    })
}

pub(crate) fn require_dir(path: &Path, what: &str) -> anyhow::Result<()> {
    if !path.is_dir() {
        bail!("{what} directory {} does not exist", path.display());
    }
    Ok(())
}

pub(crate) fn require_file(path: &Path, what: &str) -> anyhow::Result<()> {
    if !path.is_file() {
        bail!("{what} file {} does not exist", path.display());
    }
    Ok(())
}

pub(crate) fn create_out_dir(path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path).map_err(|e| anyhow::anyhow!("cannot create output directory {}: {e}", path.display()))
}

/// Non-empty, trimmed lines of an id list file.
pub(crate) fn read_id_list(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}
