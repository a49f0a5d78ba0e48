//! Dataset ingestion: diagnosis ground-truth CSV, image/mask discovery under
//! the public ISIC 2018 naming scheme, deterministic train/test splits, and
//! the task-3 prediction CSV.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::image_dimensions;
use crate::labels::{AttributeClass, DiagnosisLabel};
use crate::metrics::round_half_up;
use crate::rng::SplitMix64;

/// Header shared by the ground-truth and prediction CSVs.
pub const DIAGNOSIS_CSV_HEADER: &str = "image,MEL,NV,BCC,AKIEC,BKL,DF,VASC";
/// Accepted distance of a one-hot value from exactly 0 or 1.
pub const ONE_HOT_TOLERANCE: f64 = 1e-6;

/// Train/test sizes used for the boundary and attribute tasks.
pub const SEGMENTATION_SPLIT: (usize, usize) = (2_294, 300);
/// Train/test sizes used for the diagnosis task.
pub const DIAGNOSIS_SPLIT: (usize, usize) = (8_015, 2_000);

const IMAGE_EXTENSIONS: [&str; 3] = ["jpg", "jpeg", "png"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Task {
    Boundary = 1,
    Attributes = 2,
    Diagnosis = 3,
}

impl Task {
    pub fn number(self) -> u8 {
        self as u8
    }

    /// Published split sizes for this task.
    pub fn default_split(self) -> (usize, usize) {
        match self {
            Task::Boundary | Task::Attributes => SEGMENTATION_SPLIT,
            Task::Diagnosis => DIAGNOSIS_SPLIT,
        }
    }
}

impl From<Task> for u8 {
    fn from(t: Task) -> u8 {
        t.number()
    }
}

impl TryFrom<u8> for Task {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Task::Boundary),
            2 => Ok(Task::Attributes),
            3 => Ok(Task::Diagnosis),
            _ => Err(format!("task must be 1, 2 or 3, got {v}")),
        }
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.trim()
            .parse::<u8>()
            .map_err(|e| e.to_string())
            .and_then(Task::try_from)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

// ---------------------------------------------------------------------------
// Ground truth CSV

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthTable {
    pub rows: BTreeMap<String, DiagnosisLabel>,
}

impl GroundTruthTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, image_id: &str) -> Option<DiagnosisLabel> {
        self.rows.get(image_id).copied()
    }

    /// One-hot confidence rows, for writing back out.
    pub fn one_hot_rows(&self) -> BTreeMap<String, [f64; 7]> {
        self.rows
            .iter()
            .map(|(id, label)| {
                let mut v = [0.0; 7];
                v[label.index()] = 1.0;
                (id.clone(), v)
            })
            .collect()
    }
}

/// Column index of `image` and of each label, located by header name.
fn header_columns(path: &Path, headers: &csv::StringRecord) -> Result<(usize, [usize; 7])> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let image = find("image")?;
    let mut cols = [0usize; 7];
    for label in DiagnosisLabel::ALL {
        cols[label.index()] = find(label.code())?;
    }
    Ok((image, cols))
}

fn read_confidence_rows(path: &Path) -> Result<Vec<(usize, String, [f64; 7])>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::InvalidRow {
                path: path.to_path_buf(),
                row: 0,
                message: format!("{other:?}"),
            },
        })?;
    let (image_col, cols) = header_columns(path, reader.headers()?)?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2; // 1-based, after the header
        let id = record.get(image_col).unwrap_or_default().to_string();
        if id.is_empty() {
            return Err(Error::InvalidRow {
                path: path.to_path_buf(),
                row,
                message: "empty image id".into(),
            });
        }
        let mut values = [0.0; 7];
        for (v, &c) in values.iter_mut().zip(&cols) {
            let raw = record.get(c).unwrap_or_default();
            *v = raw.parse::<f64>().map_err(|_| Error::InvalidRow {
                path: path.to_path_buf(),
                row,
                message: format!("unparseable number `{raw}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidRow {
                    path: path.to_path_buf(),
                    row,
                    message: format!("non-finite value `{raw}`"),
                });
            }
        }
        out.push((row, id, values));
    }
    Ok(out)
}

/// Loads the one-hot diagnosis table. Every value must lie within
/// [`ONE_HOT_TOLERANCE`] of 0 or 1 with exactly one 1 per row.
pub fn load_ground_truth_csv(path: impl AsRef<Path>) -> Result<GroundTruthTable> {
    let path = path.as_ref();
    let mut table = GroundTruthTable::default();
    for (row, id, values) in read_confidence_rows(path)? {
        let invalid = |message: String| Error::InvalidRow {
            path: path.to_path_buf(),
            row,
            message,
        };
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > ONE_HOT_TOLERANCE * 7.0 {
            return Err(invalid(format!("one-hot violation: values sum to {sum}")));
        }
        let mut hot = None;
        for (i, &v) in values.iter().enumerate() {
            if (v - 1.0).abs() <= ONE_HOT_TOLERANCE {
                if hot.is_some() {
                    return Err(invalid("one-hot violation: more than one column set".into()));
                }
                hot = Some(i);
            } else if v.abs() > ONE_HOT_TOLERANCE {
                return Err(invalid(format!("one-hot violation: value {v} is neither 0 nor 1")));
            }
        }
        let label = hot
            .and_then(DiagnosisLabel::from_index)
            .ok_or_else(|| invalid("one-hot violation: no column set".into()))?;
        if table.rows.insert(id.clone(), label).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(table)
}

/// Loads a prediction CSV of arbitrary non-negative confidences.
pub fn load_confidence_csv(path: impl AsRef<Path>) -> Result<BTreeMap<String, [f64; 7]>> {
    let path = path.as_ref();
    let mut rows = BTreeMap::new();
    for (row, id, values) in read_confidence_rows(path)? {
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidRow {
                path: path.to_path_buf(),
                row,
                message: format!("negative confidence {v}"),
            });
        }
        if rows.insert(id.clone(), values).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(rows)
}

/// Label with the highest confidence; ties go to the earliest label.
pub fn argmax_label(confidences: &[f64; 7]) -> DiagnosisLabel {
    let mut best = 0;
    for (i, &v) in confidences.iter().enumerate() {
        if v > confidences[best] {
            best = i;
        }
    }
    DiagnosisLabel::ALL[best]
}

/// Writes the task-3 CSV: ground-truth header, one row per image in the
/// iteration order given, values at 4 decimals (half-up), LF line endings.
pub fn write_diagnosis_predictions<'a, I, V>(path: impl AsRef<Path>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a String, V)>,
    V: AsRef<[f64]>,
{
    let path = path.as_ref();
    let mut body = String::new();
    body.push_str(DIAGNOSIS_CSV_HEADER);
    body.push('\n');
    for (id, values) in rows {
        let values = values.as_ref();
        if values.len() != DiagnosisLabel::COUNT {
            return Err(Error::InvalidParameter(format!(
                "image {id}: confidence vector has {} entries, expected 7",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!("image {id}: invalid confidence {v}")));
        }
        body.push_str(id);
        for v in values {
            body.push_str(&format!(",{:.4}", round_half_up(*v, 4)));
        }
        body.push('\n');
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Discovery

/// What a mask file annotates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum MaskRole {
    Segmentation,
    Attribute(AttributeClass),
}

impl MaskRole {
    /// File name of this mask for `image_id`.
    pub fn file_name(self, image_id: &str) -> String {
        match self {
            MaskRole::Segmentation => format!("{image_id}_segmentation.png"),
            MaskRole::Attribute(c) => format!("{image_id}_attribute_{}.png", c.file_name()),
        }
    }

    fn for_task(task: Task) -> Vec<MaskRole> {
        match task {
            Task::Boundary => vec![MaskRole::Segmentation],
            Task::Attributes => AttributeClass::ALL.into_iter().map(MaskRole::Attribute).collect(),
            Task::Diagnosis => Vec::new(),
        }
    }
}

impl fmt::Display for MaskRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaskRole::Segmentation => f.write_str("segmentation"),
            MaskRole::Attribute(c) => write!(f, "attribute_{c}"),
        }
    }
}

impl From<MaskRole> for String {
    fn from(r: MaskRole) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for MaskRole {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        if s == "segmentation" {
            return Ok(MaskRole::Segmentation);
        }
        s.strip_prefix("attribute_")
            .ok_or_else(|| format!("unknown mask role `{s}`"))?
            .parse()
            .map(MaskRole::Attribute)
    }
}

/// Splits a mask file name into image id and role, if it follows the naming
/// scheme.
pub fn parse_mask_file_name(name: &str) -> Option<(String, MaskRole)> {
    let stem = name.strip_suffix(".png")?;
    if let Some(id) = stem.strip_suffix("_segmentation") {
        return (!id.is_empty()).then(|| (id.to_string(), MaskRole::Segmentation));
    }
    let (id, attr) = stem.split_once("_attribute_")?;
    let class = attr.parse::<AttributeClass>().ok()?;
    (!id.is_empty()).then(|| (id.to_string(), MaskRole::Attribute(class)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub image_id: String,
    pub image_path: PathBuf,
    pub masks: BTreeMap<MaskRole, PathBuf>,
    pub diagnosis: Option<DiagnosisLabel>,
}

impl IndexEntry {
    pub fn bare(image_id: impl Into<String>) -> Self {
        Self {
            image_id: image_id.into(),
            image_path: PathBuf::new(),
            masks: BTreeMap::new(),
            diagnosis: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub task: Task,
    /// Sorted by image id.
    pub entries: Vec<IndexEntry>,
    /// Files that matched no naming pattern, or annotations not needed by the task.
    pub unmatched: Vec<PathBuf>,
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let ft = entry.file_type().map_err(|e| Error::io(entry.path(), e))?;
        if ft.is_file() {
            files.push(entry.path());
        }
    }
    files.sort();
    Ok(files)
}

fn file_name(path: &Path) -> &str {
    path.file_name().and_then(|n| n.to_str()).unwrap_or_default()
}

/// Lesion images in `dir` keyed by id, plus files that are not images. Mask
/// files (by naming pattern) are skipped so that images and masks may share a
/// directory.
fn scan_images(dir: &Path) -> Result<(BTreeMap<String, PathBuf>, Vec<PathBuf>)> {
    let mut images = BTreeMap::new();
    let mut other = Vec::new();
    for path in sorted_files(dir)? {
        let name = file_name(&path);
        if parse_mask_file_name(name).is_some() {
            continue;
        }
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        let stem = path.file_stem().and_then(|s| s.to_str());
        match (ext, stem) {
            (Some(ext), Some(stem)) if IMAGE_EXTENSIONS.contains(&ext.as_str()) => {
                if let Some(prev) = images.insert(stem.to_string(), path.clone()) {
                    return Err(Error::Discovery {
                        problems: vec![format!(
                            "image id {stem} appears twice ({} and {})",
                            prev.display(),
                            path.display()
                        )],
                    });
                }
            }
            _ => other.push(path),
        }
    }
    Ok((images, other))
}

/// Lesion images (`.jpg`, `.jpeg`, `.png`) in `dir` keyed by image id,
/// skipping files named like masks.
pub fn list_images(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    scan_images(dir).map(|(images, _)| images)
}

impl DatasetIndex {
    /// Indexes a boundary (task 1) or attribute (task 2) dataset.
    ///
    /// Each image needs every mask its task requires, masks must match their
    /// image's dimensions, and every relevant mask must have an image. All
    /// violations are collected into one [`Error::Discovery`].
    pub fn discover(task: Task, image_dir: &Path, mask_dir: &Path) -> Result<Self> {
        if task == Task::Diagnosis {
            return Err(Error::InvalidParameter(
                "diagnosis datasets are indexed from the ground-truth table".into(),
            ));
        }
        let (images, mut unmatched) = scan_images(image_dir)?;
        let roles = MaskRole::for_task(task);
        let mut masks: BTreeMap<String, BTreeMap<MaskRole, PathBuf>> = BTreeMap::new();
        let mut problems = Vec::new();
        for path in sorted_files(mask_dir)? {
            match parse_mask_file_name(file_name(&path)) {
                Some((id, role)) if roles.contains(&role) => {
                    if !images.contains_key(&id) {
                        problems.push(Error::OrphanMask(path.clone()).to_string());
                    }
                    masks.entry(id).or_default().insert(role, path);
                }
                _ => {
                    // images and masks may share a directory
                    if !images.values().any(|p| p == &path) {
                        unmatched.push(path);
                    }
                }
            }
        }

        let mut entries = Vec::with_capacity(images.len());
        for (id, image_path) in &images {
            let found = masks.remove(id).unwrap_or_default();
            let missing: Vec<String> = roles
                .iter()
                .filter(|r| !found.contains_key(r))
                .map(|r| format!("{r} mask"))
                .collect();
            if !missing.is_empty() {
                problems.push(
                    Error::MissingAnnotation {
                        image_id: id.clone(),
                        what: missing.join(", "),
                    }
                    .to_string(),
                );
                continue;
            }
            entries.push(IndexEntry {
                image_id: id.clone(),
                image_path: image_path.clone(),
                masks: found,
                diagnosis: None,
            });
        }

        let dim_problems: Vec<String> = entries
            .par_iter()
            .flat_map_iter(|e| check_entry_dimensions(e).err().into_iter().map(|err| err.to_string()))
            .collect();
        problems.extend(dim_problems);

        if !problems.is_empty() {
            for p in &problems {
                log::error!("{p}");
            }
            return Err(Error::Discovery { problems });
        }
        unmatched.sort();
        unmatched.dedup();
        Ok(Self {
            task,
            entries,
            unmatched,
        })
    }

    /// Indexes a diagnosis (task 3) dataset: every image needs a table row.
    /// Table rows without an image are logged and ignored.
    pub fn discover_diagnosis(image_dir: &Path, table: &GroundTruthTable) -> Result<Self> {
        let (images, unmatched) = scan_images(image_dir)?;
        let mut problems = Vec::new();
        let mut entries = Vec::with_capacity(images.len());
        for (id, path) in images {
            match table.get(&id) {
                Some(label) => entries.push(IndexEntry {
                    image_id: id,
                    image_path: path,
                    masks: BTreeMap::new(),
                    diagnosis: Some(label),
                }),
                None => problems.push(
                    Error::MissingAnnotation {
                        image_id: id,
                        what: "diagnosis row".into(),
                    }
                    .to_string(),
                ),
            }
        }
        if !problems.is_empty() {
            return Err(Error::Discovery { problems });
        }
        let orphans = table.len() - entries.len();
        if orphans > 0 {
            log::warn!("{orphans} ground-truth row(s) have no image");
        }
        Ok(Self {
            task: Task::Diagnosis,
            entries,
            unmatched,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.image_id.as_str())
    }

    pub fn get(&self, image_id: &str) -> Option<&IndexEntry> {
        self.entries
            .binary_search_by(|e| e.image_id.as_str().cmp(image_id))
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Number of annotation files per role, plus `images` and, for task 3,
    /// one count per diagnosis label.
    pub fn counts_by_role(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        counts.insert("images".to_string(), self.entries.len());
        for e in &self.entries {
            for role in e.masks.keys() {
                *counts.entry(role.to_string()).or_default() += 1;
            }
            if let Some(label) = e.diagnosis {
                *counts.entry(label.code().to_string()).or_default() += 1;
            }
        }
        counts
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn check_entry_dimensions(entry: &IndexEntry) -> Result<()> {
    let (iw, ih) = image_dimensions(&entry.image_path)?;
    for path in entry.masks.values() {
        let (mw, mh) = image_dimensions(path)?;
        if (mw, mh) != (iw, ih) {
            return Err(Error::MaskImageMismatch {
                image_id: entry.image_id.clone(),
                mask: path.clone(),
                mask_width: mw,
                mask_height: mh,
                image_width: iw,
                image_height: ih,
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Splitting

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitStrategy {
    #[default]
    Uniform,
    /// Per-diagnosis quotas (task 3 only).
    Stratified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    /// Sorted.
    pub train_ids: Vec<String>,
    /// Sorted.
    pub test_ids: Vec<String>,
}

impl SplitAssignment {
    /// Writes `train.txt` and `test.txt` (one id per line, LF) into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, ids) in [("train.txt", &self.train_ids), ("test.txt", &self.test_ids)] {
            let path = dir.join(name);
            let mut text = String::with_capacity(ids.len() * 16);
            for id in ids {
                text.push_str(id);
                text.push('\n');
            }
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Deterministic train/test split.
///
/// Uniform: ids are sorted lexicographically, shuffled by Fisher-Yates driven
/// by [`SplitMix64`] seeded with `seed`, and the first `train_count` become the
/// training set. Stratified: the same procedure runs per diagnosis class (in
/// label order, one generator for all classes) with per-class test quotas
/// from largest-remainder apportionment of `test_count`.
pub fn split(
    index: &DatasetIndex,
    train_count: usize,
    test_count: usize,
    seed: u64,
    strategy: SplitStrategy,
) -> Result<SplitAssignment> {
    let available = index.len();
    if train_count + test_count != available {
        return Err(Error::SplitCountMismatch {
            train: train_count,
            test: test_count,
            available,
        });
    }
    let unique: BTreeSet<&str> = index.ids().collect();
    if unique.len() != available {
        let mut seen = BTreeSet::new();
        let dup = index.ids().find(|id| !seen.insert(*id)).unwrap_or_default();
        return Err(Error::DuplicateId(dup.to_string()));
    }
    let mut rng = SplitMix64::new(seed);
    let (mut train_ids, mut test_ids) = match strategy {
        SplitStrategy::Uniform => {
            let mut ids: Vec<String> = unique.into_iter().map(str::to_string).collect();
            rng.shuffle(&mut ids);
            let test = ids.split_off(train_count);
            (ids, test)
        }
        SplitStrategy::Stratified => stratified(index, test_count, &mut rng)?,
    };
    train_ids.sort();
    test_ids.sort();
    Ok(SplitAssignment {
        seed,
        train_ids,
        test_ids,
    })
}

fn stratified(index: &DatasetIndex, test_count: usize, rng: &mut SplitMix64) -> Result<(Vec<String>, Vec<String>)> {
    let mut groups: BTreeMap<DiagnosisLabel, Vec<String>> = BTreeMap::new();
    for e in &index.entries {
        let label = e
            .diagnosis
            .ok_or_else(|| Error::InvalidParameter(format!("stratified split needs a diagnosis for {}", e.image_id)))?;
        groups.entry(label).or_default().push(e.image_id.clone());
    }
    let total = index.len().max(1);
    let exact: Vec<f64> = groups
        .values()
        .map(|g| test_count as f64 * g.len() as f64 / total as f64)
        .collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    // stable sort keeps label order on equal remainders
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let mut rest = test_count - quotas.iter().sum::<usize>();
    for i in order {
        if rest == 0 {
            break;
        }
        quotas[i] += 1;
        rest -= 1;
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (mut ids, quota) in groups.into_values().zip(quotas) {
        ids.sort();
        rng.shuffle(&mut ids);
        test.extend(ids.drain(..quota));
        train.extend(ids);
    }
    Ok((train, test))
}
