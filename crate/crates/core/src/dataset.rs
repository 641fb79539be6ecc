//! Batch generation over a class-structured corpus.
//!
//! Input is `root/<class>/<image>.{jpg,jpeg,png}`. For every image and mode
//! one fit runs to the largest level; each level is written as
//! `output/<mode>/<level>/<class>/<stem>.{svg,json,png}` and the image gets
//! one line in `output/manifest.jsonl`. Lines are appended only after all of
//! an image's files are synced, so an interrupted run can be resumed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emit::{emit_svg, render, RenderScale};
use crate::error::{Error, Result};
use crate::fitter::{fit, FitConfig};
use crate::geometry::Mode;
use crate::raster::{shannon_entropy, EntropyValue, RasterImage};
use crate::rng::{derive_seed, fnv1a, RandomStream};

pub const MANIFEST_SCHEMA: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.jsonl";

const IMAGE_EXTENSIONS: [&str; 3] = ["jpg", "jpeg", "png"];

/// How images are divided into named splits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitSpec {
    /// Integer weights, e.g. `8:1:1`.
    Ratios(Vec<u32>),
    /// Explicit `relative_path<TAB>split` lines.
    Predefined(PathBuf),
}

impl SplitSpec {
    pub fn names(parts: usize) -> Vec<String> {
        match parts {
            1 => vec!["train".into()],
            2 => vec!["train".into(), "val".into()],
            3 => vec!["train".into(), "val".into(), "test".into()],
            n => (0..n).map(|i| format!("split{i}")).collect(),
        }
    }
}

impl FromStr for SplitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("file=") {
            return Ok(SplitSpec::Predefined(PathBuf::from(path)));
        }
        let ratios = s
            .split(':')
            .map(|p| p.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Config(format!("bad split '{s}'; expected e.g. 8:1:1, 9:1 or file=PATH")))?;
        if ratios.is_empty() || ratios.iter().all(|&r| r == 0) {
            return Err(Error::Config(format!("split '{s}' has no positive part")));
        }
        Ok(SplitSpec::Ratios(ratios))
    }
}

impl std::fmt::Display for SplitSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplitSpec::Ratios(r) => {
                let parts: Vec<String> = r.iter().map(u32::to_string).collect();
                f.write_str(&parts.join(":"))
            }
            SplitSpec::Predefined(p) => write!(f, "file={}", p.display()),
        }
    }
}

/// One source image found under the input root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ImageRecord {
    /// `class/name.ext`, always with `/`.
    pub rel_path: String,
    pub class: String,
    pub path: PathBuf,
}

/// Lists `root/<class>/<image>` files in sorted order.
pub fn scan_corpus(root: &Path) -> Result<Vec<ImageRecord>> {
    let mut records = Vec::new();
    let mut classes: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    classes.sort();
    for dir in classes {
        let class = dir.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file()
                    && p.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
            })
            .collect();
        files.sort();
        for path in files {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            records.push(ImageRecord { rel_path: format!("{class}/{name}"), class: class.clone(), path });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitPlan {
    /// Relative path → split name.
    pub assignment: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl SplitPlan {
    pub fn split_of(&self, rel_path: &str) -> Option<&str> {
        self.assignment.get(rel_path).map(String::as_str)
    }

    /// `(class, split)` → count, for the given records.
    pub fn counts(&self, images: &[ImageRecord]) -> BTreeMap<(String, String), usize> {
        let mut out = BTreeMap::new();
        for img in images {
            if let Some(split) = self.split_of(&img.rel_path) {
                *out.entry((img.class.clone(), split.to_string())).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Largest-remainder apportionment of `n` items over integer `weights`.
fn apportion(n: usize, weights: &[u32]) -> Vec<usize> {
    let total: u64 = weights.iter().map(|&w| u64::from(w)).sum();
    let mut counts: Vec<usize> = weights.iter().map(|&w| (n as u64 * u64::from(w) / total) as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // Larger fractional part first; earlier split on ties.
    order.sort_by_key(|&i| (std::cmp::Reverse(n as u64 * u64::from(weights[i]) % total), i));
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(n - assigned) {
        counts[i] += 1;
    }
    counts
}

/// Per-class stratified shuffle split.
pub fn plan_splits(images: &[ImageRecord], spec: &SplitSpec, seed: u64) -> Result<SplitPlan> {
    if images.is_empty() {
        return Err(Error::Config("cannot split an empty image list".into()));
    }
    match spec {
        SplitSpec::Predefined(path) => read_predefined(images, path),
        SplitSpec::Ratios(ratios) => {
            let names = SplitSpec::names(ratios.len());
            let mut by_class: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
            for img in images {
                by_class.entry(&img.class).or_default().push(&img.rel_path);
            }
            let mut plan = SplitPlan::default();
            for (class, mut paths) in by_class {
                paths.sort_unstable();
                let parts = ratios.iter().filter(|&&r| r > 0).count();
                if paths.len() < parts {
                    plan.warnings.push(format!(
                        "class '{class}' has {} images for {parts} splits; all assigned to {}",
                        paths.len(),
                        names[0]
                    ));
                    for p in paths {
                        plan.assignment.insert(p.to_string(), names[0].clone());
                    }
                    continue;
                }
                let mut rng = RandomStream::derived(seed, &[fnv1a(class.as_bytes())]);
                for i in (1..paths.len()).rev() {
                    let j = rng.index(i + 1);
                    paths.swap(i, j);
                }
                let mut it = paths.into_iter();
                for (name, count) in names.iter().zip(apportion(it.len(), ratios)) {
                    for p in it.by_ref().take(count) {
                        plan.assignment.insert(p.to_string(), name.clone());
                    }
                }
            }
            Ok(plan)
        }
    }
}

fn read_predefined(images: &[ImageRecord], path: &Path) -> Result<SplitPlan> {
    let text = fs::read_to_string(path)?;
    let mut table = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (rel, split) = line
            .split_once('\t')
            .ok_or_else(|| Error::Config(format!("{}:{}: expected 'path<TAB>split'", path.display(), n + 1)))?;
        table.insert(rel.trim().to_string(), split.trim().to_string());
    }
    let mut plan = SplitPlan::default();
    for img in images {
        let split = table
            .get(&img.rel_path)
            .ok_or_else(|| Error::Config(format!("{} has no entry in {}", img.rel_path, path.display())))?;
        plan.assignment.insert(img.rel_path.clone(), split.clone());
    }
    Ok(plan)
}

/// Linear entropy → shape-count mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetPolicy {
    pub min_shapes: usize,
    pub max_shapes: usize,
    pub low_h: f64,
    pub high_h: f64,
}

impl BudgetPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.min_shapes == 0 || self.min_shapes > self.max_shapes {
            return Err(Error::Config("budget needs 1 <= min_shapes <= max_shapes".into()));
        }
        if self.low_h.partial_cmp(&self.high_h) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Config("budget needs low_h < high_h".into()));
        }
        Ok(())
    }
}

impl FromStr for BudgetPolicy {
    type Err = Error;

    /// `min,max,low_h,high_h`, e.g. `100,1000,3.0,7.0`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad budget policy '{s}'; expected MIN,MAX,LOW_H,HIGH_H"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [min, max, low, high] = parts[..] else { return Err(bad()) };
        let policy = BudgetPolicy {
            min_shapes: min.parse().map_err(|_| bad())?,
            max_shapes: max.parse().map_err(|_| bad())?,
            low_h: low.parse().map_err(|_| bad())?,
            high_h: high.parse().map_err(|_| bad())?,
        };
        policy.validate()?;
        Ok(policy)
    }
}

impl std::fmt::Display for BudgetPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{},{}", self.min_shapes, self.max_shapes, self.low_h, self.high_h)
    }
}

/// Shape count for an image of entropy `h`: clamp to `[low_h, high_h]`,
/// interpolate onto `[min_shapes, max_shapes]`, round half up.
pub fn entropy_budget(h: EntropyValue, policy: &BudgetPolicy) -> usize {
    let t = (h.bits().clamp(policy.low_h, policy.high_h) - policy.low_h) / (policy.high_h - policy.low_h);
    let span = (policy.max_shapes - policy.min_shapes) as f64;
    let n = (policy.min_shapes as f64 + t * span + 0.5).floor() as usize;
    n.clamp(policy.min_shapes, policy.max_shapes)
}

/// Levels for one image: the configured ladder, cut at the budget if any.
pub fn levels_for(configured: &[usize], budget: Option<usize>) -> Vec<usize> {
    match budget {
        None => configured.to_vec(),
        Some(b) => {
            let mut levels: Vec<usize> = configured.iter().copied().filter(|&l| l < b).collect();
            levels.push(b);
            levels
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub input_root: PathBuf,
    pub output_root: PathBuf,
    pub fit: FitConfig,
    pub modes: Vec<Mode>,
    pub split: SplitSpec,
    pub split_seed: u64,
    pub resume: bool,
    /// Opt-in entropy-adaptive shape budget.
    pub budget: Option<BudgetPolicy>,
    /// Images processed concurrently.
    pub workers: usize,
    /// Stop cleanly after this many images complete (for tests and batching).
    pub stop_after: Option<usize>,
}

impl DatasetConfig {
    pub fn new(input_root: impl Into<PathBuf>, output_root: impl Into<PathBuf>) -> Self {
        Self {
            input_root: input_root.into(),
            output_root: output_root.into(),
            fit: FitConfig::default(),
            modes: vec![Mode::AllShapes, Mode::Triangles],
            split: SplitSpec::Ratios(vec![8, 1, 1]),
            split_seed: 0,
            resume: false,
            budget: None,
            workers: 1,
            stop_after: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fit.validate()?;
        if self.modes.is_empty() {
            return Err(Error::Config("at least one mode is required".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if let SplitSpec::Ratios(r) = &self.split {
            if r.is_empty() || r.iter().all(|&x| x == 0) {
                return Err(Error::Config("split ratios must have a positive part".into()));
            }
        }
        if let Some(b) = &self.budget {
            b.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Ok,
    Failed,
}

/// Outputs and metrics for one (mode, level) of one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCell {
    pub mode: Mode,
    pub level: usize,
    pub svg: String,
    pub json: String,
    pub png: String,
    pub rmse: f64,
    pub sse: u64,
    pub svg_bytes: u64,
    pub png_bytes: u64,
    /// Forced (non-improving) steps taken up to this level.
    pub forced_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub schema: u32,
    /// Relative to the input root.
    pub source: String,
    pub class: String,
    pub split: String,
    pub status: EntryStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
    pub source_bytes: u64,
    pub width: u32,
    pub height: u32,
    pub cells: Vec<LevelCell>,
}

impl ManifestEntry {
    pub fn is_ok(&self) -> bool {
        self.status == EntryStatus::Ok
    }

    pub fn cell(&self, mode: Mode, level: usize) -> Option<&LevelCell> {
        self.cells.iter().find(|c| c.mode == mode && c.level == level)
    }

    /// Every file the entry references, relative to the output root.
    pub fn output_files(&self) -> impl Iterator<Item = &str> {
        self.cells.iter().flat_map(|c| [c.svg.as_str(), c.json.as_str(), c.png.as_str()])
    }

    fn is_complete(&self, output_root: &Path) -> bool {
        self.is_ok() && self.output_files().all(|f| output_root.join(f).is_file())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ManifestEntry = serde_json::from_str(line)
                .map_err(|e| Error::Manifest { line: n + 1, reason: e.to_string() })?;
            if entry.schema != MANIFEST_SCHEMA {
                return Err(Error::Manifest { line: n + 1, reason: format!("unsupported schema {}", entry.schema) });
            }
            entries.push(entry);
        }
        Ok(Self { entries })
    }

    /// Loads whatever complete lines an interrupted run left behind.
    fn load_partial(path: &Path) -> Result<Vec<ManifestEntry>> {
        let mut entries = Vec::new();
        for line in BufReader::new(File::open(path)?).lines() {
            match serde_json::from_str::<ManifestEntry>(&line?) {
                Ok(e) if e.schema == MANIFEST_SCHEMA => entries.push(e),
                _ => log::warn!("skipping unreadable manifest line in {}", path.display()),
            }
        }
        Ok(entries)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("manifest entries serialize"));
            out.push('\n');
        }
        out
    }

    /// Atomically replaces `path` with this manifest.
    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("jsonl.tmp");
        let mut f = File::create(&tmp)?;
        f.write_all(self.to_jsonl().as_bytes())?;
        f.sync_all()?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn ok_entries(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(|e| e.is_ok())
    }
}

fn write_synced(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = File::create(path)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    Ok(())
}

fn file_stem(rel_path: &str) -> &str {
    let name = rel_path.rsplit('/').next().unwrap_or(rel_path);
    name.rsplit_once('.').map_or(name, |(stem, _)| stem)
}

/// Seed for one (image, mode) fit; independent of processing order.
pub fn image_seed(base: u64, rel_path: &str, mode: Mode) -> u64 {
    derive_seed(base, &[fnv1a(rel_path.as_bytes()), u64::from(mode.index())])
}

fn process_image(img: &ImageRecord, split: &str, config: &DatasetConfig) -> ManifestEntry {
    let mut entry = ManifestEntry {
        schema: MANIFEST_SCHEMA,
        source: img.rel_path.clone(),
        class: img.class.clone(),
        split: split.to_string(),
        status: EntryStatus::Ok,
        error: None,
        entropy: None,
        source_bytes: fs::metadata(&img.path).map(|m| m.len()).unwrap_or(0),
        width: 0,
        height: 0,
        cells: Vec::new(),
    };
    if let Err(e) = fill_entry(&mut entry, img, config) {
        log::warn!("{}: {e}", img.rel_path);
        entry.status = EntryStatus::Failed;
        entry.error = Some(e.to_string());
        entry.cells.clear();
    }
    entry
}

fn fill_entry(entry: &mut ManifestEntry, img: &ImageRecord, config: &DatasetConfig) -> Result<()> {
    let source = RasterImage::open(&img.path)?;
    entry.width = source.width();
    entry.height = source.height();
    let h = shannon_entropy(&source);
    entry.entropy = Some(h.bits());
    let levels = levels_for(&config.fit.checkpoints, config.budget.map(|b| entropy_budget(h, &b)));
    let stem = file_stem(&img.rel_path);
    for &mode in &config.modes {
        let fit_config = FitConfig {
            mode,
            checkpoints: levels.clone(),
            seed: image_seed(config.fit.seed, &img.rel_path, mode),
            workers: 1,
            ..config.fit.clone()
        };
        let result = fit(&source, &fit_config)?;
        for cp in &result.checkpoints.entries {
            let base = format!("{}/{}/{}/{}", mode.index(), cp.shapes, img.class, stem);
            let doc = result.document_at(cp.shapes);
            let svg = emit_svg(&doc);
            let png = render(&doc, RenderScale::Original).to_png()?;
            let cell = LevelCell {
                mode,
                level: cp.shapes,
                svg: format!("{base}.svg"),
                json: format!("{base}.json"),
                png: format!("{base}.png"),
                rmse: cp.rmse,
                sse: cp.sse,
                svg_bytes: svg.len() as u64,
                png_bytes: png.len() as u64,
                forced_steps: result.trajectory[..cp.shapes].iter().filter(|s| s.forced).count(),
            };
            write_synced(&config.output_root.join(&cell.svg), svg.as_str().as_bytes())?;
            write_synced(&config.output_root.join(&cell.json), doc.to_json().as_bytes())?;
            write_synced(&config.output_root.join(&cell.png), &png)?;
            entry.cells.push(cell);
        }
    }
    Ok(())
}

/// Runs the whole corpus and returns the final, path-sorted manifest.
pub fn build_dataset(config: &DatasetConfig) -> Result<DatasetManifest> {
    config.validate()?;
    let images = scan_corpus(&config.input_root)?;
    let plan = plan_splits(&images, &config.split, config.split_seed)?;
    for w in &plan.warnings {
        log::warn!("{w}");
    }
    fs::create_dir_all(&config.output_root)?;
    let manifest_path = config.output_root.join(MANIFEST_FILE);

    let mut done: BTreeMap<String, ManifestEntry> = BTreeMap::new();
    if manifest_path.exists() {
        if !config.resume {
            return Err(Error::OutputCollision(manifest_path));
        }
        for e in DatasetManifest::load_partial(&manifest_path)? {
            if e.is_complete(&config.output_root) {
                done.insert(e.source.clone(), e);
            }
        }
        // Drop torn or stale lines before appending again.
        DatasetManifest { entries: done.values().cloned().collect() }.write(&manifest_path)?;
    } else if !config.resume {
        for mode in &config.modes {
            let dir = config.output_root.join(mode.index().to_string());
            if dir.exists() {
                return Err(Error::OutputCollision(dir));
            }
        }
    }

    let pending: Vec<&ImageRecord> = images.iter().filter(|i| !done.contains_key(&i.rel_path)).collect();
    log::info!("{} images, {} already complete", images.len(), done.len());
    let writer = Mutex::new(OpenOptions::new().create(true).append(true).open(&manifest_path)?);
    let started = AtomicUsize::new(0);
    let completed = Mutex::new(Vec::new());

    let run = |img: &&ImageRecord| -> Result<()> {
        if config.stop_after.is_some_and(|n| started.fetch_add(1, Ordering::SeqCst) >= n) {
            return Ok(());
        }
        let split = plan.split_of(&img.rel_path).unwrap_or("train");
        let entry = process_image(img, split, config);
        let mut line = serde_json::to_string(&entry)?;
        line.push('\n');
        {
            let mut f = writer.lock().expect("manifest writer poisoned");
            f.write_all(line.as_bytes())?;
            f.sync_data()?;
        }
        log::info!("{} [{}]", entry.source, if entry.is_ok() { "ok" } else { "failed" });
        completed.lock().expect("poisoned").push(entry);
        Ok(())
    };
    if config.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| pending.par_iter().try_for_each(run))?;
    } else {
        pending.iter().try_for_each(run)?;
    }
    drop(writer);

    let fresh = completed.into_inner().expect("poisoned");
    let finished_now = fresh.len();
    for e in fresh {
        done.insert(e.source.clone(), e);
    }
    let manifest = DatasetManifest { entries: done.into_values().collect() };
    manifest.write(&manifest_path)?;
    if finished_now < pending.len() {
        return Err(Error::Interrupted(manifest.entries.len()));
    }
    Ok(manifest)
}

/// Checks that every ok entry's files exist and SVG sizes match the disk.
pub fn verify_manifest(manifest: &DatasetManifest, output_root: &Path) -> Vec<String> {
    let mut problems = Vec::new();
    for e in manifest.ok_entries() {
        for c in &e.cells {
            for f in [&c.svg, &c.json, &c.png] {
                if !output_root.join(f).is_file() {
                    problems.push(format!("{}: missing {f}", e.source));
                }
            }
            match fs::metadata(output_root.join(&c.svg)) {
                Ok(m) if m.len() == c.svg_bytes => {}
                Ok(m) => problems.push(format!("{}: {} is {} bytes, manifest says {}", e.source, c.svg, m.len(), c.svg_bytes)),
                Err(_) => {}
            }
        }
    }
    problems
}

/// Distinct `(mode, level)` pairs present in a manifest.
pub fn manifest_levels(manifest: &DatasetManifest) -> BTreeSet<(Mode, usize)> {
    manifest.ok_entries().flat_map(|e| e.cells.iter().map(|c| (c.mode, c.level))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(classes: usize, per_class: usize) -> Vec<ImageRecord> {
        (0..classes)
            .flat_map(|c| {
                (0..per_class).map(move |i| ImageRecord {
                    rel_path: format!("class{c:02}/img{i:03}.png"),
                    class: format!("class{c:02}"),
                    path: PathBuf::new(),
                })
            })
            .collect()
    }

    #[test]
    fn split_spec_parsing() {
        assert_eq!("8:1:1".parse::<SplitSpec>().unwrap(), SplitSpec::Ratios(vec![8, 1, 1]));
        assert_eq!("9:1".parse::<SplitSpec>().unwrap(), SplitSpec::Ratios(vec![9, 1]));
        assert_eq!("file=a.tsv".parse::<SplitSpec>().unwrap(), SplitSpec::Predefined("a.tsv".into()));
        assert!("8:x".parse::<SplitSpec>().is_err());
        assert!("0:0".parse::<SplitSpec>().is_err());
        assert_eq!(SplitSpec::Ratios(vec![8, 1, 1]).to_string(), "8:1:1");
    }

    #[test]
    fn eight_one_one_per_class() {
        let imgs = records(3, 100);
        let plan = plan_splits(&imgs, &SplitSpec::Ratios(vec![8, 1, 1]), 4).unwrap();
        for c in 0..3 {
            let class = format!("class{c:02}");
            let counts = plan.counts(&imgs);
            assert_eq!(counts[&(class.clone(), "train".into())], 80);
            assert_eq!(counts[&(class.clone(), "val".into())], 10);
            assert_eq!(counts[&(class, "test".into())], 10);
        }
    }

    #[test]
    fn nine_one_on_ten_images() {
        let imgs = records(1, 10);
        let plan = plan_splits(&imgs, &SplitSpec::Ratios(vec![9, 1]), 0).unwrap();
        let counts = plan.counts(&imgs);
        assert_eq!(counts[&("class00".into(), "train".into())], 9);
        assert_eq!(counts[&("class00".into(), "val".into())], 1);
    }

    #[test]
    fn splits_are_seeded() {
        let imgs = records(2, 30);
        let spec = SplitSpec::Ratios(vec![8, 1, 1]);
        assert_eq!(plan_splits(&imgs, &spec, 9).unwrap(), plan_splits(&imgs, &spec, 9).unwrap());
        assert_ne!(plan_splits(&imgs, &spec, 9).unwrap(), plan_splits(&imgs, &spec, 10).unwrap());
    }

    #[test]
    fn tiny_class_goes_to_train_with_warning() {
        let imgs = records(1, 2);
        let plan = plan_splits(&imgs, &SplitSpec::Ratios(vec![8, 1, 1]), 0).unwrap();
        assert_eq!(plan.warnings.len(), 1);
        assert!(plan.assignment.values().all(|s| s == "train"));
    }

    #[test]
    fn empty_list_is_an_error() {
        assert!(plan_splits(&[], &SplitSpec::Ratios(vec![9, 1]), 0).is_err());
    }

    #[test]
    fn apportion_rounds_by_largest_remainder() {
        assert_eq!(apportion(100, &[8, 1, 1]), vec![80, 10, 10]);
        assert_eq!(apportion(7, &[8, 1, 1]), vec![5, 1, 1]);
        assert_eq!(apportion(13, &[9, 1]), vec![12, 1]);
        for n in 0..200 {
            assert_eq!(apportion(n, &[8, 1, 1]).iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn budget_clamps_and_interpolates() {
        let p = BudgetPolicy { min_shapes: 100, max_shapes: 1000, low_h: 3.0, high_h: 7.0 };
        assert_eq!(entropy_budget(EntropyValue(1.0), &p), 100);
        assert_eq!(entropy_budget(EntropyValue(3.0), &p), 100);
        assert_eq!(entropy_budget(EntropyValue(7.5), &p), 1000);
        assert_eq!(entropy_budget(EntropyValue(5.0), &p), 550);
        assert_eq!("100,1000,3,7".parse::<BudgetPolicy>().unwrap(), p);
        assert!("100,10,3,7".parse::<BudgetPolicy>().is_err());
        assert!("1,10,7,3".parse::<BudgetPolicy>().is_err());
    }

    #[test]
    fn levels_cut_at_budget() {
        assert_eq!(levels_for(&[10, 30, 50, 100], None), vec![10, 30, 50, 100]);
        assert_eq!(levels_for(&[10, 30, 50, 100], Some(42)), vec![10, 30, 42]);
        assert_eq!(levels_for(&[10, 30], Some(5)), vec![5]);
    }

    #[test]
    fn stem_strips_extension() {
        assert_eq!(file_stem("cats/a.b.png"), "a.b");
        assert_eq!(file_stem("cats/noext"), "noext");
    }

    #[test]
    fn manifest_rejects_bad_lines() {
        assert!(matches!(DatasetManifest::parse("{nope}\n"), Err(Error::Manifest { line: 1, .. })));
        assert!(DatasetManifest::parse("\n\n").unwrap().entries.is_empty());
    }
}
