//! Corpus statistics over a dataset manifest: entropy-sorted groups with
//! per-level fidelity, and per-(mode, level) size/fidelity summaries.
//!
//! Fidelity is measured as RMSE against the working-resolution target.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetManifest, ManifestEntry};
use crate::error::{Error, Result};
use crate::geometry::Mode;
use crate::rng::RandomStream;

pub const DEFAULT_GROUPS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupLevel {
    pub mode: Mode,
    pub level: usize,
    pub count: usize,
    pub mean_rmse: f64,
    pub mean_svg_bytes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyGroup {
    pub index: usize,
    pub count: usize,
    pub mean_entropy: f64,
    pub min_entropy: f64,
    pub max_entropy: f64,
    pub levels: Vec<GroupLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCorrelation {
    pub mode: Mode,
    pub level: usize,
    /// Spearman rank correlation of group index vs group mean RMSE;
    /// `None` when either side is constant.
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyGroupReport {
    pub seed: u64,
    pub sample_size: usize,
    pub groups: Vec<EntropyGroup>,
    pub correlations: Vec<LevelCorrelation>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 { 0.0 } else { sum / n as f64 }
}

/// Average ranks (1-based), ties sharing the mean rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, my) = (mean(rx.iter().copied()), mean(ry.iter().copied()));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Sizes of `groups` near-equal consecutive parts of `n` items.
pub fn group_sizes(n: usize, groups: usize) -> Vec<usize> {
    (0..groups).map(|g| n / groups + usize::from(g < n % groups)).collect()
}

/// Samples `sample_size` entries (seeded), sorts them by entropy (ties by
/// source path) and aggregates `groups` near-equal groups.
pub fn entropy_group_analysis(
    manifest: &DatasetManifest,
    sample_size: usize,
    groups: usize,
    seed: u64,
) -> Result<EntropyGroupReport> {
    if groups == 0 {
        return Err(Error::Config("group count must be positive".into()));
    }
    let mut eligible: Vec<&ManifestEntry> =
        manifest.ok_entries().filter(|e| e.entropy.is_some() && !e.cells.is_empty()).collect();
    eligible.sort_by(|a, b| a.source.cmp(&b.source));
    let take = sample_size.min(eligible.len());
    if take < groups {
        return Err(Error::InsufficientEntries { needed: groups, got: take });
    }
    let mut rng = RandomStream::new(seed);
    for i in 0..take {
        let j = i + rng.index(eligible.len() - i);
        eligible.swap(i, j);
    }
    let mut sample: Vec<&ManifestEntry> = eligible[..take].to_vec();
    sample.sort_by(|a, b| {
        let (ea, eb) = (a.entropy.unwrap_or(0.0), b.entropy.unwrap_or(0.0));
        ea.total_cmp(&eb).then_with(|| a.source.cmp(&b.source))
    });

    let mut out = Vec::with_capacity(groups);
    let mut start = 0;
    for (index, size) in group_sizes(take, groups).into_iter().enumerate() {
        let members = &sample[start..start + size];
        start += size;
        let entropies: Vec<f64> = members.iter().filter_map(|e| e.entropy).collect();
        let mut cells: BTreeMap<(Mode, usize), Vec<(f64, u64)>> = BTreeMap::new();
        for e in members {
            for c in &e.cells {
                cells.entry((c.mode, c.level)).or_default().push((c.rmse, c.svg_bytes));
            }
        }
        out.push(EntropyGroup {
            index,
            count: size,
            mean_entropy: mean(entropies.iter().copied()),
            min_entropy: entropies.iter().copied().fold(f64::INFINITY, f64::min),
            max_entropy: entropies.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            levels: cells
                .into_iter()
                .map(|((mode, level), v)| GroupLevel {
                    mode,
                    level,
                    count: v.len(),
                    mean_rmse: mean(v.iter().map(|x| x.0)),
                    mean_svg_bytes: mean(v.iter().map(|x| x.1 as f64)),
                })
                .collect(),
        });
    }

    let mut keys: Vec<(Mode, usize)> =
        out.iter().flat_map(|g| g.levels.iter().map(|l| (l.mode, l.level))).collect();
    keys.sort();
    keys.dedup();
    let correlations = keys
        .into_iter()
        .map(|(mode, level)| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = out
                .iter()
                .filter_map(|g| {
                    g.levels.iter().find(|l| l.mode == mode && l.level == level).map(|l| (g.index as f64, l.mean_rmse))
                })
                .unzip();
            LevelCorrelation { mode, level, spearman: spearman(&xs, &ys) }
        })
        .collect();

    Ok(EntropyGroupReport { seed, sample_size: take, groups: out, correlations })
}

impl EntropyGroupReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn level_keys(&self) -> Vec<(Mode, usize)> {
        let mut keys: Vec<(Mode, usize)> =
            self.groups.iter().flat_map(|g| g.levels.iter().map(|l| (l.mode, l.level))).collect();
        keys.sort();
        keys.dedup();
        keys
    }

    /// Aligned plain-text table, one row per group.
    pub fn to_table(&self) -> String {
        let keys = self.level_keys();
        let mut out = String::new();
        let _ = write!(out, "{:>5} {:>5} {:>9}", "group", "n", "entropy");
        for (m, l) in &keys {
            let _ = write!(out, " {:>12}", format!("rmse m{m}@{l}"));
        }
        out.push('\n');
        for g in &self.groups {
            let _ = write!(out, "{:>5} {:>5} {:>9.4}", g.index, g.count, g.mean_entropy);
            for (m, l) in &keys {
                match g.levels.iter().find(|x| x.mode == *m && x.level == *l) {
                    Some(x) => {
                        let _ = write!(out, " {:>12.4}", x.mean_rmse);
                    }
                    None => {
                        let _ = write!(out, " {:>12}", "-");
                    }
                }
            }
            out.push('\n');
        }
        for c in &self.correlations {
            let rho = c.spearman.map_or("n/a".to_string(), |r| format!("{r:.4}"));
            let _ = writeln!(out, "spearman(group, rmse) mode {} level {}: {rho}", c.mode, c.level);
        }
        out
    }

    /// Long-format CSV: one row per (group, mode, level).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,count,mean_entropy,mode,level,mean_rmse,mean_svg_bytes\n");
        for g in &self.groups {
            for l in &g.levels {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    g.index, g.count, g.mean_entropy, l.mode, l.level, l.mean_rmse, l.mean_svg_bytes
                );
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub mode: Mode,
    pub level: usize,
    pub count: usize,
    pub mean_rmse: f64,
    pub mean_svg_bytes: f64,
    pub mean_png_bytes: f64,
    pub mean_source_bytes: f64,
    /// Mean over images of `svg_bytes / source_bytes`.
    pub mean_svg_to_source: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRatio {
    pub level: usize,
    /// Mean triangle-only SVG bytes over mean all-shapes SVG bytes.
    pub triangles_over_all_svg_bytes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub rows: Vec<LevelRow>,
    pub mode_ratios: Vec<ModeRatio>,
}

/// rmse, svg bytes, png bytes, source bytes.
type CellSample = (f64, u64, u64, u64);

pub fn level_summary(manifest: &DatasetManifest) -> LevelSummary {
    let mut acc: BTreeMap<(Mode, usize), Vec<CellSample>> = BTreeMap::new();
    for e in manifest.ok_entries() {
        for c in &e.cells {
            acc.entry((c.mode, c.level)).or_default().push((c.rmse, c.svg_bytes, c.png_bytes, e.source_bytes));
        }
    }
    let rows: Vec<LevelRow> = acc
        .into_iter()
        .map(|((mode, level), v)| LevelRow {
            mode,
            level,
            count: v.len(),
            mean_rmse: mean(v.iter().map(|x| x.0)),
            mean_svg_bytes: mean(v.iter().map(|x| x.1 as f64)),
            mean_png_bytes: mean(v.iter().map(|x| x.2 as f64)),
            mean_source_bytes: mean(v.iter().map(|x| x.3 as f64)),
            mean_svg_to_source: mean(v.iter().filter(|x| x.3 > 0).map(|x| x.1 as f64 / x.3 as f64)),
        })
        .collect();
    let mode_ratios = rows
        .iter()
        .filter(|r| r.mode == Mode::AllShapes)
        .filter_map(|all| {
            rows.iter()
                .find(|t| t.mode == Mode::Triangles && t.level == all.level)
                .filter(|_| all.mean_svg_bytes > 0.0)
                .map(|t| ModeRatio { level: all.level, triangles_over_all_svg_bytes: t.mean_svg_bytes / all.mean_svg_bytes })
        })
        .collect();
    LevelSummary { rows, mode_ratios }
}

impl LevelSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>4} {:>6} {:>5} {:>10} {:>12} {:>12} {:>12} {:>10}",
            "mode", "level", "n", "rmse", "svg_bytes", "png_bytes", "src_bytes", "svg/src"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>4} {:>6} {:>5} {:>10.4} {:>12.1} {:>12.1} {:>12.1} {:>10.4}",
                r.mode, r.level, r.count, r.mean_rmse, r.mean_svg_bytes, r.mean_png_bytes, r.mean_source_bytes, r.mean_svg_to_source
            );
        }
        for m in &self.mode_ratios {
            let _ = writeln!(out, "level {}: triangle-only / all-shapes svg bytes = {:.4}", m.level, m.triangles_over_all_svg_bytes);
        }
        out
    }
}
