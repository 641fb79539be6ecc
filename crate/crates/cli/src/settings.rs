//! Plain-text `key = value` configuration.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Keys are the long flag names with `-` replaced by `_`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use shapefit::dataset::{BudgetPolicy, DatasetConfig, SplitSpec};
use shapefit::{FitConfig, Mode};

pub const FIT_KEYS: &[&str] =
    &["levels", "mode", "alpha", "probes", "climbers", "max_age", "working_size", "seed", "workers", "retries"];

pub const DATASET_KEYS: &[&str] = &[
    "levels",
    "modes",
    "alpha",
    "probes",
    "climbers",
    "max_age",
    "working_size",
    "seed",
    "workers",
    "retries",
    "split",
    "split_seed",
    "budget_policy",
    "resume",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected 'key = value'", n + 1))?;
            let key = k.trim().replace('-', "_");
            if !allowed.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key '{key}'", n + 1));
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path, allowed: &[&str]) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text, allowed).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("invalid value '{v}' for {key}"))
}

pub fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, String> {
    v.split(',').map(|p| parse(key, p.trim())).collect()
}

pub fn parse_mode(key: &str, v: &str) -> Result<Mode, String> {
    Mode::from_index(parse(key, v)?).ok_or_else(|| format!("invalid value '{v}' for {key}; expected 0 or 1"))
}

/// Applies the search keys shared by `fit` and `dataset`.
pub fn apply_search(s: &Settings, fit: &mut FitConfig) -> Result<(), String> {
    if let Some(v) = s.get("levels") {
        fit.checkpoints = parse_list("levels", v)?;
    }
    if let Some(v) = s.get("alpha") {
        fit.alpha = parse("alpha", v)?;
    }
    if let Some(v) = s.get("probes") {
        fit.probes = parse("probes", v)?;
    }
    if let Some(v) = s.get("climbers") {
        fit.climbers = parse("climbers", v)?;
    }
    if let Some(v) = s.get("max_age") {
        fit.max_age = parse("max_age", v)?;
    }
    if let Some(v) = s.get("working_size") {
        fit.working_size = parse("working_size", v)?;
    }
    if let Some(v) = s.get("seed") {
        fit.seed = parse("seed", v)?;
    }
    if let Some(v) = s.get("retries") {
        fit.retries = parse("retries", v)?;
    }
    Ok(())
}

pub fn apply_fit(s: &Settings, fit: &mut FitConfig) -> Result<(), String> {
    apply_search(s, fit)?;
    if let Some(v) = s.get("mode") {
        fit.mode = parse_mode("mode", v)?;
    }
    if let Some(v) = s.get("workers") {
        fit.workers = parse("workers", v)?;
    }
    Ok(())
}

pub fn apply_dataset(s: &Settings, cfg: &mut DatasetConfig) -> Result<(), String> {
    apply_search(s, &mut cfg.fit)?;
    if let Some(v) = s.get("modes") {
        cfg.modes = v.split(',').map(|m| parse_mode("modes", m.trim())).collect::<Result<_, _>>()?;
    }
    if let Some(v) = s.get("workers") {
        cfg.workers = parse("workers", v)?;
    }
    if let Some(v) = s.get("split") {
        cfg.split = v.parse::<SplitSpec>().map_err(|e| e.to_string())?;
    }
    if let Some(v) = s.get("split_seed") {
        cfg.split_seed = parse("split_seed", v)?;
    }
    if let Some(v) = s.get("budget_policy") {
        cfg.budget = if v == "none" { None } else { Some(v.parse::<BudgetPolicy>().map_err(|e| e.to_string())?) };
    }
    if let Some(v) = s.get("resume") {
        cfg.resume = parse("resume", v)?;
    }
    Ok(())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn search_lines(fit: &FitConfig, out: &mut String) {
    let _ = writeln!(out, "levels = {}", join(&fit.checkpoints));
    let _ = writeln!(out, "alpha = {}", fit.alpha);
    let _ = writeln!(out, "probes = {}", fit.probes);
    let _ = writeln!(out, "climbers = {}", fit.climbers);
    let _ = writeln!(out, "max_age = {}", fit.max_age);
    let _ = writeln!(out, "working_size = {}", fit.working_size);
    let _ = writeln!(out, "seed = {}", fit.seed);
    let _ = writeln!(out, "retries = {}", fit.retries);
}

/// Fully resolved `fit` settings, loadable with `--config`.
pub fn dump_fit(fit: &FitConfig) -> String {
    let mut out = String::from("# shapefit fit: resolved configuration\n");
    let _ = writeln!(out, "mode = {}", fit.mode.index());
    search_lines(fit, &mut out);
    let _ = writeln!(out, "workers = {}", fit.workers);
    out
}

pub fn dump_dataset(cfg: &DatasetConfig) -> String {
    let mut out = String::from("# shapefit dataset: resolved configuration\n");
    let modes: Vec<u8> = cfg.modes.iter().map(|m| m.index()).collect();
    let _ = writeln!(out, "modes = {}", join(&modes));
    search_lines(&cfg.fit, &mut out);
    let _ = writeln!(out, "workers = {}", cfg.workers);
    let _ = writeln!(out, "split = {}", cfg.split);
    let _ = writeln!(out, "split_seed = {}", cfg.split_seed);
    let _ = writeln!(out, "budget_policy = {}", cfg.budget.map_or("none".to_string(), |b| b.to_string()));
    let _ = writeln!(out, "resume = {}", cfg.resume);
    out
}
