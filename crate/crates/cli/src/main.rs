//! `shapefit` command-line tool.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod settings;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shapefit::analyze::{entropy_group_analysis, level_summary, DEFAULT_GROUPS};
use shapefit::dataset::{build_dataset, BudgetPolicy, DatasetConfig, DatasetManifest, SplitSpec};
use shapefit::{
    emit_svg, fit, parse_svg, render, size_report, Error, FitConfig, Mode, RasterImage, RenderScale, ShapeListDocument,
};

use settings::Settings;

/// Environment variable holding the default worker count.
const WORKERS_ENV: &str = "SHAPEFIT_WORKERS";
const RESOLVED_CONFIG: &str = "config.txt";

#[derive(Parser, Debug)]
#[command(name = "shapefit", version, about = "Primitive-shape abstraction of raster images")]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Only errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one image and write SVG, JSON and PNG per level.
    Fit(FitArgs),
    /// Fit every image of a class-structured directory.
    Dataset(DatasetArgs),
    /// Entropy-group report and per-level summary of a manifest.
    Analyze(AnalyzeArgs),
    /// Rasterize a shape-list document (JSON or SVG) to PNG.
    Render(RenderArgs),
    /// Byte sizes of a shape-list document.
    Size(SizeArgs),
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Checkpoint shape counts, e.g. 10,30,50,100,500,1000.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Shape opacity, 1-255.
    #[arg(long)]
    alpha: Option<u8>,
    /// Random candidates per shape.
    #[arg(long)]
    probes: Option<usize>,
    /// Best candidates refined by hill climbing.
    #[arg(long)]
    climbers: Option<usize>,
    /// Failed mutations before a climb stops.
    #[arg(long)]
    max_age: Option<usize>,
    /// Longest side of the fitting resolution.
    #[arg(long)]
    working_size: Option<u32>,
    /// Re-proposals before a non-improving shape is forced in.
    #[arg(long)]
    retries: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel workers [default: $SHAPEFIT_WORKERS or 1].
    #[arg(long)]
    workers: Option<usize>,
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    image: PathBuf,
    /// Output directory [default: <image stem>_shapes].
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// 0 = all shape kinds, 1 = triangles only.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    mode: Option<u8>,
    /// Also write the per-step trajectory to trace.jsonl.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args, Debug)]
struct DatasetArgs {
    /// Root with one sub-directory per class.
    input: PathBuf,
    /// Output root [default: <input name>_shapes].
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// 8:1:1, 9:1, ... or file=PATH with `path<TAB>split` lines.
    #[arg(long)]
    split: Option<SplitSpec>,
    #[arg(long)]
    split_seed: Option<u64>,
    /// Modes to generate, e.g. 0,1.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(0..=1))]
    modes: Option<Vec<u8>>,
    /// Continue an interrupted run.
    #[arg(long)]
    resume: bool,
    /// Entropy-adaptive budget MIN,MAX,LOW_H,HIGH_H.
    #[arg(long)]
    budget_policy: Option<BudgetPolicy>,
    /// Stop after this many images (batching).
    #[arg(long, hide = true)]
    stop_after: Option<usize>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    manifest: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GROUPS)]
    groups: usize,
    /// Entries sampled before grouping [default: all].
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the group report as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write report.json, summary.json, groups.csv and config.txt here.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scale {
    Working,
    Original,
}

#[derive(Args, Debug)]
struct RenderArgs {
    document: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Scale::Original)]
    scale: Scale,
}

#[derive(Args, Debug)]
struct SizeArgs {
    document: PathBuf,
    #[arg(long)]
    json: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn default_workers() -> Result<Option<usize>, Failure> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| usage(format!("{WORKERS_ENV}='{v}' is not a number"))),
        Err(_) => Ok(None),
    }
}

fn apply_search_flags(s: &SearchArgs, fit: &mut FitConfig) {
    if let Some(v) = &s.levels {
        fit.checkpoints = v.clone();
    }
    fit.alpha = s.alpha.unwrap_or(fit.alpha);
    fit.probes = s.probes.unwrap_or(fit.probes);
    fit.climbers = s.climbers.unwrap_or(fit.climbers);
    fit.max_age = s.max_age.unwrap_or(fit.max_age);
    fit.working_size = s.working_size.unwrap_or(fit.working_size);
    fit.retries = s.retries.unwrap_or(fit.retries);
    fit.seed = s.seed.unwrap_or(fit.seed);
}

fn default_out(input: &Path) -> PathBuf {
    let stem = input.file_stem().or_else(|| input.file_name()).map_or("out".into(), |s| s.to_string_lossy());
    PathBuf::from(format!("{stem}_shapes"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn resolve_fit(args: &FitArgs) -> Result<FitConfig, Failure> {
    let mut fit = FitConfig::default();
    if let Some(w) = default_workers()? {
        fit.workers = w;
    }
    if let Some(path) = &args.search.config {
        settings::apply_fit(&Settings::load(path, settings::FIT_KEYS).map_err(usage)?, &mut fit).map_err(usage)?;
    }
    apply_search_flags(&args.search, &mut fit);
    if let Some(m) = args.mode {
        fit.mode = Mode::from_index(m).expect("range checked by clap");
    }
    fit.workers = args.search.workers.unwrap_or(fit.workers);
    fit.validate().map_err(usage)?;
    Ok(fit)
}

fn cmd_fit(args: &FitArgs) -> Result<(), Failure> {
    let config = resolve_fit(args)?;
    let out = args.out.clone().unwrap_or_else(|| default_out(&args.image));
    let image = RasterImage::open(&args.image)?;
    fs::create_dir_all(&out)?;
    write_file(&out.join(RESOLVED_CONFIG), settings::dump_fit(&config).as_bytes())?;
    log::info!("fitting {} ({}x{}) to {:?}", args.image.display(), image.width(), image.height(), config.checkpoints);
    let result = fit(&image, &config)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "level\trmse\tsvg_bytes\tforced_steps")?;
    for cp in &result.checkpoints.entries {
        let doc = result.document_at(cp.shapes);
        write_file(&out.join(format!("{}.svg", cp.shapes)), emit_svg(&doc).as_str().as_bytes())?;
        write_file(&out.join(format!("{}.json", cp.shapes)), doc.to_json().as_bytes())?;
        render(&doc, RenderScale::Original).save_png(out.join(format!("{}.png", cp.shapes)))?;
        let forced = result.trajectory[..cp.shapes].iter().filter(|s| s.forced).count();
        writeln!(stdout, "{}\t{:.4}\t{}\t{forced}", cp.shapes, cp.rmse, cp.svg_bytes)?;
    }
    if args.trace {
        let mut buf = Vec::new();
        result.write_trace(&mut buf)?;
        write_file(&out.join("trace.jsonl"), &buf)?;
    }
    Ok(())
}

fn resolve_dataset(args: &DatasetArgs) -> Result<DatasetConfig, Failure> {
    let out = args.out.clone().unwrap_or_else(|| default_out(&args.input));
    let mut cfg = DatasetConfig::new(&args.input, out);
    if let Some(w) = default_workers()? {
        cfg.workers = w;
    }
    if let Some(path) = &args.search.config {
        settings::apply_dataset(&Settings::load(path, settings::DATASET_KEYS).map_err(usage)?, &mut cfg)
            .map_err(usage)?;
    }
    apply_search_flags(&args.search, &mut cfg.fit);
    cfg.workers = args.search.workers.unwrap_or(cfg.workers);
    if let Some(split) = &args.split {
        cfg.split = split.clone();
    }
    cfg.split_seed = args.split_seed.unwrap_or(cfg.split_seed);
    if let Some(modes) = &args.modes {
        cfg.modes = modes.iter().map(|&m| Mode::from_index(m).expect("range checked by clap")).collect();
    }
    cfg.resume |= args.resume;
    if args.budget_policy.is_some() {
        cfg.budget = args.budget_policy;
    }
    cfg.stop_after = args.stop_after;
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn cmd_dataset(args: &DatasetArgs) -> Result<(), Failure> {
    let cfg = resolve_dataset(args)?;
    let dump = settings::dump_dataset(&cfg);
    let manifest = match build_dataset(&cfg) {
        Ok(m) => m,
        Err(Error::Interrupted(n)) => {
            write_file(&cfg.output_root.join(RESOLVED_CONFIG), dump.as_bytes())?;
            return Err(Failure::Runtime(format!(
                "interrupted; {n} entries kept in the manifest, rerun with --resume to continue"
            )));
        }
        Err(e) => return Err(e.into()),
    };
    write_file(&cfg.output_root.join(RESOLVED_CONFIG), dump.as_bytes())?;
    let ok = manifest.ok_entries().count();
    println!("entries\t{}", manifest.entries.len());
    println!("ok\t{ok}");
    println!("failed\t{}", manifest.entries.len() - ok);
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    let sample = args.sample.unwrap_or(manifest.entries.len());
    let report = entropy_group_analysis(&manifest, sample, args.groups, args.seed)?;
    let summary = level_summary(&manifest);
    match args.format {
        Format::Table => print!("{}\n{}", report.to_table(), summary.to_table()),
        Format::Json => println!("{}", serde_json::json!({ "groups": report, "summary": summary })),
    }
    if let Some(path) = &args.csv {
        write_file(path, report.to_csv().as_bytes())?;
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        write_file(&dir.join("report.json"), report.to_json().as_bytes())?;
        write_file(&dir.join("summary.json"), summary.to_json().as_bytes())?;
        write_file(&dir.join("groups.csv"), report.to_csv().as_bytes())?;
        let config = format!(
            "# shapefit analyze: resolved configuration\nmanifest = {}\ngroups = {}\nsample = {}\nseed = {}\n",
            args.manifest.display(),
            args.groups,
            report.sample_size,
            args.seed
        );
        write_file(&dir.join(RESOLVED_CONFIG), config.as_bytes())?;
    }
    Ok(())
}

/// Reads a shape-list document from JSON or from SVG written by `emit_svg`.
fn load_document(path: &Path) -> Result<ShapeListDocument, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    let doc = if text.trim_start().starts_with('<') { parse_svg(&text) } else { ShapeListDocument::from_json(&text) };
    doc.map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn cmd_render(args: &RenderArgs) -> Result<(), Failure> {
    let doc = load_document(&args.document)?;
    let scale = match args.scale {
        Scale::Working => RenderScale::Working,
        Scale::Original => RenderScale::Original,
    };
    render(&doc, scale).save_png(&args.out)?;
    Ok(())
}

fn cmd_size(args: &SizeArgs) -> Result<(), Failure> {
    let doc = load_document(&args.document)?;
    let report = size_report(&doc)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?);
        return Ok(());
    }
    println!("svg_bytes\t{}", report.svg_bytes);
    println!("minified_bytes\t{}", report.minified_bytes);
    println!("png_bytes\t{}", report.png_bytes);
    for (kind, bytes) in &report.per_kind_mean_element_bytes {
        println!("element_bytes.{kind}\t{bytes:.1}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_env("SHAPEFIT_LOG").init();

    let outcome = match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Dataset(a) => cmd_dataset(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Render(a) => cmd_render(a),
        Command::Size(a) => cmd_size(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("shapefit: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("shapefit: {msg}");
            ExitCode::from(1)
        }
    }
}
