//! Hill-climb shape fitting.
//!
//! Each step draws `probes` random shapes, climbs the `climbers` best of
//! them by repeated single-site mutation, and adds the overall winner to the
//! canvas if it lowers the error. Every probe and every climber draws from
//! its own [`RandomStream`] keyed by `(seed, shape index, attempt, lane)`,
//! and candidates are merged by `(delta, empty, lane)`. The result therefore
//! does not depend on the number of worker threads.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emit::{emit_svg, ShapeListDocument};
use crate::error::{Error, Result};
use crate::geometry::{Mode, Shape, SpanList};
use crate::raster::{self, background_color, full_sse, optimal_color_unchecked, sse_delta, Color, RasterImage};
use crate::rng::RandomStream;

/// The abstraction ladder used for the largest dataset.
pub const DEFAULT_LEVELS: [usize; 6] = [10, 30, 50, 100, 500, 1000];

const LANE_PROBE: u64 = 0;
const LANE_CLIMB: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub mode: Mode,
    /// Strictly increasing shape counts; the last one is the run length.
    pub checkpoints: Vec<usize>,
    pub alpha: u8,
    pub probes: usize,
    pub climbers: usize,
    pub max_age: usize,
    pub working_size: u32,
    pub seed: u64,
    pub workers: usize,
    /// Re-proposals before a non-improving shape is forced in.
    pub retries: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            mode: Mode::AllShapes,
            checkpoints: DEFAULT_LEVELS.to_vec(),
            alpha: raster::DEFAULT_ALPHA,
            probes: 1000,
            climbers: 4,
            max_age: 100,
            working_size: 256,
            seed: 0,
            workers: 1,
            retries: 10,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.checkpoints.is_empty() {
            return fail("at least one checkpoint level is required");
        }
        if self.checkpoints[0] == 0 || self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return fail("checkpoint levels must be positive and strictly increasing");
        }
        if self.climbers == 0 || self.probes < self.climbers {
            return fail("need probes >= climbers >= 1");
        }
        if self.max_age == 0 {
            return fail("max_age must be at least 1");
        }
        if self.alpha == 0 {
            return fail("alpha must be at least 1");
        }
        if self.working_size == 0 {
            return fail("working_size must be positive");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        Ok(())
    }

    pub fn total_shapes(&self) -> usize {
        self.checkpoints.last().copied().unwrap_or(0)
    }
}

/// A shape with the fill it was placed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlacedShape {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(rename = "rgba", with = "rgba_array")]
    pub color: Color,
}

mod rgba_array {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::raster::Color;

    pub fn serialize<S: Serializer>(c: &Color, s: S) -> Result<S::Ok, S::Error> {
        [c.r, c.g, c.b, c.a].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Color, D::Error> {
        let [r, g, b, a] = <[u8; 4]>::deserialize(d)?;
        Ok(Color::rgba(r, g, b, a))
    }
}

#[derive(Debug, Clone)]
pub struct FitState {
    pub target: RasterImage,
    pub canvas: RasterImage,
    pub background: Color,
    pub placed: Vec<PlacedShape>,
    pub sse: u64,
    /// Dimensions of the image before downscaling.
    pub original: (u32, u32),
}

impl FitState {
    pub fn rmse(&self) -> f64 {
        raster::rmse(self.sse, self.target.pixel_count())
    }

    pub fn document(&self) -> ShapeListDocument {
        ShapeListDocument::new(
            self.original,
            (self.target.width(), self.target.height()),
            self.background,
            self.placed.clone(),
        )
    }

    /// Blends `candidate` into the canvas and appends it.
    pub fn apply(&mut self, candidate: &Candidate) {
        let spans = candidate.placed.shape.rasterize(self.target.bounds());
        self.canvas.blend_spans_in_place(&spans, candidate.placed.color);
        self.sse = (self.sse as i64 + candidate.delta) as u64;
        self.placed.push(candidate.placed);
    }
}

/// Downscales the target to the working size and paints the mean color.
pub fn init_state(target: &RasterImage, config: &FitConfig) -> Result<FitState> {
    let working = target.downscaled(config.working_size);
    let background = background_color(&working);
    let canvas = RasterImage::filled(working.width(), working.height(), background)?;
    let sse = full_sse(&working, &canvas)?.sse;
    Ok(FitState {
        target: working,
        canvas,
        background,
        placed: Vec::new(),
        sse,
        original: (target.width(), target.height()),
    })
}

/// A scored shape. Lower `delta` is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub placed: PlacedShape,
    pub delta: i64,
    /// The shape covered no pixels.
    pub empty: bool,
}

impl Candidate {
    fn key(&self) -> (i64, bool) {
        (self.delta, self.empty)
    }
}

/// Scores `shape` with its optimal color at `alpha`.
pub fn evaluate(state: &FitState, shape: Shape, alpha: u8, spans: &mut SpanList) -> Candidate {
    shape.rasterize_into(state.target.bounds(), spans);
    if spans.is_empty() {
        return Candidate { placed: PlacedShape { shape, color: Color::rgba(0, 0, 0, alpha) }, delta: 0, empty: true };
    }
    let color = optimal_color_unchecked(&state.target, &state.canvas, spans, alpha);
    let delta = sse_delta(&state.target, &state.canvas, spans, color);
    Candidate { placed: PlacedShape { shape, color }, delta, empty: false }
}

/// Work done by one proposal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProposeStats {
    pub probes: usize,
    /// Mutations tried per climber.
    pub mutations: Vec<usize>,
    /// Largest no-improvement streak reached by any climber.
    pub max_age_reached: usize,
}

fn climb(state: &FitState, config: &FitConfig, start: Candidate, rng: &mut RandomStream) -> (Candidate, usize, usize) {
    let bounds = state.target.bounds();
    let mut spans = SpanList::default();
    let mut best = start;
    let mut age = 0;
    let mut tries = 0;
    let mut max_age_seen = 0;
    while age < config.max_age {
        let shape = best.placed.shape.mutate(bounds, rng);
        let cand = evaluate(state, shape, config.alpha, &mut spans);
        tries += 1;
        if cand.key() < best.key() {
            best = cand;
            age = 0;
        } else {
            age += 1;
            max_age_seen = max_age_seen.max(age);
        }
    }
    (best, tries, max_age_seen)
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers <= 1 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Random probes followed by hill climbs of the best few.
///
/// With `workers > 1` the work fans out over the current rayon pool; [`fit`]
/// installs a pool of that size.
pub fn propose_shape(state: &FitState, config: &FitConfig, shape_index: usize, attempt: usize) -> (Candidate, ProposeStats) {
    let bounds = state.target.bounds();
    let lane = |kind: u64, i: usize| [shape_index as u64, attempt as u64, kind, i as u64];
    let probe = |spans: &mut SpanList, i: usize| {
        let mut rng = RandomStream::derived(config.seed, &lane(LANE_PROBE, i));
        let kind = config.mode.draw_kind(&mut rng);
        let shape = Shape::random(kind, bounds, &mut rng);
        (evaluate(state, shape, config.alpha, spans), i)
    };
    let mut probes: Vec<(Candidate, usize)> = if config.workers > 1 {
        (0..config.probes).into_par_iter().map_init(SpanList::default, probe).collect()
    } else {
        let mut spans = SpanList::default();
        (0..config.probes).map(|i| probe(&mut spans, i)).collect()
    };
    probes.sort_by_key(|(c, i)| (c.key(), *i));
    probes.truncate(config.climbers);

    let run = |(j, (start, _)): (usize, &(Candidate, usize))| {
        let mut rng = RandomStream::derived(config.seed, &lane(LANE_CLIMB, j));
        let (best, tries, age) = climb(state, config, *start, &mut rng);
        (best, j, tries, age)
    };
    let climbed: Vec<(Candidate, usize, usize, usize)> = if config.workers > 1 {
        probes.par_iter().enumerate().map(run).collect()
    } else {
        probes.iter().enumerate().map(run).collect()
    };
    let stats = ProposeStats {
        probes: config.probes,
        mutations: climbed.iter().map(|c| c.2).collect(),
        max_age_reached: climbed.iter().map(|c| c.3).max().unwrap_or(0),
    };
    let best = climbed
        .into_iter()
        .min_by_key(|(c, j, _, _)| (c.key(), *j))
        .map(|(c, ..)| c)
        .expect("climbers >= 1");
    (best, stats)
}

/// One entry of the per-step trajectory log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub step: usize,
    pub sse: u64,
    pub rmse: f64,
    pub forced: bool,
}

/// Proposes until a shape lowers the error, forcing the best candidate in
/// after `retries` failed re-proposals.
pub fn accept(state: &mut FitState, config: &FitConfig) -> TrajectoryStep {
    let index = state.placed.len();
    let mut best: Option<Candidate> = None;
    for attempt in 0..=config.retries {
        let (cand, _) = propose_shape(state, config, index, attempt);
        if cand.delta < 0 {
            state.apply(&cand);
            return TrajectoryStep { step: index + 1, sse: state.sse, rmse: state.rmse(), forced: false };
        }
        if best.is_none_or(|b| cand.key() < b.key()) {
            best = Some(cand);
        }
    }
    state.apply(&best.expect("at least one proposal"));
    TrajectoryStep { step: index + 1, sse: state.sse, rmse: state.rmse(), forced: true }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub shapes: usize,
    pub sse: u64,
    pub rmse: f64,
    pub svg_bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSet {
    pub entries: Vec<Checkpoint>,
}

impl CheckpointSet {
    pub fn get(&self, shapes: usize) -> Option<&Checkpoint> {
        self.entries.iter().find(|c| c.shapes == shapes)
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub state: FitState,
    pub checkpoints: CheckpointSet,
    pub trajectory: Vec<TrajectoryStep>,
}

impl FitResult {
    /// The shape list at one checkpoint level.
    pub fn document_at(&self, shapes: usize) -> ShapeListDocument {
        self.state.document().prefix(shapes)
    }

    pub fn forced_steps(&self) -> usize {
        self.trajectory.iter().filter(|s| s.forced).count()
    }

    /// Writes one JSON object per step.
    pub fn write_trace(&self, mut out: impl Write) -> Result<()> {
        for step in &self.trajectory {
            serde_json::to_writer(&mut out, step)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn fit(target: &RasterImage, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    with_pool(config.workers, || fit_in_pool(target, config))
}

fn fit_in_pool(target: &RasterImage, config: &FitConfig) -> Result<FitResult> {
    let mut state = init_state(target, config)?;
    let mut trajectory = Vec::with_capacity(config.total_shapes());
    let mut checkpoints = CheckpointSet::default();
    let mut levels = config.checkpoints.iter().copied().peekable();
    while let Some(&level) = levels.peek() {
        let step = accept(&mut state, config);
        log::debug!("shape {} rmse {:.4}{}", step.step, step.rmse, if step.forced { " (forced)" } else { "" });
        trajectory.push(step);
        if state.placed.len() == level {
            let svg_bytes = emit_svg(&state.document()).len() as u64;
            checkpoints.entries.push(Checkpoint { shapes: level, sse: state.sse, rmse: state.rmse(), svg_bytes });
            levels.next();
        }
    }
    Ok(FitResult { state, checkpoints, trajectory })
}
