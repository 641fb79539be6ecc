//! Converts raster images into layered abstractions built from colored
//! primitive shapes.
//!
//! A fit adds one shape at a time, each chosen by random probing plus hill
//! climbing against an exact integer squared-error objective. One run yields
//! every abstraction level as a prefix of its shape list. The crate also
//! covers SVG/JSON emission, exact re-rendering, corpus-scale dataset
//! generation and entropy-based corpus analysis.

pub mod analyze;
pub mod dataset;
pub mod emit;
pub mod error;
pub mod fitter;
pub mod geometry;
pub mod raster;
pub mod rng;

pub use emit::{emit_svg, minify_svg, parse_svg, render, size_report, RenderScale, ShapeListDocument, SizeReport, SvgDocument};
pub use error::{Error, Result};
pub use fitter::{fit, CheckpointSet, FitConfig, FitResult, FitState, PlacedShape, TrajectoryStep, DEFAULT_LEVELS};
pub use geometry::{Bounds, Mode, Shape, ShapeKind, Span, SpanList};
pub use raster::{Color, EntropyValue, RasterImage, Score};
pub use rng::RandomStream;
