//! Primitive shapes, random generation, mutation and exact scanline coverage.
//!
//! All shape coordinates are integer *pixel-center* coordinates: the value
//! `(x, y)` names the center of pixel `(x, y)`, i.e. the continuous point
//! `(x + 0.5, y + 0.5)` in image space. A pixel is covered when its center
//! lies inside or on the boundary of the continuous shape.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::rng::RandomStream;

/// Largest initial extent drawn for a fresh shape, per axis.
pub const INITIAL_EXTENT: i32 = 32;
/// Standard deviation of positional and extent mutations, in pixels.
pub const POSITION_SIGMA: f64 = 16.0;
/// Standard deviation of angle mutations, in degrees.
pub const ANGLE_SIGMA: f64 = 32.0;
/// Attempts made before a degenerate triangle is tolerated.
pub const TRIANGLE_RETRIES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Triangle,
    Rectangle,
    RotatedRectangle,
    Ellipse,
    RotatedEllipse,
    Circle,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 6] = [
        ShapeKind::Triangle,
        ShapeKind::Rectangle,
        ShapeKind::RotatedRectangle,
        ShapeKind::Ellipse,
        ShapeKind::RotatedEllipse,
        ShapeKind::Circle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Triangle => "triangle",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::RotatedRectangle => "rotated_rectangle",
            ShapeKind::Ellipse => "ellipse",
            ShapeKind::RotatedEllipse => "rotated_ellipse",
            ShapeKind::Circle => "circle",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown shape kind '{s}'"))
    }
}

/// Which kinds a fit may draw from. Serialized as `0` or `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Mode {
    /// Every kind, drawn uniformly.
    #[default]
    AllShapes,
    /// Triangles only.
    Triangles,
}

impl Mode {
    pub fn index(self) -> u8 {
        match self {
            Mode::AllShapes => 0,
            Mode::Triangles => 1,
        }
    }

    pub fn from_index(index: u8) -> Option<Self> {
        match index {
            0 => Some(Mode::AllShapes),
            1 => Some(Mode::Triangles),
            _ => None,
        }
    }

    pub fn kinds(self) -> &'static [ShapeKind] {
        match self {
            Mode::AllShapes => &ShapeKind::ALL,
            Mode::Triangles => &ShapeKind::ALL[..1],
        }
    }

    pub fn draw_kind(self, rng: &mut RandomStream) -> ShapeKind {
        let kinds = self.kinds();
        if kinds.len() == 1 {
            kinds[0]
        } else {
            kinds[rng.index(kinds.len())]
        }
    }
}

impl From<Mode> for u8 {
    fn from(m: Mode) -> u8 {
        m.index()
    }
}

impl TryFrom<u8> for Mode {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Mode::from_index(v).ok_or_else(|| format!("unknown mode {v}; expected 0 or 1"))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Canvas size a shape is valid against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub width: u32,
    pub height: u32,
}

impl Bounds {
    pub fn new(width: u32, height: u32) -> Self {
        assert!(width >= 1 && height >= 1, "bounds must be at least 1x1");
        Self { width, height }
    }

    fn max_x(self) -> i32 {
        self.width as i32 - 1
    }

    fn max_y(self) -> i32 {
        self.height as i32 - 1
    }

    fn max_extent(self) -> i32 {
        self.width.max(self.height) as i32
    }

    fn clamp_x(self, x: i32) -> i32 {
        x.clamp(0, self.max_x())
    }

    fn clamp_y(self, y: i32) -> i32 {
        y.clamp(0, self.max_y())
    }

    fn clamp_extent(self, v: i32) -> i32 {
        v.clamp(1, self.max_extent())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Triangle { x1: i32, y1: i32, x2: i32, y2: i32, x3: i32, y3: i32 },
    /// Opposite corners, inclusive; either order. Generated rectangles are canonical.
    Rectangle { x1: i32, y1: i32, x2: i32, y2: i32 },
    /// Full width and height, rotated clockwise by `angle` degrees about the center.
    RotatedRectangle { cx: i32, cy: i32, w: i32, h: i32, angle: i32 },
    Ellipse { cx: i32, cy: i32, rx: i32, ry: i32 },
    RotatedEllipse { cx: i32, cy: i32, rx: i32, ry: i32, angle: i32 },
    Circle { cx: i32, cy: i32, r: i32 },
}

fn gaussian_step(rng: &mut RandomStream, sigma: f64) -> i32 {
    (rng.normal() * sigma).round() as i32
}

fn collinear(x1: i32, y1: i32, x2: i32, y2: i32, x3: i32, y3: i32) -> bool {
    let cross = i64::from(x2 - x1) * i64::from(y3 - y1) - i64::from(y2 - y1) * i64::from(x3 - x1);
    cross == 0
}

impl Shape {
    pub fn kind(&self) -> ShapeKind {
        match self {
            Shape::Triangle { .. } => ShapeKind::Triangle,
            Shape::Rectangle { .. } => ShapeKind::Rectangle,
            Shape::RotatedRectangle { .. } => ShapeKind::RotatedRectangle,
            Shape::Ellipse { .. } => ShapeKind::Ellipse,
            Shape::RotatedEllipse { .. } => ShapeKind::RotatedEllipse,
            Shape::Circle { .. } => ShapeKind::Circle,
        }
    }

    /// True for a triangle whose three vertices lie on one line.
    pub fn is_degenerate(&self) -> bool {
        match *self {
            Shape::Triangle { x1, y1, x2, y2, x3, y3 } => collinear(x1, y1, x2, y2, x3, y3),
            _ => false,
        }
    }

    /// Rectangles with the top-left corner first; other shapes unchanged.
    /// Coverage is identical either way.
    pub fn canonical(self) -> Shape {
        match self {
            Shape::Rectangle { x1, y1, x2, y2 } => {
                Shape::Rectangle { x1: x1.min(x2), y1: y1.min(y2), x2: x1.max(x2), y2: y1.max(y2) }
            }
            other => other,
        }
    }

    /// Draws a fresh shape of `kind` anchored uniformly on the canvas.
    pub fn random(kind: ShapeKind, bounds: Bounds, rng: &mut RandomStream) -> Shape {
        let cx = rng.int_in(0, bounds.max_x());
        let cy = rng.int_in(0, bounds.max_y());
        let extent = |rng: &mut RandomStream| bounds.clamp_extent(rng.int_in(1, INITIAL_EXTENT));
        match kind {
            ShapeKind::Triangle => {
                let mut shape = Shape::Triangle { x1: cx, y1: cy, x2: cx, y2: cy, x3: cx, y3: cy };
                for _ in 0..TRIANGLE_RETRIES {
                    let offset = |rng: &mut RandomStream, base: i32, clamp: fn(Bounds, i32) -> i32| {
                        clamp(bounds, base + rng.int_in(-INITIAL_EXTENT, INITIAL_EXTENT))
                    };
                    let x2 = offset(rng, cx, Bounds::clamp_x);
                    let y2 = offset(rng, cy, Bounds::clamp_y);
                    let x3 = offset(rng, cx, Bounds::clamp_x);
                    let y3 = offset(rng, cy, Bounds::clamp_y);
                    shape = Shape::Triangle { x1: cx, y1: cy, x2, y2, x3, y3 };
                    if !shape.is_degenerate() {
                        break;
                    }
                }
                shape
            }
            ShapeKind::Rectangle => {
                let w = extent(rng);
                let h = extent(rng);
                Shape::Rectangle {
                    x1: cx,
                    y1: cy,
                    x2: bounds.clamp_x(cx + w - 1),
                    y2: bounds.clamp_y(cy + h - 1),
                }
            }
            ShapeKind::RotatedRectangle => {
                let w = extent(rng);
                let h = extent(rng);
                let angle = rng.int_in(0, 359);
                Shape::RotatedRectangle { cx, cy, w, h, angle }
            }
            ShapeKind::Ellipse => {
                let rx = extent(rng);
                let ry = extent(rng);
                Shape::Ellipse { cx, cy, rx, ry }
            }
            ShapeKind::RotatedEllipse => {
                let rx = extent(rng);
                let ry = extent(rng);
                let angle = rng.int_in(0, 359);
                Shape::RotatedEllipse { cx, cy, rx, ry, angle }
            }
            ShapeKind::Circle => Shape::Circle { cx, cy, r: extent(rng) },
        }
    }

    /// Returns a copy with exactly one mutation site perturbed.
    ///
    /// Sites: a vertex (triangle); a corner or the position (rectangle); the
    /// center, an extent or the angle (everything else). Triangles that would
    /// become collinear are re-drawn; after [`TRIANGLE_RETRIES`] failures the
    /// input is returned unchanged.
    pub fn mutate(&self, bounds: Bounds, rng: &mut RandomStream) -> Shape {
        let step = |rng: &mut RandomStream| gaussian_step(rng, POSITION_SIGMA);
        let angle_step = |rng: &mut RandomStream, a: i32| (a + gaussian_step(rng, ANGLE_SIGMA)).rem_euclid(360);
        let move_center = |rng: &mut RandomStream, cx: i32, cy: i32| {
            (bounds.clamp_x(cx + step(rng)), bounds.clamp_y(cy + step(rng)))
        };
        let grow = |rng: &mut RandomStream, v: i32| bounds.clamp_extent(v + step(rng));

        match *self {
            Shape::Triangle { x1, y1, x2, y2, x3, y3 } => {
                let mut v = [(x1, y1), (x2, y2), (x3, y3)];
                for _ in 0..TRIANGLE_RETRIES {
                    let i = rng.index(3);
                    let moved = move_center(rng, v[i].0, v[i].1);
                    let old = v[i];
                    v[i] = moved;
                    if !collinear(v[0].0, v[0].1, v[1].0, v[1].1, v[2].0, v[2].1) {
                        return Shape::Triangle {
                            x1: v[0].0,
                            y1: v[0].1,
                            x2: v[1].0,
                            y2: v[1].1,
                            x3: v[2].0,
                            y3: v[2].1,
                        };
                    }
                    v[i] = old;
                }
                *self
            }
            Shape::Rectangle { x1, y1, x2, y2 } => match rng.index(3) {
                0 => {
                    let (x1, y1) = move_center(rng, x1, y1);
                    Shape::Rectangle { x1, y1, x2, y2 }.canonical()
                }
                1 => {
                    let (x2, y2) = move_center(rng, x2, y2);
                    Shape::Rectangle { x1, y1, x2, y2 }.canonical()
                }
                _ => {
                    // Translation keeps the size; the step is clamped so both
                    // corners stay on the canvas.
                    let (lo_x, hi_x) = (x1.min(x2), x1.max(x2));
                    let (lo_y, hi_y) = (y1.min(y2), y1.max(y2));
                    let dx = step(rng).clamp(-lo_x, bounds.max_x() - hi_x);
                    let dy = step(rng).clamp(-lo_y, bounds.max_y() - hi_y);
                    Shape::Rectangle { x1: x1 + dx, y1: y1 + dy, x2: x2 + dx, y2: y2 + dy }
                }
            },
            Shape::RotatedRectangle { cx, cy, w, h, angle } => match rng.index(3) {
                0 => {
                    let (cx, cy) = move_center(rng, cx, cy);
                    Shape::RotatedRectangle { cx, cy, w, h, angle }
                }
                1 => {
                    let w = grow(rng, w);
                    let h = grow(rng, h);
                    Shape::RotatedRectangle { cx, cy, w, h, angle }
                }
                _ => Shape::RotatedRectangle { cx, cy, w, h, angle: angle_step(rng, angle) },
            },
            Shape::Ellipse { cx, cy, rx, ry } => match rng.index(3) {
                0 => {
                    let (cx, cy) = move_center(rng, cx, cy);
                    Shape::Ellipse { cx, cy, rx, ry }
                }
                1 => Shape::Ellipse { cx, cy, rx: grow(rng, rx), ry },
                _ => Shape::Ellipse { cx, cy, rx, ry: grow(rng, ry) },
            },
            Shape::RotatedEllipse { cx, cy, rx, ry, angle } => match rng.index(3) {
                0 => {
                    let (cx, cy) = move_center(rng, cx, cy);
                    Shape::RotatedEllipse { cx, cy, rx, ry, angle }
                }
                1 => {
                    let rx = grow(rng, rx);
                    let ry = grow(rng, ry);
                    Shape::RotatedEllipse { cx, cy, rx, ry, angle }
                }
                _ => Shape::RotatedEllipse { cx, cy, rx, ry, angle: angle_step(rng, angle) },
            },
            Shape::Circle { cx, cy, r } => match rng.index(2) {
                0 => {
                    let (cx, cy) = move_center(rng, cx, cy);
                    Shape::Circle { cx, cy, r }
                }
                _ => Shape::Circle { cx, cy, r: grow(rng, r) },
            },
        }
    }

    /// Continuous region of the shape in pixel-center coordinates.
    pub fn region(&self) -> Region {
        match *self {
            Shape::Triangle { x1, y1, x2, y2, x3, y3 } => {
                let v = [
                    (f64::from(x1), f64::from(y1)),
                    (f64::from(x2), f64::from(y2)),
                    (f64::from(x3), f64::from(y3)),
                ];
                Region::Triangle { v, degenerate: self.is_degenerate() }
            }
            // Pixel edges, as drawn by the SVG rect; the same centers are covered.
            Shape::Rectangle { x1, y1, x2, y2 } => Region::Rect {
                x0: f64::from(x1.min(x2)) - 0.5,
                y0: f64::from(y1.min(y2)) - 0.5,
                x1: f64::from(x1.max(x2)) + 0.5,
                y1: f64::from(y1.max(y2)) + 0.5,
            },
            Shape::RotatedRectangle { cx, cy, w, h, angle } => {
                let (sin, cos) = f64::from(angle).to_radians().sin_cos();
                Region::RotatedRect {
                    cx: f64::from(cx),
                    cy: f64::from(cy),
                    w: f64::from(w),
                    h: f64::from(h),
                    cos,
                    sin,
                }
            }
            Shape::Ellipse { cx, cy, rx, ry } => Region::Ellipse {
                cx: f64::from(cx),
                cy: f64::from(cy),
                rx: f64::from(rx),
                ry: f64::from(ry),
            },
            Shape::Circle { cx, cy, r } => Region::Ellipse {
                cx: f64::from(cx),
                cy: f64::from(cy),
                rx: f64::from(r),
                ry: f64::from(r),
            },
            Shape::RotatedEllipse { cx, cy, rx, ry, angle } => {
                let (sin, cos) = f64::from(angle).to_radians().sin_cos();
                Region::RotatedEllipse {
                    cx: f64::from(cx),
                    cy: f64::from(cy),
                    rx: f64::from(rx),
                    ry: f64::from(ry),
                    cos,
                    sin,
                }
            }
        }
    }

    pub fn rasterize(&self, bounds: Bounds) -> SpanList {
        let mut spans = SpanList::default();
        self.rasterize_into(bounds, &mut spans);
        spans
    }

    /// Scanline coverage written into a reusable buffer.
    pub fn rasterize_into(&self, bounds: Bounds, out: &mut SpanList) {
        out.clear();
        let region = self.region();
        let (_, top, _, bottom) = region.bbox();
        let y_lo = (top.floor() as i64 - 1).max(0);
        let y_hi = (bottom.ceil() as i64 + 1).min(i64::from(bounds.max_y()));
        let x_max = i64::from(bounds.max_x());
        for y in y_lo..=y_hi {
            let py = y as f64;
            let Some((a, b)) = region.row_extent(py) else { continue };
            let mut lo = (a.floor() as i64 - 1).max(0);
            let mut hi = (b.ceil() as i64 + 1).min(x_max);
            while lo <= hi && !region.contains(lo as f64, py) {
                lo += 1;
            }
            while hi >= lo && !region.contains(hi as f64, py) {
                hi -= 1;
            }
            if lo <= hi {
                out.spans.push(Span { y: y as u32, x1: lo as u32, x2: hi as u32 });
            }
        }
    }
}

/// A shape's continuous region, with trigonometry precomputed.
///
/// Coordinates are pixel-center coordinates: testing the integer point
/// `(x, y)` tests the center of pixel `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Triangle { v: [(f64, f64); 3], degenerate: bool },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    RotatedRect { cx: f64, cy: f64, w: f64, h: f64, cos: f64, sin: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    RotatedEllipse { cx: f64, cy: f64, rx: f64, ry: f64, cos: f64, sin: f64 },
}

fn edge(a: (f64, f64), b: (f64, f64), px: f64, py: f64) -> f64 {
    (b.0 - a.0) * (py - a.1) - (b.1 - a.1) * (px - a.0)
}

fn on_segment(a: (f64, f64), b: (f64, f64), px: f64, py: f64) -> bool {
    edge(a, b, px, py) == 0.0
        && px >= a.0.min(b.0)
        && px <= a.0.max(b.0)
        && py >= a.1.min(b.1)
        && py <= a.1.max(b.1)
}

/// Min/max x where the horizontal line at `py` meets a closed polygon outline.
fn polygon_row_extent(points: &[(f64, f64)], py: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..points.len() {
        let a = points[i];
        let b = points[(i + 1) % points.len()];
        let (ymin, ymax) = (a.1.min(b.1), a.1.max(b.1));
        if py < ymin - 1e-9 || py > ymax + 1e-9 {
            continue;
        }
        if a.1 == b.1 {
            lo = lo.min(a.0.min(b.0));
            hi = hi.max(a.0.max(b.0));
        } else {
            let t = ((py - a.1) / (b.1 - a.1)).clamp(0.0, 1.0);
            let x = a.0 + t * (b.0 - a.0);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Roots of `a t^2 + b t + c <= 0`, tolerating tiny negative discriminants.
fn quadratic_extent(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    let scale = (b * b).max((4.0 * a * c).abs()).max(1.0);
    if disc < -1e-9 * scale {
        return None;
    }
    let root = disc.max(0.0).sqrt();
    Some(((-b - root) / (2.0 * a), (-b + root) / (2.0 * a)))
}

impl Region {
    pub fn contains(&self, px: f64, py: f64) -> bool {
        match *self {
            Region::Triangle { v, degenerate } => {
                if degenerate {
                    return on_segment(v[0], v[1], px, py)
                        || on_segment(v[1], v[2], px, py)
                        || on_segment(v[2], v[0], px, py);
                }
                let d1 = edge(v[0], v[1], px, py);
                let d2 = edge(v[1], v[2], px, py);
                let d3 = edge(v[2], v[0], px, py);
                let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
                let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
                !(neg && pos)
            }
            Region::Rect { x0, y0, x1, y1 } => px >= x0 && px <= x1 && py >= y0 && py <= y1,
            Region::RotatedRect { cx, cy, w, h, cos, sin } => {
                let (dx, dy) = (px - cx, py - cy);
                let u = dx * cos + dy * sin;
                let v = -dx * sin + dy * cos;
                2.0 * u.abs() <= w && 2.0 * v.abs() <= h
            }
            Region::Ellipse { cx, cy, rx, ry } => {
                let (dx, dy) = (px - cx, py - cy);
                dx * dx * ry * ry + dy * dy * rx * rx <= rx * rx * ry * ry
            }
            Region::RotatedEllipse { cx, cy, rx, ry, cos, sin } => {
                let (dx, dy) = (px - cx, py - cy);
                let u = dx * cos + dy * sin;
                let v = -dx * sin + dy * cos;
                u * u * ry * ry + v * v * rx * rx <= rx * rx * ry * ry
            }
        }
    }

    /// Bounding box as `(left, top, right, bottom)`, closed.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        match *self {
            Region::Triangle { v, .. } => {
                let xs = [v[0].0, v[1].0, v[2].0];
                let ys = [v[0].1, v[1].1, v[2].1];
                (
                    xs.iter().copied().fold(f64::INFINITY, f64::min),
                    ys.iter().copied().fold(f64::INFINITY, f64::min),
                    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            }
            Region::Rect { x0, y0, x1, y1 } => (x0, y0, x1, y1),
            Region::RotatedRect { cx, cy, w, h, cos, sin } => {
                let ex = (w * cos.abs() + h * sin.abs()) / 2.0;
                let ey = (w * sin.abs() + h * cos.abs()) / 2.0;
                (cx - ex, cy - ey, cx + ex, cy + ey)
            }
            Region::Ellipse { cx, cy, rx, ry } => (cx - rx, cy - ry, cx + rx, cy + ry),
            Region::RotatedEllipse { cx, cy, rx, ry, cos, sin } => {
                let ex = ((rx * cos).powi(2) + (ry * sin).powi(2)).sqrt();
                let ey = ((rx * sin).powi(2) + (ry * cos).powi(2)).sqrt();
                (cx - ex, cy - ey, cx + ex, cy + ey)
            }
        }
    }

    /// Approximate x-interval covered on row `py`; exact up to float error.
    /// `None` only when the row certainly misses the shape.
    pub fn row_extent(&self, py: f64) -> Option<(f64, f64)> {
        match *self {
            Region::Triangle { v, .. } => polygon_row_extent(&v, py),
            Region::Rect { x0, y0, x1, y1 } => (py >= y0 && py <= y1).then_some((x0, x1)),
            Region::RotatedRect { cx, cy, w, h, cos, sin } => {
                let (hw, hh) = (w / 2.0, h / 2.0);
                let corner = |su: f64, sv: f64| {
                    let (u, v) = (su * hw, sv * hh);
                    (cx + u * cos - v * sin, cy + u * sin + v * cos)
                };
                let pts = [corner(-1.0, -1.0), corner(1.0, -1.0), corner(1.0, 1.0), corner(-1.0, 1.0)];
                polygon_row_extent(&pts, py)
            }
            Region::Ellipse { cx, cy, rx, ry } => {
                let dy = py - cy;
                if dy * dy > ry * ry {
                    return None;
                }
                let half = rx * (1.0 - dy * dy / (ry * ry)).max(0.0).sqrt();
                Some((cx - half, cx + half))
            }
            Region::RotatedEllipse { cx, cy, rx, ry, cos, sin } => {
                // u = dx c + dy s, v = -dx s + dy c; solve u²/rx² + v²/ry² = 1 for dx.
                let dy = py - cy;
                let (irx, iry) = (1.0 / (rx * rx), 1.0 / (ry * ry));
                let a = cos * cos * irx + sin * sin * iry;
                let b = 2.0 * dy * cos * sin * (irx - iry);
                let c = dy * dy * (sin * sin * irx + cos * cos * iry) - 1.0;
                quadratic_extent(a, b, c).map(|(l, r)| (cx + l, cx + r))
            }
        }
    }
}

/// One row of covered pixels, `x1..=x2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub y: u32,
    pub x1: u32,
    pub x2: u32,
}

impl Span {
    pub fn width(&self) -> u32 {
        self.x2 - self.x1 + 1
    }
}

/// Row-sorted pixel coverage of one shape.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpanList {
    spans: Vec<Span>,
}

impl SpanList {
    /// Builds a span list, checking the ordering and bounds invariants.
    pub fn from_spans(spans: Vec<Span>, bounds: Bounds) -> Option<Self> {
        let ok = spans.iter().all(|s| s.x1 <= s.x2 && s.x2 < bounds.width && s.y < bounds.height)
            && spans
                .windows(2)
                .all(|w| w[0].y < w[1].y || (w[0].y == w[1].y && w[0].x2 < w[1].x1));
        ok.then_some(Self { spans })
    }

    pub fn clear(&mut self) {
        self.spans.clear();
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Span> {
        self.spans.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn pixel_count(&self) -> u64 {
        self.spans.iter().map(|s| u64::from(s.width())).sum()
    }

    /// Every covered `(x, y)` in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.spans.iter().flat_map(|s| (s.x1..=s.x2).map(move |x| (x, s.y)))
    }
}

impl<'a> IntoIterator for &'a SpanList {
    type Item = &'a Span;
    type IntoIter = std::slice::Iter<'a, Span>;

    fn into_iter(self) -> Self::IntoIter {
        self.spans.iter()
    }
}
