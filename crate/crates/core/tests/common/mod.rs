#![allow(dead_code)]

use shapefit::{Bounds, Color, RasterImage, Shape, SpanList};

/// Pixel-center coverage computed from scratch, one pixel at a time.
/// Axis-aligned kinds and triangles use exact integer arithmetic.
pub fn covers(shape: &Shape, x: i64, y: i64) -> bool {
    match *shape {
        Shape::Triangle { x1, y1, x2, y2, x3, y3 } => {
            let v = [(x1 as i64, y1 as i64), (x2 as i64, y2 as i64), (x3 as i64, y3 as i64)];
            let cross = |a: (i64, i64), b: (i64, i64)| (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
            let area = (v[1].0 - v[0].0) * (v[2].1 - v[0].1) - (v[1].1 - v[0].1) * (v[2].0 - v[0].0);
            if area == 0 {
                (0..3).any(|i| {
                    let (a, b) = (v[i], v[(i + 1) % 3]);
                    cross(a, b) == 0
                        && x >= a.0.min(b.0)
                        && x <= a.0.max(b.0)
                        && y >= a.1.min(b.1)
                        && y <= a.1.max(b.1)
                })
            } else {
                let s = [cross(v[0], v[1]), cross(v[1], v[2]), cross(v[2], v[0])];
                s.iter().all(|&d| d >= 0) || s.iter().all(|&d| d <= 0)
            }
        }
        Shape::Rectangle { x1, y1, x2, y2 } => {
            let (x1, x2, y1, y2) = (x1 as i64, x2 as i64, y1 as i64, y2 as i64);
            x >= x1.min(x2) && x <= x1.max(x2) && y >= y1.min(y2) && y <= y1.max(y2)
        }
        Shape::Ellipse { cx, cy, rx, ry } => {
            let (dx, dy, rx, ry) = (x - cx as i64, y - cy as i64, rx as i64, ry as i64);
            dx * dx * ry * ry + dy * dy * rx * rx <= rx * rx * ry * ry
        }
        Shape::Circle { cx, cy, r } => {
            let (dx, dy, r) = (x - cx as i64, y - cy as i64, r as i64);
            dx * dx + dy * dy <= r * r
        }
        Shape::RotatedRectangle { cx, cy, w, h, angle } => {
            let (s, c) = (angle as f64).to_radians().sin_cos();
            let (dx, dy) = ((x - cx as i64) as f64, (y - cy as i64) as f64);
            let u = dx * c + dy * s;
            let v = -dx * s + dy * c;
            2.0 * u.abs() <= w as f64 && 2.0 * v.abs() <= h as f64
        }
        Shape::RotatedEllipse { cx, cy, rx, ry, angle } => {
            let (s, c) = (angle as f64).to_radians().sin_cos();
            let (dx, dy) = ((x - cx as i64) as f64, (y - cy as i64) as f64);
            let u = dx * c + dy * s;
            let v = -dx * s + dy * c;
            let (rx, ry) = (rx as f64, ry as f64);
            u * u * ry * ry + v * v * rx * rx <= rx * rx * ry * ry
        }
    }
}

pub fn brute_force(shape: &Shape, bounds: Bounds) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for y in 0..bounds.height {
        for x in 0..bounds.width {
            if covers(shape, x as i64, y as i64) {
                out.push((x, y));
            }
        }
    }
    out
}

pub fn naive_blend(cur: u8, c: u8, alpha: u8) -> u8 {
    let num = f64::from(cur) * f64::from(255 - alpha) + f64::from(c) * f64::from(alpha);
    ((num + 127.5) / 255.0).floor() as u8
}

pub fn naive_sse(a: &RasterImage, b: &RasterImage) -> u64 {
    let mut sse = 0u64;
    for y in 0..a.height() {
        for x in 0..a.width() {
            let (p, q) = (a.pixel(x, y), b.pixel(x, y));
            for ch in 0..3 {
                let d = i64::from(p[ch]) - i64::from(q[ch]);
                sse += (d * d) as u64;
            }
        }
    }
    sse
}

/// Covered-region SSE of one channel when painting value `c`.
pub fn channel_sse(target: &RasterImage, canvas: &RasterImage, spans: &SpanList, ch: usize, c: u8, alpha: u8) -> u64 {
    spans
        .pixels()
        .map(|(x, y)| {
            let d = i64::from(target.pixel(x, y)[ch]) - i64::from(naive_blend(canvas.pixel(x, y)[ch], c, alpha));
            (d * d) as u64
        })
        .sum()
}

/// How far an exhaustive per-channel search beats `color`, and the allowed
/// slack of one output level per covered pixel at `color`.
pub struct ColorGap {
    pub channel: usize,
    pub gap: u64,
    pub slack: u64,
}

pub fn exhaustive_color_gaps(target: &RasterImage, canvas: &RasterImage, spans: &SpanList, color: Color) -> Vec<ColorGap> {
    let got = color.channels();
    (0..3)
        .map(|ch| {
            let at = channel_sse(target, canvas, spans, ch, got[ch], color.a);
            let best = (0..=255u8).map(|c| channel_sse(target, canvas, spans, ch, c, color.a)).min().unwrap();
            let slack = spans
                .pixels()
                .map(|(x, y)| {
                    let b = naive_blend(canvas.pixel(x, y)[ch], got[ch], color.a);
                    2 * (i64::from(target.pixel(x, y)[ch]) - i64::from(b)).unsigned_abs() + 1
                })
                .sum();
            ColorGap { channel: ch, gap: at - best, slack }
        })
        .collect()
}

pub fn random_image(width: u32, height: u32, rng: &mut shapefit::RandomStream) -> RasterImage {
    RasterImage::from_fn(width, height, |_, _| {
        [rng.int_in(0, 255) as u8, rng.int_in(0, 255) as u8, rng.int_in(0, 255) as u8]
    })
    .unwrap()
}

/// A smooth gradient with a few hard edges, cheap to fit.
pub fn synthetic_photo(width: u32, height: u32, seed: u32) -> RasterImage {
    RasterImage::from_fn(width, height, |x, y| {
        let r = (x * 255 / width.max(1)) as u8;
        let g = (y * 255 / height.max(1)) as u8;
        let b = if (x / 7 + y / 5 + seed).is_multiple_of(3) { 220 } else { 40 };
        [r, g.wrapping_add((seed as u8).wrapping_mul(40)), b]
    })
    .unwrap()
}

