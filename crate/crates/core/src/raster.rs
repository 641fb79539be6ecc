//! RGB pixel buffers, alpha blending and exact integer error accounting.
//!
//! All channel quantization rounds half up. Errors are accumulated as exact
//! integer sums of squared channel differences; RMSE is derived on demand.

use std::io::Cursor;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Bounds, SpanList};

/// Opacity applied to fitted shapes unless configured otherwise.
pub const DEFAULT_ALPHA: u8 = 128;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RasterImage {
    /// Wraps a row-major RGB8 buffer.
    pub fn from_rgb(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage(width, height));
        }
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(Error::BufferSize { expected, got: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, color: Color) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage(width, height));
        }
        let data = [color.r, color.g, color.b].repeat(width as usize * height as usize);
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::from_rgb(width, height, data)
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|source| Error::Decode { path: path.to_path_buf(), source })?;
        Self::from_dynamic(img)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        Self::from_dynamic(image::load_from_memory(bytes)?)
    }

    fn from_dynamic(img: image::DynamicImage) -> Result<Self> {
        let rgb = img.into_rgb8();
        let (w, h) = rgb.dimensions();
        Self::from_rgb(w, h, rgb.into_raw())
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut out = Cursor::new(Vec::new());
        self.to_image().write_to(&mut out, image::ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_png()?)?;
        Ok(())
    }

    pub fn to_image(&self) -> image::RgbImage {
        image::RgbImage::from_raw(self.width, self.height, self.data.clone())
            .expect("buffer length checked on construction")
    }

    /// Bilinear resize so the longer side equals `max_side`. Images already
    /// within the limit are returned as-is; images are never enlarged.
    pub fn downscaled(&self, max_side: u32) -> RasterImage {
        let longest = self.width.max(self.height);
        if longest <= max_side || max_side == 0 {
            return self.clone();
        }
        let scale = f64::from(max_side) / f64::from(longest);
        let w = ((f64::from(self.width) * scale).round() as u32).clamp(1, max_side);
        let h = ((f64::from(self.height) * scale).round() as u32).clamp(1, max_side);
        let resized = image::imageops::resize(&self.to_image(), w, h, image::imageops::FilterType::Triangle);
        RasterImage { width: w, height: h, data: resized.into_raw() }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::new(self.width, self.height)
    }

    pub fn pixel_count(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.offset(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    fn row_bytes(&self, y: u32, x1: u32, x2: u32) -> &[u8] {
        &self.data[self.offset(x1, y)..self.offset(x2, y) + 3]
    }

    fn check_same_size(&self, other: &RasterImage) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(self.width, self.height, other.width, other.height));
        }
        Ok(())
    }

    /// Blends `color` over every covered pixel, in place.
    pub fn blend_spans_in_place(&mut self, spans: &SpanList, color: Color) {
        if color.a == 0 {
            return;
        }
        let blend = BlendTable::new(color);
        for s in spans {
            let start = self.offset(s.x1, s.y);
            let end = self.offset(s.x2, s.y) + 3;
            for px in self.data[start..end].chunks_exact_mut(3) {
                px[0] = blend.apply(0, px[0]);
                px[1] = blend.apply(1, px[1]);
                px[2] = blend.apply(2, px[2]);
            }
        }
    }
}

/// An 8-bit straight-alpha color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub a: u8,
}

impl Color {
    pub const fn rgba(r: u8, g: u8, b: u8, a: u8) -> Self {
        Self { r, g, b, a }
    }

    pub const fn opaque(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b, a: 255 }
    }

    pub fn channels(&self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }
}

/// `round(cur * (255 - a) / 255 + c * a / 255)` with half-up rounding.
#[inline]
pub fn blend_channel(cur: u8, c: u8, alpha: u8) -> u8 {
    let num = u32::from(cur) * (255 - u32::from(alpha)) + u32::from(c) * u32::from(alpha);
    ((2 * num + 255) / 510) as u8
}

/// Per-channel lookup of blend results for one color.
struct BlendTable {
    table: [[u8; 256]; 3],
}

impl BlendTable {
    fn new(color: Color) -> Self {
        let mut table = [[0u8; 256]; 3];
        for (ch, c) in color.channels().into_iter().enumerate() {
            for (cur, out) in table[ch].iter_mut().enumerate() {
                *out = blend_channel(cur as u8, c, color.a);
            }
        }
        Self { table }
    }

    #[inline]
    fn apply(&self, ch: usize, cur: u8) -> u8 {
        self.table[ch][cur as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub sse: u64,
    pub samples: u64,
}

impl Score {
    /// Wraps an SSE over an image of `pixels` pixels (three channels each).
    pub fn new(sse: u64, pixels: u64) -> Self {
        Self { sse, samples: pixels * 3 }
    }

    pub fn rmse(&self) -> f64 {
        rmse(self.sse, self.samples / 3)
    }
}

pub fn rmse(sse: u64, pixels: u64) -> f64 {
    (sse as f64 / (pixels as f64 * 3.0)).sqrt()
}

pub fn full_sse(a: &RasterImage, b: &RasterImage) -> Result<Score> {
    a.check_same_size(b)?;
    let sse = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum();
    Ok(Score::new(sse, a.pixel_count()))
}

pub fn blend_spans(canvas: &RasterImage, spans: &SpanList, color: Color) -> RasterImage {
    let mut out = canvas.clone();
    out.blend_spans_in_place(spans, color);
    out
}

fn round_div(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    (2 * num + den).div_euclid(2 * den)
}

/// Color minimizing the post-blend squared error over the covered pixels,
/// for a fixed `alpha`.
pub fn optimal_color(target: &RasterImage, canvas: &RasterImage, spans: &SpanList, alpha: u8) -> Result<Color> {
    target.check_same_size(canvas)?;
    if spans.is_empty() {
        return Err(Error::EmptySpans);
    }
    if alpha == 0 {
        return Err(Error::Config("alpha must be at least 1".into()));
    }
    Ok(optimal_color_unchecked(target, canvas, spans, alpha))
}

pub(crate) fn optimal_color_unchecked(target: &RasterImage, canvas: &RasterImage, spans: &SpanList, alpha: u8) -> Color {
    let inv = 255 - i64::from(alpha);
    let mut sums = [0i64; 3];
    let mut count = 0i64;
    for s in spans {
        let t = target.row_bytes(s.y, s.x1, s.x2);
        let c = canvas.row_bytes(s.y, s.x1, s.x2);
        for (tp, cp) in t.chunks_exact(3).zip(c.chunks_exact(3)) {
            for ch in 0..3 {
                sums[ch] += i64::from(tp[ch]) * 255 - i64::from(cp[ch]) * inv;
            }
        }
        count += i64::from(s.width());
    }
    let den = i64::from(alpha) * count;
    let [r, g, b] = sums.map(|n| round_div(n, den).clamp(0, 255) as u8);
    Color::rgba(r, g, b, alpha)
}

/// `SSE(after blending) - SSE(before)`, over covered pixels only.
pub fn sse_delta(target: &RasterImage, canvas: &RasterImage, spans: &SpanList, color: Color) -> i64 {
    if color.a == 0 || spans.is_empty() {
        return 0;
    }
    let blend = BlendTable::new(color);
    let mut delta = 0i64;
    for s in spans {
        let t = target.row_bytes(s.y, s.x1, s.x2);
        let c = canvas.row_bytes(s.y, s.x1, s.x2);
        for (tp, cp) in t.chunks_exact(3).zip(c.chunks_exact(3)) {
            for ch in 0..3 {
                let tv = i32::from(tp[ch]);
                let before = tv - i32::from(cp[ch]);
                let after = tv - i32::from(blend.apply(ch, cp[ch]));
                delta += i64::from(after * after - before * before);
            }
        }
    }
    delta
}

/// Per-channel mean of all pixels, opaque.
pub fn background_color(target: &RasterImage) -> Color {
    let mut sums = [0i64; 3];
    for px in target.data.chunks_exact(3) {
        for ch in 0..3 {
            sums[ch] += i64::from(px[ch]);
        }
    }
    let n = target.pixel_count() as i64;
    let [r, g, b] = sums.map(|s| round_div(s, n) as u8);
    Color::opaque(r, g, b)
}

/// `round(0.299 r + 0.587 g + 0.114 b)`, evaluated exactly.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500) / 1000) as u8
}

/// Shannon entropy of the grayscale histogram, in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntropyValue(pub f64);

impl EntropyValue {
    pub fn bits(self) -> f64 {
        self.0
    }
}

pub fn grayscale_histogram(img: &RasterImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for px in img.data.chunks_exact(3) {
        hist[luma(px[0], px[1], px[2]) as usize] += 1;
    }
    hist
}

pub fn shannon_entropy(img: &RasterImage) -> EntropyValue {
    let hist = grayscale_histogram(img);
    let total = img.pixel_count() as f64;
    let bits = hist
        .iter()
        .filter(|&&n| n > 0)
        .map(|&n| {
            let p = n as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    EntropyValue(bits.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Shape, Span};

    fn img(w: u32, h: u32, px: &[[u8; 3]]) -> RasterImage {
        RasterImage::from_rgb(w, h, px.concat()).unwrap()
    }

    fn all_spans(w: u32, h: u32) -> SpanList {
        SpanList::from_spans((0..h).map(|y| Span { y, x1: 0, x2: w - 1 }).collect(), Bounds::new(w, h)).unwrap()
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(RasterImage::from_rgb(0, 1, vec![]), Err(Error::EmptyImage(0, 1))));
        assert!(matches!(RasterImage::from_rgb(2, 1, vec![0; 5]), Err(Error::BufferSize { .. })));
    }

    #[test]
    fn sse_of_identical_images_is_zero() {
        let a = img(2, 1, &[[1, 2, 3], [4, 5, 6]]);
        let s = full_sse(&a, &a).unwrap();
        assert_eq!(s.sse, 0);
        assert_eq!(s.rmse(), 0.0);
    }

    #[test]
    fn constant_difference_sse() {
        let a = img(2, 1, &[[10, 20, 30], [40, 50, 60]]);
        let b = img(2, 1, &[[20, 30, 40], [30, 40, 50]]);
        let s = full_sse(&a, &b).unwrap();
        assert_eq!(s.sse, 600);
        assert_eq!(s.rmse(), 10.0);
    }

    #[test]
    fn sse_dimension_mismatch() {
        let a = RasterImage::filled(2, 2, Color::default()).unwrap();
        let b = RasterImage::filled(2, 3, Color::default()).unwrap();
        assert!(matches!(full_sse(&a, &b), Err(Error::DimensionMismatch(2, 2, 2, 3))));
    }

    #[test]
    fn blend_formula() {
        assert_eq!(blend_channel(100, 200, 128), 150);
        assert_eq!(blend_channel(100, 200, 255), 200);
        assert_eq!(blend_channel(100, 200, 0), 100);
        for v in 0..=255u8 {
            for a in [1u8, 64, 128, 200, 255] {
                assert_eq!(blend_channel(v, v, a), v);
            }
        }
    }

    #[test]
    fn opaque_and_transparent_blends() {
        let canvas = RasterImage::filled(4, 4, Color::opaque(9, 9, 9)).unwrap();
        let spans = Shape::Rectangle { x1: 1, y1: 1, x2: 2, y2: 2 }.rasterize(canvas.bounds());
        let out = blend_spans(&canvas, &spans, Color::rgba(1, 2, 3, 255));
        assert_eq!(out.pixel(1, 1), [1, 2, 3]);
        assert_eq!(out.pixel(0, 0), [9, 9, 9]);
        assert_eq!(blend_spans(&canvas, &spans, Color::rgba(1, 2, 3, 0)), canvas);
    }

    #[test]
    fn optimal_color_reduces_to_mean_when_opaque() {
        let target = RasterImage::filled(3, 3, Color::opaque(128, 128, 128)).unwrap();
        let canvas = RasterImage::filled(3, 3, Color::opaque(0, 0, 0)).unwrap();
        let c = optimal_color(&target, &canvas, &all_spans(3, 3), 255).unwrap();
        assert_eq!(c, Color::rgba(128, 128, 128, 255));
    }

    #[test]
    fn optimal_color_fixed_point() {
        let target = img(2, 1, &[[10, 200, 31], [10, 200, 31]]);
        for alpha in [1u8, 77, 128, 255] {
            let c = optimal_color(&target, &target, &all_spans(2, 1), alpha).unwrap();
            assert_eq!(c.channels(), [10, 200, 31]);
        }
    }

    #[test]
    fn optimal_color_errors() {
        let t = RasterImage::filled(2, 2, Color::default()).unwrap();
        assert!(matches!(optimal_color(&t, &t, &SpanList::default(), 128), Err(Error::EmptySpans)));
    }

    #[test]
    fn optimal_color_matches_exhaustive_search_on_mixed_block() {
        let target = img(2, 2, &[[250, 3, 90], [17, 120, 200], [64, 64, 64], [199, 0, 255]]);
        let canvas = img(2, 2, &[[0, 255, 30], [128, 40, 220], [10, 240, 5], [90, 90, 90]]);
        let spans = all_spans(2, 2);
        let c = optimal_color(&target, &canvas, &spans, 128).unwrap();
        for ch in 0..3 {
            let sse = |v: u8| -> u64 {
                (0..2)
                    .flat_map(|y| (0..2).map(move |x| (x, y)))
                    .map(|(x, y)| {
                        let d = i64::from(target.pixel(x, y)[ch]) - i64::from(blend_channel(canvas.pixel(x, y)[ch], v, 128));
                        (d * d) as u64
                    })
                    .sum()
            };
            let best = (0..=255u8).min_by_key(|&v| sse(v)).unwrap();
            let got = c.channels()[ch];
            assert!((i32::from(got) - i32::from(best)).abs() <= 1, "channel {ch}: {got} vs {best}");
        }
    }

    #[test]
    fn delta_of_noops_is_zero() {
        let t = RasterImage::filled(4, 4, Color::opaque(1, 2, 3)).unwrap();
        let c = RasterImage::filled(4, 4, Color::opaque(200, 2, 3)).unwrap();
        assert_eq!(sse_delta(&t, &c, &SpanList::default(), Color::rgba(0, 0, 0, 255)), 0);
        assert_eq!(sse_delta(&t, &c, &all_spans(4, 4), Color::rgba(0, 0, 0, 0)), 0);
    }

    #[test]
    fn background_is_rounded_mean() {
        assert_eq!(
            background_color(&RasterImage::filled(3, 2, Color::opaque(10, 20, 30)).unwrap()),
            Color::opaque(10, 20, 30)
        );
        let bw = img(2, 1, &[[0, 0, 0], [255, 255, 255]]);
        assert_eq!(background_color(&bw), Color::opaque(128, 128, 128));
    }

    #[test]
    fn entropy_identities() {
        let constant = RasterImage::filled(5, 5, Color::opaque(40, 50, 60)).unwrap();
        assert_eq!(shannon_entropy(&constant).bits(), 0.0);
        let two = RasterImage::from_fn(4, 4, |x, _| if x < 2 { [0, 0, 0] } else { [255, 255, 255] }).unwrap();
        assert!((shannon_entropy(&two).bits() - 1.0).abs() < 1e-9);
        let four = RasterImage::from_fn(4, 4, |x, _| [x as u8 * 60; 3]).unwrap();
        assert!((shannon_entropy(&four).bits() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn luma_uses_half_up_rounding() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(0, 0, 0), 0);
        // 0.299 * 1 + 0.587 * 0 + 0.114 * 2 = 0.527
        assert_eq!(luma(1, 0, 2), 1);
    }

    #[test]
    fn downscale_preserves_aspect() {
        let big = RasterImage::filled(512, 256, Color::opaque(1, 1, 1)).unwrap();
        let small = big.downscaled(256);
        assert_eq!((small.width(), small.height()), (256, 128));
        let tiny = RasterImage::filled(2, 2, Color::opaque(1, 1, 1)).unwrap();
        assert_eq!(tiny.downscaled(256), tiny);
    }

    #[test]
    fn png_round_trip() {
        let a = RasterImage::from_fn(5, 3, |x, y| [x as u8, y as u8, 7]).unwrap();
        assert_eq!(RasterImage::decode(&a.to_png().unwrap()).unwrap(), a);
    }
}
