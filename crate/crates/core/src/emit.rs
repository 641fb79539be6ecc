//! Serialization of fitted shape lists: the archival JSON document, the SVG
//! view, SVG minification and exact re-rendering.
//!
//! The JSON document is the source of truth; the SVG is generated from it
//! and carries the same integer geometry, so [`parse_svg`] can recover the
//! document from our own output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitter::PlacedShape;
use crate::geometry::{Bounds, Shape, ShapeKind, Span, SpanList};
use crate::raster::{Color, RasterImage};

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeListDocument {
    #[serde(rename = "v")]
    pub version: u32,
    /// Original (source) dimensions.
    pub w0: u32,
    pub h0: u32,
    /// Working dimensions the shapes were fitted at.
    pub w: u32,
    pub h: u32,
    #[serde(with = "rgb_array")]
    pub bg: Color,
    pub shapes: Vec<PlacedShape>,
}

mod rgb_array {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::raster::Color;

    pub fn serialize<S: Serializer>(c: &Color, s: S) -> Result<S::Ok, S::Error> {
        [c.r, c.g, c.b].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Color, D::Error> {
        let [r, g, b] = <[u8; 3]>::deserialize(d)?;
        Ok(Color::opaque(r, g, b))
    }
}

impl ShapeListDocument {
    pub fn new(original: (u32, u32), working: (u32, u32), bg: Color, shapes: Vec<PlacedShape>) -> Self {
        Self {
            version: DOCUMENT_VERSION,
            w0: original.0,
            h0: original.1,
            w: working.0,
            h: working.1,
            bg: Color::opaque(bg.r, bg.g, bg.b),
            shapes,
        }
    }

    /// Same document truncated to its first `n` shapes.
    pub fn prefix(&self, n: usize) -> Self {
        Self { shapes: self.shapes[..n.min(self.shapes.len())].to_vec(), ..self.clone() }
    }

    pub fn working_bounds(&self) -> Bounds {
        Bounds::new(self.w, self.h)
    }

    pub fn original_bounds(&self) -> Bounds {
        Bounds::new(self.w0, self.h0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != DOCUMENT_VERSION {
            return Err(Error::Document(format!("unsupported version {}", self.version)));
        }
        if self.w == 0 || self.h == 0 || self.w0 == 0 || self.h0 == 0 {
            return Err(Error::Document("dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("document serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }
}

/// Emitted SVG text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvgDocument(pub String);

impl SvgDocument {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Shortest decimal for `v` with at most six fractional digits.
fn fmt_num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

/// `v - 0.5` for integer `v`, formatted exactly.
fn fmt_half_below(v: i32) -> String {
    fmt_num(f64::from(v) - 0.5)
}

fn fmt_half(twice: i32) -> String {
    fmt_num(f64::from(twice) / 2.0)
}

fn hex(c: Color) -> String {
    format!("#{:02x}{:02x}{:02x}", c.r, c.g, c.b)
}

fn opacity(alpha: u8) -> String {
    format!("{:.4}", f64::from(alpha) / 255.0)
}

/// One SVG element for a placed shape, in working pixel-center coordinates.
pub fn shape_element(p: &PlacedShape) -> String {
    let paint = format!(r#"fill="{}" fill-opacity="{}"/>"#, hex(p.color), opacity(p.color.a));
    match p.shape {
        Shape::Triangle { x1, y1, x2, y2, x3, y3 } => {
            format!(r#"<polygon points="{x1},{y1} {x2},{y2} {x3},{y3}" {paint}"#)
        }
        Shape::Rectangle { x1, y1, x2, y2 } => format!(
            r#"<rect x="{}" y="{}" width="{}" height="{}" {paint}"#,
            fmt_half_below(x1.min(x2)),
            fmt_half_below(y1.min(y2)),
            (x2 - x1).abs() + 1,
            (y2 - y1).abs() + 1,
        ),
        Shape::RotatedRectangle { cx, cy, w, h, angle } => format!(
            r#"<rect x="{}" y="{}" width="{w}" height="{h}" transform="rotate({angle} {cx} {cy})" {paint}"#,
            fmt_half(2 * cx - w),
            fmt_half(2 * cy - h),
        ),
        Shape::Ellipse { cx, cy, rx, ry } => {
            format!(r#"<ellipse cx="{cx}" cy="{cy}" rx="{rx}" ry="{ry}" {paint}"#)
        }
        Shape::RotatedEllipse { cx, cy, rx, ry, angle } => format!(
            r#"<ellipse cx="{cx}" cy="{cy}" rx="{rx}" ry="{ry}" transform="rotate({angle} {cx} {cy})" {paint}"#
        ),
        Shape::Circle { cx, cy, r } => format!(r#"<circle cx="{cx}" cy="{cy}" r="{r}" {paint}"#),
    }
}

pub fn emit_svg(doc: &ShapeListDocument) -> SvgDocument {
    let mut out = String::with_capacity(160 + doc.shapes.len() * 72);
    let sx = f64::from(doc.w0) / f64::from(doc.w);
    let sy = f64::from(doc.h0) / f64::from(doc.h);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}">"#,
        doc.w0, doc.h0
    );
    let _ = writeln!(out, r#"<g transform="scale({} {})">"#, fmt_num(sx), fmt_num(sy));
    let _ = writeln!(out, r#"<rect width="{}" height="{}" fill="{}"/>"#, doc.w, doc.h, hex(doc.bg));
    out.push_str("<g transform=\"translate(0.5 0.5)\">\n");
    for p in &doc.shapes {
        out.push_str(&shape_element(p));
        out.push('\n');
    }
    out.push_str("</g>\n</g>\n</svg>\n");
    SvgDocument(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tag {
    Open { name: String, attrs: Vec<(String, String)>, self_closing: bool },
    Close(String),
}

impl Tag {
    fn attr(&self, key: &str) -> Option<&str> {
        match self {
            Tag::Open { attrs, .. } => attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()),
            Tag::Close(_) => None,
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            Tag::Open { name, attrs, self_closing } => {
                out.push('<');
                out.push_str(name);
                for (k, v) in attrs {
                    let _ = write!(out, r#" {k}="{v}""#);
                }
                out.push_str(if *self_closing { "/>" } else { ">" });
            }
            Tag::Close(name) => {
                let _ = write!(out, "</{name}>");
            }
        }
    }
}

fn svg_err(msg: impl Into<String>) -> Error {
    Error::SvgParse(msg.into())
}

fn tokenize(text: &str) -> Result<Vec<Tag>> {
    let mut tags = Vec::new();
    let mut rest = text;
    loop {
        let Some(open) = rest.find('<') else {
            if !rest.trim().is_empty() {
                return Err(svg_err("text content outside elements"));
            }
            return Ok(tags);
        };
        if !rest[..open].trim().is_empty() {
            return Err(svg_err("text content outside elements"));
        }
        let close = rest[open..].find('>').ok_or_else(|| svg_err("unterminated tag"))? + open;
        tags.push(parse_tag(&rest[open + 1..close])?);
        rest = &rest[close + 1..];
    }
}

fn parse_tag(body: &str) -> Result<Tag> {
    if let Some(name) = body.strip_prefix('/') {
        return Ok(Tag::Close(name.trim().to_string()));
    }
    let (body, self_closing) = match body.strip_suffix('/') {
        Some(b) => (b, true),
        None => (body, false),
    };
    let body = body.trim();
    let name_end = body.find(char::is_whitespace).unwrap_or(body.len());
    let name = body[..name_end].to_string();
    if name.is_empty() {
        return Err(svg_err("empty tag name"));
    }
    let mut attrs = Vec::new();
    let mut rest = body[name_end..].trim_start();
    while !rest.is_empty() {
        let eq = rest.find("=\"").ok_or_else(|| svg_err(format!("bad attribute in <{name}>")))?;
        let key = rest[..eq].trim().to_string();
        let after = &rest[eq + 2..];
        let end = after.find('"').ok_or_else(|| svg_err("unterminated attribute value"))?;
        attrs.push((key, after[..end].to_string()));
        rest = after[end + 1..].trim_start();
    }
    Ok(Tag::Open { name, attrs, self_closing })
}

fn parse_int(v: &str) -> Result<i32> {
    v.parse::<i32>().map_err(|_| svg_err(format!("expected integer, got '{v}'")))
}

fn parse_f64(v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| svg_err(format!("expected number, got '{v}'")))
}

/// Integer pixel-center coordinate from an emitted `v - 0.5` edge value.
fn parse_edge(v: &str) -> Result<i32> {
    Ok((parse_f64(v)? + 0.5).round() as i32)
}

fn parse_color(v: &str) -> Result<Color> {
    let h = v.strip_prefix('#').ok_or_else(|| svg_err(format!("bad color '{v}'")))?;
    let nibble = |c: u8| -> Result<u8> {
        (c as char).to_digit(16).map(|d| d as u8).ok_or_else(|| svg_err(format!("bad color '{v}'")))
    };
    let b = h.as_bytes();
    match b.len() {
        6 => Ok(Color::opaque(
            nibble(b[0])? * 16 + nibble(b[1])?,
            nibble(b[2])? * 16 + nibble(b[3])?,
            nibble(b[4])? * 16 + nibble(b[5])?,
        )),
        3 => Ok(Color::opaque(nibble(b[0])? * 17, nibble(b[1])? * 17, nibble(b[2])? * 17)),
        _ => Err(svg_err(format!("bad color '{v}'"))),
    }
}

/// `rotate(a cx cy)` → `(a, cx, cy)`.
fn parse_rotation(v: &str) -> Result<(i32, i32, i32)> {
    let inner = v
        .strip_prefix("rotate(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| svg_err(format!("bad transform '{v}'")))?;
    let parts: Vec<&str> = inner.split_whitespace().collect();
    match parts.as_slice() {
        [a, cx, cy] => Ok((parse_int(a)?, parse_int(cx)?, parse_int(cy)?)),
        _ => Err(svg_err(format!("bad transform '{v}'"))),
    }
}

fn need<'a>(tag: &'a Tag, key: &str) -> Result<&'a str> {
    tag.attr(key).ok_or_else(|| svg_err(format!("missing attribute '{key}'")))
}

fn parse_shape_element(tag: &Tag) -> Result<PlacedShape> {
    let Tag::Open { name, .. } = tag else { return Err(svg_err("expected element")) };
    let int = |k: &str| need(tag, k).and_then(parse_int);
    let shape = match (name.as_str(), tag.attr("transform")) {
        ("polygon", None) => {
            let pts: Vec<i32> = need(tag, "points")?
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(parse_int)
                .collect::<Result<_>>()?;
            let [x1, y1, x2, y2, x3, y3] = pts[..] else {
                return Err(svg_err("polygon must have three points"));
            };
            Shape::Triangle { x1, y1, x2, y2, x3, y3 }
        }
        ("rect", None) => {
            let x1 = parse_edge(need(tag, "x")?)?;
            let y1 = parse_edge(need(tag, "y")?)?;
            Shape::Rectangle { x1, y1, x2: x1 + int("width")? - 1, y2: y1 + int("height")? - 1 }
        }
        ("rect", Some(t)) => {
            let (angle, cx, cy) = parse_rotation(t)?;
            Shape::RotatedRectangle { cx, cy, w: int("width")?, h: int("height")?, angle }
        }
        ("ellipse", None) => Shape::Ellipse { cx: int("cx")?, cy: int("cy")?, rx: int("rx")?, ry: int("ry")? },
        ("ellipse", Some(t)) => {
            let (angle, _, _) = parse_rotation(t)?;
            Shape::RotatedEllipse { cx: int("cx")?, cy: int("cy")?, rx: int("rx")?, ry: int("ry")?, angle }
        }
        ("circle", None) => Shape::Circle { cx: int("cx")?, cy: int("cy")?, r: int("r")? },
        (other, _) => return Err(svg_err(format!("unexpected element <{other}>"))),
    };
    let fill = parse_color(need(tag, "fill")?)?;
    let op = parse_f64(need(tag, "fill-opacity")?)?;
    if !(0.0..=1.0).contains(&op) {
        return Err(svg_err(format!("opacity {op} out of range")));
    }
    let alpha = (op * 255.0).round() as u8;
    Ok(PlacedShape { shape, color: Color::rgba(fill.r, fill.g, fill.b, alpha) })
}

/// Recovers the document from SVG produced by [`emit_svg`] (minified or not).
pub fn parse_svg(text: &str) -> Result<ShapeListDocument> {
    let tags = tokenize(text)?;
    let mut it = tags.iter();
    let root = it.next().ok_or_else(|| svg_err("empty document"))?;
    if !matches!(root, Tag::Open { name, .. } if name == "svg") {
        return Err(svg_err("root element must be <svg>"));
    }
    let w0 = need(root, "width").and_then(parse_int)?;
    let h0 = need(root, "height").and_then(parse_int)?;
    let scale = it.next().ok_or_else(|| svg_err("missing scale group"))?;
    if !matches!(scale, Tag::Open { name, self_closing: false, .. } if name == "g") {
        return Err(svg_err("expected scale group"));
    }
    let bg = it.next().ok_or_else(|| svg_err("missing background"))?;
    if !matches!(bg, Tag::Open { name, .. } if name == "rect") {
        return Err(svg_err("expected background rect"));
    }
    let w = need(bg, "width").and_then(parse_int)?;
    let h = need(bg, "height").and_then(parse_int)?;
    let bg_color = parse_color(need(bg, "fill")?)?;
    match it.next() {
        Some(Tag::Open { name, self_closing: false, .. }) if name == "g" => {}
        _ => return Err(svg_err("expected shape group")),
    }
    let mut shapes = Vec::new();
    let mut closes = 0;
    for tag in it {
        match tag {
            Tag::Close(name) => {
                let expected = if closes < 2 { "g" } else { "svg" };
                if name != expected || closes > 2 {
                    return Err(svg_err(format!("unexpected </{name}>")));
                }
                closes += 1;
            }
            Tag::Open { .. } if closes == 0 => shapes.push(parse_shape_element(tag)?),
            Tag::Open { .. } => return Err(svg_err("element after shape group")),
        }
    }
    if closes != 3 {
        return Err(svg_err("unterminated document"));
    }
    if w <= 0 || h <= 0 || w0 <= 0 || h0 <= 0 {
        return Err(svg_err("non-positive dimensions"));
    }
    Ok(ShapeListDocument::new((w0 as u32, h0 as u32), (w as u32, h as u32), bg_color, shapes))
}

fn collapse_hex(v: &str) -> String {
    let b = v.as_bytes();
    if b.len() == 7 && b[0] == b'#' && b[1] == b[2] && b[3] == b[4] && b[5] == b[6] {
        format!("#{}{}{}", b[1] as char, b[3] as char, b[5] as char)
    } else {
        v.to_string()
    }
}

fn trim_decimal(v: &str) -> String {
    if v.contains('.') {
        v.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        v.to_string()
    }
}

/// Drops inter-element whitespace, collapses `#aabbcc` to `#abc` and trims
/// trailing zeros from opacities.
pub fn minify_svg(svg: &SvgDocument) -> Result<SvgDocument> {
    parse_svg(svg.as_str())?;
    let mut out = String::with_capacity(svg.len());
    for mut tag in tokenize(svg.as_str())? {
        if let Tag::Open { attrs, .. } = &mut tag {
            for (k, v) in attrs.iter_mut() {
                match k.as_str() {
                    "fill" => *v = collapse_hex(v),
                    "fill-opacity" => *v = trim_decimal(v),
                    _ => {}
                }
            }
        }
        tag.write(&mut out);
    }
    Ok(SvgDocument(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderScale {
    Working,
    Original,
}

/// Coverage of a working-space shape on a canvas of `target` size.
///
/// Original pixel center `(X + 0.5, Y + 0.5)` maps to working pixel-center
/// coordinates `((X + 0.5) * w / w0 - 0.5, ...)`, matching the SVG transforms.
pub fn scaled_coverage(shape: &Shape, working: Bounds, target: Bounds) -> SpanList {
    if working == target {
        return shape.rasterize(working);
    }
    let region = shape.region();
    let kx = f64::from(working.width) / f64::from(target.width);
    let ky = f64::from(working.height) / f64::from(target.height);
    let (l, t, r, b) = region.bbox();
    let to_target = |v: f64, k: f64| (v + 0.5) / k - 0.5;
    let x_lo = (to_target(l, kx).floor() as i64 - 1).max(0);
    let x_hi = (to_target(r, kx).ceil() as i64 + 1).min(i64::from(target.width) - 1);
    let y_lo = (to_target(t, ky).floor() as i64 - 1).max(0);
    let y_hi = (to_target(b, ky).ceil() as i64 + 1).min(i64::from(target.height) - 1);
    let mut spans = Vec::new();
    for y in y_lo..=y_hi {
        let py = (y as f64 + 0.5) * ky - 0.5;
        let mut run: Option<(i64, i64)> = None;
        for x in x_lo..=x_hi {
            let px = (x as f64 + 0.5) * kx - 0.5;
            if region.contains(px, py) {
                run = Some(match run {
                    Some((s, _)) => (s, x),
                    None => (x, x),
                });
            } else if let Some((s, e)) = run.take() {
                spans.push(Span { y: y as u32, x1: s as u32, x2: e as u32 });
            }
        }
        if let Some((s, e)) = run {
            spans.push(Span { y: y as u32, x1: s as u32, x2: e as u32 });
        }
    }
    SpanList::from_spans(spans, target).expect("runs are sorted and clipped")
}

pub fn render(doc: &ShapeListDocument, at: RenderScale) -> RasterImage {
    let working = doc.working_bounds();
    let target = match at {
        RenderScale::Working => working,
        RenderScale::Original => doc.original_bounds(),
    };
    let mut canvas = RasterImage::filled(target.width, target.height, doc.bg).expect("bounds are positive");
    let mut spans = SpanList::default();
    for p in &doc.shapes {
        if at == RenderScale::Working {
            p.shape.rasterize_into(working, &mut spans);
        } else {
            spans = scaled_coverage(&p.shape, working, target);
        }
        canvas.blend_spans_in_place(&spans, p.color);
    }
    canvas
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub svg_bytes: u64,
    pub minified_bytes: u64,
    /// PNG of the original-resolution render.
    pub png_bytes: u64,
    pub per_kind_mean_element_bytes: BTreeMap<ShapeKind, f64>,
}

pub fn size_report(doc: &ShapeListDocument) -> Result<SizeReport> {
    let svg = emit_svg(doc);
    let minified = minify_svg(&svg)?;
    let png = render(doc, RenderScale::Original).to_png()?;
    let mut per_kind: BTreeMap<ShapeKind, (u64, u64)> = BTreeMap::new();
    for p in &doc.shapes {
        let e = per_kind.entry(p.shape.kind()).or_default();
        e.0 += shape_element(p).len() as u64;
        e.1 += 1;
    }
    Ok(SizeReport {
        svg_bytes: svg.len() as u64,
        minified_bytes: minified.len() as u64,
        png_bytes: png.len() as u64,
        per_kind_mean_element_bytes: per_kind.into_iter().map(|(k, (sum, n))| (k, sum as f64 / n as f64)).collect(),
    })
}
