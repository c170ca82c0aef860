//! BEV rasterization of SD map geometry.
//!
//! Grid convention: rows follow the ego forward axis (x), columns the lateral
//! axis (y). Row `i` covers `x ∈ [(i - H/2)·res, (i - H/2 + 1)·res)` and
//! column `j` likewise for `y`, so the ego origin is the corner shared by
//! cells `(H/2 - 1, W/2 - 1)` and `(H/2, W/2)`.

use std::collections::BTreeMap;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};
use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::CartesianPoint;
use crate::graph::SdMapGraph;
use crate::osm::HighwayClass;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BevSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: f64,
}

impl Default for BevSpec {
    /// ±50 m forward, ±25 m lateral, 0.5 m cells: a 200×100 grid.
    fn default() -> Self {
        BevSpec {
            x_range: (-50.0, 50.0),
            y_range: (-25.0, 25.0),
            resolution: 0.5,
        }
    }
}

impl BevSpec {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), resolution: f64) -> Result<Self> {
        let spec = BevSpec {
            x_range,
            y_range,
            resolution,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return bad(format!("resolution must be > 0, got {}", self.resolution));
        }
        for (name, (lo, hi)) in [("x_range", self.x_range), ("y_range", self.y_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("{name} ({lo}, {hi}) is degenerate"));
            }
            if (lo + hi).abs() > 1e-9 * (hi - lo) {
                return bad(format!("{name} ({lo}, {hi}) is not centered on the ego"));
            }
        }
        let (h, w) = (self.rows(), self.cols());
        if h == 0 || w == 0 || h % 2 != 0 || w % 2 != 0 {
            return bad(format!("grid {h}x{w} must have even, non-zero dimensions"));
        }
        Ok(())
    }

    /// `H_B`: cells along the forward axis.
    pub fn rows(&self) -> usize {
        ((self.x_range.1 - self.x_range.0) / self.resolution).round() as usize
    }

    /// `W_B`: cells along the lateral axis.
    pub fn cols(&self) -> usize {
        ((self.y_range.1 - self.y_range.0) / self.resolution).round() as usize
    }

    pub fn cells_per_meter(&self) -> f64 {
        1.0 / self.resolution
    }

    pub fn row_center(&self, i: usize) -> f64 {
        (i as f64 - (self.rows() / 2) as f64 + 0.5) * self.resolution
    }

    pub fn col_center(&self, j: usize) -> f64 {
        (j as f64 - (self.cols() / 2) as f64 + 0.5) * self.resolution
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStyle {
    pub name: String,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStyle {
    pub channel: usize,
    /// Stroke width in meters.
    pub width: f64,
}

/// Maps class names to output channels and stroke widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassPalette {
    pub channels: Vec<ChannelStyle>,
    pub classes: BTreeMap<String, ClassStyle>,
}

impl ClassPalette {
    /// Four channels grouping the highway classes: major roads, minor roads,
    /// paths and point features.
    pub fn osm() -> Self {
        use HighwayClass::*;
        let channels = vec![
            ChannelStyle { name: "major".into(), color: [230, 80, 60] },
            ChannelStyle { name: "minor".into(), color: [240, 200, 80] },
            ChannelStyle { name: "path".into(), color: [90, 200, 120] },
            ChannelStyle { name: "point".into(), color: [80, 140, 240] },
        ];
        let mut classes = BTreeMap::new();
        for c in HighwayClass::ALL {
            let (channel, width) = match c {
                Motorway | MotorwayLink | MotorwayJunction | Trunk | TrunkLink | Primary
                | PrimaryLink | Secondary | SecondaryLink => (0, 1.5),
                Tertiary | TertiaryLink | Residential | Unclassified | Road | LivingStreet
                | Service | Services => (1, 1.0),
                Path => (2, 0.5),
                Crossing | Stop | TrafficSignals | TrafficSign | MiniRoundabout
                | TurningCircle | TurningLoop => (3, 1.5),
            };
            classes.insert(c.as_str().to_string(), ClassStyle { channel, width });
        }
        ClassPalette { channels, classes }
    }

    /// Road, crosswalk and sidewalk polylines, one channel each.
    pub fn olv2() -> Self {
        let names = [("road", [255, 255, 255]), ("crosswalk", [255, 120, 0]), ("sidewalk", [0, 160, 255])];
        ClassPalette {
            channels: names
                .iter()
                .map(|(n, c)| ChannelStyle { name: n.to_string(), color: *c })
                .collect(),
            classes: names
                .iter()
                .enumerate()
                .map(|(i, (n, _))| (n.to_string(), ClassStyle { channel: i, width: 1.0 }))
                .collect(),
        }
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn style(&self, class: &str) -> Option<&ClassStyle> {
        self.classes.get(class)
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(Error::InvalidSpec("palette has no channels".into()));
        }
        for (name, style) in &self.classes {
            if style.channel >= self.channels.len() {
                return Err(Error::InvalidSpec(format!(
                    "class '{name}' maps to missing channel {}",
                    style.channel
                )));
            }
            if !(style.width.is_finite() && style.width > 0.0) {
                return Err(Error::InvalidSpec(format!("class '{name}' has width {}", style.width)));
            }
        }
        Ok(())
    }
}

/// Ego-frame polyline with a class name understood by the palette.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassedPolyline {
    pub class: String,
    pub points: Vec<CartesianPoint>,
}

pub enum Geometry<'a> {
    Graph(&'a SdMapGraph),
    Polylines(&'a [ClassedPolyline]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BevCanvas {
    pub spec: BevSpec,
    /// `H_B × W_B × C`, values in `[0, 1]`.
    pub data: Array3<f32>,
}

impl BevCanvas {
    pub fn zeros(spec: BevSpec, channels: usize) -> Self {
        BevCanvas {
            spec,
            data: Array3::zeros((spec.rows(), spec.cols(), channels)),
        }
    }

    pub fn channels(&self) -> usize {
        self.data.dim().2
    }

    pub fn lit_cells(&self, channel: usize) -> Vec<(usize, usize)> {
        let (h, w, _) = self.data.dim();
        let mut out = Vec::new();
        for i in 0..h {
            for j in 0..w {
                if self.data[[i, j, channel]] > 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Stamps a stroke of the given width around segment `a→b`.
    pub fn draw_segment(&mut self, channel: usize, a: CartesianPoint, b: CartesianPoint, width: f64) {
        let spec = self.spec;
        let (h, w) = (spec.rows() as i64, spec.cols() as i64);
        let half = width / 2.0;
        let inv = spec.cells_per_meter();
        // conservative candidate window, one cell of padding on each side
        let row_lo = ((a.x.min(b.x) - half) * inv).floor() as i64 + h / 2 - 1;
        let row_hi = ((a.x.max(b.x) + half) * inv).floor() as i64 + h / 2 + 1;
        let col_lo = ((a.y.min(b.y) - half) * inv).floor() as i64 + w / 2 - 1;
        let col_hi = ((a.y.max(b.y) + half) * inv).floor() as i64 + w / 2 + 1;
        if row_hi < 0 || col_hi < 0 || row_lo >= h || col_lo >= w {
            return;
        }
        for i in row_lo.max(0)..=row_hi.min(h - 1) {
            let cx = spec.row_center(i as usize);
            for j in col_lo.max(0)..=col_hi.min(w - 1) {
                let cy = spec.col_center(j as usize);
                if point_segment_distance(CartesianPoint::new(cx, cy), a, b) <= half {
                    self.data[[i as usize, j as usize, channel]] = 1.0;
                }
            }
        }
    }
}

/// Euclidean distance from `p` to the closed segment `a→b`.
pub fn point_segment_distance(p: CartesianPoint, a: CartesianPoint, b: CartesianPoint) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.x + t * dx, a.y + t * dy);
    (p.x - qx).hypot(p.y - qy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterOutput {
    pub canvas: BevCanvas,
    /// Nothing intersected the canvas; the canvas is all zero.
    pub empty: bool,
    /// Geometry elements whose class has no palette entry.
    pub unstyled: usize,
}

/// Draws graph edges (and isolated annotation nodes as dots) or polylines
/// into a canvas with one channel per palette channel.
pub fn rasterize(geometry: Geometry<'_>, spec: &BevSpec, palette: &ClassPalette) -> Result<RasterOutput> {
    spec.validate()?;
    palette.validate()?;
    let mut canvas = BevCanvas::zeros(*spec, palette.channel_count());
    let mut unstyled = 0;
    let mut stroke = |class: &str, a: CartesianPoint, b: CartesianPoint, canvas: &mut BevCanvas| {
        match palette.style(class) {
            Some(style) => canvas.draw_segment(style.channel, a, b, style.width),
            None => unstyled += 1,
        }
    };
    match geometry {
        Geometry::Graph(graph) => {
            for e in &graph.edges {
                let (a, b) = (graph.nodes[e.a].position, graph.nodes[e.b].position);
                stroke(e.class.as_str(), a, b, &mut canvas);
            }
            for (node, deg) in graph.nodes.iter().zip(graph.degrees()) {
                if deg == 0 {
                    stroke(node.class.as_str(), node.position, node.position, &mut canvas);
                }
            }
        }
        Geometry::Polylines(lines) => {
            for line in lines {
                match line.points.as_slice() {
                    [] => {}
                    [p] => stroke(&line.class, *p, *p, &mut canvas),
                    pts => {
                        for pair in pts.windows(2) {
                            stroke(&line.class, pair[0], pair[1], &mut canvas);
                        }
                    }
                }
            }
        }
    }
    let empty = canvas.data.iter().all(|&v| v == 0.0);
    Ok(RasterOutput {
        canvas,
        empty,
        unstyled,
    })
}

/// Encodes a canvas as an 8-bit PNG with forward (+x) pointing up and the ego
/// at the image center. One channel gives a grayscale image; two to four
/// channels are composited in RGB using the palette colors.
pub fn canvas_to_png(canvas: &BevCanvas, palette: &ClassPalette) -> Result<Vec<u8>> {
    let (h, w, c) = canvas.data.dim();
    if c > 4 {
        return Err(Error::TooManyChannels(c));
    }
    let to_u8 = |v: f32| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    let mut out = Vec::new();
    let encoder = PngEncoder::new(&mut out);
    if c <= 1 {
        let mut pixels = vec![0u8; h * w];
        if c == 1 {
            for r in 0..h {
                for col in 0..w {
                    pixels[r * w + col] = to_u8(canvas.data[[h - 1 - r, w - 1 - col, 0]]);
                }
            }
        }
        encoder.write_image(&pixels, w as u32, h as u32, ExtendedColorType::L8)?;
    } else {
        if palette.channel_count() < c {
            return Err(Error::InvalidSpec(format!(
                "palette defines {} channels, canvas has {c}",
                palette.channel_count()
            )));
        }
        let mut pixels = vec![0u8; h * w * 3];
        for r in 0..h {
            for col in 0..w {
                let (i, j) = (h - 1 - r, w - 1 - col);
                let px = &mut pixels[(r * w + col) * 3..(r * w + col) * 3 + 3];
                for k in 0..c {
                    let v = canvas.data[[i, j, k]].clamp(0.0, 1.0);
                    for (dst, src) in px.iter_mut().zip(palette.channels[k].color) {
                        *dst = (*dst).max((v * src as f32).round() as u8);
                    }
                }
            }
        }
        encoder.write_image(&pixels, w as u32, h as u32, ExtendedColorType::Rgb8)?;
    }
    Ok(out)
}
