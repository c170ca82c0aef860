use std::io::Read;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use image::imageops::{resize, FilterType};
use image::{ImageFormat, Rgb, RgbImage};
use imageproc::drawing::{draw_filled_circle_mut, draw_filled_rect_mut, draw_hollow_rect_mut, draw_line_segment_mut};
use imageproc::rect::Rect;
use serde::Deserialize;

use sdmapkit::formats::{read_bev, read_sdg};
use sdmapkit::geo::CartesianPoint;
use sdmapkit::graph::SdMapGraph;
use sdmapkit::metrics::MetricReport;
use sdmapkit::raster::{canvas_to_png, BevCanvas, BevSpec, ClassPalette};

use super::raster::{bev_spec, load_palette};
use super::{decoded, open, required, write_file};
use crate::config::{merge_from_config, Pair};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    /// Guess from the input contents.
    Auto,
    /// sdg-json graph drawn over an optional BEV canvas.
    Graph,
    /// Bar chart of a metric report.
    Report,
}

/// Draw a graph overlay or a metric bar chart as PNG.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PlotArgs {
    /// sdg-json graph or metric report JSON.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<PlotKind>,
    /// bev-f32 canvas drawn under the graph; its header fixes the extent.
    #[arg(long)]
    pub bev: Option<PathBuf>,
    /// Pixels per cell for graph plots [default: 4].
    #[arg(long)]
    pub scale: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_range: Option<Pair>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_range: Option<Pair>,
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Palette for edge colors and the background [default: osm].
    #[arg(long)]
    pub palette: Option<String>,
}

merge_from_config!(PlotArgs { input, out, kind, bev, scale, x_range, y_range, resolution, palette });

const BACKGROUND: Rgb<u8> = Rgb([16, 16, 20]);

pub fn plot(args: PlotArgs) -> CliResult<()> {
    let input = required(args.input.clone(), "input")?;
    let out = required(args.out.clone(), "out")?;
    let mut bytes = Vec::new();
    open(&input)?
        .read_to_end(&mut bytes)
        .map_err(|source| CliError::Io { path: input.clone(), source })?;
    let kind = match args.kind.unwrap_or(PlotKind::Auto) {
        PlotKind::Auto if serde_json::from_slice::<MetricReport>(&bytes).is_ok() => PlotKind::Report,
        PlotKind::Auto => PlotKind::Graph,
        k => k,
    };
    let image = match kind {
        PlotKind::Report => {
            let report: MetricReport = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Usage(format!("{}: not a metric report: {e}", input.display())))?;
            metric_bars(&report)
        }
        _ => {
            let doc = decoded(&input, read_sdg(bytes.as_slice()))?;
            let palette = load_palette(args.palette.as_deref())?;
            let background = match &args.bev {
                Some(p) => Some(decoded(p, read_bev(open(p)?))?),
                None => None,
            };
            let spec = match &background {
                Some(c) => c.spec,
                None => bev_spec(args.x_range, args.y_range, args.resolution)?,
            };
            let scale = args.scale.unwrap_or(4);
            if scale == 0 || scale > 64 {
                return Err(CliError::Usage(format!("--scale must be in 1..=64, got {scale}")));
            }
            graph_overlay(&doc.graph, &spec, background.as_ref(), &palette, scale)?
        }
    };
    write_file(&out, |w| Ok(image.write_to(w, ImageFormat::Png)?))
}

/// Graph edges and nodes in the PNG layout of the raster export: forward up,
/// ego at the center, `scale` pixels per cell.
pub fn graph_overlay(
    graph: &SdMapGraph,
    spec: &BevSpec,
    background: Option<&BevCanvas>,
    palette: &ClassPalette,
    scale: u32,
) -> sdmapkit::Result<RgbImage> {
    let (h, w) = (spec.rows() as u32, spec.cols() as u32);
    let mut img = match background {
        Some(canvas) => {
            let base = image::load_from_memory(&canvas_to_png(canvas, palette)?)?.to_rgb8();
            let mut img = resize(&base, w * scale, h * scale, FilterType::Nearest);
            // dim the raster so the vector overlay stays readable
            for p in img.pixels_mut() {
                p.0 = p.0.map(|v| v / 3);
            }
            img
        }
        None => RgbImage::from_pixel(w * scale, h * scale, BACKGROUND),
    };
    let k = scale as f32;
    let to_px = |p: CartesianPoint| {
        let col = (w as f64 / 2.0 - p.y / spec.resolution) as f32 * k;
        let row = (h as f64 / 2.0 - p.x / spec.resolution) as f32 * k;
        (col, row)
    };
    let color = |class: &str| {
        palette
            .style(class)
            .map_or(Rgb([200, 200, 200]), |s| Rgb(palette.channels[s.channel].color))
    };
    for e in &graph.edges {
        let (a, b) = (graph.nodes[e.a].position, graph.nodes[e.b].position);
        draw_line_segment_mut(&mut img, to_px(a), to_px(b), color(e.class.as_str()));
    }
    let radius = (scale as i32 / 2).max(1);
    for node in &graph.nodes {
        let (x, y) = to_px(node.position);
        draw_filled_circle_mut(&mut img, (x.round() as i32, y.round() as i32), radius, color(node.class.as_str()));
    }
    let (cx, cy) = to_px(CartesianPoint::new(0.0, 0.0));
    draw_filled_circle_mut(&mut img, (cx as i32, cy as i32), radius + 2, Rgb([255, 255, 255]));
    Ok(img)
}

/// One slot per headline metric; the frame is 1.0 and a missing metric leaves
/// its slot empty.
pub fn metric_bars(report: &MetricReport) -> RgbImage {
    const SLOT: u32 = 60;
    const HEIGHT: u32 = 200;
    const PAD: u32 = 20;
    let metrics = [
        (report.map, Rgb([90, 160, 230])),
        (report.det_l, Rgb([230, 120, 80])),
        (report.det_t, Rgb([240, 190, 70])),
        (report.top_ll, Rgb([110, 200, 120])),
        (report.top_lt, Rgb([170, 120, 220])),
        (report.ols, Rgb([235, 235, 235])),
    ];
    let width = PAD * 2 + SLOT * metrics.len() as u32;
    let mut img = RgbImage::from_pixel(width, HEIGHT + PAD * 2, BACKGROUND);
    for (i, (value, color)) in metrics.iter().enumerate() {
        let x = (PAD + i as u32 * SLOT + 10) as i32;
        let frame = Rect::at(x, PAD as i32).of_size(SLOT - 20, HEIGHT);
        draw_hollow_rect_mut(&mut img, frame, Rgb([90, 90, 100]));
        if let Some(v) = value {
            let bar = (v.clamp(0.0, 1.0) * HEIGHT as f64).round() as u32;
            if bar > 0 {
                let top = (PAD + HEIGHT - bar) as i32;
                draw_filled_rect_mut(&mut img, Rect::at(x, top).of_size(SLOT - 20, bar), *color);
            }
        }
    }
    img
}
