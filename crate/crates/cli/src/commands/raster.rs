use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use sdmapkit::align::augment_nodes;
use sdmapkit::formats::{read_bev, write_aug, write_bev, AugFile};
use sdmapkit::raster::{canvas_to_png, rasterize as draw, BevSpec, ClassPalette, Geometry};

use super::{decoded, load_sdg, open, required, write_bytes, write_file};
use crate::config::{merge_from_config, Pair};
use crate::error::{CliError, CliResult};

/// Rasterize an sdg-json graph into a bev-f32 canvas.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RasterizeArgs {
    #[arg(long)]
    pub sdg: Option<PathBuf>,
    /// Output bev-f32 file.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write an 8-bit PNG preview.
    #[arg(long)]
    pub png: Option<PathBuf>,
    /// Forward extent "min,max" in meters [default: -50,50].
    #[arg(long, allow_hyphen_values = true)]
    pub x_range: Option<Pair>,
    /// Lateral extent "min,max" in meters [default: -25,25].
    #[arg(long, allow_hyphen_values = true)]
    pub y_range: Option<Pair>,
    /// Meters per cell [default: 0.5].
    #[arg(long)]
    pub resolution: Option<f64>,
    /// "osm", "olv2" or a JSON palette file [default: osm].
    #[arg(long)]
    pub palette: Option<String>,
}

merge_from_config!(RasterizeArgs { sdg, out, png, x_range, y_range, resolution, palette });

pub(crate) fn bev_spec(x: Option<Pair>, y: Option<Pair>, resolution: Option<f64>) -> CliResult<BevSpec> {
    let d = BevSpec::default();
    let x = x.map_or(d.x_range, |p| (p.0, p.1));
    let y = y.map_or(d.y_range, |p| (p.0, p.1));
    BevSpec::new(x, y, resolution.unwrap_or(d.resolution)).map_err(|e| CliError::Usage(e.to_string()))
}

pub(crate) fn load_palette(name: Option<&str>) -> CliResult<ClassPalette> {
    let palette = match name.unwrap_or("osm") {
        "osm" => ClassPalette::osm(),
        "olv2" => ClassPalette::olv2(),
        file => {
            let path = Path::new(file);
            let p: ClassPalette = serde_json::from_reader(open(path)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            p.validate().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            p
        }
    };
    Ok(palette)
}

pub fn rasterize(args: RasterizeArgs) -> CliResult<()> {
    let sdg = required(args.sdg, "sdg")?;
    let out = required(args.out, "out")?;
    let spec = bev_spec(args.x_range, args.y_range, args.resolution)?;
    let palette = load_palette(args.palette.as_deref())?;
    let doc = load_sdg(&sdg)?;
    let raster = draw(Geometry::Graph(&doc.graph), &spec, &palette)?;
    if raster.empty {
        eprintln!("rasterize: warning: no geometry intersects the canvas");
    }
    if raster.unstyled > 0 {
        eprintln!("rasterize: warning: {} elements have no palette entry and were skipped", raster.unstyled);
    }
    let lit = raster.canvas.data.iter().filter(|&&v| v > 0.0).count();
    eprintln!("rasterize: {}x{}x{} canvas, {lit} lit values", spec.rows(), spec.cols(), palette.channel_count());
    write_file(&out, |w| write_bev(w, &raster.canvas))?;
    if let Some(png) = args.png {
        write_bytes(&png, &canvas_to_png(&raster.canvas, &palette)?)?;
    }
    Ok(())
}

/// Attach BEV features at each graph node's cell and write aug-f32.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AlignArgs {
    #[arg(long)]
    pub sdg: Option<PathBuf>,
    /// bev-f32 feature canvas; its header fixes the grid.
    #[arg(long)]
    pub bev: Option<PathBuf>,
    /// Output aug-f32 file.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

merge_from_config!(AlignArgs { sdg, bev, out });

pub fn align(args: AlignArgs) -> CliResult<()> {
    let sdg = required(args.sdg, "sdg")?;
    let bev = required(args.bev, "bev")?;
    let out = required(args.out, "out")?;
    let doc = load_sdg(&sdg)?;
    let canvas = decoded(&bev, read_bev(open(&bev)?))?;
    let features = augment_nodes(&doc.graph, canvas.data.view(), &canvas.spec)?;
    let in_range = features.iter().filter(|f| f.grid.in_range).count();
    eprintln!("align: {} nodes, {in_range} inside the grid", features.len());
    let file = AugFile::from_features(&features)?;
    write_file(&out, |w| write_aug(w, &file))
}
