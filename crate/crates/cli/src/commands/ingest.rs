use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use sdmapkit::formats::{read_poses, write_sdg, SdgDocument};
use sdmapkit::geo::{bounding_region, EgoPose, GeoPoint, DEFAULT_MARGIN_M};
use sdmapkit::graph::{build_graph, resample_graph, BuildOptions, DEFAULT_DENSITY_M};
use sdmapkit::osm::{filter_highways, parse_osm_xml, Diagnostic};

use super::{create_dir, decoded, open, required, write_file};
use crate::config::{merge_from_config, Anchor, Pair};
use crate::error::{CliError, CliResult};

/// Build ego-centric, resampled SD graphs from OSM XML and a pose list.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct IngestArgs {
    /// OSM XML (v0.6) file.
    #[arg(long)]
    pub osm: Option<PathBuf>,
    /// JSON pose list, {x, y, heading} or {lat, lon, heading} records.
    #[arg(long)]
    pub poses: Option<PathBuf>,
    /// Output sdg-json file, or a directory with --anchor all.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Horizon added around the pose hull, meters [default: 200].
    #[arg(long)]
    pub margin: Option<f64>,
    /// Waypoint spacing after resampling, meters [default: 1].
    #[arg(long)]
    pub density: Option<f64>,
    /// Projection origin "lat,lon" [default: first geographic pose].
    #[arg(long)]
    pub origin: Option<Pair>,
    /// Pose index anchoring the ego frame, or "all" for one graph per pose [default: 0].
    #[arg(long)]
    pub anchor: Option<Anchor>,
    /// Drop node-tagged highway classes instead of keeping them as isolated nodes.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_annotations: Option<bool>,
}

merge_from_config!(IngestArgs { osm, poses, out, margin, density, origin, anchor, no_annotations });

pub fn ingest(args: IngestArgs) -> CliResult<()> {
    let osm_path = required(args.osm, "osm")?;
    let poses_path = required(args.poses, "poses")?;
    let out = required(args.out, "out")?;
    let margin = args.margin.unwrap_or(DEFAULT_MARGIN_M);
    let density = args.density.unwrap_or(DEFAULT_DENSITY_M);
    if !(margin.is_finite() && margin >= 0.0) {
        return Err(CliError::Usage(format!("--margin must be >= 0, got {margin}")));
    }
    if !(density.is_finite() && density > 0.0) {
        return Err(CliError::Usage(format!("--density must be > 0, got {density}")));
    }

    let doc = decoded(&osm_path, parse_osm_xml(open(&osm_path)?))?;
    let records = decoded(&poses_path, read_poses(open(&poses_path)?))?;
    let origin = match args.origin {
        Some(Pair(lat, lon)) => GeoPoint::new(lat, lon).map_err(|e| CliError::Usage(format!("--origin: {e}")))?,
        None => match records.iter().find_map(|r| r.location()) {
            Some(loc) => decoded(&poses_path, loc)?,
            None => return Err(CliError::Usage("poses are all x/y records; pass --origin lat,lon".into())),
        },
    };
    let poses: Vec<EgoPose> = records.iter().map(|r| r.to_pose(origin)).collect::<Result<_, _>>()?;
    let region = bounding_region(&poses, margin)?;

    let kept = filter_highways(&doc.ways);
    let dangling = doc.diagnostics.iter().filter(|d| matches!(d, Diagnostic::DanglingNodeRef { .. })).count();
    let short = doc.diagnostics.len() - dangling;
    eprintln!(
        "ingest: {} nodes, {} ways parsed; {} highway ways kept, {} without a known class, {} dropped for missing nodes, {} too short",
        doc.nodes.len(),
        doc.ways.len(),
        kept.len(),
        doc.ways.len() - kept.len(),
        dangling,
        short
    );

    let options = BuildOptions { clip: Some(region), annotations: !args.no_annotations.unwrap_or(false) };
    let anchors: Vec<usize> = match args.anchor.unwrap_or(Anchor::Frame(0)) {
        Anchor::Frame(k) if k < poses.len() => vec![k],
        Anchor::Frame(k) => return Err(CliError::Usage(format!("--anchor {k} but only {} poses", poses.len()))),
        Anchor::All => {
            create_dir(&out)?;
            (0..poses.len()).collect()
        }
    };
    let per_frame = anchors.len() > 1 || matches!(args.anchor, Some(Anchor::All));
    for k in anchors {
        let graph = build_graph(&kept, &doc.nodes, origin, &poses[k], &options)?;
        let graph = resample_graph(&graph, density)?;
        let path = if per_frame { out.join(format!("frame_{k:04}.sdg.jsonl")) } else { out.clone() };
        eprintln!(
            "ingest: frame {k}: {} nodes, {} edges, {} components, max spacing {:.3} m -> {}",
            graph.node_count(),
            graph.edge_count(),
            graph.component_count(),
            graph.max_edge_length(),
            path.display()
        );
        let doc = SdgDocument { origin, ego_pose: poses[k], graph };
        write_file(&path, |w| write_sdg(w, &doc))?;
    }
    Ok(())
}
