//! Python module `sdmapkit`: graph ingest, rasterization, alignment,
//! localization noise and the evaluation metrics.
//!
//! Point sets cross the boundary as lists of `(x, y)` tuples, canvases as
//! `BevCanvas` objects that serialize to bev-f32 bytes, reports as dicts.

use ndarray::Array2;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use sdmapkit::align::{augment_nodes, perturb as apply_noise, NoiseSpec};
use sdmapkit::formats::{read_bev, read_olann, read_poses, read_sdg, write_bev, write_sdg, SdgDocument};
use sdmapkit::geo::{bounding_region, project_wgs84, EgoPose, GeoPoint, DEFAULT_MARGIN_M};
use sdmapkit::graph::{build_graph, resample_graph, BuildOptions, DEFAULT_DENSITY_M};
use sdmapkit::metrics::{self, EvalConfig, OlsVariant, Task};
use sdmapkit::osm::{filter_highways, parse_osm_xml};
use sdmapkit::raster::{canvas_to_png, rasterize as draw, BevSpec, ClassPalette, Geometry};

fn err(e: sdmapkit::Error) -> PyErr {
    match e {
        sdmapkit::Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn palette(name: &str) -> PyResult<ClassPalette> {
    match name {
        "osm" => Ok(ClassPalette::osm()),
        "olv2" => Ok(ClassPalette::olv2()),
        json => {
            let p: ClassPalette = serde_json::from_str(json)
                .map_err(|e| PyValueError::new_err(format!("palette must be 'osm', 'olv2' or palette JSON: {e}")))?;
            p.validate().map_err(err)?;
            Ok(p)
        }
    }
}

/// Ego-centric SD map graph with the projection origin and ego pose it was built for.
#[pyclass(module = "sdmapkit")]
pub struct SdGraph {
    doc: SdgDocument,
}

#[pymethods]
impl SdGraph {
    /// Parses sdg-json text.
    #[staticmethod]
    fn from_sdg(text: &str) -> PyResult<Self> {
        Ok(SdGraph { doc: read_sdg(text.as_bytes()).map_err(err)? })
    }

    fn to_sdg(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_sdg(&mut buf, &self.doc).map_err(err)?;
        Ok(String::from_utf8(buf).expect("sdg-json is UTF-8"))
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.doc.graph.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.doc.graph.edge_count()
    }

    /// `(lat, lon)` of the projection origin.
    #[getter]
    fn origin(&self) -> (f64, f64) {
        (self.doc.origin.lat, self.doc.origin.lon)
    }

    /// `(x, y, heading)` of the ego in the origin frame.
    #[getter]
    fn ego_pose(&self) -> (f64, f64, f64) {
        let p = self.doc.ego_pose;
        (p.position.x, p.position.y, p.heading)
    }

    /// `(x, y, class)` per node, ego frame.
    fn nodes(&self) -> Vec<(f64, f64, &'static str)> {
        self.doc.graph.nodes.iter().map(|n| (n.position.x, n.position.y, n.class.as_str())).collect()
    }

    /// `(a, b, class)` per undirected edge.
    fn edges(&self) -> Vec<(usize, usize, &'static str)> {
        self.doc.graph.edges.iter().map(|e| (e.a, e.b, e.class.as_str())).collect()
    }

    fn degrees(&self) -> Vec<usize> {
        self.doc.graph.degrees()
    }

    fn component_count(&self) -> usize {
        self.doc.graph.component_count()
    }

    fn total_length(&self) -> f64 {
        self.doc.graph.total_length()
    }

    fn max_edge_length(&self) -> f64 {
        self.doc.graph.max_edge_length()
    }

    /// Splits every edge longer than `density` meters into equal pieces.
    fn resample(&self, density: f64) -> PyResult<Self> {
        let graph = resample_graph(&self.doc.graph, density).map_err(err)?;
        Ok(SdGraph { doc: SdgDocument { graph, ..self.doc.clone() } })
    }

    /// Seeded rigid localization error. Returns the moved graph and
    /// `(rotation_rad, tx, ty)`.
    #[pyo3(signature = (translation_m, rotation_deg, seed = 0))]
    fn perturb(&self, translation_m: f64, rotation_deg: f64, seed: u64) -> PyResult<(Self, (f64, f64, f64))> {
        let noise = NoiseSpec { translation_m, rotation_deg, seed };
        let (graph, t) = apply_noise(&self.doc.graph, &noise).map_err(err)?;
        let moved = SdGraph { doc: SdgDocument { graph, ..self.doc.clone() } };
        Ok((moved, (t.rotation, t.translation.x, t.translation.y)))
    }

    fn __repr__(&self) -> String {
        format!("SdGraph(nodes={}, edges={})", self.node_count(), self.edge_count())
    }
}

/// `H × W × C` float canvas on an ego-centered grid.
#[pyclass(module = "sdmapkit")]
pub struct BevCanvas {
    inner: sdmapkit::raster::BevCanvas,
}

#[pymethods]
impl BevCanvas {
    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(BevCanvas { inner: read_bev(data).map_err(err)? })
    }

    /// bev-f32 encoding.
    fn to_bytes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyBytes>> {
        let mut buf = Vec::new();
        write_bev(&mut buf, &self.inner).map_err(err)?;
        Ok(PyBytes::new(py, &buf))
    }

    #[pyo3(signature = (palette = "osm"))]
    fn to_png<'py>(&self, py: Python<'py>, palette: &str) -> PyResult<Bound<'py, PyBytes>> {
        let png = canvas_to_png(&self.inner, &self::palette(palette)?).map_err(err)?;
        Ok(PyBytes::new(py, &png))
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        self.inner.data.dim()
    }

    #[getter]
    fn resolution(&self) -> f64 {
        self.inner.spec.resolution
    }

    /// Row-major values.
    fn values(&self) -> Vec<f32> {
        self.inner.data.iter().copied().collect()
    }

    fn get(&self, row: usize, col: usize, channel: usize) -> PyResult<f32> {
        self.inner
            .data
            .get([row, col, channel])
            .copied()
            .ok_or_else(|| PyValueError::new_err(format!("index ({row}, {col}, {channel}) outside {:?}", self.shape())))
    }

    fn __repr__(&self) -> String {
        format!("BevCanvas(shape={:?}, resolution={})", self.shape(), self.resolution())
    }
}

/// East/north offsets in meters of `point` from `origin`, both `(lat, lon)`.
#[pyfunction]
fn project(origin: (f64, f64), point: (f64, f64)) -> PyResult<(f64, f64)> {
    let o = GeoPoint::new(origin.0, origin.1).map_err(err)?;
    let p = GeoPoint::new(point.0, point.1).map_err(err)?;
    let c = project_wgs84(o, p).map_err(err)?;
    Ok((c.x, c.y))
}

/// Builds the resampled ego-frame graph for one pose.
///
/// `osm_xml` is OSM XML text, `poses_json` the pose-list JSON accepted by the
/// CLI. `origin` defaults to the first geographic pose.
#[pyfunction]
#[pyo3(signature = (osm_xml, poses_json, origin = None, anchor = 0, margin = DEFAULT_MARGIN_M, density = DEFAULT_DENSITY_M, annotations = true))]
fn ingest(
    osm_xml: &str,
    poses_json: &str,
    origin: Option<(f64, f64)>,
    anchor: usize,
    margin: f64,
    density: f64,
    annotations: bool,
) -> PyResult<SdGraph> {
    let doc = parse_osm_xml(osm_xml.as_bytes()).map_err(err)?;
    let records = read_poses(poses_json.as_bytes()).map_err(err)?;
    let origin = match origin {
        Some((lat, lon)) => GeoPoint::new(lat, lon).map_err(err)?,
        None => records
            .iter()
            .find_map(|r| r.location())
            .ok_or_else(|| PyValueError::new_err("poses have no lat/lon; pass origin"))?
            .map_err(err)?,
    };
    let poses: Vec<EgoPose> = records.iter().map(|r| r.to_pose(origin)).collect::<Result<_, _>>().map_err(err)?;
    let ego = *poses
        .get(anchor)
        .ok_or_else(|| PyValueError::new_err(format!("anchor {anchor} but only {} poses", poses.len())))?;
    let options = BuildOptions { clip: Some(bounding_region(&poses, margin).map_err(err)?), annotations };
    let graph = build_graph(&filter_highways(&doc.ways), &doc.nodes, origin, &ego, &options).map_err(err)?;
    let graph = resample_graph(&graph, density).map_err(err)?;
    Ok(SdGraph { doc: SdgDocument { origin, ego_pose: ego, graph } })
}

#[pyfunction]
#[pyo3(signature = (graph, x_range = (-50.0, 50.0), y_range = (-25.0, 25.0), resolution = 0.5, palette = "osm"))]
fn rasterize(graph: &SdGraph, x_range: (f64, f64), y_range: (f64, f64), resolution: f64, palette: &str) -> PyResult<BevCanvas> {
    let spec = BevSpec::new(x_range, y_range, resolution).map_err(err)?;
    let out = draw(Geometry::Graph(&graph.doc.graph), &spec, &self::palette(palette)?).map_err(err)?;
    Ok(BevCanvas { inner: out.canvas })
}

type NodeFeature = ((i64, i64, bool), Vec<f64>);

/// Per node: `((row, col, in_range), features)` where features are the
/// position, class one-hot and the BEV channels at the node's cell.
#[pyfunction]
fn align(graph: &SdGraph, canvas: &BevCanvas) -> PyResult<Vec<NodeFeature>> {
    let c = &canvas.inner;
    let feats = augment_nodes(&graph.doc.graph, c.data.view(), &c.spec).map_err(err)?;
    Ok(feats.iter().map(|f| ((f.grid.row, f.grid.col, f.grid.in_range), f.combined())).collect())
}

#[pyfunction]
fn frechet(a: Vec<[f64; 2]>, b: Vec<[f64; 2]>) -> PyResult<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(PyValueError::new_err("curves must be non-empty"));
    }
    Ok(metrics::frechet(&a, &b))
}

#[pyfunction]
fn chamfer(a: Vec<[f64; 2]>, b: Vec<[f64; 2]>) -> PyResult<f64> {
    metrics::chamfer(&a, &b).map_err(err)
}

/// Minimum-cost assignment of a rectangular cost matrix as `(row, col)` pairs.
#[pyfunction]
fn hungarian(cost: Vec<Vec<f64>>) -> PyResult<Vec<(usize, usize)>> {
    let cols = cost.first().map_or(0, Vec::len);
    if cost.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("cost rows differ in length"));
    }
    let m = Array2::from_shape_fn((cost.len(), cols), |(i, j)| cost[i][j]);
    metrics::hungarian_match(m.view()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (det_l, det_t, top_ll, top_lt, variant = "sqrt-topology"))]
fn ols(det_l: f64, det_t: f64, top_ll: f64, top_lt: f64, variant: &str) -> PyResult<f64> {
    let v: OlsVariant = variant.parse().map_err(PyValueError::new_err)?;
    metrics::ols(det_l, det_t, top_ll, top_lt, v).map_err(err)
}

/// Scores olann-json text; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (pred, gt, task = "reasoning", thresholds = None, ols_variant = None, te_iou = None))]
fn evaluate<'py>(
    py: Python<'py>,
    pred: &str,
    gt: &str,
    task: &str,
    thresholds: Option<Vec<f64>>,
    ols_variant: Option<&str>,
    te_iou: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let task: Task = task.parse().map_err(PyValueError::new_err)?;
    let mut config = EvalConfig::new(task);
    if let Some(t) = thresholds {
        config.thresholds = t;
    }
    if let Some(v) = ols_variant {
        config.ols_variant = v.parse().map_err(PyValueError::new_err)?;
    }
    if let Some(iou) = te_iou {
        config.te_iou = iou;
    }
    config.validate().map_err(err)?;
    let preds = read_olann(pred.as_bytes()).map_err(err)?;
    let gts = read_olann(gt.as_bytes()).map_err(err)?;
    let (report, _) = metrics::evaluate(&preds, &gts, &config).map_err(err)?;
    let json = serde_json::to_string(&report).expect("report serializes");
    py.import("json")?.call_method1("loads", (json,))
}

#[pymodule]
#[pyo3(name = "sdmapkit")]
fn sdmapkit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SdGraph>()?;
    m.add_class::<BevCanvas>()?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(ingest, m)?)?;
    m.add_function(wrap_pyfunction!(rasterize, m)?)?;
    m.add_function(wrap_pyfunction!(align, m)?)?;
    m.add_function(wrap_pyfunction!(frechet, m)?)?;
    m.add_function(wrap_pyfunction!(chamfer, m)?)?;
    m.add_function(wrap_pyfunction!(hungarian, m)?)?;
    m.add_function(wrap_pyfunction!(ols, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
