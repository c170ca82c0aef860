//! Ego-centric SD map graph: construction from OSM ways and resampling.

use std::collections::{HashMap, HashSet};

use ndarray::Array2;
use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::geo::{project_wgs84, to_ego_frame, BoundingRegion, CartesianPoint, EgoPose, GeoPoint};
use crate::osm::{annotation_nodes, HighwayClass, OsmNode, OsmWay};

/// Default waypoint spacing in meters.
pub const DEFAULT_DENSITY_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SdNode {
    /// Ego-frame position in meters.
    pub position: CartesianPoint,
    pub class: HighwayClass,
    /// `None` for annotation nodes that came from node tags.
    pub source_way_id: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdEdge {
    pub a: usize,
    pub b: usize,
    pub class: HighwayClass,
    pub way: Option<i64>,
}

/// Undirected SD map graph in the ego frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SdMapGraph {
    pub nodes: Vec<SdNode>,
    pub edges: Vec<SdEdge>,
}

impl SdMapGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for e in &self.edges {
            deg[e.a] += 1;
            deg[e.b] += 1;
        }
        deg
    }

    /// Symmetric boolean adjacency matrix.
    pub fn adjacency(&self) -> Array2<bool> {
        let n = self.nodes.len();
        let mut adj = Array2::from_elem((n, n), false);
        for e in &self.edges {
            adj[[e.a, e.b]] = true;
            adj[[e.b, e.a]] = true;
        }
        adj
    }

    /// Number of connected components, isolated nodes included.
    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::<usize>::new(self.nodes.len());
        for e in &self.edges {
            uf.union(e.a, e.b);
        }
        let labels = uf.into_labeling();
        labels.into_iter().collect::<HashSet<_>>().len()
    }

    pub fn edge_length(&self, edge: &SdEdge) -> f64 {
        self.nodes[edge.a].position.distance(&self.nodes[edge.b].position)
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| self.edge_length(e)).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    /// Checks index bounds, self loops and finiteness.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.position.is_finite() {
                return Err(Error::InvalidValue {
                    what: "node position",
                    value: i as f64,
                });
            }
        }
        for e in &self.edges {
            if e.a >= n || e.b >= n {
                return Err(Error::DimensionMismatch(format!(
                    "edge ({}, {}) references a node outside 0..{n}",
                    e.a, e.b
                )));
            }
            if e.a == e.b {
                return Err(Error::DimensionMismatch(format!("self loop on node {}", e.a)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Clip ways at this region, given in the shared (origin-anchored) frame.
    pub clip: Option<BoundingRegion>,
    /// Carry node-tagged highway classes as isolated annotation nodes.
    pub annotations: bool,
}

struct Builder<'a> {
    origin: GeoPoint,
    ego: EgoPose,
    store: HashMap<i64, &'a OsmNode>,
    shared: HashMap<i64, CartesianPoint>,
    by_osm_id: HashMap<i64, usize>,
    edge_set: HashSet<(usize, usize)>,
    graph: SdMapGraph,
}

impl<'a> Builder<'a> {
    fn shared_position(&mut self, id: i64) -> Result<CartesianPoint> {
        if let Some(p) = self.shared.get(&id) {
            return Ok(*p);
        }
        let node = self.store.get(&id).ok_or(Error::UnresolvedNode(id))?;
        let p = project_wgs84(self.origin, node.location)?;
        self.shared.insert(id, p);
        Ok(p)
    }

    fn push_node(&mut self, shared: CartesianPoint, class: HighwayClass, way: Option<i64>) -> usize {
        self.graph.nodes.push(SdNode {
            position: to_ego_frame(&self.ego, shared),
            class,
            source_way_id: way,
        });
        self.graph.nodes.len() - 1
    }

    fn osm_node(&mut self, id: i64, class: HighwayClass, way: i64) -> Result<usize> {
        if let Some(&idx) = self.by_osm_id.get(&id) {
            return Ok(idx);
        }
        let p = self.shared_position(id)?;
        let idx = self.push_node(p, class, Some(way));
        self.by_osm_id.insert(id, idx);
        Ok(idx)
    }

    fn add_edge(&mut self, a: usize, b: usize, class: HighwayClass, way: i64) {
        if a == b {
            return;
        }
        if self.edge_set.insert((a.min(b), a.max(b))) {
            self.graph.edges.push(SdEdge {
                a,
                b,
                class,
                way: Some(way),
            });
        }
    }

    fn add_way(&mut self, way: &OsmWay, class: HighwayClass, clip: Option<&BoundingRegion>) -> Result<()> {
        let mut refs: Vec<i64> = Vec::with_capacity(way.node_refs.len());
        for &r in &way.node_refs {
            if refs.last() != Some(&r) {
                refs.push(r);
            }
        }
        let mut last: Option<usize> = None;
        for pair in refs.windows(2) {
            let (pid, qid) = (pair[0], pair[1]);
            let p = self.shared_position(pid)?;
            let q = self.shared_position(qid)?;
            let (t0, t1) = match clip {
                None => (0.0, 1.0),
                Some(region) => match clip_segment(region, p, q) {
                    Some(range) => range,
                    None => {
                        last = None;
                        continue;
                    }
                },
            };
            let start = if t0 == 0.0 {
                self.osm_node(pid, class, way.id)?
            } else {
                self.push_node(p.lerp(&q, t0), class, Some(way.id))
            };
            let end = if t1 == 1.0 {
                self.osm_node(qid, class, way.id)?
            } else {
                self.push_node(p.lerp(&q, t1), class, Some(way.id))
            };
            debug_assert!(t0 > 0.0 || last.is_none() || last == Some(start));
            self.add_edge(start, end, class, way.id);
            last = (t1 == 1.0).then_some(end);
        }
        Ok(())
    }
}

/// Liang-Barsky clipping of segment `p→q`; returns the kept parameter range.
fn clip_segment(region: &BoundingRegion, p: CartesianPoint, q: CartesianPoint) -> Option<(f64, f64)> {
    let d = CartesianPoint::new(q.x - p.x, q.y - p.y);
    let checks = [
        (-d.x, p.x - region.min_corner.x),
        (d.x, region.max_corner.x - p.x),
        (-d.y, p.y - region.min_corner.y),
        (d.y, region.max_corner.y - p.y),
    ];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (pk, qk) in checks {
        if pk == 0.0 {
            if qk < 0.0 {
                return None;
            }
        } else {
            let r = qk / pk;
            if pk < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Builds the ego-centric SD graph from filtered ways.
///
/// Every distinct OSM node of the kept ways becomes one graph node, so ways
/// sharing a node meet at a junction. Consecutive node pairs become undirected
/// edges carrying the way's class.
pub fn build_graph(
    ways: &[(OsmWay, HighwayClass)],
    nodes: &[OsmNode],
    origin: GeoPoint,
    ego: &EgoPose,
    options: &BuildOptions,
) -> Result<SdMapGraph> {
    let mut b = Builder {
        origin,
        ego: *ego,
        store: nodes.iter().map(|n| (n.id, n)).collect(),
        shared: HashMap::new(),
        by_osm_id: HashMap::new(),
        edge_set: HashSet::new(),
        graph: SdMapGraph::default(),
    };
    for (way, class) in ways {
        b.add_way(way, *class, options.clip.as_ref())?;
    }
    if options.annotations {
        for (node, class) in annotation_nodes(nodes) {
            let p = b.shared_position(node.id)?;
            if options.clip.as_ref().is_none_or(|r| r.contains(&p)) {
                b.push_node(p, class, None);
            }
        }
    }
    Ok(b.graph)
}

/// Number of equal sub-segments for an edge of `length` under `density`.
fn subdivisions(length: f64, density: f64) -> usize {
    // the relative slack keeps already-resampled edges (length = density + ulp) intact
    ((length / density) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Splits every edge longer than `density` into equal pieces no longer than
/// `density`, inserting interpolated nodes that inherit the edge's class.
///
/// Original nodes keep their indices; inserted nodes are appended in edge order.
pub fn resample_graph(graph: &SdMapGraph, density: f64) -> Result<SdMapGraph> {
    if !(density.is_finite() && density > 0.0) {
        return Err(Error::InvalidDensity(density));
    }
    let mut out = SdMapGraph {
        nodes: graph.nodes.clone(),
        edges: Vec::with_capacity(graph.edges.len()),
    };
    for edge in &graph.edges {
        let a = graph.nodes[edge.a].position;
        let b = graph.nodes[edge.b].position;
        let k = subdivisions(a.distance(&b), density);
        let mut prev = edge.a;
        for i in 1..k {
            out.nodes.push(SdNode {
                position: a.lerp(&b, i as f64 / k as f64),
                class: edge.class,
                source_way_id: edge.way,
            });
            let idx = out.nodes.len() - 1;
            out.edges.push(SdEdge {
                a: prev,
                b: idx,
                ..edge.clone()
            });
            prev = idx;
        }
        out.edges.push(SdEdge {
            a: prev,
            b: edge.b,
            ..edge.clone()
        });
    }
    Ok(out)
}
