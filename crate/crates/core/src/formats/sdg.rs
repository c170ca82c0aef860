//! `sdg-json`: one JSON object per line. A header, then `node_count` node
//! records in index order, then `edge_count` edge records.
//!
//! ```text
//! {"version":1,"origin_lat":..,"origin_lon":..,"ego_pose":{"x":..,"y":..,"heading":..},"node_count":2,"edge_count":1}
//! {"idx":0,"x":..,"y":..,"class":"primary","way":7}
//! {"idx":1,"x":..,"y":..,"class":"primary","way":7}
//! {"a":0,"b":1,"class":"primary","way":7}
//! ```

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::Lines;
use crate::error::{Error, Result};
use crate::geo::{CartesianPoint, EgoPose, GeoPoint};
use crate::graph::{SdEdge, SdMapGraph, SdNode};
use crate::osm::HighwayClass;

pub const SDG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseFields {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdgHeader {
    pub version: u32,
    pub origin_lat: f64,
    pub origin_lon: f64,
    /// Anchoring pose in the origin frame.
    pub ego_pose: PoseFields,
    pub node_count: usize,
    pub edge_count: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    idx: usize,
    x: f64,
    y: f64,
    class: HighwayClass,
    way: Option<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    a: usize,
    b: usize,
    class: HighwayClass,
    way: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdgDocument {
    pub origin: GeoPoint,
    pub ego_pose: EgoPose,
    pub graph: SdMapGraph,
}

impl SdgDocument {
    pub fn header(&self) -> SdgHeader {
        SdgHeader {
            version: SDG_VERSION,
            origin_lat: self.origin.lat,
            origin_lon: self.origin.lon,
            ego_pose: PoseFields {
                x: self.ego_pose.position.x,
                y: self.ego_pose.position.y,
                heading: self.ego_pose.heading,
            },
            node_count: self.graph.node_count(),
            edge_count: self.graph.edge_count(),
        }
    }
}

pub fn write_sdg<W: Write>(mut out: W, doc: &SdgDocument) -> Result<()> {
    doc.graph.validate()?;
    serde_json::to_writer(&mut out, &doc.header()).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    for (idx, n) in doc.graph.nodes.iter().enumerate() {
        let rec = NodeRecord {
            idx,
            x: n.position.x,
            y: n.position.y,
            class: n.class,
            way: n.source_way_id,
        };
        serde_json::to_writer(&mut out, &rec).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    for e in &doc.graph.edges {
        let rec = EdgeRecord { a: e.a, b: e.b, class: e.class, way: e.way };
        serde_json::to_writer(&mut out, &rec).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn parse_line<T: DeserializeOwned>(line: &str, lineno: usize, what: &str) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::schema(lineno, format!("bad {what} record: {e}")))
}

/// Reads and validates a graph. Schema errors carry 1-based line numbers.
pub fn read_sdg<R: BufRead>(input: R) -> Result<SdgDocument> {
    let mut reader = Lines { inner: input.lines(), last: 0 };
    let Some((n, line)) = reader.next()? else {
        return Err(Error::schema(1, "missing header record"));
    };
    let header: SdgHeader = parse_line(&line, n, "header")?;
    if header.version != SDG_VERSION {
        return Err(Error::schema(n, format!("unsupported version {} (expected {SDG_VERSION})", header.version)));
    }
    let origin = GeoPoint::new(header.origin_lat, header.origin_lon).map_err(|e| Error::schema(n, e.to_string()))?;
    let p = header.ego_pose;
    let ego_pose = EgoPose::new(p.x, p.y, p.heading).map_err(|e| Error::schema(n, e.to_string()))?;

    let mut graph = SdMapGraph::default();
    for k in 0..header.node_count {
        let Some((n, line)) = reader.next()? else {
            return Err(Error::schema(reader.last + 1, format!("expected {} node records, found {k}", header.node_count)));
        };
        let rec: NodeRecord = parse_line(&line, n, "node")?;
        if rec.idx != k {
            return Err(Error::schema(n, format!("node idx {} out of order (expected {k})", rec.idx)));
        }
        let position = CartesianPoint::new(rec.x, rec.y);
        if !position.is_finite() {
            return Err(Error::schema(n, "non-finite node position"));
        }
        graph.nodes.push(SdNode { position, class: rec.class, source_way_id: rec.way });
    }
    for k in 0..header.edge_count {
        let Some((n, line)) = reader.next()? else {
            return Err(Error::schema(reader.last + 1, format!("expected {} edge records, found {k}", header.edge_count)));
        };
        let rec: EdgeRecord = parse_line(&line, n, "edge")?;
        if rec.a >= graph.nodes.len() || rec.b >= graph.nodes.len() {
            return Err(Error::schema(n, format!("edge ({}, {}) references a missing node", rec.a, rec.b)));
        }
        if rec.a == rec.b {
            return Err(Error::schema(n, format!("self-loop on node {}", rec.a)));
        }
        graph.edges.push(SdEdge { a: rec.a, b: rec.b, class: rec.class, way: rec.way });
    }
    if let Some((n, _)) = reader.next()? {
        return Err(Error::schema(n, "unexpected record after the declared edges"));
    }
    Ok(SdgDocument { origin, ego_pose, graph })
}
