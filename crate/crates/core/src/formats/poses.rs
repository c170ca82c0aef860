//! Pose lists: a JSON array of records, heading in radians counter-clockwise
//! from east (default 0). A record is either
//!
//! - `{"x": .., "y": .., "heading": ..}` in the shared frame (east/north
//!   meters from the projection origin), or
//! - `{"lat": .., "lon": .., "heading": ..}` in WGS84 degrees.
//!
//! Both kinds may be mixed in one list.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{project_wgs84, EgoPose, GeoPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoseRecord {
    Local(LocalPose),
    Geo(GeoPose),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalPose {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoPose {
    pub lat: f64,
    pub lon: f64,
    #[serde(default)]
    pub heading: f64,
}

impl PoseRecord {
    pub fn heading(&self) -> f64 {
        match self {
            PoseRecord::Local(p) => p.heading,
            PoseRecord::Geo(p) => p.heading,
        }
    }

    /// The WGS84 location, for geographic records.
    pub fn location(&self) -> Option<Result<GeoPoint>> {
        match self {
            PoseRecord::Local(_) => None,
            PoseRecord::Geo(p) => Some(GeoPoint::new(p.lat, p.lon)),
        }
    }

    /// The pose in the shared frame anchored at `origin`. Local records are
    /// already in that frame and ignore it.
    pub fn to_pose(&self, origin: GeoPoint) -> Result<EgoPose> {
        match self {
            PoseRecord::Local(p) => EgoPose::new(p.x, p.y, p.heading),
            PoseRecord::Geo(p) => {
                let xy = project_wgs84(origin, GeoPoint::new(p.lat, p.lon)?)?;
                EgoPose::new(xy.x, xy.y, p.heading)
            }
        }
    }
}

pub fn read_poses<R: Read>(input: R) -> Result<Vec<PoseRecord>> {
    let values: Vec<serde_json::Value> = serde_json::from_reader(input).map_err(|e| Error::schema(e.line(), e.to_string()))?;
    let mut poses = Vec::with_capacity(values.len());
    for (i, v) in values.into_iter().enumerate() {
        let p: PoseRecord = serde_json::from_value(v)
            .map_err(|_| Error::schema(i, "expected {x, y[, heading]} or {lat, lon[, heading]}"))?;
        if let Some(loc) = p.location() {
            loc.map_err(|e| Error::schema(i, e.to_string()))?;
        }
        if let PoseRecord::Local(l) = p {
            if !(l.x.is_finite() && l.y.is_finite()) {
                return Err(Error::schema(i, "non-finite position"));
            }
        }
        if !p.heading().is_finite() {
            return Err(Error::schema(i, "non-finite heading"));
        }
        poses.push(p);
    }
    if poses.is_empty() {
        return Err(Error::EmptyInput("pose list"));
    }
    Ok(poses)
}
