//! `olann-json`: one scene per line.
//!
//! ```text
//! {"scene_id":"s0","centerlines":[{"points":[[x,y,z],..],"score":0.9}],
//!  "traffic_elements":[{"box":[x,y,w,h],"class":3,"score":0.8}],
//!  "a_cc":[[0.0]],"a_ct":[[1.0]]}
//! ```
//!
//! Waypoints may be 2-d (z = 0) or 3-d; scores default to 1. `a_ct` may be
//! `[]` when the scene has no traffic elements.

use std::io::{BufRead, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::Lines;
use crate::error::{Error, Result};
use crate::metrics::{Centerline, SceneAnnotation, TrafficElement};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCenterline {
    points: Vec<Vec<f64>>,
    #[serde(default = "one")]
    score: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    scene_id: String,
    #[serde(default)]
    centerlines: Vec<RawCenterline>,
    #[serde(default)]
    traffic_elements: Vec<TrafficElement>,
    #[serde(default)]
    a_cc: Vec<Vec<f64>>,
    #[serde(default)]
    a_ct: Vec<Vec<f64>>,
}

fn to_matrix(rows: &[Vec<f64>], shape: (usize, usize), name: &str) -> std::result::Result<Array2<f64>, String> {
    let (m, k) = shape;
    if rows.is_empty() && (m == 0 || k == 0) {
        return Ok(Array2::zeros(shape));
    }
    if rows.len() != m || rows.iter().any(|r| r.len() != k) {
        let widths: Vec<usize> = rows.iter().map(Vec::len).collect();
        return Err(format!("{name} has row lengths {widths:?}, expected {m}x{k}"));
    }
    Ok(Array2::from_shape_fn(shape, |(i, j)| rows[i][j]))
}

fn convert(raw: RawScene) -> std::result::Result<SceneAnnotation, String> {
    let mut centerlines = Vec::with_capacity(raw.centerlines.len());
    for (i, c) in raw.centerlines.into_iter().enumerate() {
        let points = c
            .points
            .iter()
            .map(|p| match p.as_slice() {
                [x, y] => Ok([*x, *y, 0.0]),
                [x, y, z] => Ok([*x, *y, *z]),
                _ => Err(format!("centerline {i} has a waypoint with {} coordinates", p.len())),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        centerlines.push(Centerline { points, score: c.score });
    }
    let m = centerlines.len();
    let k = raw.traffic_elements.len();
    let scene = SceneAnnotation {
        a_cc: to_matrix(&raw.a_cc, (m, m), "a_cc")?,
        a_ct: to_matrix(&raw.a_ct, (m, k), "a_ct")?,
        scene_id: raw.scene_id,
        centerlines,
        traffic_elements: raw.traffic_elements,
    };
    scene.validate()?;
    Ok(scene)
}

/// Reads all scenes. Schema errors carry the 1-based line number.
pub fn read_olann<R: BufRead>(input: R) -> Result<Vec<SceneAnnotation>> {
    let mut lines = Lines { inner: input.lines(), last: 0 };
    let mut out = Vec::new();
    while let Some((n, line)) = lines.next()? {
        let raw: RawScene = serde_json::from_str(&line).map_err(|e| Error::schema(n, e.to_string()))?;
        out.push(convert(raw).map_err(|m| Error::schema(n, m))?);
    }
    Ok(out)
}

pub fn write_olann<W: Write>(mut out: W, scenes: &[SceneAnnotation]) -> Result<()> {
    for s in scenes {
        s.validate().map_err(|m| Error::InvalidSpec(format!("scene '{}': {m}", s.scene_id)))?;
        let rows = |a: &Array2<f64>| a.rows().into_iter().map(|r| r.to_vec()).collect::<Vec<_>>();
        let raw = RawScene {
            scene_id: s.scene_id.clone(),
            centerlines: s
                .centerlines
                .iter()
                .map(|c| RawCenterline { points: c.points.iter().map(|p| p.to_vec()).collect(), score: c.score })
                .collect(),
            traffic_elements: s.traffic_elements.clone(),
            a_cc: rows(&s.a_cc),
            a_ct: if s.traffic_elements.is_empty() { Vec::new() } else { rows(&s.a_ct) },
        };
        serde_json::to_writer(&mut out, &raw).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
