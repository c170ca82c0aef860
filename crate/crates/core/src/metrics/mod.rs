//! Online-mapping evaluation: polyline distances, detection AP, topology
//! scores and the aggregate OLS.

mod ap;
mod distance;
mod hungarian;
mod report;
mod topology;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use ap::{
    average_precision, box_iou, chamfer_ap, det_l, det_t, greedy_match, ApCurve, ClassAp, DetectionOutcome, DetectionScore,
    FarRangeRelaxation, ScenePair, ThresholdAp, CHAMFER_THRESHOLDS, FRECHET_THRESHOLDS, TE_IOU_THRESHOLD,
};
pub use distance::{chamfer, chamfer_directed, euclidean, frechet, frechet_permuted};
pub use hungarian::{assignment_cost, hungarian_match};
pub use report::{evaluate, ols, Diagnostics, EvalConfig, MetricReport, OlsVariant, SceneScores, Task};
pub use topology::{top_score, top_vertex_scores, TopMode, TopResult, EDGE_CONFIDENCE_THRESHOLD};

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centerline {
    pub points: Vec<Point3>,
    #[serde(default = "one")]
    pub score: f64,
}

fn one() -> f64 {
    1.0
}

/// Image-space box `(x, y, w, h)` with `(x, y)` the top-left corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficElement {
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
    pub class: u32,
    #[serde(default = "one")]
    pub score: f64,
}

/// Predictions or ground truth of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneAnnotation {
    pub scene_id: String,
    pub centerlines: Vec<Centerline>,
    pub traffic_elements: Vec<TrafficElement>,
    /// `M × M` centerline successor confidences.
    pub a_cc: Array2<f64>,
    /// `M × K` centerline to traffic element confidences.
    pub a_ct: Array2<f64>,
}

impl SceneAnnotation {
    pub fn empty(scene_id: impl Into<String>) -> Self {
        SceneAnnotation {
            scene_id: scene_id.into(),
            centerlines: Vec::new(),
            traffic_elements: Vec::new(),
            a_cc: Array2::zeros((0, 0)),
            a_ct: Array2::zeros((0, 0)),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let m = self.centerlines.len();
        let k = self.traffic_elements.len();
        if self.a_cc.dim() != (m, m) {
            return Err(format!("A_CC is {:?}, expected ({m}, {m})", self.a_cc.dim()));
        }
        if self.a_ct.dim() != (m, k) && !(k == 0 && self.a_ct.is_empty()) {
            return Err(format!("A_CT is {:?}, expected ({m}, {k})", self.a_ct.dim()));
        }
        if let Some(v) = self.a_cc.iter().chain(self.a_ct.iter()).find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(format!("adjacency confidence {v} outside [0, 1]"));
        }
        for (i, c) in self.centerlines.iter().enumerate() {
            if c.points.len() < 2 {
                return Err(format!("centerline {i} has fewer than 2 waypoints"));
            }
            if c.points.iter().flatten().any(|v| !v.is_finite()) {
                return Err(format!("centerline {i} has non-finite coordinates"));
            }
            if !(0.0..=1.0).contains(&c.score) {
                return Err(format!("centerline {i} score {} outside [0, 1]", c.score));
            }
        }
        for (i, t) in self.traffic_elements.iter().enumerate() {
            if !(t.bbox[2] > 0.0 && t.bbox[3] > 0.0) || t.bbox.iter().any(|v| !v.is_finite()) {
                return Err(format!("traffic element {i} has an invalid box"));
            }
            if !(0.0..=1.0).contains(&t.score) {
                return Err(format!("traffic element {i} score {} outside [0, 1]", t.score));
            }
        }
        Ok(())
    }

    /// `A_CT` entry, treating an absent matrix as all zeros.
    pub fn ct(&self, m: usize, k: usize) -> f64 {
        self.a_ct.get((m, k)).copied().unwrap_or(0.0)
    }
}
