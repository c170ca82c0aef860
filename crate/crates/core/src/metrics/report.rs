use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ap::{
    centerline_chamfer, centerline_frechet, centerline_outcomes, cost_matrix, pool_classes, pool_thresholds, traffic_outcomes,
    DetectionOutcome, DetectionScore, FarRangeRelaxation, SceneOutcomes, CHAMFER_THRESHOLDS, FRECHET_THRESHOLDS, TE_IOU_THRESHOLD,
};
use super::topology::{pool_vertex_scores, top_vertex_scores, TopMode, TopResult};
use super::SceneAnnotation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OlsVariant {
    /// Plain mean of the four components.
    Mean,
    /// Mean with the two topology scores square-rooted.
    #[default]
    SqrtTopology,
}

impl FromStr for OlsVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mean" => Ok(OlsVariant::Mean),
            "sqrt-topology" => Ok(OlsVariant::SqrtTopology),
            _ => Err(format!("unknown OLS variant '{s}' (expected mean or sqrt-topology)")),
        }
    }
}

impl fmt::Display for OlsVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OlsVariant::Mean => "mean",
            OlsVariant::SqrtTopology => "sqrt-topology",
        })
    }
}

pub fn ols(det_l: f64, det_t: f64, top_ll: f64, top_lt: f64, variant: OlsVariant) -> Result<f64> {
    for v in [det_l, det_t, top_ll, top_lt] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange(v));
        }
    }
    Ok(match variant {
        OlsVariant::Mean => (det_l + det_t + top_ll + top_lt) / 4.0,
        OlsVariant::SqrtTopology => (det_l + det_t + top_ll.sqrt() + top_lt.sqrt()) / 4.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Centerline detection scored by Chamfer AP.
    Perception,
    /// DET_l, DET_t, TOP_ll, TOP_lt and OLS.
    Reasoning,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "perception" => Ok(Task::Perception),
            "reasoning" => Ok(Task::Reasoning),
            _ => Err(format!("unknown task '{s}' (expected perception or reasoning)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub task: Task,
    /// Chamfer thresholds for perception, Fréchet thresholds for reasoning.
    pub thresholds: Vec<f64>,
    pub te_iou: f64,
    pub ols_variant: OlsVariant,
    pub far_range: FarRangeRelaxation,
}

impl EvalConfig {
    pub fn new(task: Task) -> Self {
        EvalConfig {
            task,
            thresholds: match task {
                Task::Perception => CHAMFER_THRESHOLDS.to_vec(),
                Task::Reasoning => FRECHET_THRESHOLDS.to_vec(),
            },
            te_iou: TE_IOU_THRESHOLD,
            ols_variant: OlsVariant::default(),
            far_range: FarRangeRelaxation::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thresholds.is_empty() {
            return Err(Error::EmptyInput("association thresholds"));
        }
        if let Some(&t) = self.thresholds.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidValue { what: "association threshold", value: t });
        }
        if !(self.te_iou > 0.0 && self.te_iou <= 1.0) {
            return Err(Error::InvalidValue { what: "traffic element IoU threshold", value: self.te_iou });
        }
        if !(self.far_range.factor.is_finite() && self.far_range.factor >= 1.0) {
            return Err(Error::InvalidValue { what: "far-range relaxation factor", value: self.far_range.factor });
        }
        if self.far_range.cutoff_m.is_nan() || self.far_range.cutoff_m < 0.0 {
            return Err(Error::InvalidValue { what: "far-range cutoff", value: self.far_range.cutoff_m });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub scenes: usize,
    pub pred_centerlines: usize,
    pub gt_centerlines: usize,
    pub pred_traffic_elements: usize,
    pub gt_traffic_elements: usize,
    /// gt scenes without predictions, scored against empty predictions.
    pub missing_predictions: Vec<String>,
    /// Prediction scenes absent from gt, dropped.
    pub dropped_predictions: Vec<String>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub task: Task,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ols_variant: Option<OlsVariant>,
    /// Chamfer AP (perception) or DET_l (reasoning) per threshold.
    pub per_threshold: Vec<super::ThresholdAp>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det_t_per_class: Option<Vec<super::ClassAp>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_ll: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_lt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ols: Option<f64>,
    pub diagnostics: Diagnostics,
}

/// One CSV row: each scene evaluated on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneScores {
    pub scene_id: String,
    pub map: Option<f64>,
    pub det_l: Option<f64>,
    pub det_t: Option<f64>,
    pub top_ll: Option<f64>,
    pub top_lt: Option<f64>,
    pub ols: Option<f64>,
}

impl SceneScores {
    pub const CSV_HEADER: &'static str = "scene_id,map,det_l,det_t,top_ll,top_lt,ols";

    pub fn csv_row(&self) -> String {
        let f = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
        let id = if self.scene_id.contains([',', '"', '\n']) {
            format!("\"{}\"", self.scene_id.replace('"', "\"\""))
        } else {
            self.scene_id.clone()
        };
        format!(
            "{id},{},{},{},{},{},{}",
            f(self.map),
            f(self.det_l),
            f(self.det_t),
            f(self.top_ll),
            f(self.top_lt),
            f(self.ols)
        )
    }
}

struct SceneResult {
    centerlines: SceneOutcomes,
    traffic: BTreeMap<u32, (Vec<DetectionOutcome>, usize)>,
    top_ll: Vec<Vec<f64>>,
    top_lt: Vec<Vec<f64>>,
}

fn evaluate_scene(pred: &SceneAnnotation, gt: &SceneAnnotation, config: &EvalConfig) -> SceneResult {
    match config.task {
        Task::Perception => {
            let cost = cost_matrix(&pred.centerlines, &gt.centerlines, centerline_chamfer);
            SceneResult {
                centerlines: centerline_outcomes(
                    &pred.centerlines,
                    &gt.centerlines,
                    cost.view(),
                    &config.thresholds,
                    &FarRangeRelaxation::NONE,
                ),
                traffic: BTreeMap::new(),
                top_ll: Vec::new(),
                top_lt: Vec::new(),
            }
        }
        Task::Reasoning => {
            let cost = cost_matrix(&pred.centerlines, &gt.centerlines, centerline_frechet);
            let top = |mode| {
                config
                    .thresholds
                    .iter()
                    .map(|&t| {
                        top_vertex_scores(pred, gt, mode, t, config.te_iou, &config.far_range)
                            .into_iter()
                            .flatten()
                            .collect()
                    })
                    .collect()
            };
            SceneResult {
                centerlines: centerline_outcomes(
                    &pred.centerlines,
                    &gt.centerlines,
                    cost.view(),
                    &config.thresholds,
                    &config.far_range,
                ),
                traffic: traffic_outcomes(&pred.traffic_elements, &gt.traffic_elements, config.te_iou),
                top_ll: top(TopMode::Ll),
                top_lt: top(TopMode::Lt),
            }
        }
    }
}

fn concat_thresholds(results: &[&SceneResult], pick: fn(&SceneResult) -> &Vec<Vec<f64>>, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|k| results.iter().flat_map(|r| pick(r)[k].iter().copied()).collect()).collect()
}

struct Aggregate {
    det: DetectionScore,
    det_t: Option<DetectionScore>,
    top_ll: Option<TopResult>,
    top_lt: Option<TopResult>,
}

fn aggregate(results: &[&SceneResult], config: &EvalConfig) -> Aggregate {
    let centerlines: Vec<SceneOutcomes> = results.iter().map(|r| r.centerlines.clone()).collect();
    let det = pool_thresholds(&centerlines, &config.thresholds);
    if config.task == Task::Perception {
        return Aggregate { det, det_t: None, top_ll: None, top_lt: None };
    }
    let traffic: Vec<_> = results.iter().map(|r| r.traffic.clone()).collect();
    let n = config.thresholds.len();
    Aggregate {
        det,
        det_t: Some(pool_classes(&traffic, config.te_iou)),
        top_ll: Some(pool_vertex_scores(&concat_thresholds(results, |r| &r.top_ll, n))),
        top_lt: Some(pool_vertex_scores(&concat_thresholds(results, |r| &r.top_lt, n))),
    }
}

impl Aggregate {
    fn ols(&self, variant: OlsVariant) -> Result<Option<f64>> {
        match (&self.det_t, &self.top_ll, &self.top_lt) {
            (Some(dt), Some(ll), Some(lt)) => ols(self.det.value, dt.value, ll.score, lt.score, variant).map(Some),
            _ => Ok(None),
        }
    }
}

/// Scores predictions against gt. Scenes are paired by id in gt order;
/// per-scene matching runs in parallel and pooling is sequential.
pub fn evaluate(
    preds: &[SceneAnnotation],
    gts: &[SceneAnnotation],
    config: &EvalConfig,
) -> Result<(MetricReport, Vec<SceneScores>)> {
    config.validate()?;
    let mut by_id: HashMap<&str, &SceneAnnotation> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_id.insert(p.scene_id.as_str(), p).is_some() {
            return Err(Error::InvalidSpec(format!("duplicate prediction scene '{}'", p.scene_id)));
        }
    }
    let mut seen = std::collections::HashSet::with_capacity(gts.len());
    for g in gts {
        if !seen.insert(g.scene_id.as_str()) {
            return Err(Error::InvalidSpec(format!("duplicate gt scene '{}'", g.scene_id)));
        }
    }
    for s in preds.iter().chain(gts) {
        s.validate().map_err(|m| Error::InvalidSpec(format!("scene '{}': {m}", s.scene_id)))?;
    }

    let mut diagnostics = Diagnostics { scenes: gts.len(), ..Diagnostics::default() };
    let empties: Vec<SceneAnnotation> = gts
        .iter()
        .filter(|g| !by_id.contains_key(g.scene_id.as_str()))
        .map(|g| SceneAnnotation::empty(g.scene_id.clone()))
        .collect();
    diagnostics.missing_predictions = empties.iter().map(|s| s.scene_id.clone()).collect();
    let empty_by_id: HashMap<&str, &SceneAnnotation> = empties.iter().map(|s| (s.scene_id.as_str(), s)).collect();
    diagnostics.dropped_predictions = preds
        .iter()
        .filter(|p| !seen.contains(p.scene_id.as_str()))
        .map(|p| p.scene_id.clone())
        .collect();

    let pairs: Vec<(&SceneAnnotation, &SceneAnnotation)> = gts
        .iter()
        .map(|g| {
            let id = g.scene_id.as_str();
            (by_id.get(id).or_else(|| empty_by_id.get(id)).copied().expect("every gt scene is paired"), g)
        })
        .collect();
    for (p, g) in &pairs {
        diagnostics.pred_centerlines += p.centerlines.len();
        diagnostics.gt_centerlines += g.centerlines.len();
        if config.task == Task::Reasoning {
            diagnostics.pred_traffic_elements += p.traffic_elements.len();
            diagnostics.gt_traffic_elements += g.traffic_elements.len();
        }
    }

    let results: Vec<SceneResult> = pairs.par_iter().map(|(p, g)| evaluate_scene(p, g, config)).collect();

    let mut scene_scores = Vec::with_capacity(results.len());
    for ((_, g), r) in pairs.iter().zip(&results) {
        let agg = aggregate(&[r], config);
        let reasoning = config.task == Task::Reasoning;
        scene_scores.push(SceneScores {
            scene_id: g.scene_id.clone(),
            map: (!reasoning).then_some(agg.det.value),
            det_l: reasoning.then_some(agg.det.value),
            det_t: agg.det_t.as_ref().map(|d| d.value),
            top_ll: agg.top_ll.as_ref().map(|t| t.score),
            top_lt: agg.top_lt.as_ref().map(|t| t.score),
            ols: agg.ols(config.ols_variant)?,
        });
    }

    let refs: Vec<&SceneResult> = results.iter().collect();
    let agg = aggregate(&refs, config);
    if agg.det.undefined {
        diagnostics.flags.push("centerline AP undefined (no predictions and no gt), reported as 1.0".into());
    }
    if agg.det_t.as_ref().is_some_and(|d| d.undefined) {
        diagnostics.flags.push("DET_t undefined (no predictions and no gt), reported as 1.0".into());
    }
    if agg.top_ll.as_ref().is_some_and(|t| t.undefined) {
        diagnostics.flags.push("TOP_ll undefined (no gt centerline has successors), reported as 1.0".into());
    }
    if agg.top_lt.as_ref().is_some_and(|t| t.undefined) {
        diagnostics.flags.push("TOP_lt undefined (no gt centerline has traffic elements), reported as 1.0".into());
    }

    let reasoning = config.task == Task::Reasoning;
    let report = MetricReport {
        task: config.task,
        ols_variant: reasoning.then_some(config.ols_variant),
        per_threshold: agg.det.per_threshold.clone(),
        map: (!reasoning).then_some(agg.det.value),
        det_l: reasoning.then_some(agg.det.value),
        det_t: agg.det_t.as_ref().map(|d| d.value),
        det_t_per_class: agg.det_t.as_ref().map(|d| d.per_class.clone()),
        top_ll: agg.top_ll.as_ref().map(|t| t.score),
        top_lt: agg.top_lt.as_ref().map(|t| t.score),
        ols: agg.ols(config.ols_variant)?,
        diagnostics,
    };
    Ok((report, scene_scores))
}
