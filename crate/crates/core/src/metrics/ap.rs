use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::distance::{chamfer, frechet_permuted};
use super::{Centerline, TrafficElement};

pub const CHAMFER_THRESHOLDS: [f64; 3] = [0.5, 1.0, 1.5];
pub const FRECHET_THRESHOLDS: [f64; 3] = [1.0, 2.0, 3.0];
pub const TE_IOU_THRESHOLD: f64 = 0.75;

/// A prediction after matching: its confidence and whether it hit a gt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOutcome {
    pub score: f64,
    pub true_positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApCurve {
    pub ap: f64,
    /// Precision and recall after each prediction in score order.
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub true_positives: usize,
    pub predictions: usize,
    pub ground_truth: usize,
    /// No predictions and no gt; `ap` is reported as 1.0.
    pub undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdAp {
    pub threshold: f64,
    pub ap: f64,
    pub matches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAp {
    pub class: u32,
    pub ap: f64,
    pub matches: usize,
    pub ground_truth: usize,
}

/// Mean AP over thresholds (or classes) with the pieces it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    pub value: f64,
    pub per_threshold: Vec<ThresholdAp>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_class: Vec<ClassAp>,
    pub predictions: usize,
    pub ground_truth: usize,
    pub undefined: bool,
}

/// Multiplies the association threshold for gt centerlines whose closest
/// waypoint lies farther than `cutoff_m` from the ego (horizontal distance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarRangeRelaxation {
    pub factor: f64,
    pub cutoff_m: f64,
}

impl Default for FarRangeRelaxation {
    fn default() -> Self {
        FarRangeRelaxation { factor: 1.5, cutoff_m: 35.0 }
    }
}

impl FarRangeRelaxation {
    pub const NONE: FarRangeRelaxation = FarRangeRelaxation { factor: 1.0, cutoff_m: f64::INFINITY };

    pub fn threshold(&self, gt: &Centerline, base: f64) -> f64 {
        let nearest = gt.points.iter().map(|p| p[0].hypot(p[1])).fold(f64::INFINITY, f64::min);
        if nearest > self.cutoff_m {
            base * self.factor
        } else {
            base
        }
    }
}

/// Greedy score-descending matching.
///
/// Predictions are visited by descending score (ties by index). Each takes
/// the cheapest still unmatched gt that `accept(gt, cost)` allows; ties in
/// cost go to the lower gt index. Returns the matched gt per prediction.
pub fn greedy_match<F>(scores: &[f64], cost: ArrayView2<'_, f64>, accept: F) -> Vec<Option<usize>>
where
    F: Fn(usize, f64) -> bool,
{
    let (n_pred, n_gt) = cost.dim();
    debug_assert_eq!(scores.len(), n_pred);
    let mut taken = vec![false; n_gt];
    let mut out = vec![None; n_pred];
    for p in score_order(scores) {
        let mut best: Option<(usize, f64)> = None;
        for g in (0..n_gt).filter(|&g| !taken[g]) {
            let c = cost[(p, g)];
            if accept(g, c) && best.is_none_or(|(_, bc)| c < bc) {
                best = Some((g, c));
            }
        }
        if let Some((g, _)) = best {
            taken[g] = true;
            out[p] = Some(g);
        }
    }
    out
}

pub(crate) fn score_order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

/// All-point interpolated AP: area under the precision envelope of the
/// PR staircase.
///
/// With `n_gt == 0` the AP is 0 when there are predictions and 1 (flagged
/// `undefined`) when there are none.
pub fn average_precision(outcomes: &[DetectionOutcome], n_gt: usize) -> ApCurve {
    let scores: Vec<f64> = outcomes.iter().map(|o| o.score).collect();
    let order = score_order(&scores);
    let mut precision = Vec::with_capacity(order.len());
    let mut recall = Vec::with_capacity(order.len());
    let mut tp = 0usize;
    for (k, &i) in order.iter().enumerate() {
        tp += outcomes[i].true_positive as usize;
        precision.push(tp as f64 / (k + 1) as f64);
        recall.push(if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 });
    }
    let undefined = n_gt == 0 && outcomes.is_empty();
    let ap = if undefined {
        1.0
    } else if n_gt == 0 {
        0.0
    } else {
        let mut envelope = precision.clone();
        for k in (0..envelope.len().saturating_sub(1)).rev() {
            envelope[k] = envelope[k].max(envelope[k + 1]);
        }
        let mut area = 0.0;
        let mut prev_recall = 0.0;
        for (r, p) in recall.iter().zip(&envelope) {
            area += (r - prev_recall) * p;
            prev_recall = *r;
        }
        area
    };
    ApCurve {
        ap,
        precision,
        recall,
        true_positives: tp,
        predictions: outcomes.len(),
        ground_truth: n_gt,
        undefined,
    }
}

/// IoU of two `(x, y, w, h)` boxes.
pub fn box_iou(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let iw = ((a[0] + a[2]).min(b[0] + b[2]) - a[0].max(b[0])).max(0.0);
    let ih = ((a[1] + a[3]).min(b[1] + b[3]) - a[1].max(b[1])).max(0.0);
    let inter = iw * ih;
    let union = a[2] * a[3] + b[2] * b[3] - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Per-threshold matching results of one scene.
#[derive(Debug, Clone, Default)]
pub(crate) struct SceneOutcomes {
    pub per_threshold: Vec<Vec<DetectionOutcome>>,
    pub predictions: usize,
    pub ground_truth: usize,
}

pub(crate) fn cost_matrix<P, G, F>(preds: &[P], gts: &[G], dist: F) -> Array2<f64>
where
    F: Fn(&P, &G) -> f64,
{
    Array2::from_shape_fn((preds.len(), gts.len()), |(p, g)| dist(&preds[p], &gts[g]))
}

pub(crate) fn centerline_chamfer(a: &Centerline, b: &Centerline) -> f64 {
    chamfer(&a.points, &b.points).unwrap_or(f64::INFINITY)
}

pub(crate) fn centerline_frechet(a: &Centerline, b: &Centerline) -> f64 {
    frechet_permuted(&a.points, &b.points)
}

/// Matches one scene at every threshold; a pair is accepted when its cost
/// is within the (possibly relaxed) threshold of the gt.
pub(crate) fn centerline_outcomes(
    preds: &[Centerline],
    gts: &[Centerline],
    cost: ArrayView2<'_, f64>,
    thresholds: &[f64],
    relax: &FarRangeRelaxation,
) -> SceneOutcomes {
    let scores: Vec<f64> = preds.iter().map(|c| c.score).collect();
    let per_threshold = thresholds
        .iter()
        .map(|&t| {
            let limits: Vec<f64> = gts.iter().map(|g| relax.threshold(g, t)).collect();
            let matched = greedy_match(&scores, cost, |g, c| c <= limits[g]);
            outcomes(&scores, &matched)
        })
        .collect();
    SceneOutcomes { per_threshold, predictions: preds.len(), ground_truth: gts.len() }
}

fn outcomes(scores: &[f64], matched: &[Option<usize>]) -> Vec<DetectionOutcome> {
    scores
        .iter()
        .zip(matched)
        .map(|(&score, m)| DetectionOutcome { score, true_positive: m.is_some() })
        .collect()
}

/// Within-class IoU matching of traffic elements. Returns the matched gt
/// index per prediction.
pub(crate) fn match_traffic_elements(preds: &[TrafficElement], gts: &[TrafficElement], iou_threshold: f64) -> Vec<Option<usize>> {
    let scores: Vec<f64> = preds.iter().map(|t| t.score).collect();
    let cost = cost_matrix(preds, gts, |p, g| if p.class == g.class { 1.0 - box_iou(&p.bbox, &g.bbox) } else { f64::INFINITY });
    greedy_match(&scores, cost.view(), |_, c| c.is_finite() && 1.0 - c >= iou_threshold)
}

/// Per-class outcomes of one scene, keyed by class, with gt counts.
pub(crate) fn traffic_outcomes(
    preds: &[TrafficElement],
    gts: &[TrafficElement],
    iou_threshold: f64,
) -> BTreeMap<u32, (Vec<DetectionOutcome>, usize)> {
    let matched = match_traffic_elements(preds, gts, iou_threshold);
    let mut by_class: BTreeMap<u32, (Vec<DetectionOutcome>, usize)> = BTreeMap::new();
    for g in gts {
        by_class.entry(g.class).or_default().1 += 1;
    }
    for (p, m) in preds.iter().zip(matched) {
        by_class
            .entry(p.class)
            .or_default()
            .0
            .push(DetectionOutcome { score: p.score, true_positive: m.is_some() });
    }
    by_class
}

/// Pools per-scene outcomes into one AP per threshold and their mean.
pub(crate) fn pool_thresholds(scenes: &[SceneOutcomes], thresholds: &[f64]) -> DetectionScore {
    let n_gt: usize = scenes.iter().map(|s| s.ground_truth).sum();
    let n_pred: usize = scenes.iter().map(|s| s.predictions).sum();
    let per_threshold: Vec<ThresholdAp> = thresholds
        .iter()
        .enumerate()
        .map(|(k, &threshold)| {
            let pooled: Vec<DetectionOutcome> = scenes.iter().flat_map(|s| s.per_threshold[k].iter().copied()).collect();
            let curve = average_precision(&pooled, n_gt);
            ThresholdAp { threshold, ap: curve.ap, matches: curve.true_positives }
        })
        .collect();
    let value = if per_threshold.is_empty() {
        0.0
    } else {
        per_threshold.iter().map(|t| t.ap).sum::<f64>() / per_threshold.len() as f64
    };
    DetectionScore {
        value,
        per_threshold,
        per_class: Vec::new(),
        predictions: n_pred,
        ground_truth: n_gt,
        undefined: n_gt == 0 && n_pred == 0,
    }
}

/// Pools per-class outcomes across scenes; classes without gt anywhere do
/// not enter the average.
pub(crate) fn pool_classes(scenes: &[BTreeMap<u32, (Vec<DetectionOutcome>, usize)>], iou_threshold: f64) -> DetectionScore {
    let mut pooled: BTreeMap<u32, (Vec<DetectionOutcome>, usize)> = BTreeMap::new();
    for scene in scenes {
        for (class, (outs, n_gt)) in scene {
            let entry = pooled.entry(*class).or_default();
            entry.0.extend_from_slice(outs);
            entry.1 += n_gt;
        }
    }
    let n_pred: usize = pooled.values().map(|(o, _)| o.len()).sum();
    let n_gt: usize = pooled.values().map(|(_, g)| g).sum();
    let per_class: Vec<ClassAp> = pooled
        .iter()
        .filter(|(_, (_, g))| *g > 0)
        .map(|(&class, (outs, g))| {
            let curve = average_precision(outs, *g);
            ClassAp { class, ap: curve.ap, matches: curve.true_positives, ground_truth: *g }
        })
        .collect();
    let undefined = n_gt == 0 && n_pred == 0;
    let value = if undefined {
        1.0
    } else if per_class.is_empty() {
        0.0
    } else {
        per_class.iter().map(|c| c.ap).sum::<f64>() / per_class.len() as f64
    };
    DetectionScore {
        value,
        per_threshold: vec![ThresholdAp {
            threshold: iou_threshold,
            ap: value,
            matches: per_class.iter().map(|c| c.matches).sum(),
        }],
        per_class,
        predictions: n_pred,
        ground_truth: n_gt,
        undefined,
    }
}

/// Predictions and gt of one scene.
pub type ScenePair<'a, T> = (&'a [T], &'a [T]);

/// Chamfer-matched AP per threshold and their mean, pooled over scenes.
pub fn chamfer_ap(scenes: &[ScenePair<'_, Centerline>], thresholds: &[f64]) -> DetectionScore {
    let outs: Vec<SceneOutcomes> = scenes
        .iter()
        .map(|(p, g)| {
            let cost = cost_matrix(p, g, centerline_chamfer);
            centerline_outcomes(p, g, cost.view(), thresholds, &FarRangeRelaxation::NONE)
        })
        .collect();
    pool_thresholds(&outs, thresholds)
}

/// Mean AP over permuted-Fréchet association thresholds.
pub fn det_l(scenes: &[ScenePair<'_, Centerline>], thresholds: &[f64], relax: &FarRangeRelaxation) -> DetectionScore {
    let outs: Vec<SceneOutcomes> = scenes
        .iter()
        .map(|(p, g)| {
            let cost = cost_matrix(p, g, centerline_frechet);
            centerline_outcomes(p, g, cost.view(), thresholds, relax)
        })
        .collect();
    pool_thresholds(&outs, thresholds)
}

/// Per-class IoU-matched AP averaged over the classes present in gt.
pub fn det_t(scenes: &[ScenePair<'_, TrafficElement>], iou_threshold: f64) -> DetectionScore {
    let outs: Vec<_> = scenes.iter().map(|(p, g)| traffic_outcomes(p, g, iou_threshold)).collect();
    pool_classes(&outs, iou_threshold)
}
