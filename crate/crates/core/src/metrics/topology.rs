use serde::{Deserialize, Serialize};

use super::ap::{centerline_frechet, cost_matrix, greedy_match, match_traffic_elements, FarRangeRelaxation};
use super::SceneAnnotation;

/// An edge is inferred when its confidence is strictly greater than this.
pub const EDGE_CONFIDENCE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopMode {
    /// Centerline to centerline, neighbors from `A_CC` rows.
    Ll,
    /// Centerline to traffic element, neighbors from `A_CT` rows.
    Lt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopResult {
    pub score: f64,
    /// gt vertices with a non-empty neighborhood, summed over thresholds.
    pub evaluated: usize,
    /// No gt vertex had neighbors; `score` is reported as 1.0.
    pub undefined: bool,
}

/// Per gt centerline score at one Fréchet threshold, `None` where the gt
/// neighborhood is empty.
pub fn top_vertex_scores(
    pred: &SceneAnnotation,
    gt: &SceneAnnotation,
    mode: TopMode,
    threshold: f64,
    te_iou: f64,
    relax: &FarRangeRelaxation,
) -> Vec<Option<f64>> {
    // projection of centerlines: gt index -> matched pred index
    let scores: Vec<f64> = pred.centerlines.iter().map(|c| c.score).collect();
    let cost = cost_matrix(&pred.centerlines, &gt.centerlines, centerline_frechet);
    let limits: Vec<f64> = gt.centerlines.iter().map(|g| relax.threshold(g, threshold)).collect();
    let pred_to_gt = greedy_match(&scores, cost.view(), |g, c| c <= limits[g]);
    let mut gt_to_pred = vec![None; gt.centerlines.len()];
    for (p, g) in pred_to_gt.iter().enumerate() {
        if let Some(g) = g {
            gt_to_pred[*g] = Some(p);
        }
    }

    // neighbor projection: pred column -> gt column
    let (pred_cols, gt_cols, col_map) = match mode {
        TopMode::Ll => (pred.centerlines.len(), gt.centerlines.len(), pred_to_gt),
        TopMode::Lt => (
            pred.traffic_elements.len(),
            gt.traffic_elements.len(),
            match_traffic_elements(&pred.traffic_elements, &gt.traffic_elements, te_iou),
        ),
    };
    let pred_conf = |r: usize, c: usize| match mode {
        TopMode::Ll => pred.a_cc[(r, c)],
        TopMode::Lt => pred.ct(r, c),
    };
    let gt_conf = |r: usize, c: usize| match mode {
        TopMode::Ll => gt.a_cc[(r, c)],
        TopMode::Lt => gt.ct(r, c),
    };

    (0..gt.centerlines.len())
        .map(|v| {
            let truth: Vec<bool> = (0..gt_cols).map(|c| gt_conf(v, c) > EDGE_CONFIDENCE_THRESHOLD).collect();
            let n_true = truth.iter().filter(|&&t| t).count();
            if n_true == 0 {
                return None;
            }
            let Some(pv) = gt_to_pred[v] else {
                return Some(0.0);
            };
            let mut neighbors: Vec<(usize, f64)> = (0..pred_cols)
                .map(|c| (c, pred_conf(pv, c)))
                .filter(|&(_, conf)| conf > EDGE_CONFIDENCE_THRESHOLD)
                .collect();
            neighbors.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut hits = 0usize;
            let mut sum = 0.0;
            for (rank, (c, _)) in neighbors.iter().enumerate() {
                if col_map[*c].is_some_and(|g| truth[g]) {
                    hits += 1;
                    sum += hits as f64 / (rank + 1) as f64;
                }
            }
            Some(sum / n_true as f64)
        })
        .collect()
}

/// TOP over scene pairs `(pred, gt)`: vertex mean pooled over scenes and
/// averaged over the association thresholds.
pub fn top_score(
    scenes: &[(&SceneAnnotation, &SceneAnnotation)],
    mode: TopMode,
    thresholds: &[f64],
    te_iou: f64,
    relax: &FarRangeRelaxation,
) -> TopResult {
    let per_threshold: Vec<Vec<f64>> = thresholds
        .iter()
        .map(|&t| {
            scenes
                .iter()
                .flat_map(|(p, g)| top_vertex_scores(p, g, mode, t, te_iou, relax))
                .flatten()
                .collect()
        })
        .collect();
    pool_vertex_scores(&per_threshold)
}

pub(crate) fn pool_vertex_scores(per_threshold: &[Vec<f64>]) -> TopResult {
    let evaluated: usize = per_threshold.iter().map(Vec::len).sum();
    if evaluated == 0 {
        return TopResult { score: 1.0, evaluated, undefined: true };
    }
    let means: Vec<f64> = per_threshold.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    TopResult { score: means.iter().sum::<f64>() / means.len() as f64, evaluated, undefined: false }
}
