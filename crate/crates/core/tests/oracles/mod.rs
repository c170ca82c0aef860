//! Slow, independent reference implementations used as test oracles.
//! Shared with the acceptance gate in the CLI crate.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::rngs::StdRng;
use rand::Rng;

/// Minimum over every monotone coupling of the largest coupled distance,
/// by explicit path enumeration.
pub fn frechet_brute(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    fn walk(a: &[[f64; 2]], b: &[[f64; 2]], i: usize, j: usize, worst: f64, best: &mut f64) {
        let d = ((a[i][0] - b[j][0]).powi(2) + (a[i][1] - b[j][1]).powi(2)).sqrt();
        let worst = worst.max(d);
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(worst);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, worst, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, worst, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, worst, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

pub fn frechet_brute_3d(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    fn walk(a: &[[f64; 3]], b: &[[f64; 3]], i: usize, j: usize, worst: f64, best: &mut f64) {
        let d = (0..3).map(|k| (a[i][k] - b[j][k]).powi(2)).sum::<f64>().sqrt();
        let worst = worst.max(d);
        if worst >= *best {
            return;
        }
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = worst;
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, worst, best);
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, worst, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, worst, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Minimum assignment cost by trying every injection of rows into columns
/// (or columns into rows when there are more rows).
pub fn assignment_brute(cost: &[Vec<f64>]) -> f64 {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let t: Vec<Vec<f64>>;
    let c = if rows > cols {
        t = (0..cols).map(|j| (0..rows).map(|i| cost[i][j]).collect()).collect();
        &t
    } else {
        cost
    };
    fn go(c: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == c.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                go(c, row + 1, used, acc + c[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(c, 0, &mut vec![false; c[0].len()], 0.0, &mut best);
    best
}

/// Fraction of 16×16 subsamples of the cell `[x0, x0+res) × [y0, y0+res)`
/// lying within `half` of segment `a→b`.
pub fn supersampled_coverage(x0: f64, y0: f64, res: f64, a: [f64; 2], b: [f64; 2], half: f64) -> f64 {
    const N: usize = 16;
    let mut inside = 0;
    for si in 0..N {
        for sj in 0..N {
            let px = x0 + (si as f64 + 0.5) * res / N as f64;
            let py = y0 + (sj as f64 + 0.5) * res / N as f64;
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len2 = dx * dx + dy * dy;
            let t = if len2 == 0.0 { 0.0 } else { (((px - a[0]) * dx + (py - a[1]) * dy) / len2).clamp(0.0, 1.0) };
            let (qx, qy) = (a[0] + t * dx, a[1] + t * dy);
            if (px - qx).powi(2) + (py - qy).powi(2) <= half * half {
                inside += 1;
            }
        }
    }
    inside as f64 / (N * N) as f64
}

/// A centerline for the TOP oracle: waypoints and score.
#[derive(Clone, Debug)]
pub struct Lane {
    pub pts: Vec<[f64; 3]>,
    pub score: f64,
}

#[derive(Clone, Debug)]
pub struct Sign {
    pub bbox: [f64; 4],
    pub class: u32,
    pub score: f64,
}

#[derive(Clone, Debug)]
pub struct Graph {
    pub lanes: Vec<Lane>,
    pub signs: Vec<Sign>,
    pub ll: Vec<Vec<f64>>,
    pub lt: Vec<Vec<f64>>,
}

fn iou_oracle(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let (ax1, ay1, ax2, ay2) = (a[0], a[1], a[0] + a[2], a[1] + a[3]);
    let (bx1, by1, bx2, by2) = (b[0], b[1], b[0] + b[2], b[1] + b[3]);
    let w = (ax2.min(bx2) - ax1.max(bx1)).max(0.0);
    let h = (ay2.min(by2) - ay1.max(by1)).max(0.0);
    let inter = w * h;
    inter / ((ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter)
}

/// Greedy projection: visit predictions by score (desc, then index), give
/// each the nearest free gt that passes `ok`.
fn project(scores: &[f64], n_gt: usize, dist: impl Fn(usize, usize) -> f64, ok: impl Fn(usize, f64) -> bool) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&x, &y| scores[y].partial_cmp(&scores[x]).unwrap().then(x.cmp(&y)));
    let mut free = vec![true; n_gt];
    let mut out = vec![None; scores.len()];
    for p in order {
        let mut pick: Option<usize> = None;
        let mut pick_d = f64::INFINITY;
        for g in 0..n_gt {
            let d = dist(p, g);
            if free[g] && ok(g, d) && (pick.is_none() || d < pick_d) {
                pick = Some(g);
                pick_d = d;
            }
        }
        if let Some(g) = pick {
            free[g] = false;
            out[p] = Some(g);
        }
    }
    out
}

/// TOP written straight from its definition: mean over gt vertices with
/// neighbors of Σ P(n̂')·[n̂' ∈ N(v)] / |N(v)|, then the mean over the
/// association thresholds. Far-range relaxation uses factor 1.5 beyond 35 m.
/// Returns `None` if no gt vertex has neighbors.
pub fn top_oracle(pred: &Graph, gt: &Graph, lt: bool, thresholds: &[f64]) -> Option<f64> {
    let frechet_p = |p: usize, g: usize| {
        let rev: Vec<[f64; 3]> = gt.lanes[g].pts.iter().rev().copied().collect();
        frechet_brute_3d(&pred.lanes[p].pts, &gt.lanes[g].pts).min(frechet_brute_3d(&pred.lanes[p].pts, &rev))
    };
    let near = |g: usize| gt.lanes[g].pts.iter().map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt()).fold(f64::INFINITY, f64::min);
    let lane_scores: Vec<f64> = pred.lanes.iter().map(|l| l.score).collect();
    let sign_scores: Vec<f64> = pred.signs.iter().map(|s| s.score).collect();
    // traffic elements only pair within their class at IoU >= 0.75
    let sign_map = project(
        &sign_scores,
        gt.signs.len(),
        |p, g| {
            if pred.signs[p].class == gt.signs[g].class {
                1.0 - iou_oracle(&pred.signs[p].bbox, &gt.signs[g].bbox)
            } else {
                f64::INFINITY
            }
        },
        |_, d| d.is_finite() && 1.0 - d >= 0.75,
    );

    let mut per_threshold = Vec::new();
    let mut any = false;
    for &t in thresholds {
        let lane_map = project(&lane_scores, gt.lanes.len(), frechet_p, |g, d| {
            let limit = if near(g) > 35.0 { t * 1.5 } else { t };
            d <= limit
        });
        let (pred_adj, gt_adj, col_map) = if lt {
            (&pred.lt, &gt.lt, &sign_map)
        } else {
            (&pred.ll, &gt.ll, &lane_map)
        };
        let mut total = 0.0;
        let mut count = 0usize;
        for v in 0..gt.lanes.len() {
            let truth: Vec<usize> = (0..gt_adj[v].len()).filter(|&n| gt_adj[v][n] > 0.5).collect();
            if truth.is_empty() {
                continue;
            }
            count += 1;
            let vhat = (0..pred.lanes.len()).find(|&p| lane_map[p] == Some(v));
            let Some(vhat) = vhat else { continue };
            let mut cand: Vec<usize> = (0..pred_adj[vhat].len()).filter(|&n| pred_adj[vhat][n] > 0.5).collect();
            cand.sort_by(|&x, &y| pred_adj[vhat][y].partial_cmp(&pred_adj[vhat][x]).unwrap().then(x.cmp(&y)));
            let mut sum = 0.0;
            for (k, &n) in cand.iter().enumerate() {
                let hit = |m: usize| col_map[m].is_some_and(|g| truth.contains(&g));
                if hit(n) {
                    let hits_so_far = cand[..=k].iter().filter(|&&m| hit(m)).count();
                    sum += hits_so_far as f64 / (k + 1) as f64;
                }
            }
            total += sum / truth.len() as f64;
        }
        if count > 0 {
            any = true;
            per_threshold.push(total / count as f64);
        }
    }
    any.then(|| per_threshold.iter().sum::<f64>() / per_threshold.len() as f64)
}

/// Random small scene: gt and a noisy prediction of it.
pub fn random_scene_pair(rng: &mut StdRng, max_lanes: usize, max_signs: usize) -> (Graph, Graph) {
    let m = rng.random_range(1..=max_lanes);
    let k = rng.random_range(0..=max_signs);
    let lanes: Vec<Lane> = (0..m)
        .map(|i| {
            let n = rng.random_range(2..=4);
            let y = 4.0 * i as f64 + rng.random_range(-0.5..0.5);
            let x0 = rng.random_range(-45.0..30.0);
            Lane { pts: (0..n).map(|s| [x0 + 3.0 * s as f64, y + rng.random_range(-0.3..0.3), 0.0]).collect(), score: 1.0 }
        })
        .collect();
    let signs: Vec<Sign> = (0..k)
        .map(|i| Sign { bbox: [30.0 * i as f64, 10.0, 20.0, 20.0], class: rng.random_range(0..3), score: 1.0 })
        .collect();
    let edge = |rng: &mut StdRng| if rng.random_bool(0.35) { 1.0 } else { 0.0 };
    let ll = (0..m).map(|_| (0..m).map(|_| edge(rng)).collect()).collect();
    let lt = (0..m).map(|_| (0..k).map(|_| edge(rng)).collect()).collect();
    let gt = Graph { lanes, signs, ll, lt };

    let mut pred_lanes: Vec<Lane> = gt
        .lanes
        .iter()
        .map(|l| {
            let shift = rng.random_range(0.0..2.5);
            let mut pts: Vec<[f64; 3]> = l.pts.iter().map(|p| [p[0], p[1] + shift, 0.0]).collect();
            if rng.random_bool(0.3) {
                pts.reverse();
            }
            Lane { pts, score: rng.random_range(0.05..1.0) }
        })
        .collect();
    if rng.random_bool(0.5) {
        pred_lanes.push(Lane { pts: vec![[0.0, -30.0, 0.0], [3.0, -30.0, 0.0]], score: rng.random_range(0.05..1.0) });
    }
    let pred_signs: Vec<Sign> = gt
        .signs
        .iter()
        .map(|s| {
            let dx = rng.random_range(0.0..4.0);
            let class = if rng.random_bool(0.15) { (s.class + 1) % 3 } else { s.class };
            Sign { bbox: [s.bbox[0] + dx, s.bbox[1], s.bbox[2], s.bbox[3]], class, score: rng.random_range(0.05..1.0) }
        })
        .collect();
    let (pm, pk) = (pred_lanes.len(), pred_signs.len());
    let conf = |rng: &mut StdRng| if rng.random_bool(0.4) { rng.random_range(0.5..1.0) } else { rng.random_range(0.0..0.5) };
    let ll = (0..pm).map(|_| (0..pm).map(|_| conf(rng)).collect()).collect();
    let lt = (0..pm).map(|_| (0..pk).map(|_| conf(rng)).collect()).collect();
    (Graph { lanes: pred_lanes, signs: pred_signs, ll, lt }, gt)
}
