//! Perception loss primitives: focal classification loss, point-to-point
//! Manhattan loss and edge direction similarity.

use crate::error::{Error, Result};

const PROB_EPS: f64 = 1e-7;

/// `-α_t (1 - p_t)^γ ln p_t`, with `p` clamped to `[1e-7, 1 - 1e-7]`.
///
/// `α_t = alpha` for positive targets and `1 - alpha` for negatives. With
/// `gamma = 0, alpha = 1` a positive target reduces to cross-entropy.
pub fn focal_loss(pred_prob: f64, target: bool, gamma: f64, alpha: f64) -> f64 {
    let p = pred_prob.clamp(PROB_EPS, 1.0 - PROB_EPS);
    let (p_t, alpha_t) = if target { (p, alpha) } else { (1.0 - p, 1.0 - alpha) };
    -alpha_t * (1.0 - p_t).powf(gamma) * p_t.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Forward,
    Reversed,
}

fn manhattan<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Picks the gt orientation minimizing the summed Manhattan distance.
/// Ties keep the forward orientation.
pub fn match_orientation<const D: usize>(pred: &[[f64; D]], gt: &[[f64; D]]) -> Result<(Orientation, f64)> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch(pred.len(), gt.len()));
    }
    let forward: f64 = pred.iter().zip(gt).map(|(p, g)| manhattan(p, g)).sum();
    let reversed: f64 = pred.iter().zip(gt.iter().rev()).map(|(p, g)| manhattan(p, g)).sum();
    Ok(if reversed < forward {
        (Orientation::Reversed, reversed)
    } else {
        (Orientation::Forward, forward)
    })
}

/// Summed Manhattan distance under the best point correspondence.
pub fn p2p_loss<const D: usize>(pred: &[[f64; D]], gt: &[[f64; D]]) -> Result<f64> {
    match_orientation(pred, gt).map(|(_, cost)| cost)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirLoss {
    /// Sum of cosine similarities over matched edges (not negated).
    pub value: f64,
    /// Edge pairs skipped because one of the edges had zero length.
    pub degenerate_edges: usize,
}

/// Cosine similarity of matched edge vectors, summed over edges.
pub fn dir_loss<const D: usize>(pred: &[[f64; D]], gt: &[[f64; D]]) -> Result<DirLoss> {
    let (orientation, _) = match_orientation(pred, gt)?;
    if pred.len() < 2 {
        return Err(Error::EmptyInput("direction loss needs at least two waypoints"));
    }
    let gt: Vec<[f64; D]> = match orientation {
        Orientation::Forward => gt.to_vec(),
        Orientation::Reversed => gt.iter().rev().copied().collect(),
    };
    let edge = |pts: &[[f64; D]], j: usize| -> [f64; D] { std::array::from_fn(|k| pts[j + 1][k] - pts[j][k]) };
    let mut out = DirLoss { value: 0.0, degenerate_edges: 0 };
    for j in 0..pred.len() - 1 {
        let (a, b) = (edge(pred, j), edge(&gt, j));
        let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            out.degenerate_edges += 1;
            continue;
        }
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        out.value += dot / (na * nb);
    }
    Ok(out)
}
