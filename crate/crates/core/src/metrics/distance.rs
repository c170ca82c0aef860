use crate::error::{Error, Result};

pub fn euclidean<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean over `a` of the distance to the closest point of `b`.
pub fn chamfer_directed<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("chamfer distance of an empty point set"));
    }
    let total: f64 = a
        .iter()
        .map(|p| b.iter().map(|q| euclidean(p, q)).fold(f64::INFINITY, f64::min))
        .sum();
    Ok(total / a.len() as f64)
}

/// Bidirectional Chamfer distance, `½(CD(a→b) + CD(b→a))`.
pub fn chamfer<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> Result<f64> {
    Ok(0.5 * (chamfer_directed(a, b)? + chamfer_directed(b, a)?))
}

/// Discrete Fréchet distance by dynamic programming over the coupling grid.
///
/// Returns `+∞` when either curve is empty (no coupling exists).
pub fn frechet<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> f64 {
    frechet_iter(a, b.iter())
}

fn frechet_iter<'a, const D: usize, I>(a: &[[f64; D]], b: I) -> f64
where
    I: DoubleEndedIterator<Item = &'a [f64; D]> + ExactSizeIterator + Clone,
{
    let m = b.len();
    if a.is_empty() || m == 0 {
        return f64::INFINITY;
    }
    // rolling row over b: ca[j] = coupling distance for (i, j)
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.clone().enumerate() {
            let d = euclidean(p, q);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// `min(FD(a, b), FD(a, reverse(b)))`.
pub fn frechet_permuted<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> f64 {
    frechet(a, b).min(frechet_iter(a, b.iter().rev()))
}
