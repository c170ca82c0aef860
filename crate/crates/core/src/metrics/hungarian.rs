use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// Minimum-cost one-to-one assignment of rows to columns.
///
/// Rectangular matrices are allowed: every row is assigned when there are
/// at least as many columns, otherwise every column is. Pairs come back
/// sorted by row.
pub fn hungarian_match(cost: ArrayView2<'_, f64>) -> Result<Vec<(usize, usize)>> {
    if let Some(v) = cost.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidValue { what: "assignment cost", value: *v });
    }
    let (rows, cols) = cost.dim();
    if rows == 0 || cols == 0 {
        return Ok(Vec::new());
    }
    if rows > cols {
        let mut pairs: Vec<_> = solve(cost.t()).into_iter().map(|(c, r)| (r, c)).collect();
        pairs.sort_unstable();
        return Ok(pairs);
    }
    Ok(solve(cost))
}

pub fn assignment_cost(cost: ArrayView2<'_, f64>, pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(r, c)| cost[(r, c)]).sum()
}

// Shortest augmenting paths with row/column potentials; needs rows <= cols.
fn solve(cost: ArrayView2<'_, f64>) -> Vec<(usize, usize)> {
    let (n, m) = cost.dim();
    // 1-based with column 0 as the virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        while j0 != 0 {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        }
    }
    let mut pairs: Vec<_> = (1..=m).filter(|&j| owner[j] != 0).map(|j| (owner[j] - 1, j - 1)).collect();
    pairs.sort_unstable();
    pairs
}
