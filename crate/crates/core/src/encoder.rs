//! Forward-pass numerics of the SD graph encoder and the scene-graph
//! propagation layers.
//!
//! All ops accumulate neighbors in ascending index order so results are
//! bit-reproducible. Each op has a matching `*_jvp` giving the directional
//! derivative with respect to its feature input.

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2, ArrayView3, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    /// `out × in`
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Linear {
    /// Unpacks an `out × (in + 1) × 1` array whose last column is the bias.
    /// This is how layer weights are stored in bev-f32 files.
    pub fn from_packed(packed: ArrayView3<'_, f32>) -> Result<Self> {
        let (out, cols, depth) = packed.dim();
        if depth != 1 || cols < 2 || out == 0 {
            return Err(Error::DimensionMismatch(format!(
                "packed layer is {:?}, expected (out, in + 1, 1)",
                packed.dim()
            )));
        }
        let m = packed.index_axis(Axis(2), 0).mapv(f64::from);
        Ok(Linear {
            weight: m.slice(ndarray::s![.., ..cols - 1]).to_owned(),
            bias: m.column(cols - 1).to_owned(),
        })
    }
}

/// Multi-layer perceptron with ReLU between layers and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Linear>,
}

impl MlpParams {
    pub fn new(layers: Vec<Linear>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::DimensionMismatch("MLP needs at least one layer".into()));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.bias.len() != l.weight.nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "layer {k}: bias has {} entries, weight has {} rows",
                    l.bias.len(),
                    l.weight.nrows()
                )));
            }
            if l.weight.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidValue { what: "MLP parameter", value: f64::NAN });
            }
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].weight.nrows() != pair[1].weight.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "layer {k} outputs {} features, layer {} expects {}",
                    pair[0].weight.nrows(),
                    k + 1,
                    pair[1].weight.ncols()
                )));
            }
        }
        Ok(MlpParams { layers })
    }

    /// The two-layer perceptron used by the graph encoder.
    pub fn two_layer(w1: Array2<f64>, b1: Array1<f64>, w2: Array2<f64>, b2: Array1<f64>) -> Result<Self> {
        Self::new(vec![Linear { weight: w1, bias: b1 }, Linear { weight: w2, bias: b2 }])
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weight.nrows())
    }

    pub fn forward(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let last = self.layers.len() - 1;
        let mut h = x.to_owned();
        for (k, l) in self.layers.iter().enumerate() {
            h = l.weight.dot(&h) + &l.bias;
            if k < last {
                h.mapv_inplace(|v| v.max(0.0));
            }
        }
        h
    }

    /// Returns the output and the Jacobian-vector product `J(x)·v`.
    pub fn jvp(&self, x: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> (Array1<f64>, Array1<f64>) {
        let last = self.layers.len() - 1;
        let mut h = x.to_owned();
        let mut dh = v.to_owned();
        for (k, l) in self.layers.iter().enumerate() {
            h = l.weight.dot(&h) + &l.bias;
            dh = l.weight.dot(&dh);
            if k < last {
                for (hv, dv) in h.iter_mut().zip(dh.iter_mut()) {
                    if *hv <= 0.0 {
                        *hv = 0.0;
                        *dv = 0.0;
                    }
                }
            }
        }
        (h, dh)
    }
}

fn check_finite(what: &'static str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    match values.into_iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::InvalidValue { what, value: v }),
        None => Ok(()),
    }
}

fn check_unit_interval<'a>(values: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    match values.into_iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(Error::OutOfRange(*v)),
        None => Ok(()),
    }
}

fn edge_conv_neighbors(adjacency: ArrayView2<'_, bool>, n: usize) -> Result<Vec<Vec<usize>>> {
    let (r, c) = adjacency.dim();
    if r != c {
        return Err(Error::NonSquareAdjacency { rows: r, cols: c });
    }
    if r != n {
        return Err(Error::DimensionMismatch(format!("{n} nodes but adjacency is {r}x{r}")));
    }
    let mut out = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if adjacency[[i, j]] != adjacency[[j, i]] {
                return Err(Error::DimensionMismatch(format!("adjacency not symmetric at ({i}, {j})")));
            }
            if adjacency[[i, j]] {
                out[i].push(j);
            }
        }
    }
    Ok(out)
}

fn edge_input(x: ArrayView2<'_, f64>, i: usize, j: usize) -> Array1<f64> {
    let xi = x.row(i);
    let xj = x.row(j);
    let mut z = Array1::zeros(2 * xi.len());
    let f = xi.len();
    for k in 0..f {
        z[k] = xi[k];
        z[f + k] = xj[k] - xi[k];
    }
    z
}

fn check_edge_conv(x: ArrayView2<'_, f64>, mlp: &MlpParams) -> Result<()> {
    if mlp.input_dim() != 2 * x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "MLP expects {} inputs, edge features have {}",
            mlp.input_dim(),
            2 * x.ncols()
        )));
    }
    check_finite("node feature", x.iter().copied())
}

/// Edge convolution: `out_i = mean_{j∈N(i)} MLP([x_i, x_j − x_i])`.
///
/// `adjacency` must be square and symmetric. Nodes without neighbors get a
/// zero row.
pub fn edge_conv(x: ArrayView2<'_, f64>, adjacency: ArrayView2<'_, bool>, mlp: &MlpParams) -> Result<Array2<f64>> {
    check_edge_conv(x, mlp)?;
    let neighbors = edge_conv_neighbors(adjacency, x.nrows())?;
    let mut out = Array2::zeros((x.nrows(), mlp.output_dim()));
    for (i, nbrs) in neighbors.iter().enumerate() {
        if nbrs.is_empty() {
            continue;
        }
        let mut acc = Array1::<f64>::zeros(mlp.output_dim());
        for &j in nbrs {
            acc += &mlp.forward(edge_input(x, i, j).view());
        }
        acc /= nbrs.len() as f64;
        out.row_mut(i).assign(&acc);
    }
    Ok(out)
}

/// Directional derivative of [`edge_conv`] with respect to `x` along `dx`.
pub fn edge_conv_jvp(
    x: ArrayView2<'_, f64>,
    adjacency: ArrayView2<'_, bool>,
    mlp: &MlpParams,
    dx: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    check_edge_conv(x, mlp)?;
    if dx.dim() != x.dim() {
        return Err(Error::DimensionMismatch("tangent shape differs from features".into()));
    }
    let neighbors = edge_conv_neighbors(adjacency, x.nrows())?;
    let mut out = Array2::zeros((x.nrows(), mlp.output_dim()));
    for (i, nbrs) in neighbors.iter().enumerate() {
        if nbrs.is_empty() {
            continue;
        }
        let mut acc = Array1::<f64>::zeros(mlp.output_dim());
        for &j in nbrs {
            let (_, d) = mlp.jvp(edge_input(x, i, j).view(), edge_input(dx, i, j).view());
            acc += &d;
        }
        acc /= nbrs.len() as f64;
        out.row_mut(i).assign(&acc);
    }
    Ok(out)
}

/// Learnable weights and scores of the scene-graph propagation layers.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnnWeights {
    /// `3 × F_c × F_c`: successor, predecessor and self-loop transforms.
    pub w_cc: Array3<f64>,
    /// `|C_t| × F_c × P`, where `P` is the output dim of the projection network.
    pub w_ct: Array3<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// `|C_t| × K` traffic-element class scores in `[0, 1]`.
    pub s_t: Array2<f64>,
}

impl SgnnWeights {
    /// Weights for the centerline-centerline op only, with α = β = 1.
    pub fn centerline_only(w_cc: Array3<f64>) -> Self {
        SgnnWeights {
            w_cc,
            w_ct: Array3::zeros((0, 0, 0)),
            alpha: 1.0,
            beta: 1.0,
            s_t: Array2::zeros((0, 0)),
        }
    }
}

pub const CONNECTION_MODES: usize = 3;

/// `T_CC(c, m, n)` for the three connection modes.
fn connection_gate(a_cc: ArrayView2<'_, f64>, mode: usize, m: usize, n: usize) -> f64 {
    match mode {
        0 => a_cc[[m, n]],
        1 => a_cc[[n, m]],
        _ => f64::from(u8::from(m == n)),
    }
}

fn check_cc(q_c: ArrayView2<'_, f64>, a_cc: ArrayView2<'_, f64>, w_cc: ArrayView3<'_, f64>) -> Result<()> {
    let (r, c) = a_cc.dim();
    if r != c {
        return Err(Error::NonSquareAdjacency { rows: r, cols: c });
    }
    if r != q_c.nrows() {
        return Err(Error::DimensionMismatch(format!("{} queries but A_CC is {r}x{r}", q_c.nrows())));
    }
    let f = q_c.ncols();
    if w_cc.dim() != (CONNECTION_MODES, f, f) {
        return Err(Error::DimensionMismatch(format!(
            "W_CC is {:?}, expected (3, {f}, {f})",
            w_cc.dim()
        )));
    }
    check_unit_interval(a_cc.iter())?;
    check_finite("centerline query", q_c.iter().copied())
}

/// Centerline-to-centerline propagation:
/// `out_m = Σ_{n∈N(m)} Σ_c α·T_CC(c,m,n)·W_CC(c)·q_n` with
/// `T_CC = stack(A_CC, A_CCᵀ, I)` and `N(m)` the indices where any slice is nonzero.
pub fn sgnn_cc_propagate(q_c: ArrayView2<'_, f64>, a_cc: ArrayView2<'_, f64>, weights: &SgnnWeights) -> Result<Array2<f64>> {
    check_cc(q_c, a_cc, weights.w_cc.view())?;
    let (m_count, f) = q_c.dim();
    let mut out = Array2::zeros((m_count, f));
    for m in 0..m_count {
        let mut acc = Array1::<f64>::zeros(f);
        for n in 0..m_count {
            for mode in 0..CONNECTION_MODES {
                let gate = connection_gate(a_cc, mode, m, n);
                if gate != 0.0 {
                    let msg = weights.w_cc.index_axis(Axis(0), mode).dot(&q_c.row(n));
                    acc.scaled_add(weights.alpha * gate, &msg);
                }
            }
        }
        out.row_mut(m).assign(&acc);
    }
    Ok(out)
}

/// The centerline op is linear in its queries, so its JVP is the op itself.
pub fn sgnn_cc_jvp(dq_c: ArrayView2<'_, f64>, a_cc: ArrayView2<'_, f64>, weights: &SgnnWeights) -> Result<Array2<f64>> {
    sgnn_cc_propagate(dq_c, a_cc, weights)
}

fn check_ct(q_t: ArrayView2<'_, f64>, a_ct: ArrayView2<'_, f64>, weights: &SgnnWeights, f_proj: &MlpParams) -> Result<()> {
    let k = q_t.nrows();
    if a_ct.ncols() != k {
        return Err(Error::DimensionMismatch(format!("{k} traffic queries but A_CT has {} columns", a_ct.ncols())));
    }
    let (classes, _, p) = weights.w_ct.dim();
    if weights.s_t.dim() != (classes, k) {
        return Err(Error::DimensionMismatch(format!(
            "S_T is {:?}, expected ({classes}, {k})",
            weights.s_t.dim()
        )));
    }
    if f_proj.input_dim() != q_t.ncols() || f_proj.output_dim() != p {
        return Err(Error::DimensionMismatch(format!(
            "projection maps {}→{}, need {}→{p}",
            f_proj.input_dim(),
            f_proj.output_dim(),
            q_t.ncols()
        )));
    }
    check_unit_interval(a_ct.iter())?;
    check_unit_interval(weights.s_t.iter())?;
    check_finite("traffic query", q_t.iter().copied())
}

/// Centerline-to-traffic-element propagation:
/// `out_m = Σ_{n: A_CT(m,n)>0} Σ_c β·S_T(c,n)·A_CT(m,n)·W_CT(c)·f_proj(q_n)`.
pub fn sgnn_ct_propagate(
    q_t: ArrayView2<'_, f64>,
    a_ct: ArrayView2<'_, f64>,
    weights: &SgnnWeights,
    f_proj: &MlpParams,
) -> Result<Array2<f64>> {
    check_ct(q_t, a_ct, weights, f_proj)?;
    let projected: Vec<Array1<f64>> = q_t.rows().into_iter().map(|q| f_proj.forward(q)).collect();
    Ok(ct_accumulate(a_ct, weights, &projected))
}

fn ct_accumulate(a_ct: ArrayView2<'_, f64>, weights: &SgnnWeights, projected: &[Array1<f64>]) -> Array2<f64> {
    let (classes, f_c, _) = weights.w_ct.dim();
    let mut out = Array2::zeros((a_ct.nrows(), f_c));
    for m in 0..a_ct.nrows() {
        let mut acc = Array1::<f64>::zeros(f_c);
        for (n, proj) in projected.iter().enumerate() {
            let a = a_ct[[m, n]];
            if a <= 0.0 {
                continue;
            }
            for c in 0..classes {
                let s = weights.s_t[[c, n]];
                if s != 0.0 {
                    let msg = weights.w_ct.index_axis(Axis(0), c).dot(proj);
                    acc.scaled_add(weights.beta * s * a, &msg);
                }
            }
        }
        out.row_mut(m).assign(&acc);
    }
    out
}

/// Directional derivative of [`sgnn_ct_propagate`] with respect to `q_t`.
pub fn sgnn_ct_jvp(
    q_t: ArrayView2<'_, f64>,
    a_ct: ArrayView2<'_, f64>,
    weights: &SgnnWeights,
    f_proj: &MlpParams,
    dq_t: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    check_ct(q_t, a_ct, weights, f_proj)?;
    if dq_t.dim() != q_t.dim() {
        return Err(Error::DimensionMismatch("tangent shape differs from queries".into()));
    }
    let tangents: Vec<Array1<f64>> = q_t
        .rows()
        .into_iter()
        .zip(dq_t.rows())
        .map(|(q, dq)| f_proj.jvp(q, dq).1)
        .collect();
    Ok(ct_accumulate(a_ct, weights, &tangents))
}
