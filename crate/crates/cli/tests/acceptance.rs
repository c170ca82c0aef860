//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Run alone with `cargo test -p sdmapkit-cli --test acceptance`.

// negated comparisons are deliberate: a NaN must fail the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2, Array3};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sdmapkit::align::{align_to_grid, perturb, GridIndex, NoiseSpec, SWEEP_ROTATIONS_DEG, SWEEP_TRANSLATIONS_M};
use sdmapkit::encoder::*;
use sdmapkit::geo::CartesianPoint;
use sdmapkit::graph::{resample_graph, SdEdge, SdMapGraph, SdNode};
use sdmapkit::metrics::*;
use sdmapkit::osm::HighwayClass;
use sdmapkit::raster::BevSpec;

type Check = Result<String, String>;
/// Name, time budget, check.
type Criterion = (&'static str, Duration, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn curve(rng: &mut StdRng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]).collect()
}

fn frechet_vs_enumeration() -> Check {
    let mut rng = StdRng::seed_from_u64(101);
    for k in 0..200 {
        let (n, m) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let (a, b) = (curve(&mut rng, n), curve(&mut rng, m));
        let (dp, brute) = (frechet(&a, &b), oracles::frechet_brute(&a, &b));
        ensure!(dp == brute, "pair {k}: dp {dp} vs enumeration {brute}");
    }
    Ok("200 pairs exact".into())
}

fn chamfer_cases() -> Check {
    let near = |got: f64, want: f64| (got - want).abs() <= 1e-12;
    let a = [[0.0, 0.0], [1.5, -2.0], [3.0, 1.0]];
    let c = |p: &[[f64; 2]], q: &[[f64; 2]]| chamfer(p, q).map_err(|e| e.to_string());
    ensure!(near(c(&a, &a)?, 0.0), "identical sets");
    ensure!(near(c(&[[0.0, 0.0]], &[[3.0, 4.0]])?, 5.0), "{{(0,0)}} vs {{(3,4)}}");
    ensure!(near(c(&[[0.0, 0.0], [2.0, 0.0]], &[[1.0, 0.0]])?, 1.0), "{{(0,0),(2,0)}} vs {{(1,0)}}");
    let mut rng = StdRng::seed_from_u64(102);
    for k in 0..10_000 {
        let (n, m) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let (p, q) = (curve(&mut rng, n), curve(&mut rng, m));
        ensure!(c(&p, &q)? == c(&q, &p)?, "asymmetric on pair {k}");
    }
    Ok("3 hand cases, 10000 symmetric pairs".into())
}

fn hungarian_vs_brute_force() -> Check {
    let mut rng = StdRng::seed_from_u64(103);
    for k in 0..100 {
        let (r, c) = (rng.random_range(1..=7), rng.random_range(1..=7));
        let cost: Vec<Vec<f64>> = (0..r).map(|_| (0..c).map(|_| rng.random_range(0..100) as f64).collect()).collect();
        let arr = Array2::from_shape_fn((r, c), |(i, j)| cost[i][j]);
        let pairs = hungarian_match(arr.view()).map_err(|e| e.to_string())?;
        ensure!(pairs.len() == r.min(c), "instance {k}: {} pairs for {r}x{c}", pairs.len());
        let (got, want) = (assignment_cost(arr.view(), &pairs), oracles::assignment_brute(&cost));
        ensure!(got == want, "instance {k}: cost {got} vs brute force {want}");
    }
    Ok("100 instances exact".into())
}

fn to_scene(g: &oracles::Graph) -> SceneAnnotation {
    let (m, k) = (g.lanes.len(), g.signs.len());
    SceneAnnotation {
        scene_id: "s".into(),
        centerlines: g.lanes.iter().map(|l| Centerline { points: l.pts.clone(), score: l.score }).collect(),
        traffic_elements: g.signs.iter().map(|s| TrafficElement { bbox: s.bbox, class: s.class, score: s.score }).collect(),
        a_cc: Array2::from_shape_fn((m, m), |(i, j)| g.ll[i][j]),
        a_ct: Array2::from_shape_fn((m, k), |(i, j)| g.lt[i][j]),
    }
}

fn top_vs_oracle() -> Check {
    let mut rng = StdRng::seed_from_u64(104);
    let relax = FarRangeRelaxation::default();
    let mut defined = 0;
    for k in 0..50 {
        let (pred, gt) = oracles::random_scene_pair(&mut rng, 8, 5);
        let (ps, gs) = (to_scene(&pred), to_scene(&gt));
        for (mode, lt) in [(TopMode::Ll, false), (TopMode::Lt, true)] {
            let got = top_score(&[(&ps, &gs)], mode, &FRECHET_THRESHOLDS, TE_IOU_THRESHOLD, &relax);
            match oracles::top_oracle(&pred, &gt, lt, &FRECHET_THRESHOLDS) {
                Some(want) => {
                    defined += 1;
                    ensure!(!got.undefined, "scene {k} {mode:?}: flagged undefined, oracle {want}");
                    ensure!((got.score - want).abs() <= 1e-9, "scene {k} {mode:?}: {} vs oracle {want}", got.score);
                }
                None => ensure!(got.undefined, "scene {k} {mode:?}: oracle undefined, got {}", got.score),
            }
        }
    }
    Ok(format!("50 scenes, {defined} defined TOP values within 1e-9"))
}

fn ols_adjudication() -> Check {
    let (det_l, det_t, top_ll, top_lt) = (0.284, 0.450, 0.0415, 0.207);
    let mut hits = Vec::new();
    let mut values = Vec::new();
    for variant in [OlsVariant::Mean, OlsVariant::SqrtTopology] {
        let v = 100.0 * ols(det_l, det_t, top_ll, top_lt, variant).map_err(|e| e.to_string())?;
        values.push(format!("{variant:?} {v:.2}"));
        if (v - 34.8).abs() <= 1.0 {
            hits.push(variant);
        }
    }
    ensure!(hits == [OlsVariant::SqrtTopology], "hits {hits:?} ({})", values.join(", "));
    ensure!(OlsVariant::default() == OlsVariant::SqrtTopology, "default variant is {:?}", OlsVariant::default());
    Ok(values.join(", "))
}

fn random_graph(rng: &mut StdRng) -> SdMapGraph {
    let n = rng.random_range(1..=12);
    let nodes: Vec<SdNode> = (0..n)
        .map(|_| SdNode {
            position: CartesianPoint::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)),
            class: HighwayClass::ALL[rng.random_range(0..HighwayClass::ALL.len())],
            source_way_id: Some(1),
        })
        .collect();
    let mut pairs = BTreeMap::new();
    for _ in 0..rng.random_range(0..2 * n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            pairs.insert((a.min(b), a.max(b)), HighwayClass::Residential);
        }
    }
    let edges = pairs.into_iter().map(|((a, b), class)| SdEdge { a, b, class, way: Some(1) }).collect();
    SdMapGraph { nodes, edges }
}

fn resampling_invariants() -> Check {
    let mut rng = StdRng::seed_from_u64(106);
    let density = 1.0;
    let mut worst_spacing = 0.0f64;
    for k in 0..100 {
        let g = random_graph(&mut rng);
        let r = resample_graph(&g, density).map_err(|e| e.to_string())?;
        worst_spacing = worst_spacing.max(r.max_edge_length());
        ensure!(r.max_edge_length() <= density + 1e-9, "graph {k}: spacing {}", r.max_edge_length());
        let (l0, l1) = (g.total_length(), r.total_length());
        ensure!((l0 - l1).abs() <= 1e-9 * l0.max(1.0), "graph {k}: length {l0} -> {l1}");
        ensure!(r.component_count() == g.component_count(), "graph {k}: components changed");
    }
    Ok(format!("100 graphs, max spacing {worst_spacing:.6} m"))
}

fn grid_alignment() -> Check {
    let spec = BevSpec::default();
    let exhaustive = |p: CartesianPoint| {
        let res = spec.resolution;
        let row = (0..spec.rows()).find(|&i| {
            let lo = spec.x_range.0 + i as f64 * res;
            p.x >= lo && p.x < lo + res
        })?;
        let col = (0..spec.cols()).find(|&j| {
            let lo = spec.y_range.0 + j as f64 * res;
            p.y >= lo && p.y < lo + res
        })?;
        Some((row as i64, col as i64))
    };
    let mut rng = StdRng::seed_from_u64(107);
    for k in 0..10_000 {
        let p = if k % 4 == 0 {
            CartesianPoint::new(rng.random_range(-120..120) as f64 * 0.5, rng.random_range(-60..60) as f64 * 0.5)
        } else {
            CartesianPoint::new(rng.random_range(-60.0..60.0), rng.random_range(-30.0..30.0))
        };
        let g = align_to_grid(p, &spec);
        match exhaustive(p) {
            Some(cell) => ensure!(g.in_range && (g.row, g.col) == cell, "{p:?}: {g:?} vs {cell:?}"),
            None => ensure!(!g.in_range, "{p:?} should be out of range, got {g:?}"),
        }
    }
    let (h, w) = (spec.rows() as i64, spec.cols() as i64);
    let origin = align_to_grid(CartesianPoint::new(0.0, 0.0), &spec);
    ensure!(origin == GridIndex { row: h / 2, col: w / 2, in_range: true }, "origin maps to {origin:?}");
    Ok(format!("10000 points, origin -> ({}, {})", h / 2, w / 2))
}

fn random_mlp(rng: &mut StdRng, dims: &[usize]) -> MlpParams {
    let layers = dims
        .windows(2)
        .map(|d| Linear {
            weight: Array2::from_shape_fn((d[1], d[0]), |_| rng.random_range(-1.0..1.0)),
            bias: Array1::from_shape_fn(d[1], |_| rng.random_range(-0.5..0.5)),
        })
        .collect();
    MlpParams::new(layers).expect("consistent layer sizes")
}

fn random_adjacency(rng: &mut StdRng, n: usize) -> Array2<bool> {
    let mut a = Array2::from_elem((n, n), false);
    for i in 0..n {
        for j in i + 1..n {
            let e = rng.random_bool(0.5);
            a[[i, j]] = e;
            a[[j, i]] = e;
        }
    }
    a
}

fn shuffled(rng: &mut StdRng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    perm
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn rel_close(fd: &Array2<f64>, exact: &Array2<f64>, tol: f64) -> bool {
    max_abs(&(fd - exact)) <= tol * max_abs(exact).max(1e-12)
}

/// Smallest |pre-activation| of any hidden unit over `inputs`; finite
/// differences across a ReLU kink are meaningless, so such draws are skipped.
fn kink_margin(mlp: &MlpParams, inputs: &[Array1<f64>]) -> f64 {
    let mut margin = f64::INFINITY;
    for x in inputs {
        let mut h = x.clone();
        for l in &mlp.layers[..mlp.layers.len() - 1] {
            h = l.weight.dot(&h) + &l.bias;
            margin = h.iter().fold(margin, |m, v| m.min(v.abs()));
            h.mapv_inplace(|v| v.max(0.0));
        }
    }
    margin
}

fn encoder_properties() -> Check {
    let e = |r: sdmapkit::Result<Array2<f64>>| r.map_err(|e| e.to_string());
    let mut rng = StdRng::seed_from_u64(108);

    // permutation equivariance
    for k in 0..100 {
        let n = rng.random_range(1..8);
        let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-2.0..2.0));
        let adj = random_adjacency(&mut rng, n);
        let mlp = random_mlp(&mut rng, &[6, 5, 4]);
        let perm = shuffled(&mut rng, n);
        let xp = Array2::from_shape_fn((n, 3), |(i, f)| x[[perm[i], f]]);
        let ap = Array2::from_shape_fn((n, n), |(i, j)| adj[[perm[i], perm[j]]]);
        let (out, outp) = (e(edge_conv(x.view(), adj.view(), &mlp))?, e(edge_conv(xp.view(), ap.view(), &mlp))?);
        let moved = Array2::from_shape_fn(out.dim(), |(i, f)| out[[perm[i], f]]);
        ensure!(max_abs(&(&outp - &moved)) <= 1e-9, "edge_conv instance {k} not equivariant");

        let m = n;
        let q = Array2::from_shape_fn((m, 2), |_| rng.random_range(-2.0..2.0));
        let a = Array2::from_shape_fn((m, m), |_| rng.random_range(0.0..1.0));
        let w = SgnnWeights::centerline_only(Array3::from_shape_fn((3, 2, 2), |_| rng.random_range(-1.0..1.0)));
        let qp = Array2::from_shape_fn((m, 2), |(i, f)| q[[perm[i], f]]);
        let app = Array2::from_shape_fn((m, m), |(i, j)| a[[perm[i], perm[j]]]);
        let (s, sp) = (e(sgnn_cc_propagate(q.view(), a.view(), &w))?, e(sgnn_cc_propagate(qp.view(), app.view(), &w))?);
        let moved = Array2::from_shape_fn(s.dim(), |(i, f)| s[[perm[i], f]]);
        ensure!(max_abs(&(&sp - &moved)) <= 1e-9, "SGNN instance {k} not equivariant");
    }

    // linearity of the centerline propagation in its features
    for k in 0..100 {
        let m = rng.random_range(1..7);
        let q1 = Array2::from_shape_fn((m, 3), |_| rng.random_range(-3.0..3.0));
        let q2 = Array2::from_shape_fn((m, 3), |_| rng.random_range(-3.0..3.0));
        let a = Array2::from_shape_fn((m, m), |_| rng.random_range(0.0..1.0));
        let mut w = SgnnWeights::centerline_only(Array3::from_shape_fn((3, 3, 3), |_| rng.random_range(-1.0..1.0)));
        w.alpha = rng.random_range(0.1..2.0);
        let c = rng.random_range(-2.0..2.0);
        let f = |q: &Array2<f64>| e(sgnn_cc_propagate(q.view(), a.view(), &w));
        let lhs = f(&(&q1 * c + &q2))?;
        let rhs = f(&q1)? * c + f(&q2)?;
        ensure!(max_abs(&(&lhs - &rhs)) <= 1e-12 * max_abs(&rhs).max(1.0), "instance {k} not linear");
        ensure!(f(&(&q1 * 2.0))? == f(&q1)? * 2.0, "instance {k}: doubling not exact");
    }

    // zero adjacency: edge_conv vanishes, cc keeps the self term, ct vanishes
    let x = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
    let mlp = random_mlp(&mut rng, &[6, 4, 2]);
    ensure!(e(edge_conv(x.view(), Array2::from_elem((5, 5), false).view(), &mlp))?.iter().all(|&v| v == 0.0), "edge_conv with no edges");
    let w_cc = Array3::from_shape_fn((3, 3, 3), |_| rng.random_range(-1.0..1.0));
    let w = SgnnWeights::centerline_only(w_cc.clone());
    let cc = e(sgnn_cc_propagate(x.view(), Array2::zeros((5, 5)).view(), &w))?;
    let self_only = x.dot(&w_cc.index_axis(ndarray::Axis(0), 2).t());
    ensure!(max_abs(&(&cc - &self_only)) <= 1e-12, "cc with zero adjacency is not the self term");
    let (q_t, _, wt, proj) = ct_instance(&mut rng, 5, 4);
    let ct = e(sgnn_ct_propagate(q_t.view(), Array2::zeros((5, 4)).view(), &wt, &proj))?;
    ensure!(ct.iter().all(|&v| v == 0.0), "ct with zero adjacency");

    // JVPs against central differences on 5-node instances
    let h = 1e-6;
    let mut checked = [0usize; 3];
    while checked[0] < 20 {
        let x = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
        let dx = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
        let adj = random_adjacency(&mut rng, 5);
        let mlp = random_mlp(&mut rng, &[6, 6, 4]);
        let inputs: Vec<Array1<f64>> = (0..5)
            .flat_map(|i| (0..5).map(move |j| (i, j)))
            .filter(|&(i, j)| adj[[i, j]])
            .map(|(i, j)| Array1::from_iter(x.row(i).iter().copied().chain((0..3).map(|f| x[[j, f]] - x[[i, f]]))))
            .collect();
        if inputs.is_empty() || kink_margin(&mlp, &inputs) < 1e-3 {
            continue;
        }
        let fd = (e(edge_conv((&x + &(&dx * h)).view(), adj.view(), &mlp))?
            - e(edge_conv((&x - &(&dx * h)).view(), adj.view(), &mlp))?)
            / (2.0 * h);
        let jvp = e(edge_conv_jvp(x.view(), adj.view(), &mlp, dx.view()))?;
        ensure!(rel_close(&fd, &jvp, 1e-4), "edge_conv JVP off: fd {fd:?} jvp {jvp:?}");
        checked[0] += 1;
    }
    while checked[1] < 20 {
        let q = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
        let dq = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
        let a = Array2::from_shape_fn((5, 5), |_| rng.random_range(0.0..1.0));
        let w = SgnnWeights::centerline_only(Array3::from_shape_fn((3, 3, 3), |_| rng.random_range(-1.0..1.0)));
        let fd = (e(sgnn_cc_propagate((&q + &(&dq * h)).view(), a.view(), &w))?
            - e(sgnn_cc_propagate((&q - &(&dq * h)).view(), a.view(), &w))?)
            / (2.0 * h);
        let jvp = e(sgnn_cc_jvp(dq.view(), a.view(), &w))?;
        ensure!(rel_close(&fd, &jvp, 1e-4), "cc JVP off");
        checked[1] += 1;
    }
    while checked[2] < 20 {
        let (q_t, a_ct, w, proj) = ct_instance(&mut rng, 5, 5);
        let dq = Array2::from_shape_fn(q_t.dim(), |_| rng.random_range(-1.0..1.0));
        let rows: Vec<Array1<f64>> = q_t.rows().into_iter().map(|r| r.to_owned()).collect();
        if kink_margin(&proj, &rows) < 1e-3 {
            continue;
        }
        let fd = (e(sgnn_ct_propagate((&q_t + &(&dq * h)).view(), a_ct.view(), &w, &proj))?
            - e(sgnn_ct_propagate((&q_t - &(&dq * h)).view(), a_ct.view(), &w, &proj))?)
            / (2.0 * h);
        let jvp = e(sgnn_ct_jvp(q_t.view(), a_ct.view(), &w, &proj, dq.view()))?;
        ensure!(rel_close(&fd, &jvp, 1e-4), "ct JVP off");
        checked[2] += 1;
    }
    Ok("equivariance 100, linearity 100, zero adjacency 3, JVP 60 within 1e-4".into())
}

fn ct_instance(rng: &mut StdRng, m: usize, k: usize) -> (Array2<f64>, Array2<f64>, SgnnWeights, MlpParams) {
    let (f_t, f_c, classes) = (3, 2, 2);
    let q_t = Array2::from_shape_fn((k, f_t), |_| rng.random_range(-2.0..2.0));
    let a_ct = Array2::from_shape_fn((m, k), |_| if rng.random_bool(0.7) { rng.random_range(0.05..1.0) } else { 0.0 });
    let w = SgnnWeights {
        w_cc: Array3::zeros((3, f_c, f_c)),
        w_ct: Array3::from_shape_fn((classes, f_c, f_c), |_| rng.random_range(-1.0..1.0)),
        alpha: 1.0,
        beta: rng.random_range(0.5..1.5),
        s_t: Array2::from_shape_fn((classes, k), |_| rng.random_range(0.0..1.0)),
    };
    let proj = random_mlp(rng, &[f_t, 4, f_c]);
    (q_t, a_ct, w, proj)
}

fn perturbation_sweep() -> Check {
    let mut rng = StdRng::seed_from_u64(109);
    let g = random_graph(&mut rng);
    let mut points = 0;
    for &t in &SWEEP_TRANSLATIONS_M {
        for &r in &SWEEP_ROTATIONS_DEG {
            let noise = NoiseSpec { translation_m: t, rotation_deg: r, seed: rng.random() };
            let (p, tf) = perturb(&g, &noise).map_err(|e| e.to_string())?;
            let mag = tf.translation.x.hypot(tf.translation.y);
            ensure!((mag - t).abs() <= 1e-9, "({t}, {r}): |translation| {mag}");
            ensure!((tf.rotation.abs().to_degrees() - r).abs() <= 1e-9, "({t}, {r}): rotation {}", tf.rotation.to_degrees());
            for a in 0..g.node_count() {
                for b in a + 1..g.node_count() {
                    let d0 = g.nodes[a].position.distance(&g.nodes[b].position);
                    let d1 = p.nodes[a].position.distance(&p.nodes[b].position);
                    ensure!((d0 - d1).abs() <= 1e-9, "({t}, {r}): distance {a}-{b} {d0} -> {d1}");
                }
            }
            points += 1;
        }
    }
    ensure!(points == 12, "{points} grid points");
    Ok("12 grid points".into())
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// ingest -> rasterize -> align -> perturb sweep -> evaluate, every file collected.
fn pipeline(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let run = |args: &[&Path]| -> Result<(), String> {
        let out = Command::new(env!("CARGO_BIN_EXE_sdmapkit"))
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        Ok(())
    };
    let p = |s: &str| dir.join(s);
    let f = |s: &'static str| Path::new(s);
    run(&[f("ingest"), f("--osm"), &fixture("town.osm"), f("--poses"), &fixture("poses.json"), f("--anchor"), f("all"), f("-o"), &p("frames")])?;
    for k in 0..2 {
        let sdg = p(&format!("frames/frame_{k:04}.sdg.jsonl"));
        let (bev, png, aug) = (p(&format!("f{k}.bevf")), p(&format!("f{k}.png")), p(&format!("f{k}.aug")));
        run(&[f("rasterize"), f("--sdg"), &sdg, f("-o"), &bev, f("--png"), &png])?;
        run(&[f("align"), f("--sdg"), &sdg, f("--bev"), &bev, f("-o"), &aug])?;
        run(&[f("perturb"), f("--sdg"), &sdg, f("--sweep"), f("--seed"), f("7"), f("-o"), &p(&format!("sweep{k}"))])?;
    }
    run(&[
        f("evaluate"),
        f("--pred"),
        &fixture("pred.olann.jsonl"),
        f("--gt"),
        &fixture("gt.olann.jsonl"),
        f("-o"),
        &p("report.json"),
        f("--csv"),
        &p("scenes.csv"),
    ])?;
    run(&[f("plot"), f("--input"), &p("report.json"), f("-o"), &p("report.png")])?;
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.insert(rel, fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(files)
}

fn end_to_end_determinism() -> Check {
    let start = Instant::now();
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let first = pipeline(a.path())?;
    let second = pipeline(b.path())?;
    let elapsed = start.elapsed();
    ensure!(first.len() >= 30, "only {} output files", first.len());
    ensure!(first.keys().eq(second.keys()), "file sets differ");
    for (name, bytes) in &first {
        ensure!(second[name] == *bytes, "{name} differs between runs");
    }
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("{} files byte-identical", first.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("frechet-dp-vs-enumeration", Duration::from_secs(5), frechet_vs_enumeration),
        ("chamfer-hand-cases-symmetry", Duration::MAX, chamfer_cases),
        ("hungarian-vs-brute-force", Duration::from_secs(10), hungarian_vs_brute_force),
        ("top-vs-oracle", Duration::MAX, top_vs_oracle),
        ("ols-variant-adjudication", Duration::MAX, ols_adjudication),
        ("resampling-invariants", Duration::MAX, resampling_invariants),
        ("grid-alignment", Duration::MAX, grid_alignment),
        ("edgeconv-sgnn-properties", Duration::MAX, encoder_properties),
        ("perturbation-sweep", Duration::MAX, perturbation_sweep),
        ("end-to-end-determinism", Duration::from_secs(30), end_to_end_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > *budget => Err(format!("over budget: {elapsed:?} > {budget:?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({:.2?}): {detail}", i + 1, elapsed),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({:.2?}): {why}", i + 1, elapsed);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
