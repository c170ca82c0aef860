//! SD node to BEV grid alignment, node feature augmentation and
//! localization-noise perturbation.

use std::f64::consts::TAU;

use ndarray::{Array2, ArrayView3};
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::CartesianPoint;
use crate::graph::SdMapGraph;
use crate::osm::HighwayClass;
use crate::raster::BevSpec;

/// Cell coordinates of a point; `row` indexes the forward axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridIndex {
    pub row: i64,
    pub col: i64,
    pub in_range: bool,
}

/// `row = ⌊x·cells_per_m⌋ + H/2`, `col = ⌊y·cells_per_m⌋ + W/2`.
/// Out-of-grid results are flagged, never clamped.
pub fn align_to_grid(position: CartesianPoint, spec: &BevSpec) -> GridIndex {
    let (h, w) = (spec.rows() as i64, spec.cols() as i64);
    let k = spec.cells_per_meter();
    let row = (position.x * k).floor() as i64 + h / 2;
    let col = (position.y * k).floor() as i64 + w / 2;
    GridIndex {
        row,
        col,
        in_range: (0..h).contains(&row) && (0..w).contains(&col),
    }
}

/// Length of the base node feature: position plus the class one-hot.
pub const BASE_FEATURE_LEN: usize = 2 + HighwayClass::ALL.len();

pub fn base_feature(position: CartesianPoint, class: HighwayClass) -> Vec<f64> {
    let mut v = vec![0.0; BASE_FEATURE_LEN];
    v[0] = position.x;
    v[1] = position.y;
    v[2 + class.index()] = 1.0;
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedNodeFeature {
    pub grid: GridIndex,
    pub base: Vec<f64>,
    /// BEV feature at the node's cell; zeros when the node is off-grid.
    pub bev_slice: Vec<f64>,
}

impl AugmentedNodeFeature {
    pub fn combined(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.base.len() + self.bev_slice.len());
        v.extend_from_slice(&self.base);
        v.extend_from_slice(&self.bev_slice);
        v
    }
}

/// Concatenates each node's base feature with the BEV feature at its cell.
pub fn augment_nodes(
    graph: &SdMapGraph,
    bev: ArrayView3<'_, f32>,
    spec: &BevSpec,
) -> Result<Vec<AugmentedNodeFeature>> {
    let (h, w, c) = bev.dim();
    if (h, w) != (spec.rows(), spec.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "BEV features are {h}x{w}, grid expects {}x{}",
            spec.rows(),
            spec.cols()
        )));
    }
    Ok(graph
        .nodes
        .iter()
        .map(|node| {
            let grid = align_to_grid(node.position, spec);
            let bev_slice = if grid.in_range {
                bev.slice(ndarray::s![grid.row as usize, grid.col as usize, ..])
                    .iter()
                    .map(|&v| v as f64)
                    .collect()
            } else {
                vec![0.0; c]
            };
            AugmentedNodeFeature {
                grid,
                base: base_feature(node.position, node.class),
                bev_slice,
            }
        })
        .collect())
}

/// Stacks combined features into an `N × (base + C)` matrix.
pub fn stack_features(features: &[AugmentedNodeFeature]) -> Array2<f64> {
    let d = features.first().map_or(BASE_FEATURE_LEN, |f| f.base.len() + f.bev_slice.len());
    let mut out = Array2::zeros((features.len(), d));
    for (mut row, f) in out.rows_mut().into_iter().zip(features) {
        for (dst, src) in row.iter_mut().zip(f.combined()) {
            *dst = src;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub translation_m: f64,
    pub rotation_deg: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("translation noise", self.translation_m), ("rotation noise", self.rotation_deg)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidValue { what, value: v });
            }
        }
        Ok(())
    }
}

/// `p ↦ R(rotation)·p + translation`, rotation about the ego origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: f64,
    pub translation: CartesianPoint,
}

impl RigidTransform {
    pub fn apply(&self, p: CartesianPoint) -> CartesianPoint {
        let (s, c) = self.rotation.sin_cos();
        CartesianPoint::new(
            c * p.x - s * p.y + self.translation.x,
            s * p.x + c * p.y + self.translation.y,
        )
    }

    /// Draws the map-level localization error for `noise`.
    ///
    /// The PRNG is SplitMix64 with its state set to `seed`. The first output
    /// `u` gives the translation direction `(u >> 11)·2⁻⁵³·2π`; the top bit of
    /// the second output picks the rotation sign (set = clockwise).
    pub fn sample(noise: &NoiseSpec) -> Self {
        let mut rng = SplitMix64::seed_from_u64(noise.seed);
        let angle = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * TAU;
        let sign = if rng.next_u64() >> 63 == 1 { -1.0 } else { 1.0 };
        RigidTransform {
            rotation: sign * noise.rotation_deg.to_radians(),
            translation: CartesianPoint::new(
                noise.translation_m * angle.cos(),
                noise.translation_m * angle.sin(),
            ),
        }
    }
}

/// Applies one seeded rigid transform to every node; topology is untouched.
pub fn perturb(graph: &SdMapGraph, noise: &NoiseSpec) -> Result<(SdMapGraph, RigidTransform)> {
    noise.validate()?;
    let t = RigidTransform::sample(noise);
    let mut out = graph.clone();
    if noise.translation_m == 0.0 && noise.rotation_deg == 0.0 {
        return Ok((out, t));
    }
    for node in &mut out.nodes {
        node.position = t.apply(node.position);
    }
    Ok((out, t))
}

/// Translation magnitudes (m) of the localization robustness sweep.
pub const SWEEP_TRANSLATIONS_M: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
/// Rotation magnitudes (degrees) of the localization robustness sweep.
pub const SWEEP_ROTATIONS_DEG: [f64; 3] = [0.0, 5.0, 10.0];
