//! WGS84 to local Cartesian projection and ego-frame transforms.
//!
//! Frames used throughout the crate:
//! - the *shared* frame: east/north meters relative to a projection origin,
//! - the *ego* frame: meters relative to an [`EgoPose`], forward = +x, left = +y.
//!
//! Headings are radians, counter-clockwise from the shared frame's +x axis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// WGS84 semi-major axis in meters.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;

/// Default horizon added around the pose hull when fetching map data.
pub const DEFAULT_MARGIN_M: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        let p = GeoPoint { lat, lon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidCoordinate {
                lat: self.lat,
                lon: self.lon,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
}

impl CartesianPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        CartesianPoint { x, y }
    }

    pub fn distance(&self, other: &CartesianPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(&self, other: &CartesianPoint, t: f64) -> CartesianPoint {
        CartesianPoint {
            x: self.x + (other.x - self.x) * t,
            y: self.y + (other.y - self.y) * t,
        }
    }
}

/// Vehicle pose in the shared frame. The heading is kept in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EgoPose {
    pub position: CartesianPoint,
    pub heading: f64,
}

impl EgoPose {
    pub fn new(x: f64, y: f64, heading: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::InvalidValue {
                what: "pose position",
                value: if x.is_finite() { y } else { x },
            });
        }
        if !heading.is_finite() {
            return Err(Error::InvalidValue {
                what: "pose heading",
                value: heading,
            });
        }
        Ok(EgoPose {
            position: CartesianPoint::new(x, y),
            heading: normalize_angle(heading),
        })
    }

    pub fn identity() -> Self {
        EgoPose {
            position: CartesianPoint::default(),
            heading: 0.0,
        }
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let wrapped = (theta + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if wrapped >= PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// Projects `point` onto the local tangent plane at `origin`.
///
/// Uses the WGS84 meridional and prime-vertical radii of curvature at the
/// origin latitude, so east = Δλ·N·cos φ₀ and north = Δφ·M. Scene extents are
/// on the order of a kilometer, where the error of this approximation stays in
/// the millimeter range. The result is exact (0, 0) at the origin.
pub fn project_wgs84(origin: GeoPoint, point: GeoPoint) -> Result<CartesianPoint> {
    origin.validate()?;
    point.validate()?;

    let e2 = WGS84_F * (2.0 - WGS84_F);
    let phi0 = origin.lat.to_radians();
    let s = phi0.sin();
    let w = 1.0 - e2 * s * s;
    let prime_vertical = WGS84_A / w.sqrt();
    let meridional = WGS84_A * (1.0 - e2) / (w * w.sqrt());

    let mut dlon = point.lon - origin.lon;
    if dlon > 180.0 {
        dlon -= 360.0;
    } else if dlon < -180.0 {
        dlon += 360.0;
    }
    let dlat = point.lat - origin.lat;

    Ok(CartesianPoint {
        x: dlon.to_radians() * prime_vertical * phi0.cos(),
        y: dlat.to_radians() * meridional,
    })
}

/// Expresses a shared-frame point in the ego frame of `pose`.
pub fn to_ego_frame(pose: &EgoPose, point: CartesianPoint) -> CartesianPoint {
    let dx = point.x - pose.position.x;
    let dy = point.y - pose.position.y;
    let (s, c) = pose.heading.sin_cos();
    CartesianPoint {
        x: c * dx + s * dy,
        y: -s * dx + c * dy,
    }
}

/// Inverse of [`to_ego_frame`].
pub fn from_ego_frame(pose: &EgoPose, point: CartesianPoint) -> CartesianPoint {
    let (s, c) = pose.heading.sin_cos();
    CartesianPoint {
        x: c * point.x - s * point.y + pose.position.x,
        y: s * point.x + c * point.y + pose.position.y,
    }
}

/// Axis-aligned region in the shared frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingRegion {
    pub min_corner: CartesianPoint,
    pub max_corner: CartesianPoint,
}

impl BoundingRegion {
    pub fn contains(&self, p: &CartesianPoint) -> bool {
        p.x >= self.min_corner.x
            && p.x <= self.max_corner.x
            && p.y >= self.min_corner.y
            && p.y <= self.max_corner.y
    }

    pub fn contains_region(&self, other: &BoundingRegion) -> bool {
        self.contains(&other.min_corner) && self.contains(&other.max_corner)
    }

    pub fn width(&self) -> f64 {
        self.max_corner.x - self.min_corner.x
    }

    pub fn height(&self) -> f64 {
        self.max_corner.y - self.min_corner.y
    }
}

/// Bounding box of all pose positions grown by `margin` meters on every side.
pub fn bounding_region(poses: &[EgoPose], margin: f64) -> Result<BoundingRegion> {
    if poses.is_empty() {
        return Err(Error::EmptyInput("bounding_region needs at least one pose"));
    }
    if !(margin.is_finite() && margin >= 0.0) {
        return Err(Error::InvalidValue {
            what: "margin",
            value: margin,
        });
    }
    let mut min = CartesianPoint::new(f64::INFINITY, f64::INFINITY);
    let mut max = CartesianPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poses {
        min.x = min.x.min(p.position.x);
        min.y = min.y.min(p.position.y);
        max.x = max.x.max(p.position.x);
        max.y = max.y.max(p.position.y);
    }
    Ok(BoundingRegion {
        min_corner: CartesianPoint::new(min.x - margin, min.y - margin),
        max_corner: CartesianPoint::new(max.x + margin, max.y + margin),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_identity_at_origin() {
        let o = GeoPoint::new(37.0, -122.0).unwrap();
        let p = project_wgs84(o, o).unwrap();
        assert_eq!(p, CartesianPoint::new(0.0, 0.0));
    }

    #[test]
    fn projection_rejects_out_of_range() {
        let o = GeoPoint { lat: 0.0, lon: 0.0 };
        let bad = GeoPoint { lat: 91.0, lon: 0.0 };
        assert!(matches!(
            project_wgs84(o, bad),
            Err(Error::InvalidCoordinate { .. })
        ));
        let bad = GeoPoint { lat: 0.0, lon: -180.5 };
        assert!(project_wgs84(bad, o).is_err());
    }

    #[test]
    fn equator_east_offset() {
        let o = GeoPoint::new(0.0, 0.0).unwrap();
        let p = project_wgs84(o, GeoPoint::new(0.0, 0.001).unwrap()).unwrap();
        assert_abs_diff_eq!(p.x, 111.32, epsilon = 0.01);
        assert!(p.y.abs() < 1e-6);
    }

    #[test]
    fn mid_latitude_north_offset() {
        let o = GeoPoint::new(37.0, -122.0).unwrap();
        let p = project_wgs84(o, GeoPoint::new(37.001, -122.0).unwrap()).unwrap();
        assert_abs_diff_eq!(p.y, 110.97, epsilon = 0.01);
        assert_eq!(p.x, 0.0);
    }

    #[test]
    fn bounding_region_examples() {
        let single = [EgoPose::identity()];
        let r = bounding_region(&single, DEFAULT_MARGIN_M).unwrap();
        assert_eq!(r.min_corner, CartesianPoint::new(-200.0, -200.0));
        assert_eq!(r.max_corner, CartesianPoint::new(200.0, 200.0));

        let two = [
            EgoPose::new(0.0, 0.0, 0.0).unwrap(),
            EgoPose::new(10.0, 5.0, 1.0).unwrap(),
        ];
        let r = bounding_region(&two, 0.0).unwrap();
        assert_eq!(r.min_corner, CartesianPoint::new(0.0, 0.0));
        assert_eq!(r.max_corner, CartesianPoint::new(10.0, 5.0));

        let line = [
            EgoPose::new(0.0, 0.0, 0.0).unwrap(),
            EgoPose::new(10.0, 0.0, 0.0).unwrap(),
        ];
        let r = bounding_region(&line, 200.0).unwrap();
        assert_eq!(r.min_corner, CartesianPoint::new(-200.0, -200.0));
        assert_eq!(r.max_corner, CartesianPoint::new(210.0, 200.0));
    }

    #[test]
    fn bounding_region_errors() {
        assert!(matches!(bounding_region(&[], 1.0), Err(Error::EmptyInput(_))));
        assert!(bounding_region(&[EgoPose::identity()], -1.0).is_err());
    }

    #[test]
    fn ego_frame_examples() {
        let p = CartesianPoint::new(5.0, 3.0);
        assert_eq!(to_ego_frame(&EgoPose::identity(), p), p);
        let pose = EgoPose::new(5.0, 3.0, 0.0).unwrap();
        assert_eq!(to_ego_frame(&pose, p), CartesianPoint::new(0.0, 0.0));

        let pose = EgoPose::new(0.0, 0.0, PI / 2.0).unwrap();
        let q = to_ego_frame(&pose, CartesianPoint::new(0.0, 1.0));
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn heading_is_normalized() {
        let pose = EgoPose::new(0.0, 0.0, 3.0 * PI).unwrap();
        assert_abs_diff_eq!(pose.heading, -PI, epsilon = 1e-12);
        let pose = EgoPose::new(0.0, 0.0, -PI).unwrap();
        assert_eq!(pose.heading, -PI);
        assert!(EgoPose::new(f64::NAN, 0.0, 0.0).is_err());
        for k in -20..20 {
            let h = normalize_angle(k as f64 * 0.7);
            assert!((-PI..PI).contains(&h));
        }
    }
}
