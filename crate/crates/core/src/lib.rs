//! SD map priors from OpenStreetMap, BEV alignment numerics and
//! online-mapping evaluation metrics.
//!
//! Pipeline: [`osm::parse_osm_xml`] → [`graph::build_graph`] →
//! [`graph::resample_graph`] → [`raster::rasterize`] / [`align::augment_nodes`],
//! with [`metrics::evaluate`] scoring predicted lane graphs.

pub mod align;
pub mod encoder;
pub mod error;
pub mod formats;
pub mod geo;
pub mod graph;
pub mod losses;
pub mod metrics;
pub mod osm;
pub mod raster;

pub use error::{Error, Result};
