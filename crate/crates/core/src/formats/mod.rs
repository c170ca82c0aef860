//! On-disk formats: `sdg-json` graphs, `bev-f32` canvases, `aug-f32` node
//! features, `olann-json` annotations and pose lists.

pub mod aug;
pub mod bev;
pub mod olann;
pub mod poses;
pub mod sdg;

pub use aug::{read_aug, write_aug, AugFile, AUG_MAGIC};
pub use bev::{read_bev, read_f32_array, write_bev, write_f32_array, F32ArrayHeader, BEV_MAGIC};
pub use olann::{read_olann, write_olann};
pub use poses::{read_poses, GeoPose, LocalPose, PoseRecord};
pub use sdg::{read_sdg, write_sdg, SdgDocument, SdgHeader, SDG_VERSION};

use crate::error::Result;

/// Binary format version shared by `bev-f32` and `aug-f32`.
pub const BINARY_VERSION: u32 = 1;

pub(crate) struct Lines<L> {
    pub inner: L,
    pub last: usize,
}

impl<L: Iterator<Item = std::io::Result<String>>> Lines<L> {
    /// Next non-blank line with its 1-based number.
    pub fn next(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            let line = line?;
            self.last += 1;
            if !line.trim().is_empty() {
                return Ok(Some((self.last, line)));
            }
        }
        Ok(None)
    }
}
