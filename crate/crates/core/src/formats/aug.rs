//! `aug-f32`: augmented node features with their grid index table.
//!
//! Little-endian: magic `AUGF`, u32 version, u32 N, u32 base length, u32
//! channels, then N index records `(i64 row, i64 col, u8 in_range)`, then
//! the `N × (base + channels)` feature matrix as row-major f32.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;

use super::BINARY_VERSION;
use crate::align::{AugmentedNodeFeature, GridIndex};
use crate::error::{Error, Result};

pub const AUG_MAGIC: [u8; 4] = *b"AUGF";

#[derive(Debug, Clone, PartialEq)]
pub struct AugFile {
    pub index: Vec<GridIndex>,
    pub base_len: usize,
    pub channels: usize,
    pub features: Array2<f32>,
}

impl AugFile {
    pub fn from_features(features: &[AugmentedNodeFeature]) -> Result<Self> {
        let base_len = features.first().map_or(0, |f| f.base.len());
        let channels = features.first().map_or(0, |f| f.bev_slice.len());
        let mut data = Array2::zeros((features.len(), base_len + channels));
        for (mut row, f) in data.rows_mut().into_iter().zip(features) {
            if f.base.len() != base_len || f.bev_slice.len() != channels {
                return Err(Error::DimensionMismatch("node features of unequal length".into()));
            }
            for (dst, src) in row.iter_mut().zip(f.combined()) {
                *dst = src as f32;
            }
        }
        Ok(AugFile { index: features.iter().map(|f| f.grid).collect(), base_len, channels, features: data })
    }
}

fn eof(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::schema(0, "truncated aug-f32 file")
    } else {
        Error::Io(e)
    }
}

pub fn write_aug<W: Write>(mut out: W, file: &AugFile) -> Result<()> {
    let n = file.index.len();
    if file.features.dim() != (n, file.base_len + file.channels) {
        return Err(Error::DimensionMismatch(format!(
            "feature matrix {:?} for {n} nodes of width {}",
            file.features.dim(),
            file.base_len + file.channels
        )));
    }
    out.write_all(&AUG_MAGIC)?;
    out.write_u32::<LittleEndian>(BINARY_VERSION)?;
    for d in [n, file.base_len, file.channels] {
        let d = u32::try_from(d).map_err(|_| Error::DimensionMismatch(format!("dimension {d} exceeds u32")))?;
        out.write_u32::<LittleEndian>(d)?;
    }
    for g in &file.index {
        out.write_i64::<LittleEndian>(g.row)?;
        out.write_i64::<LittleEndian>(g.col)?;
        out.write_u8(g.in_range as u8)?;
    }
    for v in file.features.iter() {
        out.write_f32::<LittleEndian>(*v)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_aug<R: Read>(mut input: R) -> Result<AugFile> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(eof)?;
    if magic != AUG_MAGIC {
        return Err(Error::schema(0, format!("bad magic {magic:?}, expected AUGF")));
    }
    let version = input.read_u32::<LittleEndian>().map_err(eof)?;
    if version != BINARY_VERSION {
        return Err(Error::schema(0, format!("unsupported version {version}")));
    }
    let n = input.read_u32::<LittleEndian>().map_err(eof)? as usize;
    let base_len = input.read_u32::<LittleEndian>().map_err(eof)? as usize;
    let channels = input.read_u32::<LittleEndian>().map_err(eof)? as usize;
    let mut index = Vec::new();
    for k in 0..n {
        let row = input.read_i64::<LittleEndian>().map_err(eof)?;
        let col = input.read_i64::<LittleEndian>().map_err(eof)?;
        let in_range = match input.read_u8().map_err(eof)? {
            0 => false,
            1 => true,
            b => return Err(Error::schema(k, format!("in_range flag {b} is not 0 or 1"))),
        };
        index.push(GridIndex { row, col, in_range });
    }
    let width = base_len + channels;
    let mut values = vec![0f32; n * width];
    input.read_f32_into::<LittleEndian>(&mut values).map_err(eof)?;
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::schema(0, "trailing bytes after the feature matrix"));
    }
    let features = Array2::from_shape_vec((n, width), values).expect("length matches");
    Ok(AugFile { index, base_len, channels, features })
}
