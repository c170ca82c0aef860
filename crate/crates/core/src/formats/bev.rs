//! `bev-f32`: little-endian binary canvas.
//!
//! | field                              | type        |
//! |------------------------------------|-------------|
//! | magic `BEVF`                       | 4 bytes     |
//! | version                            | u32         |
//! | H, W, C                            | u32 × 3     |
//! | x_min, x_max, y_min, y_max, res    | f64 × 5     |
//! | data, row-major `H × W × C`        | f32 × H·W·C |
//!
//! The same layout stores other 3-d float arrays (encoder weights, BEV
//! feature maps); [`read_f32_array`] reads those without checking the
//! extent fields.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array3;

use super::BINARY_VERSION;
use crate::error::{Error, Result};
use crate::raster::{BevCanvas, BevSpec};

pub const BEV_MAGIC: [u8; 4] = *b"BEVF";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F32ArrayHeader {
    pub shape: (usize, usize, usize),
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: f64,
}

fn truncated(what: &str) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::schema(0, format!("truncated {what}"))
        } else {
            Error::Io(e)
        }
    }
}

pub fn write_f32_array<W: Write>(mut out: W, header: &F32ArrayHeader, data: &Array3<f32>) -> Result<()> {
    if data.dim() != header.shape {
        return Err(Error::DimensionMismatch(format!(
            "header shape {:?} vs data {:?}",
            header.shape,
            data.dim()
        )));
    }
    out.write_all(&BEV_MAGIC)?;
    out.write_u32::<LittleEndian>(BINARY_VERSION)?;
    let (h, w, c) = header.shape;
    for d in [h, w, c] {
        let d = u32::try_from(d).map_err(|_| Error::DimensionMismatch(format!("dimension {d} exceeds u32")))?;
        out.write_u32::<LittleEndian>(d)?;
    }
    for v in [header.x_range.0, header.x_range.1, header.y_range.0, header.y_range.1, header.resolution] {
        out.write_f64::<LittleEndian>(v)?;
    }
    let mut buf = Vec::with_capacity(data.len() * 4);
    for v in data.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn read_f32_array<R: Read>(mut input: R) -> Result<(F32ArrayHeader, Array3<f32>)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(truncated("header"))?;
    if magic != BEV_MAGIC {
        return Err(Error::schema(0, format!("bad magic {magic:?}, expected BEVF")));
    }
    let version = input.read_u32::<LittleEndian>().map_err(truncated("header"))?;
    if version != BINARY_VERSION {
        return Err(Error::schema(0, format!("unsupported version {version}")));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = input.read_u32::<LittleEndian>().map_err(truncated("header"))? as usize;
    }
    let mut f = [0.0; 5];
    for v in &mut f {
        *v = input.read_f64::<LittleEndian>().map_err(truncated("header"))?;
    }
    let len = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::schema(0, "header dimensions overflow"))?;
    let mut payload = Vec::new();
    input.take(len as u64 + 1).read_to_end(&mut payload)?;
    if payload.len() != len {
        return Err(Error::schema(
            0,
            format!("payload is {} bytes, header {dims:?} implies {len}", payload.len().min(len + 1)),
        ));
    }
    let values: Vec<f32> = payload.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
    let data = Array3::from_shape_vec((dims[0], dims[1], dims[2]), values).expect("length checked");
    let header = F32ArrayHeader {
        shape: (dims[0], dims[1], dims[2]),
        x_range: (f[0], f[1]),
        y_range: (f[2], f[3]),
        resolution: f[4],
    };
    Ok((header, data))
}

pub fn write_bev<W: Write>(out: W, canvas: &BevCanvas) -> Result<()> {
    let header = F32ArrayHeader {
        shape: canvas.data.dim(),
        x_range: canvas.spec.x_range,
        y_range: canvas.spec.y_range,
        resolution: canvas.spec.resolution,
    };
    write_f32_array(out, &header, &canvas.data)
}

/// Reads a canvas, checking the extent against the grid size and that every
/// value is finite.
pub fn read_bev<R: Read>(input: R) -> Result<BevCanvas> {
    let (header, data) = read_f32_array(input)?;
    let spec = BevSpec::new(header.x_range, header.y_range, header.resolution)
        .map_err(|e| Error::schema(0, e.to_string()))?;
    let (h, w, _) = header.shape;
    if (h, w) != (spec.rows(), spec.cols()) {
        return Err(Error::schema(
            0,
            format!("grid {h}x{w} does not match the extent ({}x{})", spec.rows(), spec.cols()),
        ));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::schema(0, "non-finite cell value"));
    }
    Ok(BevCanvas { spec, data })
}
