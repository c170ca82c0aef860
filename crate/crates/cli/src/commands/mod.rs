mod evaluate;
mod ingest;
mod perturb;
mod plot;
mod raster;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

pub use evaluate::{evaluate, EvaluateArgs};
pub use ingest::{ingest, IngestArgs};
pub use perturb::{perturb, PerturbArgs};
pub use plot::{plot, PlotArgs, PlotKind};
pub use raster::{align, rasterize, AlignArgs, RasterizeArgs};

use sdmapkit::formats::{read_sdg, SdgDocument};

use crate::error::{CliError, CliResult};

pub(crate) fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required option --{flag}")))
}

pub(crate) fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::Io { path: path.into(), source })
}

/// Attaches `path` to an error raised while decoding that file.
pub(crate) fn decoded<T>(path: &Path, r: sdmapkit::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        sdmapkit::Error::Io(source) => CliError::Io { path: path.into(), source },
        source => CliError::Input { path: path.into(), source },
    })
}

/// Writes a file through `f`, attaching `path` to I/O failures.
pub(crate) fn write_file<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> sdmapkit::Result<()>,
{
    let file = File::create(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let mut out = BufWriter::new(file);
    f(&mut out)
        .and_then(|()| out.flush().map_err(sdmapkit::Error::from))
        .map_err(|e| match e {
            sdmapkit::Error::Io(source) => CliError::Io { path: path.into(), source },
            other => CliError::Compute(other),
        })
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    write_file(path, |w| Ok(w.write_all(bytes)?))
}

pub(crate) fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|source| CliError::Io { path: path.into(), source })
}

pub(crate) fn load_sdg(path: &Path) -> CliResult<SdgDocument> {
    decoded(path, read_sdg(open(path)?))
}
