use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coordinate: lat={lat}, lon={lon}")]
    InvalidCoordinate { lat: f64, lon: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid value for {what}: {value}")]
    InvalidValue { what: &'static str, value: f64 },

    #[error("malformed OSM XML at byte {position}: {message}")]
    MalformedXml { position: u64, message: String },

    #[error("way references node {0} which is not in the node store")]
    UnresolvedNode(i64),

    #[error("invalid resampling density {0} (must be > 0)")]
    InvalidDensity(f64),

    #[error("invalid BEV spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("adjacency matrix must be square, got {rows}x{cols}")]
    NonSquareAdjacency { rows: usize, cols: usize },

    #[error("polyline length mismatch: {0} vs {1} waypoints")]
    LengthMismatch(usize, usize),

    #[error("score out of range [0, 1]: {0}")]
    OutOfRange(f64),

    #[error("canvas has {0} channels, at most 4 can be exported")]
    TooManyChannels(usize),

    #[error("schema error at record {record}: {message}")]
    Schema { record: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn schema(record: usize, message: impl Into<String>) -> Self {
        Error::Schema {
            record,
            message: message.into(),
        }
    }
}
