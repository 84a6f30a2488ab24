use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // PNM codec and raster construction
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(&'static str),
    #[error("malformed PNM header: {0}")]
    MalformedHeader(&'static str),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("channel {channel} out of range for a {channels}-channel raster")]
    ChannelOutOfRange { channel: usize, channels: usize },
    #[error("invalid raster: {0}")]
    InvalidRaster(&'static str),

    // Transforms
    #[error("odd signal length {0}")]
    OddLength(usize),
    #[error("signal length {len} shorter than the filter support {min}")]
    TooShort { len: usize, min: usize },
    #[error("odd plane dimension {width}x{height}")]
    OddDimension { width: usize, height: usize },
    #[error("plane {width}x{height} smaller than the filter support {min}")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    // Fusion and metrics
    #[error("weight {0} outside [0, 1]")]
    WeightOutOfRange(f32),
    #[error("method requires {expected} bands, got {found}")]
    BandCountMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("{width}x{height} is not divisible by {factor}")]
    NotDivisible {
        width: usize,
        height: usize,
        factor: usize,
    },
    #[error("reference band {0} has zero mean")]
    ZeroBandMean(usize),
    #[error("at least 2 bands required, got {0}")]
    TooFewBands(usize),

    // Tiling
    #[error("tile dimension {width}x{height} is odd")]
    OddTile { width: usize, height: usize },
    #[error("tile ({row}, {col}) missing from the result set")]
    MissingTile { row: usize, col: usize },
    #[error("tile ({row}, {col}) supplied more than once")]
    DuplicateTile { row: usize, col: usize },
    #[error("tile ({row}, {col}) outside the grid")]
    TileOutOfRange { row: usize, col: usize },

    // Wire protocol
    #[error("bad frame magic")]
    BadMagic,
    #[error("unsupported protocol version {0}")]
    BadVersion(u16),
    #[error("truncated frame: need {expected} bytes, have {found}")]
    TruncatedFrame { expected: usize, found: usize },
    #[error("unknown message type {0}")]
    UnknownType(u16),
    #[error("payload length {0} exceeds the frame cap")]
    PayloadTooLarge(u32),
    #[error("malformed payload: {0}")]
    MalformedPayload(&'static str),
}

impl Error {
    /// Stable variant name, used as the reason prefix in ERROR frames.
    pub fn name(&self) -> &'static str {
        match self {
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::Truncated { .. } => "Truncated",
            Error::ChannelOutOfRange { .. } => "ChannelOutOfRange",
            Error::InvalidRaster(_) => "InvalidRaster",
            Error::OddLength(_) => "OddLength",
            Error::TooShort { .. } => "TooShort",
            Error::OddDimension { .. } => "OddDimension",
            Error::TooSmall { .. } => "TooSmall",
            Error::WeightOutOfRange(_) => "WeightOutOfRange",
            Error::BandCountMismatch { .. } => "BandCountMismatch",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotDivisible { .. } => "NotDivisible",
            Error::ZeroBandMean(_) => "ZeroBandMean",
            Error::TooFewBands(_) => "TooFewBands",
            Error::OddTile { .. } => "OddTile",
            Error::MissingTile { .. } => "MissingTile",
            Error::DuplicateTile { .. } => "DuplicateTile",
            Error::TileOutOfRange { .. } => "TileOutOfRange",
            Error::BadMagic => "BadMagic",
            Error::BadVersion(_) => "BadVersion",
            Error::TruncatedFrame { .. } => "TruncatedFrame",
            Error::UnknownType(_) => "UnknownType",
            Error::PayloadTooLarge(_) => "PayloadTooLarge",
            Error::MalformedPayload(_) => "MalformedPayload",
        }
    }
}
