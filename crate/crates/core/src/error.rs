use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid aperture: {0}")]
    Aperture(String),

    #[error("invalid shape `{name}`: {reason}")]
    Shape { name: String, reason: String },

    #[error("duplicate shape id {0} in alphabet")]
    DuplicateShape(usize),

    #[error("placement {placement} covers pixel {pixel}, aperture has {pixels} pixels")]
    PixelOutOfRange {
        placement: usize,
        pixel: usize,
        pixels: usize,
    },

    #[error("invalid tiling: {0}")]
    Tiling(String),

    #[error("index ({m}, {n}) outside a {columns}x{rows} array")]
    ElementIndex {
        m: usize,
        n: usize,
        columns: usize,
        rows: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("receiver coincides with a transmit element")]
    ZeroDistance,

    #[error("channel is rank deficient or ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("precoder column {0} is identically zero")]
    ZeroColumn(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            what,
            reason: reason.into(),
        }
    }
}
