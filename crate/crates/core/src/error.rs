use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulation spec: {0}")]
    InvalidSpec(String),

    #[error("pulse index {index} out of range 1..={n_pulses}")]
    PulseIndex { index: usize, n_pulses: usize },

    #[error("sample rate {requested} Hz is too low; at least {minimum} Hz is required")]
    Undersampled { requested: f64, minimum: f64 },

    #[error("trace covers {cycles} fundamental periods; an integer number is required")]
    NonIntegerPeriods { cycles: f64 },

    #[error("THD is undefined: the fundamental component is zero")]
    UndefinedThd,

    #[error(
        "segment {segment} lasts {ticks:.3} ticks, shorter than one tick; \
         use a tick divider of at most {max_divider}"
    )]
    Resolution {
        segment: usize,
        ticks: f64,
        max_divider: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("HDL parse error: {0}")]
    HdlParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
