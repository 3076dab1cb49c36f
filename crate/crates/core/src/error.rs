use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("LFSR state must be non-zero (lock-up state)")]
    LfsrLockUp,
    #[error("no maximal-length tap table entry for LFSR width {0} (supported: 3..=16)")]
    UnsupportedLfsrWidth(u32),
    #[error("value {value} does not fit in {width} bits")]
    OutOfRange { value: u64, width: u32 },
    #[error("stream length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("polarity mismatch: expected {expected:?}")]
    PolarityMismatch { expected: crate::stream::Polarity },
    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: u32, right: u32 },
    #[error("bit-width {0} outside the supported range 6..=10")]
    UnsupportedBitWidth(u32),
    #[error("accuracy select code {0} outside 0..=4")]
    InvalidSelectCode(u8),
    #[error("target width {target} is wider than source width {source_width}")]
    WidthTooLarge { target: u32, source_width: u32 },
    #[error("empty input")]
    Empty,
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("year {years} outside the aging schedule span [{start}, {end}]")]
    OutsideSchedule { years: f64, start: f64, end: f64 },
    #[error("invalid aging schedule: {0}")]
    InvalidSchedule(String),
    #[error("no bit-width in 6..=10 reaches {target} frames/s at {freq_mhz} MHz")]
    Infeasible { freq_mhz: f64, target: f64 },
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("pixel buffer holds {actual} samples, expected {expected}")]
    BadPixelBuffer { expected: usize, actual: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
