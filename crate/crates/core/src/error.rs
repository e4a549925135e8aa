use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice grid: {0}")]
    Grid(String),

    #[error("bin index {index} out of range (max {max})")]
    BinOutOfRange { index: usize, max: usize },

    #[error("invalid pattern geometry: {0}")]
    Pattern(String),

    #[error("invalid stage: {0}")]
    Stage(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid LUT: {0}")]
    Lut(String),

    #[error("missing LUT for stage {stage}, pattern {pattern}")]
    MissingLut { stage: u8, pattern: u8 },

    #[error("LUT set does not match preset: {0}")]
    PresetMismatch(String),

    #[error("oracle returned {value} for input {input:?} (allowed range 0..={max})")]
    OracleOutOfRange { input: [u8; 4], value: i32, max: u8 },

    #[error("full LUT bit depth {0} unsupported (1..=6)")]
    BitDepth(u8),

    #[error("plane shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no published cost vector for preset {0}")]
    UnpublishedCost(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("bad LUT file: {0}")]
    Format(String),

    #[error("checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum { stored: u32, computed: u32 },

    #[error("file truncated: {0}")]
    Truncated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
