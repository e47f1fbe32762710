use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("masks {first} and {second} overlap at pixel (row {row}, col {col})")]
    Overlap {
        row: usize,
        col: usize,
        first: usize,
        second: usize,
    },

    #[error("mask {index} has no foreground pixels")]
    EmptyEntity { index: usize },

    #[error("mask is empty")]
    EmptyMask,

    #[error("region of interest is empty")]
    EmptyRoi,

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("raster buffer holds {actual} values, expected {expected}")]
    BufferSize { expected: usize, actual: usize },

    #[error("grid size {0} is out of range: need 1 <= b and b*b <= 124")]
    GridTooLarge(usize),

    #[error("palette exhausted: {entities} entities but only {cells} cells")]
    PaletteExhausted { entities: usize, cells: usize },

    #[error("cluster split is degenerate: one side is empty")]
    DegenerateSplit,

    #[error("polygon has fewer than 3 distinct vertices")]
    DegeneratePolygon,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
