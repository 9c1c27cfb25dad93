use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cell ({n}, {m}) is outside the {rows}x{cols} grid")]
    CellOutOfRange {
        n: usize,
        m: usize,
        rows: usize,
        cols: usize,
    },

    #[error("terminal must be in front of the surface (z > 0), got z = {z}")]
    BehindSurface { z: f64 },

    #[error("terminal coincides with the center of cell ({n}, {m})")]
    CoincidentTerminal { n: usize, m: usize },

    #[error("reflection map is {map_rows}x{map_cols} but the grid is {rows}x{cols}")]
    DimensionMismatch {
        map_rows: usize,
        map_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("reflection amplitudes differ across cells; the closed form needs a single amplitude")]
    NonUniformAmplitude,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects non-finite or non-positive values.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}
