use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ground position ({x}, {y}) lies inside a building footprint")]
    InvalidPosition { x: f64, y: f64 },

    #[error("unknown environment preset `{0}` (expected suburban, urban, dense_urban or high_rise)")]
    UnknownPreset(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("realization index {index} out of range for {count} realizations")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected,
        })
    }
}
