//! Error type shared by all toolkit modules.

use thiserror::Error;

/// Errors raised while parsing data files or scoring predictions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected {expected} tab-separated columns, found {found}")]
    ColumnCount {
        line: usize,
        expected: &'static str,
        found: usize,
    },

    #[error("line {line}: invalid UTF-8")]
    Utf8 { line: usize },

    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },

    #[error("sentence ending at line {line} has more than one target slot")]
    MultipleTargets { line: usize },

    #[error("line {line}: MSD annotation is not allowed in a track-2 corpus")]
    TrackMismatch { line: usize },

    #[error("training data is empty")]
    EmptyDataset,

    #[error("pool of {available} items cannot satisfy a draw of {required} ({shortfall} short)")]
    PoolTooSmall {
        available: usize,
        required: usize,
        shortfall: usize,
    },

    #[error("weight pool has no item with positive weight")]
    NoPositiveWeight,

    #[error("prediction count {predictions} does not match gold count {gold}")]
    LengthMismatch { gold: usize, predictions: usize },

    #[error("item {index} has no plausible-form annotation")]
    MissingPlausibleForms { index: usize },

    #[error("item {index} has no gold form")]
    MissingGoldForm { index: usize },

    #[error("sentence has no target slot")]
    NoTarget,

    #[error("no prediction systems were supplied")]
    NoSystems,

    #[error("part-of-speech tag {pos:?} has no mapping entry")]
    UnmappedPos { pos: String },
}

pub type Result<T> = std::result::Result<T, Error>;
