//! Tabular data ingestion, discretization and maximum-likelihood CPT fitting
//! for a given structure.

mod dataset;
mod discretize;
mod mle;

use thiserror::Error;

use crate::network::NetworkError;

pub use dataset::{
    export_csv, ingest_csv, ingest_reader, Column, ColumnKind, ColumnSpec, Dataset, DiscretizationPolicy, Provenance, Rule,
    Schema, Transform,
};
pub use discretize::{discretize, median};
pub use mle::{fit_parameters, FitReport, StructureDoc, UnseenRow};

#[derive(Debug, Error)]
pub enum LearningError {
    #[error("cannot parse document: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("column {0} not found")]
    MissingColumn(String),
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    UnparseableValue { row: usize, column: String, value: String },
    #[error("column {0} is not numeric")]
    NonNumericColumn(String),
    #[error("column {column}: {reason}")]
    InvalidRule { column: String, reason: String },
    #[error("column {column}: label {label:?} has no mapping")]
    UnmappedLabel { column: String, label: String },
    #[error("variable {variable}: data label {label:?} is not among declared states {declared:?}")]
    StateMismatch { variable: String, label: String, declared: Vec<String> },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("smoothing must be a finite nonnegative number, got {0}")]
    InvalidSmoothing(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

impl LearningError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parse(_) => "Parse",
            Self::Io(_) => "IoError",
            Self::MissingColumn(_) => "MissingColumn",
            Self::UnparseableValue { .. } => "UnparseableValue",
            Self::NonNumericColumn(_) => "NonNumericColumn",
            Self::InvalidRule { .. } => "InvalidRule",
            Self::UnmappedLabel { .. } => "UnmappedLabel",
            Self::StateMismatch { .. } => "StateMismatch",
            Self::EmptyDataset => "EmptyDataset",
            Self::InvalidSmoothing(_) => "InvalidSmoothing",
            Self::Network(e) => e.kind(),
        }
    }
}
