use thiserror::Error;

use crate::catalog::CatalogError;
use crate::fuzzy::{FuzzyError, ParseError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("{system} rule base does not declare {role} variable `{variable}`")]
    MissingVariable {
        system: &'static str,
        role: &'static str,
        variable: String,
    },
    #[error("{system} rule base declares input `{variable}` that no feature provides")]
    UnknownInput { system: &'static str, variable: String },
    #[error("{system} output `{variable}` must be {expected}")]
    WrongKind {
        system: &'static str,
        variable: String,
        expected: &'static str,
    },
    #[error("control rule base lacks category `{term}` on `{variable}`")]
    MissingCategory { variable: String, term: String },
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}
