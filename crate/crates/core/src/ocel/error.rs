use std::io;

use thiserror::Error;

use crate::model::{Identifier, Namespace};
use crate::validation::Diagnostic;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("attribute key {key:?} on {record} uses the reserved core: prefix")]
    ReservedKeyCollision { record: String, key: String },
    #[error("id or type {0:?} collides with a reserved encoding record")]
    ReservedIdCollision(String),
    #[error("non-finite real in attribute {key:?} of {record}")]
    NonFiniteValue { record: String, key: String },
    #[error("log is not encodable: {} error diagnostic(s), first: {}", .0.len(), .0.first().map(ToString::to_string).unwrap_or_default())]
    InvalidLog(Vec<Diagnostic>),
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("malformed document at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("{path}: expected {expected}")]
    TypeMismatch { path: String, expected: String },
    #[error("{path}: {message}")]
    InvalidValue { path: String, message: String },
    #[error("duplicate {namespace} id {id}")]
    DuplicateId { namespace: Namespace, id: Identifier },
    #[error("{from} references unknown object {to}")]
    DanglingReference { from: Identifier, to: Identifier },
    #[error("e2e link object {id} has {sources} source and {targets} target rows, expected one of each")]
    MalformedE2eLink { id: Identifier, sources: usize, targets: usize },
    #[error("unknown reserved attribute {key:?} on {record}")]
    UnknownReservedKey { record: Identifier, key: String },
    #[error("missing file {0}")]
    MissingFile(String),
    #[error("{file}: header mismatch, expected {expected:?}, found {found:?}")]
    HeaderMismatch { file: String, expected: String, found: String },
    #[error("{file} line {line}: {message}")]
    MalformedRow { file: String, line: u64, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum WriteError {
    #[error("attribute key {0:?} cannot be mapped to a distinct column")]
    ColumnCollision(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<csv::Error> for WriteError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => WriteError::Io(io),
            other => WriteError::Io(io::Error::other(format!("{other:?}"))),
        }
    }
}
