use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use super::bundle::{DirBundle, MemoryBundle};
use super::document::OcelDocument;
use super::error::{DecodeError, EncodeError, WriteError};
use super::{from_ocel, json, relational, to_ocel_with, EncodeMode};
use crate::model::CoreLog;
use crate::validation::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OcelFormat {
    /// Single JSON file.
    Json,
    /// Directory holding the relational CSV bundle.
    Csv,
}

impl OcelFormat {
    pub const ALL: [OcelFormat; 2] = [OcelFormat::Json, OcelFormat::Csv];

    pub fn as_str(self) -> &'static str {
        match self {
            OcelFormat::Json => "ocel-json",
            OcelFormat::Csv => "ocel-csv",
        }
    }

    pub fn backend(self) -> &'static dyn OcelBackend {
        match self {
            OcelFormat::Json => &JsonBackend,
            OcelFormat::Csv => &CsvBackend,
        }
    }
}

impl fmt::Display for OcelFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OcelFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OcelFormat::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| format!("unknown OCEL format {s:?}"))
    }
}

/// A concrete OCEL serialization. Callers pick one through [`OcelFormat`].
pub trait OcelBackend: Sync {
    fn format(&self) -> OcelFormat;
    fn write_path(&self, doc: &OcelDocument, target: &Path) -> Result<(), WriteError>;
    fn read_path(&self, source: &Path) -> Result<(OcelDocument, Vec<Diagnostic>), DecodeError>;
    /// In-memory write followed by read.
    fn reencode(&self, doc: &OcelDocument) -> Result<(OcelDocument, Vec<Diagnostic>), DecodeError>;
}

pub struct JsonBackend;

impl OcelBackend for JsonBackend {
    fn format(&self) -> OcelFormat {
        OcelFormat::Json
    }

    fn write_path(&self, doc: &OcelDocument, target: &Path) -> Result<(), WriteError> {
        let mut out = BufWriter::new(File::create(target)?);
        json::write_json(doc, &mut out)?;
        out.flush()?;
        Ok(())
    }

    fn read_path(&self, source: &Path) -> Result<(OcelDocument, Vec<Diagnostic>), DecodeError> {
        json::read_json(BufReader::new(File::open(source)?))
    }

    fn reencode(&self, doc: &OcelDocument) -> Result<(OcelDocument, Vec<Diagnostic>), DecodeError> {
        json::read_json(&json::to_json_bytes(doc)[..])
    }
}

pub struct CsvBackend;

impl OcelBackend for CsvBackend {
    fn format(&self) -> OcelFormat {
        OcelFormat::Csv
    }

    fn write_path(&self, doc: &OcelDocument, target: &Path) -> Result<(), WriteError> {
        relational::write_relational(doc, &mut DirBundle::new(target))
    }

    fn read_path(&self, source: &Path) -> Result<(OcelDocument, Vec<Diagnostic>), DecodeError> {
        if !source.is_dir() {
            return Err(DecodeError::MissingFile(source.display().to_string()));
        }
        relational::read_relational(&DirBundle::new(source))
    }

    fn reencode(&self, doc: &OcelDocument) -> Result<(OcelDocument, Vec<Diagnostic>), DecodeError> {
        let mut bundle = MemoryBundle::default();
        relational::write_relational(doc, &mut bundle).map_err(|e| match e {
            WriteError::Io(io) => DecodeError::Io(io),
            other => DecodeError::InvalidValue { path: "bundle".into(), message: other.to_string() },
        })?;
        relational::read_relational(&bundle)
    }
}

#[derive(Debug, Error)]
pub enum RoundTripError {
    #[error("encode: {0}")]
    Encode(#[from] EncodeError),
    #[error("decode: {0}")]
    Decode(#[from] DecodeError),
}

/// to_ocel, serialize, parse, from_ocel. The result should equal
/// `log.canonicalize()`.
pub fn round_trip(log: &CoreLog, format: OcelFormat, mode: EncodeMode) -> Result<CoreLog, RoundTripError> {
    let doc = to_ocel_with(log, mode)?;
    let (back, _) = format.backend().reencode(&doc)?;
    let (decoded, _) = from_ocel(&back)?;
    Ok(decoded)
}

/// Reads a file or bundle and decodes it into a log, returning the reader
/// and importer warnings together.
pub fn load_log(path: &Path, format: OcelFormat) -> Result<(CoreLog, Vec<Diagnostic>), DecodeError> {
    let (doc, mut diagnostics) = format.backend().read_path(path)?;
    let (log, more) = from_ocel(&doc)?;
    diagnostics.extend(more);
    Ok((log, diagnostics))
}

/// Encodes and writes a log.
pub fn store_log(log: &CoreLog, path: &Path, format: OcelFormat, mode: EncodeMode) -> Result<(), StoreError> {
    let doc = to_ocel_with(log, mode)?;
    format.backend().write_path(&doc, path)?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Write(#[from] WriteError),
}
