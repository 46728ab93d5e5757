//! File formats: Matrix Market and CSV matrices, support-list files for
//! feasible points, JSON reports and label files.

mod delimited;
mod mtx;
mod report;
mod support_list;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use sso_core::DenseMatrix;

pub use delimited::{read_csv_matrix, read_labels};
pub use mtx::{read_matrix_market, write_matrix_market};
pub use report::{OptimumSidecar, ResidualsJson, SolveReport};
pub use support_list::{read_support_list, write_support_list};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] sso_core::Error),
}

impl IoError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, IoError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    MatrixMarket,
    Csv,
}

impl MatrixFormat {
    /// `.csv` means CSV; anything else is read as Matrix Market.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::MatrixMarket,
        }
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IoError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| IoError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn load_matrix(path: &Path, format: Option<MatrixFormat>) -> Result<DenseMatrix> {
    let reader = open(path)?;
    match format.unwrap_or_else(|| MatrixFormat::from_path(path)) {
        MatrixFormat::MatrixMarket => read_matrix_market(reader),
        MatrixFormat::Csv => read_csv_matrix(reader),
    }
}

pub fn save_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut w = create(path)?;
    write_matrix_market(&mut w, m).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn load_support(path: &Path) -> Result<sso_core::SupportMatrix> {
    read_support_list(open(path)?)
}

pub fn save_support(path: &Path, x: &sso_core::SupportMatrix) -> Result<()> {
    let mut w = create(path)?;
    write_support_list(&mut w, x).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}

pub fn save_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}
