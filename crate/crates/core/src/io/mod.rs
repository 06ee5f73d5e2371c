//! File formats: contours, sample tables, rasters, paths and experiment
//! configs. Parsers take text and never panic on malformed input.

mod config;
mod polygon;
mod raster;
mod table;

pub use config::{load_experiment_config, parse_experiment_config};
pub use polygon::{parse_polygon_csv, parse_polygon_geojson, read_polygon};
pub use raster::{
    parse_esri_ascii, parse_raster_csv, read_raster, write_esri_ascii, write_raster_csv,
};
pub use table::{
    parse_observations_csv, path_csv, path_geojson, read_observations, write_observations_csv,
};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::eval::EvalError;
use crate::field::FieldError;
use crate::geometry::GeometryError;

/// Largest input file read into memory.
pub const MAX_FILE_BYTES: u64 = 512 * 1024 * 1024;
pub const MAX_POLYGON_VERTICES: usize = 1_000_000;
pub const MAX_OBSERVATIONS: usize = 20_000;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: file is {size} bytes, limit is {MAX_FILE_BYTES}", path.display())]
    FileTooLarge { path: PathBuf, size: u64 },
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("{0}")]
    Format(String),
    #[error("duplicate sample location on lines {0} and {1}")]
    DuplicateSample(u64, u64),
    #[error("{what} exceeds the limit of {limit}")]
    TooLarge { what: &'static str, limit: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl IoError {
    /// True for well-formed input that fails validation (bad polygon,
    /// duplicate samples, invalid config values), false for unreadable or
    /// malformed files.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            IoError::DuplicateSample(..)
                | IoError::Geometry(_)
                | IoError::Field(_)
                | IoError::Eval(_)
        )
    }

    fn parse(line: u64, msg: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            msg: msg.into(),
        }
    }
}

/// Reads a UTF-8 file, refusing anything over [`MAX_FILE_BYTES`].
pub fn read_text(path: &Path) -> Result<String, IoError> {
    let file_err = |source| IoError::File {
        path: path.to_path_buf(),
        source,
    };
    let size = fs::metadata(path).map_err(file_err)?.len();
    if size > MAX_FILE_BYTES {
        return Err(IoError::FileTooLarge {
            path: path.to_path_buf(),
            size,
        });
    }
    fs::read_to_string(path).map_err(file_err)
}

/// Writes `bytes` to a temporary file beside `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let file_err = |source| IoError::File {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(file_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(file_err)?;
    tmp.write_all(bytes).map_err(file_err)?;
    tmp.as_file().sync_all().map_err(file_err)?;
    tmp.persist(path).map_err(|e| file_err(e.error))?;
    Ok(())
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn parse_f64(field: &str, line: u64, what: &str) -> Result<f64, IoError> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| IoError::parse(line, format!("{what} {:?} is not a number", field)))?;
    if !v.is_finite() {
        return Err(IoError::parse(line, format!("{what} {v} is not finite")));
    }
    Ok(v)
}

/// Rows of a headerless-or-headed numeric CSV. A first row whose first field
/// is not a number must be the expected header.
fn numeric_rows(
    text: &str,
    header: &[&str],
    limit: usize,
    what: &'static str,
) -> Result<Vec<(u64, Vec<String>)>, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            IoError::parse(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if k == 0 && rec.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            let got: Vec<String> = rec.iter().map(|f| f.to_ascii_lowercase()).collect();
            if got != header {
                return Err(IoError::parse(
                    line,
                    format!(
                        "expected header {}, got {}",
                        header.join(","),
                        got.join(",")
                    ),
                ));
            }
            continue;
        }
        if rec.len() != header.len() {
            return Err(IoError::parse(
                line,
                format!("expected {} fields, got {}", header.len(), rec.len()),
            ));
        }
        if rows.len() == limit {
            return Err(IoError::TooLarge { what, limit });
        }
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(rows)
}
