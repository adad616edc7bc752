//! CSV manifests of (reference, distorted, rating) rows.
//!
//! The header must be exactly
//! `ref_path,dist_path,subjective,distortion_type,dataset_id`. Relative image
//! paths are resolved against the manifest's own directory.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HEADER: [&str; 5] = [
    "ref_path",
    "dist_path",
    "subjective",
    "distortion_type",
    "dataset_id",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub ref_path: PathBuf,
    pub dist_path: PathBuf,
    /// MOS or DMOS, in the database's own units.
    pub subjective: f64,
    pub distortion_type: String,
    pub dataset_id: String,
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_manifest(file, base, path)
}

/// Parses manifest CSV from `reader`; `origin` only labels errors. Row
/// numbers in errors count data rows from 1.
pub fn parse_manifest(
    reader: impl Read,
    base_dir: &Path,
    origin: &Path,
) -> Result<Vec<DatasetRecord>> {
    let err = |row: usize, reason: String| Error::Manifest {
        path: origin.to_owned(),
        row,
        reason,
    };
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = csv.headers().map_err(|e| err(0, e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(err(
            0,
            format!(
                "header must be {:?}, found {:?}",
                HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut records = Vec::new();
    for (i, row) in csv.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| err(row_no, e.to_string()))?;
        let field = |k: usize| row.get(k).unwrap_or("");
        let resolve = |k: usize| -> Result<PathBuf> {
            let p = field(k);
            if p.is_empty() {
                return Err(err(row_no, format!("empty {}", HEADER[k])));
            }
            let p = Path::new(p);
            Ok(if p.is_absolute() {
                p.to_owned()
            } else {
                base_dir.join(p)
            })
        };
        let subjective: f64 = field(2).parse().map_err(|_| {
            err(
                row_no,
                format!("subjective score {:?} is not a number", field(2)),
            )
        })?;
        if !subjective.is_finite() {
            return Err(err(row_no, "subjective score is not finite".into()));
        }
        records.push(DatasetRecord {
            ref_path: resolve(0)?,
            dist_path: resolve(1)?,
            subjective,
            distortion_type: field(3).to_owned(),
            dataset_id: field(4).to_owned(),
        });
    }
    Ok(records)
}
