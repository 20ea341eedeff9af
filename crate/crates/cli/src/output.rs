//! CSV tables and the JSON run metadata.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tera_tc_core::strategies::Strategy;

use crate::experiment::ExperimentOutput;
use crate::scenario::ScenarioFile;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Per-run metadata written next to the tables. Contains no timestamps or
/// host details, so identical runs produce identical files.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub provenance: String,
    pub experiment_id: String,
    pub kind: &'static str,
    pub seed: u64,
    pub strategies: Vec<Strategy>,
    pub files: Vec<String>,
    pub notes: Vec<String>,
    pub scenario: ScenarioFile,
}

pub fn provenance() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), OutputError> {
    let wrap = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    for row in rows {
        w.serialize(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes every non-empty table as `<name>.csv` in `dir` and returns the file names.
pub fn write_results(output: &ExperimentOutput, dir: &Path) -> Result<Vec<String>, OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    let mut emit = |name: &str, write: &dyn Fn(&Path) -> Result<(), OutputError>, empty: bool| {
        if empty {
            return Ok(());
        }
        let file = format!("{name}.csv");
        write(&dir.join(&file))?;
        files.push(file);
        Ok::<(), OutputError>(())
    };
    emit(
        "summary",
        &|p| write_csv(p, &output.summary),
        output.summary.is_empty(),
    )?;
    emit(
        "devices",
        &|p| write_csv(p, &output.devices),
        output.devices.is_empty(),
    )?;
    emit("cdf", &|p| write_csv(p, &output.cdf), output.cdf.is_empty())?;
    emit(
        "cdf_summary",
        &|p| write_csv(p, &output.cdf_summary),
        output.cdf_summary.is_empty(),
    )?;
    emit(
        "loss_distance",
        &|p| write_csv(p, &output.loss_distance),
        output.loss_distance.is_empty(),
    )?;
    emit(
        "exhaustive_gap",
        &|p| write_csv(p, &output.exhaustive_gap),
        output.exhaustive_gap.is_empty(),
    )?;
    emit(
        "link_curve",
        &|p| write_csv(p, &output.link_curve),
        output.link_curve.is_empty(),
    )?;
    emit(
        "link_optimum",
        &|p| write_csv(p, &output.link_optimum),
        output.link_optimum.is_empty(),
    )?;
    Ok(files)
}

pub fn write_metadata(metadata: &RunMetadata, dir: &Path) -> Result<(), OutputError> {
    let path = dir.join("metadata.json");
    let mut text = serde_json::to_string_pretty(metadata).expect("metadata serialises");
    text.push('\n');
    fs::write(&path, text).map_err(|source| OutputError::Io { path, source })
}
