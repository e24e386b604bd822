//! On-disk snapshot of a filtered dataset.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::dataset::{DatasetSummary, TripartiteDataset};
use crate::error::{Error, Result};

pub const SNAPSHOT_FILE: &str = "dataset.json";
pub const SUMMARY_FILE: &str = "dataset_summary.json";

pub fn snapshot_path(dir: &Path) -> PathBuf {
    dir.join(SNAPSHOT_FILE)
}

/// Writes the dataset snapshot and its summary into `dir`, creating it.
pub fn save(dataset: &TripartiteDataset, dir: &Path) -> Result<DatasetSummary> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = snapshot_path(dir);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, dataset)?;
    w.flush().map_err(|e| Error::io(&path, e))?;

    let summary = dataset.summary();
    let path = dir.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

/// Loads the snapshot stored in `dir`.
pub fn load(dir: &Path) -> Result<TripartiteDataset> {
    let path = snapshot_path(dir);
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Snapshot(format!("{}: {e}", path.display())))
}
