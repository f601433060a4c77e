//! CSV result tables.
//!
//! Every table has a fixed header; an empty table is written as its header
//! line alone. Floats are written in shortest round-trip form, so reading a
//! file back returns identical values.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A row type with a fixed column order.
pub trait Table: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

/// One (angle range, training set, test SNR) evaluation.
///
/// `r_e` and `r_offset` are empty for the raw-array rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub angle_range: String,
    pub train_set_id: String,
    pub test_snr_db: f64,
    pub doa_mse_rad2: f64,
    pub crb_low: f64,
    pub crb_high: f64,
    pub mse_low_array: f64,
    pub mse_high_array: f64,
    pub r_e: Option<f64>,
    pub r_offset: Option<f64>,
}

impl Table for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "angle_range",
        "train_set_id",
        "test_snr_db",
        "doa_mse_rad2",
        "crb_low",
        "crb_high",
        "mse_low_array",
        "mse_high_array",
        "r_e",
        "r_offset",
    ];
}

/// Cell of the train-SNR × test-SNR table of single-SNR models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub angle_range: String,
    pub test_snr_db: f64,
    pub train_snr_db: f64,
    pub doa_mse_rad2: f64,
    pub best: bool,
    pub second_best: bool,
    pub within_10pct: bool,
}

impl Table for GridRow {
    const HEADER: &'static [&'static str] = &[
        "angle_range",
        "test_snr_db",
        "train_snr_db",
        "doa_mse_rad2",
        "best",
        "second_best",
        "within_10pct",
    ];
}

/// DOA MSE of one training set summed over all test SNRs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeRow {
    pub angle_range: String,
    pub train_set_id: String,
    pub cumulative_mse_rad2: f64,
    /// Lowest cumulative MSE among the single-SNR sets of this range.
    pub best_single_snr: bool,
}

impl Table for CumulativeRow {
    const HEADER: &'static [&'static str] = &["angle_range", "train_set_id", "cumulative_mse_rad2", "best_single_snr"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseRow {
    pub angle_range: String,
    pub train_set_id: String,
    pub test_snr_db: f64,
    pub offset_db: f64,
    pub r_e: f64,
    pub r_offset: f64,
}

impl Table for DenoiseRow {
    const HEADER: &'static [&'static str] = &[
        "angle_range",
        "train_set_id",
        "test_snr_db",
        "offset_db",
        "r_e",
        "r_offset",
    ];
}

/// Trial-averaged CRBs, rad².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrbRow {
    pub angle_range: String,
    pub test_snr_db: f64,
    pub crb_low: f64,
    pub crb_high: f64,
}

impl Table for CrbRow {
    const HEADER: &'static [&'static str] = &["angle_range", "test_snr_db", "crb_low", "crb_high"];
}

/// Outcome of training one set. MSEs are in normalized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRow {
    pub angle_range: String,
    pub train_set_id: String,
    pub output_activation: String,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub test_mse: Option<f64>,
}

impl Table for TrainRow {
    const HEADER: &'static [&'static str] = &[
        "angle_range",
        "train_set_id",
        "output_activation",
        "best_epoch",
        "best_val_mse",
        "test_mse",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

impl Table for LossRow {
    const HEADER: &'static [&'static str] = &["epoch", "train_mse", "val_mse"];
}

/// Test-trial ground truth; angles are `;`-separated degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub trial: usize,
    pub angles_deg: String,
    pub crb_low_unit: f64,
    pub crb_high_unit: f64,
}

impl Table for TruthRow {
    const HEADER: &'static [&'static str] = &["trial", "angles_deg", "crb_low_unit", "crb_high_unit"];
}

/// Write `rows` as CSV, creating parent directories.
pub fn write_table<T: Table>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
    w.write_record(T::HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a table written by [`write_table`], checking the header.
pub fn read_table<T: Table>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let bad = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(T::HEADER.iter().copied()) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(|e| bad(e.to_string()))).collect()
}

/// Sweep-table alias of [`write_table`].
pub fn write_results(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_table(path, rows)
}
