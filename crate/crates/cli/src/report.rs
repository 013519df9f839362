//! Report files. All numbers print with `f64`'s shortest round-trip
//! formatting, so identical runs produce byte-identical files.

use crate::{usage, CliError};
use std::fs;
use std::path::Path;

/// One evaluated epoch.
#[derive(Debug, Clone, Copy)]
pub struct EpochRow {
    pub epoch: u32,
    pub in_err: f64,
    pub out_err: f64,
    pub ema: f64,
}

pub fn write_report(path: &Path, rows: &[EpochRow]) -> Result<(), CliError> {
    let mut text = String::from("epoch,in_err,out_err,ema\n");
    for r in rows {
        text.push_str(&format!("{},{},{},{}\n", r.epoch, r.in_err, r.out_err, r.ema));
    }
    fs::write(path, text).map_err(usage)
}

pub fn write_weights(path: &Path, weights: &[Vec<Vec<f64>>]) -> Result<(), CliError> {
    let mut text = String::from("layer,row,col,value\n");
    for (h, layer) in weights.iter().enumerate() {
        for (i, row) in layer.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                text.push_str(&format!("{},{},{},{}\n", h + 1, i + 1, j + 1, v));
            }
        }
    }
    fs::write(path, text).map_err(usage)
}

/// Per-epoch min/median/max across seeds, for multi-seed runs.
pub fn write_summary(path: &Path, per_seed: &[Vec<EpochRow>]) -> Result<(), CliError> {
    let mut text = String::from("epoch,in_min,in_median,in_max,out_min,out_median,out_max\n");
    let epochs = per_seed.iter().map(|r| r.len()).min().unwrap_or(0);
    for e in 0..epochs {
        let stat = |pick: fn(&EpochRow) -> f64| -> (f64, f64, f64) {
            let mut vals: Vec<f64> = per_seed.iter().map(|rows| pick(&rows[e])).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            (vals[0], vals[vals.len() / 2], vals[vals.len() - 1])
        };
        let (i0, i1, i2) = stat(|r| r.in_err);
        let (o0, o1, o2) = stat(|r| r.out_err);
        text.push_str(&format!(
            "{},{i0},{i1},{i2},{o0},{o1},{o2}\n",
            per_seed[0][e].epoch
        ));
    }
    fs::write(path, text).map_err(usage)
}

pub fn write_named_values(path: &Path, header: &str, rows: &[(String, String, f64)]) -> Result<(), CliError> {
    let mut text = format!("{header}\n");
    for (a, b, v) in rows {
        text.push_str(&format!("{a},{b},{v}\n"));
    }
    fs::write(path, text).map_err(usage)
}
