//! Shared run preparation: config + flag overrides -> validated dataset,
//! split, scaler, and scaled record sets.

use crate::{usage, CliError};
use gridbp::config::RunConfig;
use gridbp::pipeline::{self, DatasetScaler, ScalerKind, SplitSpec};
use std::path::{Path, PathBuf};

/// Flag-level overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub epochs: Option<u32>,
    pub iterations: Option<u32>,
    pub data: Option<PathBuf>,
    pub split: Option<usize>,
    pub scaler: Option<String>,
}

/// One record: (inputs, targets).
pub type Rec = (Vec<f64>, Vec<f64>);

/// Everything a training or regression command consumes.
pub struct Prepared {
    pub cfg: RunConfig,
    pub input_names: Vec<String>,
    pub target_names: Vec<String>,
    /// In/out-sample records in original units (out-sample empty without a
    /// split).
    pub in_records: Vec<Rec>,
    pub out_records: Vec<Rec>,
    /// The same records after scaling (identical to the originals when the
    /// config names no scaler).
    pub in_scaled: Vec<Rec>,
    pub out_scaled: Vec<Rec>,
    pub scaler: Option<DatasetScaler>,
    pub rejected_rows: usize,
}

impl Prepared {
    /// Converts a per-target absolute error in scaled units back to
    /// original units.
    pub fn error_to_original(&self, target: usize, scaled_abs: f64) -> f64 {
        match &self.scaler {
            Some(s) => s.targets[target].error_to_original(scaled_abs),
            None => scaled_abs,
        }
    }
}

pub fn load_config(path: &Path, ov: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    if let Some(epochs) = ov.epochs {
        cfg.epochs = epochs;
    }
    if let Some(data) = &ov.data {
        cfg.data = data.clone();
    }
    if let Some(count) = ov.split {
        let order = cfg
            .split
            .map(|s| s.order)
            .unwrap_or(gridbp::pipeline::SplitOrder::FileOrder);
        cfg.split = Some(SplitSpec { in_count: count, order });
    }
    if let Some(kind) = &ov.scaler {
        cfg.scaler = Some(match kind.as_str() {
            "zscore" => ScalerKind::ZScore,
            "range" => ScalerKind::Range { a: -1.0, b: 1.0 },
            other => return Err(CliError::Usage(format!("unknown scaler `{other}`"))),
        });
    }
    Ok(cfg)
}

pub fn prepare(config_path: &Path, ov: &Overrides) -> Result<Prepared, CliError> {
    let cfg = load_config(config_path, ov)?;
    let data_path = cfg.data_path(config_path);
    let table = pipeline::load_csv(&data_path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", data_path.display())))?;

    let target_names = cfg.targets.clone();
    let input_names: Vec<String> = match &cfg.inputs {
        Some(names) => names.clone(),
        None => table
            .columns
            .iter()
            .filter(|c| !target_names.contains(c))
            .cloned()
            .collect(),
    };
    let dataset = pipeline::validate(&table, &input_names, &target_names).map_err(usage)?;

    if cfg.topology[0] != input_names.len() {
        return Err(CliError::Usage(format!(
            "topology expects {} inputs but the run names {} input columns",
            cfg.topology[0],
            input_names.len()
        )));
    }
    if *cfg.topology.last().unwrap() != target_names.len() {
        return Err(CliError::Usage(format!(
            "topology expects {} outputs but the run names {} target columns",
            cfg.topology.last().unwrap(),
            target_names.len()
        )));
    }

    let rejected_rows = dataset.rejected.len();
    let (in_records, out_records) = match &cfg.split {
        Some(spec) => pipeline::split(&dataset.records, spec).map_err(usage)?,
        None => (dataset.records.clone(), Vec::new()),
    };

    let (scaler, in_scaled, out_scaled) = match cfg.scaler {
        Some(kind) => {
            let s = DatasetScaler::fit(&dataset, &in_records, kind).map_err(usage)?;
            let si = s.apply_all(&in_records);
            let so = s.apply_all(&out_records);
            (Some(s), si, so)
        }
        None => (None, in_records.clone(), out_records.clone()),
    };

    Ok(Prepared {
        cfg,
        input_names,
        target_names,
        in_records,
        out_records,
        in_scaled,
        out_scaled,
        scaler,
        rejected_rows,
    })
}
