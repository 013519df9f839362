//! Dataset ingestion: CSV reading, numeric validation, in/out-sample
//! splitting, and invertible linear scaling fitted on the in-sample rows
//! only.

use crate::rng::SplitMix64;
use std::io;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("column {0:?} is constant; an invertible scale needs spread")]
    DegenerateColumn(String),
    #[error("scaler needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("in-sample count {in_count} must be positive and smaller than the {valid} valid rows")]
    BadSplit { in_count: usize, valid: usize },
}

/// A CSV file as read: header names plus raw cell texts.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// The numeric view of a table under chosen input/target roles. Only rows
/// whose every input and target cell parses as a finite number survive.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub input_names: Vec<String>,
    pub target_names: Vec<String>,
    /// `(inputs, targets)` per valid row, in file order.
    pub records: Vec<(Vec<f64>, Vec<f64>)>,
    /// Zero-based data-row indexes that failed validation.
    pub rejected: Vec<usize>,
}

pub fn load_csv(path: &Path) -> Result<RawTable, PipelineError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let columns = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok(RawTable { columns, rows })
}

fn column_index(table: &RawTable, name: &str) -> Result<usize, PipelineError> {
    table
        .columns
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| PipelineError::UnknownColumn(name.to_string()))
}

fn parse_cell(text: &str) -> Option<f64> {
    text.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Applies the all-cells-numeric rule over the input and target columns:
/// a row is valid iff every used cell is a finite number. Rejection is
/// data, not an error.
pub fn validate(
    table: &RawTable,
    input_names: &[String],
    target_names: &[String],
) -> Result<Dataset, PipelineError> {
    let input_idx: Vec<usize> = input_names
        .iter()
        .map(|n| column_index(table, n))
        .collect::<Result<_, _>>()?;
    let target_idx: Vec<usize> = target_names
        .iter()
        .map(|n| column_index(table, n))
        .collect::<Result<_, _>>()?;

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    'rows: for (r, row) in table.rows.iter().enumerate() {
        let mut inp = Vec::with_capacity(input_idx.len());
        let mut targ = Vec::with_capacity(target_idx.len());
        for (idx, out) in [(&input_idx, &mut inp), (&target_idx, &mut targ)] {
            for &i in idx {
                match row.get(i).and_then(|c| parse_cell(c)) {
                    Some(v) => out.push(v),
                    None => {
                        rejected.push(r);
                        continue 'rows;
                    }
                }
            }
        }
        records.push((inp, targ));
    }
    Ok(Dataset {
        input_names: input_names.to_vec(),
        target_names: target_names.to_vec(),
        records,
        rejected,
    })
}

/// Which linear scale to fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalerKind {
    /// y = (x − μ)/σ with the sample standard deviation (n−1 divisor).
    ZScore,
    /// Maps the observed [min, max] onto [a, b].
    Range { a: f64, b: f64 },
}

impl ScalerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScalerKind::ZScore => "zscore",
            ScalerKind::Range { .. } => "range",
        }
    }
}

/// A fitted per-column scale y = α·x + β with α ≠ 0, so x = (y − β)/α.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnScaler {
    pub column: String,
    pub kind: ScalerKind,
    pub alpha: f64,
    pub beta: f64,
}

impl ColumnScaler {
    pub fn apply(&self, x: f64) -> f64 {
        self.alpha * x + self.beta
    }
    pub fn invert(&self, y: f64) -> f64 {
        (y - self.beta) / self.alpha
    }
    /// A difference of scaled values maps back by 1/|α|; used to report
    /// errors in original units.
    pub fn error_to_original(&self, scaled_abs_err: f64) -> f64 {
        scaled_abs_err / self.alpha.abs()
    }
}

pub fn fit_scaler(
    column: &str,
    values: &[f64],
    kind: ScalerKind,
) -> Result<ColumnScaler, PipelineError> {
    if values.len() < 2 {
        return Err(PipelineError::TooFewRows(values.len()));
    }
    let (alpha, beta) = match kind {
        ScalerKind::ZScore => {
            let n = values.len() as f64;
            let mu = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0);
            let sigma = var.sqrt();
            if sigma == 0.0 {
                return Err(PipelineError::DegenerateColumn(column.to_string()));
            }
            (1.0 / sigma, -mu / sigma)
        }
        ScalerKind::Range { a, b } => {
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi == lo {
                return Err(PipelineError::DegenerateColumn(column.to_string()));
            }
            let alpha = (b - a) / (hi - lo);
            (alpha, a - alpha * lo)
        }
    };
    Ok(ColumnScaler { column: column.to_string(), kind, alpha, beta })
}

/// Scalers for every input and target column, fitted on in-sample rows.
#[derive(Debug, Clone)]
pub struct DatasetScaler {
    pub inputs: Vec<ColumnScaler>,
    pub targets: Vec<ColumnScaler>,
}

impl DatasetScaler {
    /// Fits one scaler per column over `in_sample` only.
    pub fn fit(
        dataset: &Dataset,
        in_sample: &[(Vec<f64>, Vec<f64>)],
        kind: ScalerKind,
    ) -> Result<Self, PipelineError> {
        let col = |k: usize, target: bool| -> Vec<f64> {
            in_sample
                .iter()
                .map(|(i, t)| if target { t[k] } else { i[k] })
                .collect()
        };
        let inputs = dataset
            .input_names
            .iter()
            .enumerate()
            .map(|(k, name)| fit_scaler(name, &col(k, false), kind))
            .collect::<Result<_, _>>()?;
        let targets = dataset
            .target_names
            .iter()
            .enumerate()
            .map(|(k, name)| fit_scaler(name, &col(k, true), kind))
            .collect::<Result<_, _>>()?;
        Ok(DatasetScaler { inputs, targets })
    }

    pub fn apply_record(&self, record: &(Vec<f64>, Vec<f64>)) -> (Vec<f64>, Vec<f64>) {
        let inp = record.0.iter().zip(&self.inputs).map(|(v, s)| s.apply(*v)).collect();
        let targ = record.1.iter().zip(&self.targets).map(|(v, s)| s.apply(*v)).collect();
        (inp, targ)
    }

    pub fn apply_all(&self, records: &[(Vec<f64>, Vec<f64>)]) -> Vec<(Vec<f64>, Vec<f64>)> {
        records.iter().map(|r| self.apply_record(r)).collect()
    }
}

/// How to pick the in-sample rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitOrder {
    /// First `in_count` valid rows in file order.
    FileOrder,
    /// Deterministic shuffle of the valid rows before taking the first
    /// `in_count`.
    Shuffle { seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub in_count: usize,
    pub order: SplitOrder,
}

/// Partitions valid records into (in-sample, out-sample).
pub fn split(
    records: &[(Vec<f64>, Vec<f64>)],
    spec: &SplitSpec,
) -> Result<(Vec<(Vec<f64>, Vec<f64>)>, Vec<(Vec<f64>, Vec<f64>)>), PipelineError> {
    if spec.in_count == 0 || spec.in_count >= records.len() {
        return Err(PipelineError::BadSplit { in_count: spec.in_count, valid: records.len() });
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    if let SplitOrder::Shuffle { seed } = spec.order {
        let mut rng = SplitMix64::new(seed);
        for i in (1..order.len()).rev() {
            let j = rng.randbetween(0, i as i64) as usize;
            order.swap(i, j);
        }
    }
    let take = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect();
    Ok((take(&order[..spec.in_count]), take(&order[spec.in_count..])))
}

/// Writes records as CSV with the dataset's input-then-target header.
pub fn write_records_csv(
    path: &Path,
    input_names: &[String],
    target_names: &[String],
    records: &[(Vec<f64>, Vec<f64>)],
) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(input_names.iter().chain(target_names))?;
    for (inp, targ) in records {
        w.write_record(inp.iter().chain(targ).map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar that makes scaled files invertible later: one row per column.
pub fn write_scaler_csv(path: &Path, scaler: &DatasetScaler) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["column", "kind", "alpha", "beta"])?;
    for s in scaler.inputs.iter().chain(&scaler.targets) {
        w.write_record([
            s.column.clone(),
            s.kind.name().to_string(),
            s.alpha.to_string(),
            s.beta.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn data_file(name: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
    }

    fn mpg_names() -> (Vec<String>, Vec<String>) {
        let inputs = [
            "cylinders",
            "displacement",
            "horsepower",
            "weight",
            "acceleration",
            "modelyear",
            "origin_usa",
            "origin_europe",
            "origin_japan",
        ]
        .map(str::to_string)
        .to_vec();
        (inputs, vec!["mpg".to_string()])
    }

    fn mpg_dataset() -> Dataset {
        let table = load_csv(&data_file("auto_mpg.csv")).unwrap();
        let (inputs, targets) = mpg_names();
        validate(&table, &inputs, &targets).unwrap()
    }

    #[test]
    fn mpg_validation_keeps_392_of_398() {
        let ds = mpg_dataset();
        assert_eq!(ds.records.len() + ds.rejected.len(), 398);
        assert_eq!(ds.records.len(), 392);
        assert_eq!(ds.rejected.len(), 6);
    }

    #[test]
    fn rows_with_nonnumeric_cells_are_rejected_not_errors() {
        let table = RawTable {
            columns: vec!["x".into(), "y".into()],
            rows: vec![
                vec!["1".into(), "2".into()],
                vec!["?".into(), "3".into()],
                vec!["4".into(), "".into()],
                vec!["5.5".into(), "-6".into()],
            ],
        };
        let ds = validate(&table, &["x".into()], &["y".into()]).unwrap();
        assert_eq!(ds.records.len(), 2);
        assert_eq!(ds.rejected, vec![1, 2]);
        assert_eq!(ds.records[1], (vec![5.5], vec![-6.0]));
    }

    #[test]
    fn validation_is_order_independent() {
        let ds = mpg_dataset();
        let table = load_csv(&data_file("auto_mpg.csv")).unwrap();
        let mut reversed = table.clone();
        reversed.rows.reverse();
        let (inputs, targets) = mpg_names();
        let ds_rev = validate(&reversed, &inputs, &targets).unwrap();
        assert_eq!(ds_rev.records.len(), ds.records.len());
        let mut a = ds.records.clone();
        let mut b = ds_rev.records.clone();
        let key = |r: &(Vec<f64>, Vec<f64>)| format!("{r:?}");
        a.sort_by_key(key);
        b.sort_by_key(key);
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_column_is_an_error() {
        let table = load_csv(&data_file("auto_mpg.csv")).unwrap();
        let err = validate(&table, &["nope".into()], &["mpg".into()]).unwrap_err();
        assert!(matches!(err, PipelineError::UnknownColumn(c) if c == "nope"));
    }

    #[test]
    fn zscore_on_first_360_mpg_matches_known_stats() {
        let ds = mpg_dataset();
        let (ins, _) = split(
            &ds.records,
            &SplitSpec { in_count: 360, order: SplitOrder::FileOrder },
        )
        .unwrap();
        let mpg: Vec<f64> = ins.iter().map(|(_, t)| t[0]).collect();
        let s = fit_scaler("mpg", &mpg, ScalerKind::ZScore).unwrap();
        // Mean of the first 360 valid rows is 22.7583…; with the sample
        // standard deviation the scale works out near 1/7.5778.
        let mu = -s.beta / s.alpha;
        let sigma = 1.0 / s.alpha;
        assert!((mu - 22.7583333333).abs() < 1e-9, "mu {mu}");
        assert!((sigma - 7.5778071736).abs() < 1e-9, "sigma {sigma}");
        assert!((mu - 22.758).abs() < 0.001);
        assert!((sigma - 7.567).abs() < 0.05);
    }

    #[test]
    fn range_scaler_maps_observed_extremes_exactly() {
        let ds = mpg_dataset();
        let (ins, _) = split(
            &ds.records,
            &SplitSpec { in_count: 360, order: SplitOrder::FileOrder },
        )
        .unwrap();
        let mpg: Vec<f64> = ins.iter().map(|(_, t)| t[0]).collect();
        let s = fit_scaler("mpg", &mpg, ScalerKind::Range { a: -1.0, b: 1.0 }).unwrap();
        assert!((s.alpha - 2.0 / 37.6).abs() < 1e-15);
        assert!((s.beta - (-(46.6 + 9.0) / 37.6)).abs() < 1e-12);
        assert!((s.apply(9.0) + 1.0).abs() < 1e-12);
        assert!((s.apply(46.6) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_then_invert_is_identity() {
        for kind in [ScalerKind::ZScore, ScalerKind::Range { a: 0.0, b: 1.0 }] {
            let s = fit_scaler("v", &[3.0, -2.0, 7.5, 11.0, 0.25], kind).unwrap();
            for x in [-100.0, -2.0, 0.0, 0.3, 7.5, 1e6] {
                assert!((s.invert(s.apply(x)) - x).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn constant_column_is_degenerate() {
        for kind in [ScalerKind::ZScore, ScalerKind::Range { a: -1.0, b: 1.0 }] {
            let err = fit_scaler("flat", &[4.0; 10], kind).unwrap_err();
            assert!(matches!(err, PipelineError::DegenerateColumn(_)));
        }
    }

    #[test]
    fn split_sizes_match_known_partitions() {
        let ds = mpg_dataset();
        for (in_count, out_len) in [(360, 32), (314, 78), (391, 1)] {
            let (ins, outs) = split(
                &ds.records,
                &SplitSpec { in_count, order: SplitOrder::FileOrder },
            )
            .unwrap();
            assert_eq!(ins.len(), in_count);
            assert_eq!(outs.len(), out_len);
        }
        assert!(split(&ds.records, &SplitSpec { in_count: 392, order: SplitOrder::FileOrder })
            .is_err());
        assert!(split(&ds.records, &SplitSpec { in_count: 0, order: SplitOrder::FileOrder })
            .is_err());
    }

    #[test]
    fn shuffled_split_is_seed_deterministic() {
        let ds = mpg_dataset();
        let spec = SplitSpec { in_count: 360, order: SplitOrder::Shuffle { seed: 7 } };
        let (a1, _) = split(&ds.records, &spec).unwrap();
        let (a2, _) = split(&ds.records, &spec).unwrap();
        assert_eq!(a1, a2);
        let (b1, _) = split(
            &ds.records,
            &SplitSpec { in_count: 360, order: SplitOrder::Shuffle { seed: 8 } },
        )
        .unwrap();
        assert_ne!(a1, b1);
        let (f1, _) = split(
            &ds.records,
            &SplitSpec { in_count: 360, order: SplitOrder::FileOrder },
        )
        .unwrap();
        assert_ne!(a1, f1);
    }

    #[test]
    fn scaler_params_depend_only_on_in_sample() {
        let ds = mpg_dataset();
        let spec = SplitSpec { in_count: 360, order: SplitOrder::FileOrder };
        let (ins, mut outs) = split(&ds.records, &spec).unwrap();
        let fitted = DatasetScaler::fit(&ds, &ins, ScalerKind::ZScore).unwrap();
        // Corrupt the out-sample wildly; a leak-free fit cannot notice.
        for (inp, targ) in &mut outs {
            for v in inp.iter_mut().chain(targ.iter_mut()) {
                *v *= 1000.0;
            }
        }
        let refitted = DatasetScaler::fit(&ds, &ins, ScalerKind::ZScore).unwrap();
        for (a, b) in fitted.inputs.iter().zip(&refitted.inputs) {
            assert_eq!(a, b);
        }
        for (a, b) in fitted.targets.iter().zip(&refitted.targets) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn scaled_error_converts_back_to_original_units() {
        let s = ColumnScaler { column: "mpg".into(), kind: ScalerKind::ZScore, alpha: 0.25, beta: 1.0 };
        let (x1, x2) = (20.0, 23.0);
        let scaled = (s.apply(x1) - s.apply(x2)).abs();
        assert!((s.error_to_original(scaled) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_preserves_records() {
        let dir = std::env::temp_dir().join("gridbp_pipeline_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.csv");
        let names = (vec!["a".to_string()], vec!["t".to_string()]);
        let records = vec![(vec![1.5], vec![-2.0]), (vec![0.1], vec![3.25])];
        write_records_csv(&path, &names.0, &names.1, &records).unwrap();
        let table = load_csv(&path).unwrap();
        let ds = validate(&table, &names.0, &names.1).unwrap();
        assert_eq!(ds.records, records);
    }
}
