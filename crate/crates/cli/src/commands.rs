//! The six subcommands. Everything writes into an output directory and
//! returns a small outcome struct so tests can assert on results directly.

use crate::prepare::{prepare, Overrides, Prepared};
use crate::report::{self, EpochRow};
use crate::{numeric, usage, CliError};
use gridbp::builder::{self, RegionLayout};
use gridbp::oracle::{self, LayerWeights};
use gridbp::pipeline;
use gridbp::workbook::{dump_range, Workbook};
use gridbp::{Activation, CellAddr, RangeRef};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Per-seed training result.
pub struct SeedRun {
    pub seed: u64,
    pub rows: Vec<EpochRow>,
    pub final_weights: Vec<LayerWeights>,
}

pub struct TrainOutcome {
    pub runs: Vec<SeedRun>,
}

pub struct CrossvalOutcome {
    pub runs: Vec<SeedRun>,
    pub best_epoch: Vec<u32>,
    pub best_out: Vec<f64>,
    pub best_weights: Vec<Vec<LayerWeights>>,
}

pub struct RegressOutcome {
    pub input_names: Vec<String>,
    pub target_names: Vec<String>,
    /// One weight row per target: input coefficients then the bias.
    pub weights: Vec<Vec<f64>>,
    pub in_err: Vec<f64>,
    pub out_err: Vec<f64>,
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(usage)
}

/// Average absolute error of `weights` on a scaled record set, converted to
/// original units per target and averaged over targets. NaN when the set is
/// empty.
fn avg_error(
    prep: &Prepared,
    weights: &[LayerWeights],
    acts: &[Activation],
    records: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64, CliError> {
    if records.is_empty() {
        return Ok(f64::NAN);
    }
    let m = prep.target_names.len();
    let mut per_target = vec![0.0f64; m];
    for (inp, targ) in records {
        let trace = oracle::forward(weights, acts, inp).map_err(numeric)?;
        for t in 0..m {
            per_target[t] += (targ[t] - trace.output()[t]).abs();
        }
    }
    let mut total = 0.0;
    for (t, sum) in per_target.iter().enumerate() {
        let avg = sum / records.len() as f64;
        total += prep.error_to_original(t, avg);
    }
    let err = total / m as f64;
    if !err.is_finite() {
        return Err(CliError::Numeric(format!(
            "non-finite evaluation error ({err}); training diverged"
        )));
    }
    Ok(err)
}

fn mean_ema(wb: &Workbook, layout: &RegionLayout) -> Result<f64, CliError> {
    let sheet = wb.sheet_index("train").expect("built workbook has a train sheet");
    let m = builder::read_matrix(wb, sheet, layout.ema).map_err(numeric)?;
    let n = m.iter().map(|r| r.len()).sum::<usize>();
    Ok(m.iter().flatten().sum::<f64>() / n as f64)
}

fn check_finite(weights: &[LayerWeights]) -> Result<(), CliError> {
    for layer in weights {
        for row in layer {
            for v in row {
                if !v.is_finite() {
                    return Err(CliError::Numeric(
                        "non-finite weight encountered; training diverged".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Core training loop: init pass, then `total_passes` passes evaluated at
/// every epoch boundary (and after a trailing partial epoch). `visit` sees
/// each evaluated row together with the current region-B weights.
fn run_training(
    prep: &Prepared,
    seed: u64,
    total_passes: u32,
    mut visit: impl FnMut(&EpochRow, &[LayerWeights]),
) -> Result<SeedRun, CliError> {
    let mut spec = prep.cfg.network_spec().map_err(usage)?;
    spec.seed = seed;
    let col_names: Vec<String> = prep
        .input_names
        .iter()
        .chain(prep.target_names.iter())
        .cloned()
        .collect();
    let (mut wb, layout) =
        builder::build_workbook(&spec, &prep.in_scaled, Some(&col_names)).map_err(usage)?;
    let s = prep.in_scaled.len() as u32;

    builder::init_run(&mut wb, &layout).map_err(numeric)?;
    let mut rows = Vec::new();
    let push_row = |wb: &Workbook, epoch: u32, rows: &mut Vec<EpochRow>| -> Result<Vec<LayerWeights>, CliError> {
        let weights = builder::extract_weights(wb, &layout).map_err(numeric)?;
        check_finite(&weights)?;
        let row = EpochRow {
            epoch,
            in_err: avg_error(prep, &weights, &spec.activations, &prep.in_scaled)?,
            out_err: avg_error(prep, &weights, &spec.activations, &prep.out_scaled)?,
            ema: mean_ema(wb, &layout)?,
        };
        rows.push(row);
        Ok(weights)
    };

    let weights = push_row(&wb, 0, &mut rows)?;
    visit(rows.last().unwrap(), &weights);

    let mut done = 0u32;
    let mut epoch = 0u32;
    while done < total_passes {
        let step = s.min(total_passes - done);
        builder::train_run(&mut wb, &layout, step).map_err(numeric)?;
        done += step;
        epoch += 1;
        let weights = push_row(&wb, epoch, &mut rows)?;
        visit(rows.last().unwrap(), &weights);
    }

    let final_weights = builder::extract_weights(&wb, &layout).map_err(numeric)?;
    Ok(SeedRun { seed, rows, final_weights })
}

fn seed_dir(out_dir: &Path, seeds: &[u64], seed: u64) -> std::path::PathBuf {
    if seeds.len() == 1 {
        out_dir.to_path_buf()
    } else {
        out_dir.join(format!("seed-{seed}"))
    }
}

fn total_passes(prep: &Prepared, ov: &Overrides) -> u32 {
    let s = prep.in_scaled.len() as u32;
    ov.iterations.unwrap_or(prep.cfg.epochs * s)
}

/// `build`: writes the workbook script, a layout summary, and (when the run
/// splits or scales) the derived sample and scaler files.
pub fn cmd_build(config: &Path, ov: &Overrides, out_dir: &Path) -> Result<String, CliError> {
    let prep = prepare(config, ov)?;
    ensure_dir(out_dir)?;
    let spec = prep.cfg.network_spec().map_err(usage)?;
    let col_names: Vec<String> = prep
        .input_names
        .iter()
        .chain(prep.target_names.iter())
        .cloned()
        .collect();
    let built = builder::emit_script(&spec, &prep.in_scaled, Some(&col_names)).map_err(usage)?;
    // Prove the script loads before writing anything.
    Workbook::load_script(&built.script).map_err(usage)?;
    fs::write(out_dir.join("workbook.txt"), &built.script).map_err(usage)?;

    let summary = builder::layout_summary(&spec, &built.layout);
    fs::write(out_dir.join("layout.txt"), &summary).map_err(usage)?;

    if !prep.out_records.is_empty() {
        let names = (prep.input_names.clone(), prep.target_names.clone());
        pipeline::write_records_csv(&out_dir.join("in_sample.csv"), &names.0, &names.1, &prep.in_records)
            .map_err(usage)?;
        pipeline::write_records_csv(&out_dir.join("out_sample.csv"), &names.0, &names.1, &prep.out_records)
            .map_err(usage)?;
    }
    if let Some(scaler) = &prep.scaler {
        pipeline::write_scaler_csv(&out_dir.join("scaler.csv"), scaler).map_err(usage)?;
    }

    let mut msg = format!(
        "wrote {} ({} records in-sample, {} out, {} rejected)\n",
        out_dir.join("workbook.txt").display(),
        prep.in_records.len(),
        prep.out_records.len(),
        prep.rejected_rows
    );
    msg.push_str(&summary);
    Ok(msg)
}

/// `train`: per-seed init + epoch loop, evaluating between epochs.
pub fn cmd_train(
    config: &Path,
    ov: &Overrides,
    seeds: &[u64],
    out_dir: &Path,
) -> Result<TrainOutcome, CliError> {
    ensure_dir(out_dir)?;
    let mut runs = Vec::new();
    for &seed in seeds {
        let mut ov_seed = ov.clone();
        ov_seed.seed = Some(seed);
        let prep = prepare(config, &ov_seed)?;
        let total = total_passes(&prep, ov);
        let run = run_training(&prep, seed, total, |_, _| {})?;
        let dir = seed_dir(out_dir, seeds, seed);
        ensure_dir(&dir)?;
        report::write_report(&dir.join("report.csv"), &run.rows)?;
        report::write_weights(&dir.join("weights.csv"), &run.final_weights)?;
        runs.push(run);
    }
    if seeds.len() > 1 {
        let per_seed: Vec<Vec<EpochRow>> = runs.iter().map(|r| r.rows.clone()).collect();
        report::write_summary(&out_dir.join("summary.csv"), &per_seed)?;
    }
    Ok(TrainOutcome { runs })
}

/// `crossval`: like `train`, but snapshots weights whenever the out-sample
/// error improves; the kept-best curve is non-increasing by construction.
pub fn cmd_crossval(
    config: &Path,
    ov: &Overrides,
    seeds: &[u64],
    out_dir: &Path,
) -> Result<CrossvalOutcome, CliError> {
    ensure_dir(out_dir)?;
    let mut runs = Vec::new();
    let mut best_epoch = Vec::new();
    let mut best_out = Vec::new();
    let mut best_weights = Vec::new();
    for &seed in seeds {
        let mut ov_seed = ov.clone();
        ov_seed.seed = Some(seed);
        let prep = prepare(config, &ov_seed)?;
        if prep.out_scaled.is_empty() {
            return Err(CliError::Usage(
                "crossval needs a split; add `split = N` to the config or pass --split".into(),
            ));
        }
        let total = total_passes(&prep, ov);

        let mut best: Option<(u32, f64, Vec<LayerWeights>)> = None;
        let mut curve = String::from("epoch,out_err,best_out_err\n");
        let run = run_training(&prep, seed, total, |row, weights| {
            let better = best.as_ref().map_or(true, |(_, b, _)| row.out_err < *b);
            if better {
                best = Some((row.epoch, row.out_err, weights.to_vec()));
            }
            let _ = writeln!(curve, "{},{},{}", row.epoch, row.out_err, best.as_ref().unwrap().1);
        })?;
        let (epoch, out, weights) = best.expect("at least the post-init row exists");

        let dir = seed_dir(out_dir, seeds, seed);
        ensure_dir(&dir)?;
        report::write_report(&dir.join("report.csv"), &run.rows)?;
        fs::write(dir.join("crossval.csv"), curve).map_err(usage)?;
        report::write_weights(&dir.join("best_weights.csv"), &weights)?;

        runs.push(run);
        best_epoch.push(epoch);
        best_out.push(out);
        best_weights.push(weights);
    }
    if seeds.len() > 1 {
        let per_seed: Vec<Vec<EpochRow>> = runs.iter().map(|r| r.rows.clone()).collect();
        report::write_summary(&out_dir.join("summary.csv"), &per_seed)?;
    }
    Ok(CrossvalOutcome { runs, best_epoch, best_out, best_weights })
}

/// `regress`: closed-form least squares on the (scaled) in-sample records,
/// reported per target in original units.
pub fn cmd_regress(config: &Path, ov: &Overrides, out_dir: &Path) -> Result<RegressOutcome, CliError> {
    let prep = prepare(config, ov)?;
    ensure_dir(out_dir)?;
    let n = prep.input_names.len();
    let m = prep.target_names.len();
    let s = prep.in_scaled.len();

    let mut inputs = vec![vec![0.0f64; s]; n + 1];
    let mut targets = vec![vec![0.0f64; s]; m];
    for (c, (inp, targ)) in prep.in_scaled.iter().enumerate() {
        for (r, v) in inp.iter().enumerate() {
            inputs[r][c] = *v;
        }
        inputs[n][c] = 1.0;
        for (r, v) in targ.iter().enumerate() {
            targets[r][c] = *v;
        }
    }
    let weights = oracle::least_squares(&inputs, &targets).map_err(numeric)?;

    let predict_err = |records: &[(Vec<f64>, Vec<f64>)]| -> Vec<f64> {
        let mut errs = vec![0.0f64; m];
        if records.is_empty() {
            return vec![f64::NAN; m];
        }
        for (inp, targ) in records {
            for t in 0..m {
                let mut acc = 0.0;
                for (k, v) in inp.iter().enumerate() {
                    acc += weights[t][k] * v;
                }
                acc += weights[t][n];
                errs[t] += (targ[t] - acc).abs();
            }
        }
        (0..m)
            .map(|t| prep.error_to_original(t, errs[t] / records.len() as f64))
            .collect()
    };
    let in_err = predict_err(&prep.in_scaled);
    let out_err = predict_err(&prep.out_scaled);

    let mut rows: Vec<(String, String, f64)> = Vec::new();
    for t in 0..m {
        let target = &prep.target_names[t];
        for (k, name) in prep.input_names.iter().enumerate() {
            rows.push((target.clone(), name.clone(), weights[t][k]));
        }
        rows.push((target.clone(), "bias".into(), weights[t][n]));
        rows.push((target.clone(), "in_err".into(), in_err[t]));
        rows.push((target.clone(), "out_err".into(), out_err[t]));
    }
    report::write_named_values(&out_dir.join("regress.csv"), "target,term,value", &rows)?;

    Ok(RegressOutcome {
        input_names: prep.input_names.clone(),
        target_names: prep.target_names.clone(),
        weights,
        in_err,
        out_err,
    })
}

/// `dump`: print values or formulas of a named range (or an `A1:B2` range
/// on the first sheet) from a workbook script.
pub fn cmd_dump(workbook: &Path, what: &str, name: &str) -> Result<String, CliError> {
    let text = fs::read_to_string(workbook).map_err(usage)?;
    let wb = Workbook::load_script(&text).map_err(usage)?;
    let formulas = match what {
        "values" => false,
        "formulas" => true,
        other => return Err(CliError::Usage(format!("unknown view `{other}` (values|formulas)"))),
    };
    let (sheet, range) = match wb.resolve_name(name) {
        Some(nr) => (nr.sheet, nr.range),
        None => {
            let range = RangeRef::parse(name)
                .map_err(|_| CliError::Usage(format!("`{name}` is neither a defined name nor a range")))?;
            (0, range)
        }
    };
    Ok(dump_range(&wb, sheet, range, formulas))
}

/// `selftest`: quick built-in fixture checks, no files needed. Returns the
/// printed table; any failed line is a numerical failure.
pub fn cmd_selftest() -> Result<String, CliError> {
    let mut out = String::new();
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool, detail: String| {
        all_ok &= ok;
        let _ = writeln!(out, "{} {name}{}", if ok { "ok  " } else { "FAIL" }, if detail.is_empty() { String::new() } else { format!(" ({detail})") });
    };

    // Circular trio: entry state then one pass.
    {
        let script = "OPTION max_iterations 1\nCELL s!B2 =B2+1\nCELL s!D2 =D4+1\nCELL s!D4 =D2+1\n";
        let mut wb = Workbook::load_script(script).map_err(numeric)?;
        let at = |wb: &Workbook, a: &str| {
            wb.get(0, CellAddr::parse(a).unwrap()).as_number().unwrap_or(f64::NAN)
        };
        let entry = (at(&wb, "B2"), at(&wb, "D2"), at(&wb, "D4"));
        gridbp::engine::calculate_sheet(&mut wb, "s").map_err(numeric)?;
        let after = (at(&wb, "B2"), at(&wb, "D2"), at(&wb, "D4"));
        check(
            "circular trio entry/pass states",
            entry == (1.0, 1.0, 2.0) && after == (2.0, 3.0, 4.0),
            format!("entry {entry:?}, after one pass {after:?}"),
        );
    }

    // Self-feeding delay line along a row.
    {
        let script = "OPTION max_iterations 1\nCELL s!G20 =G20+1\nCELL s!H20 =G20\nCELL s!I20 =H20\nCELL s!F20 =G20\nCELL s!E20 =F20\nCELL s!D20 =E20\n";
        let mut wb = Workbook::load_script(script).map_err(numeric)?;
        let row = |wb: &Workbook| -> Vec<f64> {
            ["D20", "E20", "F20", "G20", "H20", "I20"]
                .iter()
                .map(|a| wb.get(0, CellAddr::parse(a).unwrap()).as_number().unwrap_or(f64::NAN))
                .collect()
        };
        gridbp::engine::calculate_sheet(&mut wb, "s").map_err(numeric)?;
        gridbp::engine::calculate_sheet(&mut wb, "s").map_err(numeric)?;
        let two = row(&wb);
        gridbp::engine::calculate_sheet(&mut wb, "s").map_err(numeric)?;
        let three = row(&wb);
        check(
            "delay line pass states",
            two == [1.0, 1.0, 2.0, 3.0, 3.0, 3.0] && three == [1.0, 2.0, 3.0, 4.0, 4.0, 4.0],
            format!("after 2 passes {two:?}, after 3 {three:?}"),
        );
    }

    // Array outer product with broadcasting.
    {
        let script = "SET s!B1 1\nSET s!C1 2\nSET s!D1 3\nSET s!A2 4\nSET s!A3 5\nARRAY s!B2:D3 =B1:D1*A2:A3\n";
        let wb = Workbook::load_script(script).map_err(numeric)?;
        let vals: Vec<f64> = ["B2", "C2", "D2", "B3", "C3", "D3"]
            .iter()
            .map(|a| wb.get(0, CellAddr::parse(a).unwrap()).as_number().unwrap_or(f64::NAN))
            .collect();
        check(
            "outer product broadcasting",
            vals == [4.0, 8.0, 12.0, 5.0, 10.0, 15.0],
            format!("{vals:?}"),
        );
    }

    // Closed-form least squares against the sheet route.
    {
        let inputs = vec![
            vec![0.0, 0.0, 1.0, 1.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0, 1.0],
        ];
        let targets = vec![vec![0.0, 1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]];
        let w = oracle::least_squares(&inputs, &targets).map_err(numeric)?;
        let expect = [[0.0, 0.0, 0.5], [0.5, 0.5, -0.25]];
        let mut worst = 0.0f64;
        for t in 0..2 {
            for k in 0..3 {
                worst = worst.max((w[t][k] - expect[t][k]).abs());
            }
        }
        check("normal-equation optimum", worst < 1e-9, format!("max dev {worst:.2e}"));
    }

    // One-pass parity between the sheet and the replay oracle.
    {
        let records = logic_records();
        let spec = gridbp::NetworkSpec::uniform(vec![2, 2, 2, 2], Activation::Tanh, 0.1, 7)
            .map_err(numeric)?;
        let (mut wb, layout) = builder::build_workbook(&spec, &records, None).map_err(numeric)?;
        builder::init_run(&mut wb, &layout).map_err(numeric)?;
        let engine_w = builder::extract_weights(&wb, &layout).map_err(numeric)?;
        let sim = oracle::simulate_vbp(&spec, &records, 1).map_err(numeric)?;
        let mut worst = 0.0f64;
        for (a, b) in engine_w.iter().flatten().flatten().zip(sim[0].w_b.iter().flatten().flatten()) {
            worst = worst.max((a - b).abs());
        }
        check("one-pass engine/replay parity", worst == 0.0, format!("max |diff| {worst:.2e}"));
    }

    // EMA cells follow the closed-form recursion.
    {
        let records = logic_records();
        let spec = gridbp::NetworkSpec::uniform(vec![2, 2, 2, 2], Activation::Tanh, 0.1, 3)
            .map_err(numeric)?;
        let (mut wb, layout) = builder::build_workbook(&spec, &records, None).map_err(numeric)?;
        let sheet = wb.sheet_index("train").unwrap();
        builder::init_run(&mut wb, &layout).map_err(numeric)?;
        let read_col = |wb: &Workbook, range: RangeRef| -> Vec<f64> {
            builder::read_matrix(wb, sheet, range).unwrap().into_iter().flatten().collect()
        };
        let mut ema = read_col(&wb, layout.ema);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            builder::train_run(&mut wb, &layout, 1).map_err(numeric)?;
            let err = read_col(&wb, layout.err);
            for (e, y) in ema.iter_mut().zip(&err) {
                *e = 0.4 * y + 0.6 * *e;
            }
            for (sheet_v, closed) in read_col(&wb, layout.ema).iter().zip(&ema) {
                worst = worst.max((sheet_v - closed).abs());
            }
        }
        check("moving-average recursion", worst < 1e-12, format!("max dev {worst:.2e}"));
    }

    // Tabulation sheet reproduces direct forward averages.
    {
        let records = logic_records();
        let spec = gridbp::NetworkSpec::uniform(vec![2, 2, 2, 2], Activation::Tanh, 0.1, 5)
            .map_err(numeric)?;
        let (mut wb, layout) = builder::build_workbook(&spec, &records, None).map_err(numeric)?;
        builder::init_run(&mut wb, &layout).map_err(numeric)?;
        builder::train_run(&mut wb, &layout, 12).map_err(numeric)?;
        let weights = builder::extract_weights(&wb, &layout).map_err(numeric)?;
        let tab = builder::gen_tabulation(&mut wb, &records, &weights, &spec.activations, None)
            .map_err(numeric)?;
        builder::run_tabulation(&mut wb, records.len() as u32).map_err(numeric)?;
        let tab_sheet = wb.sheet_index("tabulate").unwrap();
        let mut worst = 0.0f64;
        for (t, avg_cell) in tab.avg_cells.iter().enumerate() {
            let sheet_avg = wb.get(tab_sheet, *avg_cell).as_number().unwrap_or(f64::NAN);
            let mut direct = 0.0;
            for (inp, targ) in &records {
                let trace = oracle::forward(&weights, &spec.activations, inp).map_err(numeric)?;
                direct += (targ[t] - trace.output()[t]).abs();
            }
            direct /= records.len() as f64;
            worst = worst.max((sheet_avg - direct).abs());
        }
        check("tabulated error averages", worst < 1e-12, format!("max dev {worst:.2e}"));
    }

    if all_ok {
        Ok(out)
    } else {
        Err(CliError::Numeric(format!("selftest failed:\n{out}")))
    }
}

fn logic_records() -> Vec<(Vec<f64>, Vec<f64>)> {
    vec![
        (vec![0.0, 0.0], vec![0.0, 0.0]),
        (vec![0.0, 1.0], vec![1.0, 0.0]),
        (vec![1.0, 0.0], vec![1.0, 0.0]),
        (vec![1.0, 1.0], vec![0.0, 1.0]),
    ]
}
