//! Compiles a network description plus training records into a two-band
//! training sheet: a predictor band whose weight formulas are gated on a
//! run/update cell, a corrector band that always applies a gradient step,
//! circular sample counters, an error EMA monitor, and (on a second sheet)
//! an output tabulation driven by a cycling record selector.
//!
//! The sheet is emitted as script text and loaded through the normal script
//! path, so the entry order of every formula is exactly the line order
//! here, and a written script file reproduces the same workbook byte for
//! byte.

use crate::addr::{CellAddr, RangeRef, col_to_letters};
use crate::engine::{self, EngineError};
use crate::net::{Activation, NetworkSpec, Sampling, shuffle_stride};
use crate::oracle::LayerWeights;
use crate::value::Scalar;
use crate::workbook::{ScriptError, Workbook, WorkbookError};
use thiserror::Error;

/// Sheet holding the training regions.
pub const TRAIN_SHEET: &str = "train";
/// Sheet added by [`gen_tabulation`].
pub const TAB_SHEET: &str = "tabulate";

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("record {row} has {got} values but the topology needs {expected} (inputs then targets)")]
    ColumnMismatch { row: usize, expected: usize, got: usize },
    #[error("need at least 2 training records, got {0}")]
    TooFewRecords(usize),
    #[error("workbook has no sheet named {0}")]
    UnknownSheet(String),
    #[error("cell {0} holds {1}, expected a number")]
    NonNumeric(CellAddr, String),
    #[error(transparent)]
    Net(#[from] crate::net::NetError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Workbook(#[from] WorkbookError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Cell geography of one region band.
#[derive(Debug, Clone)]
pub struct BandLayout {
    /// Target column, one cell per output.
    pub targ: RangeRef,
    /// Input column cells written by the transpose (bias excluded).
    pub inp_region: RangeRef,
    /// Input column including the literal bias cell; the named range.
    pub inp_full: RangeRef,
    /// Weight blocks, index h-1.
    pub w: Vec<RangeRef>,
    /// Output array regions (bias excluded), index h-1.
    pub out_region: Vec<RangeRef>,
    /// Output named ranges (bias included except on the last layer).
    pub out_full: Vec<RangeRef>,
    /// Delta columns, index h-1.
    pub del: Vec<RangeRef>,
}

/// Cell geography of the whole training sheet.
#[derive(Debug, Clone)]
pub struct RegionLayout {
    pub iteration: CellAddr,
    pub itc: CellAddr,
    pub itcp1: CellAddr,
    pub ru: CellAddr,
    /// One learning-rate cell per layer; all entries are the same cell when
    /// every layer shares one rate.
    pub eta: Vec<CellAddr>,
    pub shared_eta: bool,
    pub tr_data: RangeRef,
    pub sample_a: RangeRef,
    pub sample_b: RangeRef,
    pub a: BandLayout,
    pub b: BandLayout,
    pub err: RangeRef,
    pub ema: RangeRef,
    pub records: usize,
}

/// Script text plus the addresses it was generated around.
pub struct BuiltSheet {
    pub script: String,
    pub layout: RegionLayout,
}

fn w_name(h: usize, region: char) -> String {
    format!("w_{h}{region}")
}

fn out_name(h: usize, q: usize, region: char) -> String {
    if h == q { format!("out{region}") } else { format!("out_{h}{region}") }
}

fn del_name(h: usize, q: usize, region: char) -> String {
    if h == q { format!("del{region}") } else { format!("del_{h}{region}") }
}

fn prev_name(h: usize, q: usize, region: char) -> String {
    if h == 1 { format!("inp{region}") } else { out_name(h - 1, q, region) }
}

fn eta_ref(h: usize, shared: bool) -> String {
    if shared { "eta".into() } else { format!("eta_{h}") }
}

fn range_text(r: RangeRef) -> String {
    if r.is_cell() { format!("{}", r.start) } else { format!("{}:{}", r.start, r.end) }
}

fn abs_text(c: CellAddr) -> String {
    format!("${}${}", col_to_letters(c.col), c.row)
}

fn num(v: f64) -> String {
    Scalar::Number(v).to_string()
}

/// Output formula for one layer: the activation applied to the layer's
/// matrix product, as a single formula with the product inlined.
fn out_formula(act: Activation, w: &str, prev: &str) -> String {
    let z = format!("MMULT({w},{prev})");
    match act {
        Activation::Tanh => format!("=TANH({z})"),
        Activation::Logistic => format!("=1/(1+EXP(-{z}))"),
        Activation::Identity => format!("={z}"),
        Activation::Relu => format!("=IF({z}>0,{z},0)"),
    }
}

/// Output-layer delta: error times the derivative factor expressed in
/// terms of the output.
fn output_delta_formula(act: Activation, targ: &str, out: &str) -> String {
    let e = format!("{targ}-{out}");
    match act {
        Activation::Tanh => format!("=({e})*(1-{out}^2)"),
        Activation::Logistic => format!("=({e})*({out}*(1-{out}))"),
        Activation::Identity => format!("={e}"),
        Activation::Relu => format!("=({e})*IF({out}>0,1,0)"),
    }
}

/// Hidden-layer delta: next layer's transposed weights folded into its
/// delta, times this layer's derivative factor. The product is one row
/// taller than the delta region (it includes the bias row); the region
/// restriction drops that row.
fn hidden_delta_formula(act: Activation, w_next: &str, del_next: &str, out: &str) -> String {
    let raw = format!("MMULT(TRANSPOSE({w_next}),{del_next})");
    match act {
        Activation::Tanh => format!("={raw}*(1-{out}^2)"),
        Activation::Logistic => format!("={raw}*({out}*(1-{out}))"),
        Activation::Identity => format!("={raw}"),
        Activation::Relu => format!("={raw}*IF({out}>0,1,0)"),
    }
}

/// Deterministic cell placement: parameters and counters in a column block
/// at the top left, training data below them, the two sample rows under
/// the data, then band A above band B. Within a band, blocks run
/// left-to-right as targ, inp, then w/out per layer, then the delta
/// columns in descending layer order so that row-major evaluation computes
/// each delta before the deltas that depend on it.
fn plan_layout(spec: &NetworkSpec, s: usize) -> RegionLayout {
    let n = spec.input_width();
    let q = spec.layer_count();
    let m_q = spec.output_width();
    let t = (n + m_q) as u32;
    let shared = spec.shared_eta().is_some();

    let iteration = CellAddr::new(2, 1);
    let itc = CellAddr::new(2, 2);
    let itcp1 = CellAddr::new(2, 3);
    let ru = CellAddr::new(2, 4);
    let eta: Vec<CellAddr> = if shared {
        vec![CellAddr::new(2, 5); q]
    } else {
        (0..q as u32).map(|i| CellAddr::new(2 + i, 5)).collect()
    };

    let r_td = 8u32;
    let tr_data =
        RangeRef::new(CellAddr::new(2, r_td), CellAddr::new(1 + t, r_td + s as u32 - 1));
    let r_sa = r_td + s as u32 + 1;
    let r_sb = r_sa + 1;
    let sample_a = RangeRef::new(CellAddr::new(2, r_sa), CellAddr::new(1 + t, r_sa));
    let sample_b = RangeRef::new(CellAddr::new(2, r_sb), CellAddr::new(1 + t, r_sb));

    let tallest = spec.topology[1..].iter().map(|&m| m as u32 + 1).max().unwrap();
    let band_h = (n as u32 + 1).max(tallest);
    let r_a = r_sb + 3;
    let r_b = r_a + band_h + 2;
    let r_e = r_b + band_h + 2;

    let c_targ = 2u32;
    let c_inp = 4u32;
    let mut c = 6u32;
    let mut c_w = Vec::with_capacity(q);
    let mut c_out = Vec::with_capacity(q);
    for h in 1..=q {
        let (_, cols) = spec.weight_shape(h);
        c_w.push(c);
        c += cols as u32 + 1;
        c_out.push(c);
        c += 2;
    }
    let mut c_del = vec![0u32; q];
    for h in (1..=q).rev() {
        c_del[h - 1] = c;
        c += 2;
    }

    let band = |top: u32| -> BandLayout {
        let targ =
            RangeRef::new(CellAddr::new(c_targ, top), CellAddr::new(c_targ, top + m_q as u32 - 1));
        let inp_region =
            RangeRef::new(CellAddr::new(c_inp, top), CellAddr::new(c_inp, top + n as u32 - 1));
        let inp_full = RangeRef::new(inp_region.start, CellAddr::new(c_inp, top + n as u32));
        let mut w = Vec::with_capacity(q);
        let mut out_region = Vec::with_capacity(q);
        let mut out_full = Vec::with_capacity(q);
        let mut del = Vec::with_capacity(q);
        for h in 1..=q {
            let (rows, cols) = spec.weight_shape(h);
            w.push(RangeRef::new(
                CellAddr::new(c_w[h - 1], top),
                CellAddr::new(c_w[h - 1] + cols as u32 - 1, top + rows as u32 - 1),
            ));
            let m = spec.topology[h] as u32;
            let region =
                RangeRef::new(CellAddr::new(c_out[h - 1], top), CellAddr::new(c_out[h - 1], top + m - 1));
            out_region.push(region);
            out_full.push(if h == q {
                region
            } else {
                RangeRef::new(region.start, CellAddr::new(c_out[h - 1], top + m))
            });
            del.push(RangeRef::new(
                CellAddr::new(c_del[h - 1], top),
                CellAddr::new(c_del[h - 1], top + m - 1),
            ));
        }
        BandLayout { targ, inp_region, inp_full, w, out_region, out_full, del }
    };

    let a = band(r_a);
    let b = band(r_b);
    let err = RangeRef::new(CellAddr::new(2, r_e), CellAddr::new(2, r_e + m_q as u32 - 1));
    let ema = RangeRef::new(CellAddr::new(4, r_e), CellAddr::new(4, r_e + m_q as u32 - 1));

    RegionLayout {
        iteration,
        itc,
        itcp1,
        ru,
        eta,
        shared_eta: shared,
        tr_data,
        sample_a,
        sample_b,
        a,
        b,
        err,
        ema,
        records: s,
    }
}

struct ScriptWriter {
    lines: Vec<String>,
}

impl ScriptWriter {
    fn new() -> Self {
        ScriptWriter { lines: Vec::new() }
    }
    fn raw(&mut self, line: String) {
        self.lines.push(line);
    }
    fn name(&mut self, name: &str, range: RangeRef) {
        self.raw(format!("NAME {name} {TRAIN_SHEET}!{}", range_text(range)));
    }
    fn set(&mut self, addr: CellAddr, v: f64) {
        self.raw(format!("SET {TRAIN_SHEET}!{addr} {}", num(v)));
    }
    fn label(&mut self, addr: CellAddr, text: &str) {
        self.raw(format!("SET {TRAIN_SHEET}!{addr} \"{text}\""));
    }
    fn cell(&mut self, addr: CellAddr, formula: &str) {
        self.raw(format!("CELL {TRAIN_SHEET}!{addr} {formula}"));
    }
    fn array(&mut self, range: RangeRef, formula: &str) {
        self.raw(format!("ARRAY {TRAIN_SHEET}!{} {formula}", range_text(range)));
    }
    fn finish(self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

/// Generates the training-sheet script for a network over the given
/// `(inputs, targets)` records. Column names, when given, label the data
/// block (inputs first, then targets).
pub fn emit_script(
    spec: &NetworkSpec,
    records: &[(Vec<f64>, Vec<f64>)],
    col_names: Option<&[String]>,
) -> Result<BuiltSheet, BuildError> {
    spec.validate()?;
    let n = spec.input_width();
    let q = spec.layer_count();
    let m_q = spec.output_width();
    let s = records.len();
    if s < 2 {
        return Err(BuildError::TooFewRecords(s));
    }
    for (i, (inp, targ)) in records.iter().enumerate() {
        if inp.len() != n || targ.len() != m_q {
            return Err(BuildError::ColumnMismatch {
                row: i,
                expected: n + m_q,
                got: inp.len() + targ.len(),
            });
        }
    }

    let lay = plan_layout(spec, s);
    let shared = lay.shared_eta;
    let sf = s as f64;
    let alpha = 2.0 / (sf + 1.0);
    let beta = 1.0 - alpha;
    let mut w = ScriptWriter::new();

    w.raw(format!(
        "# two-band training sheet: topology {}, {} records",
        NetworkSpec::format_topology(&spec.topology),
        s
    ));
    w.raw(format!("OPTION rng_seed {}", spec.seed));
    w.raw("OPTION max_iterations 1".to_string());

    // Every name up front: formulas reference blocks in both bands before
    // those blocks are entered.
    w.name("iteration", RangeRef::cell(lay.iteration));
    w.name("itc", RangeRef::cell(lay.itc));
    w.name("itcp1", RangeRef::cell(lay.itcp1));
    w.name("ru", RangeRef::cell(lay.ru));
    if shared {
        w.name("eta", RangeRef::cell(lay.eta[0]));
    } else {
        for h in 1..=q {
            w.name(&format!("eta_{h}"), RangeRef::cell(lay.eta[h - 1]));
        }
    }
    w.name("TrData", lay.tr_data);
    for (region, band) in [('A', &lay.a), ('B', &lay.b)] {
        w.name(&format!("targ{region}"), band.targ);
        w.name(&format!("inp{region}"), band.inp_full);
        for h in 1..=q {
            w.name(&w_name(h, region), band.w[h - 1]);
            w.name(&out_name(h, q, region), band.out_full[h - 1]);
            w.name(&del_name(h, q, region), band.del[h - 1]);
        }
    }

    // (a) Training data, then the iteration and sample counters.
    w.label(CellAddr::new(1, lay.iteration.row), "iteration");
    w.label(CellAddr::new(1, lay.itc.row), "itc");
    w.label(CellAddr::new(1, lay.itcp1.row), "itcp1");
    w.label(CellAddr::new(1, lay.ru.row), "ru");
    w.label(CellAddr::new(1, lay.eta[0].row), "eta");
    w.label(CellAddr::new(1, lay.tr_data.start.row), "TrData");
    let hdr_row = lay.tr_data.start.row - 1;
    for k in 0..(n + m_q) {
        let name = match col_names {
            Some(names) => names[k].clone(),
            None if k < n => format!("inp{}", k + 1),
            None => format!("targ{}", k + 1 - n),
        };
        w.label(CellAddr::new(lay.tr_data.start.col + k as u32, hdr_row), &name);
    }
    for (r, (inp, targ)) in records.iter().enumerate() {
        for (k, v) in inp.iter().chain(targ).enumerate() {
            w.set(
                CellAddr::new(lay.tr_data.start.col + k as u32, lay.tr_data.start.row + r as u32),
                *v,
            );
        }
    }
    w.cell(lay.iteration, &format!("={}+1", lay.iteration));
    match spec.sampling {
        Sampling::Sequential => {
            w.cell(lay.itc, &format!("=MOD(itc+1,{})", num(sf)));
            // Preseeding makes the first evaluation land on 2, keeping
            // itcp1 = itc+1 from the very first state onward.
            w.set(lay.itcp1, 1.0);
            w.cell(lay.itcp1, &format!("=MOD(itcp1+1,{})", num(sf)));
        }
        Sampling::Shuffled => {
            let stride = shuffle_stride(s);
            w.cell(lay.itc, &format!("=MOD(itc+{stride},{})", num(sf)));
            w.cell(lay.itcp1, &format!("=MOD(itc+1,{})", num(sf)));
        }
        Sampling::Random => {
            w.cell(lay.itc, &format!("=MOD(itc+RANDBETWEEN(0,{}),{})", num(sf - 1.0), num(sf)));
            w.cell(lay.itcp1, &format!("=MOD(itc+1,{})", num(sf)));
        }
    }

    // (b) Sample rows.
    w.label(CellAddr::new(1, lay.sample_a.start.row), "sample A");
    w.label(CellAddr::new(1, lay.sample_b.start.row), "sample B");
    w.array(lay.sample_a, "=OFFSET(TrData,itc,)");
    w.array(lay.sample_b, "=OFFSET(TrData,itcp1,)");

    // (c) Band A, (d) band B.
    for (region, band, sample) in [('A', &lay.a, lay.sample_a), ('B', &lay.b, lay.sample_b)] {
        let top = band.targ.start.row;
        let hdr = top - 1;
        w.label(CellAddr::new(1, hdr), &format!("Region {region}"));
        w.label(CellAddr::new(band.targ.start.col, hdr), &format!("targ{region}"));
        w.label(CellAddr::new(band.inp_full.start.col, hdr), &format!("inp{region}"));
        for h in 1..=q {
            w.label(CellAddr::new(band.w[h - 1].start.col, hdr), &w_name(h, region));
            w.label(CellAddr::new(band.out_full[h - 1].start.col, hdr), &out_name(h, q, region));
            w.label(CellAddr::new(band.del[h - 1].start.col, hdr), &del_name(h, q, region));
        }

        let inp_cells = RangeRef::new(
            sample.start,
            CellAddr::new(sample.start.col + n as u32 - 1, sample.start.row),
        );
        let targ_cells = RangeRef::new(
            CellAddr::new(sample.start.col + n as u32, sample.start.row),
            sample.end,
        );
        w.array(band.targ, &format!("=TRANSPOSE({})", range_text(targ_cells)));
        w.array(band.inp_region, &format!("=TRANSPOSE({})", range_text(inp_cells)));
        w.set(band.inp_full.end, 1.0);

        for h in 1..=q {
            let eta = eta_ref(h, shared);
            let formula = if region == 'A' {
                let draw = match spec.init {
                    crate::net::WeightInit::Uniform01 => "RAND()".to_string(),
                    crate::net::WeightInit::Symmetric => "2*RAND()-1".to_string(),
                };
                format!(
                    "=IF(ru=0,{draw},{wb}+{eta}*(TRANSPOSE({prev})*{del}))",
                    wb = w_name(h, 'B'),
                    prev = prev_name(h, q, 'B'),
                    del = del_name(h, q, 'B'),
                )
            } else {
                format!(
                    "={wa}+{eta}*(TRANSPOSE({prev})*{del})",
                    wa = w_name(h, 'A'),
                    prev = prev_name(h, q, 'A'),
                    del = del_name(h, q, 'A'),
                )
            };
            w.array(band.w[h - 1], &formula);
            w.array(
                band.out_region[h - 1],
                &out_formula(spec.activations[h - 1], &w_name(h, region), &prev_name(h, q, region)),
            );
            if h < q {
                w.set(band.out_full[h - 1].end, 1.0);
            }
        }
        for h in (1..=q).rev() {
            let formula = if h == q {
                output_delta_formula(
                    spec.activations[h - 1],
                    &format!("targ{region}"),
                    &out_name(q, q, region),
                )
            } else {
                hidden_delta_formula(
                    spec.activations[h - 1],
                    &w_name(h + 1, region),
                    &del_name(h + 1, q, region),
                    &out_name(h, q, region),
                )
            };
            w.array(band.del[h - 1], &formula);
        }
    }

    // (e) EMA monitor over band B's absolute errors.
    let hdr = lay.err.start.row - 1;
    w.label(CellAddr::new(1, hdr), "error monitor");
    w.label(CellAddr::new(lay.err.start.col, hdr), "err");
    w.label(CellAddr::new(lay.ema.start.col, hdr), "EMA");
    w.array(lay.err, "=ABS(targB-outB)");
    let err_rng = range_text(lay.err);
    let ema_rng = range_text(lay.ema);
    w.array(
        lay.ema,
        &format!(
            "=IF({ema_rng}=0,{err_rng},{}*{err_rng}+{}*{ema_rng})",
            num(alpha),
            num(beta)
        ),
    );

    // (f) Run/update gate and learning rates, entered last: every region-A
    // weight block above therefore drew once at entry against a blank gate.
    w.set(lay.ru, 1.0);
    if shared {
        w.set(lay.eta[0], spec.etas[0]);
    } else {
        for h in 1..=q {
            w.set(lay.eta[h - 1], spec.etas[h - 1]);
        }
    }

    Ok(BuiltSheet { script: w.finish(), layout: lay })
}

/// Builds the workbook by loading the emitted script.
pub fn build_workbook(
    spec: &NetworkSpec,
    records: &[(Vec<f64>, Vec<f64>)],
    col_names: Option<&[String]>,
) -> Result<(Workbook, RegionLayout), BuildError> {
    let built = emit_script(spec, records, col_names)?;
    let wb = Workbook::load_script(&built.script)?;
    Ok((wb, built.layout))
}

fn train_sheet(wb: &Workbook) -> Result<usize, BuildError> {
    wb.sheet_index(TRAIN_SHEET).ok_or_else(|| BuildError::UnknownSheet(TRAIN_SHEET.into()))
}

/// Initialization run: gate 0, one pass. Region A's weights come out as
/// fresh PRNG draws; region B's sit one gradient step beyond them (its
/// update formulas have no gate).
pub fn init_run(wb: &mut Workbook, layout: &RegionLayout) -> Result<(), BuildError> {
    let sheet = train_sheet(wb)?;
    wb.set_value(sheet, layout.ru, Scalar::Number(0.0))?;
    wb.settings.max_iterations = 1;
    engine::calculate_sheet(wb, TRAIN_SHEET)?;
    Ok(())
}

/// Training run: gate 1, `iterations` passes in one calculation.
pub fn train_run(
    wb: &mut Workbook,
    layout: &RegionLayout,
    iterations: u32,
) -> Result<(), BuildError> {
    if iterations == 0 {
        return Ok(());
    }
    let sheet = train_sheet(wb)?;
    wb.set_value(sheet, layout.ru, Scalar::Number(1.0))?;
    wb.settings.max_iterations = iterations;
    engine::calculate_sheet(wb, TRAIN_SHEET)?;
    Ok(())
}

/// Reads a rectangular range as numbers, failing on any non-numeric cell.
pub fn read_matrix(
    wb: &Workbook,
    sheet: usize,
    range: RangeRef,
) -> Result<Vec<Vec<f64>>, BuildError> {
    let mut rows = Vec::with_capacity(range.rows() as usize);
    for r in range.start.row..=range.end.row {
        let mut row = Vec::with_capacity(range.cols() as usize);
        for c in range.start.col..=range.end.col {
            let addr = CellAddr::new(c, r);
            match wb.get(sheet, addr) {
                Scalar::Number(v) => row.push(*v),
                other => return Err(BuildError::NonNumeric(addr, other.to_string())),
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Current corrector-band weights, one matrix per layer.
pub fn extract_weights(
    wb: &Workbook,
    layout: &RegionLayout,
) -> Result<Vec<LayerWeights>, BuildError> {
    let sheet = train_sheet(wb)?;
    layout.b.w.iter().map(|r| read_matrix(wb, sheet, *r)).collect()
}

/// Cell geography of the tabulation sheet.
#[derive(Debug, Clone)]
pub struct TabLayout {
    pub driver: CellAddr,
    pub input_row: RangeRef,
    /// Final output cells of the frozen forward band, one per output.
    pub out_cells: Vec<CellAddr>,
    pub labels: RangeRef,
    pub out_cols: Vec<RangeRef>,
    pub targ_cols: Vec<RangeRef>,
    pub err_cols: Vec<RangeRef>,
    pub avg_cells: Vec<CellAddr>,
}

/// Adds a tabulation sheet: frozen weights, a record selector that cycles
/// `MOD(prev+1,S)`, a forward band recomputed per pass, and an S-row table
/// whose output columns latch the row matching the current record, plus
/// absolute-error columns and their averages. After S passes every row has
/// been filled once.
pub fn gen_tabulation(
    wb: &mut Workbook,
    records: &[(Vec<f64>, Vec<f64>)],
    weights: &[LayerWeights],
    activations: &[Activation],
    col_names: Option<&[String]>,
) -> Result<TabLayout, BuildError> {
    let s = records.len();
    if s < 2 {
        return Err(BuildError::TooFewRecords(s));
    }
    let q = weights.len();
    let n = weights[0][0].len() - 1;
    let m_q = weights[q - 1].len();
    let t = (n + m_q) as u32;
    for (i, (inp, targ)) in records.iter().enumerate() {
        if inp.len() != n || targ.len() != m_q {
            return Err(BuildError::ColumnMismatch {
                row: i,
                expected: n + m_q,
                got: inp.len() + targ.len(),
            });
        }
    }

    let sheet = wb.add_sheet(TAB_SHEET)?;
    let label = |wb: &mut Workbook, addr, text: &str| {
        wb.set_value(sheet, addr, Scalar::Text(text.to_string()))
    };

    // Sample block with headers.
    label(wb, CellAddr::new(1, 1), "Samples")?;
    for k in 0..(n + m_q) {
        let name = match col_names {
            Some(names) => names[k].clone(),
            None if k < n => format!("inp{}", k + 1),
            None => format!("targ{}", k + 1 - n),
        };
        label(wb, CellAddr::new(2 + k as u32, 1), &name)?;
    }
    let samples = RangeRef::new(CellAddr::new(2, 2), CellAddr::new(1 + t, 1 + s as u32));
    for (r, (inp, targ)) in records.iter().enumerate() {
        for (k, v) in inp.iter().chain(targ).enumerate() {
            wb.set_value(
                sheet,
                CellAddr::new(2 + k as u32, 2 + r as u32),
                Scalar::Number(*v),
            )?;
        }
    }
    wb.define_name("Samples", sheet, samples)?;

    // Record selector and the row it pulls from the sample block.
    let r_drv = 3 + s as u32;
    let driver = CellAddr::new(2, r_drv);
    let input_row =
        RangeRef::new(CellAddr::new(3, r_drv), CellAddr::new(2 + t, r_drv));
    label(wb, CellAddr::new(1, r_drv), "record")?;
    wb.enter_cell_formula(sheet, driver, &format!("=MOD({driver}+1,{})", num(s as f64)))?;
    wb.enter_array_formula(sheet, input_row, &format!("=OFFSET(Samples,{driver},)"))?;

    // Frozen forward band.
    let tallest = weights.iter().map(|w| w.len() as u32 + 1).max().unwrap();
    let band_h = (n as u32 + 1).max(tallest);
    let r_f = r_drv + 3;
    let hdr = r_f - 1;
    label(wb, CellAddr::new(2, hdr), "targ")?;
    label(wb, CellAddr::new(4, hdr), "inp")?;
    let targ_cells = RangeRef::new(
        CellAddr::new(input_row.start.col + n as u32, r_drv),
        input_row.end,
    );
    let inp_cells = RangeRef::new(
        input_row.start,
        CellAddr::new(input_row.start.col + n as u32 - 1, r_drv),
    );
    let targ_col = RangeRef::new(CellAddr::new(2, r_f), CellAddr::new(2, r_f + m_q as u32 - 1));
    wb.enter_array_formula(sheet, targ_col, &format!("=TRANSPOSE({})", range_text(targ_cells)))?;
    let inp_region = RangeRef::new(CellAddr::new(4, r_f), CellAddr::new(4, r_f + n as u32 - 1));
    wb.enter_array_formula(sheet, inp_region, &format!("=TRANSPOSE({})", range_text(inp_cells)))?;
    wb.set_value(sheet, CellAddr::new(4, r_f + n as u32), Scalar::Number(1.0))?;
    let mut prev_full = RangeRef::new(inp_region.start, CellAddr::new(4, r_f + n as u32));

    let mut c = 6u32;
    let mut out_cells = Vec::new();
    for (l, w) in weights.iter().enumerate() {
        let rows = w.len() as u32;
        let cols = w[0].len() as u32;
        label(wb, CellAddr::new(c, hdr), &format!("w_{}", l + 1))?;
        let w_rng = RangeRef::new(CellAddr::new(c, r_f), CellAddr::new(c + cols - 1, r_f + rows - 1));
        for (i, row) in w.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                wb.set_value(
                    sheet,
                    CellAddr::new(c + j as u32, r_f + i as u32),
                    Scalar::Number(*v),
                )?;
            }
        }
        c += cols + 1;
        let is_last = l + 1 == q;
        label(wb, CellAddr::new(c, hdr), if is_last { "out" } else { "out_" })?;
        let out_region = RangeRef::new(CellAddr::new(c, r_f), CellAddr::new(c, r_f + rows - 1));
        wb.enter_array_formula(
            sheet,
            out_region,
            &out_formula(activations[l], &range_text(w_rng), &range_text(prev_full)),
        )?;
        if is_last {
            out_cells = (0..rows).map(|i| CellAddr::new(c, r_f + i)).collect();
        } else {
            wb.set_value(sheet, CellAddr::new(c, r_f + rows), Scalar::Number(1.0))?;
            prev_full = RangeRef::new(out_region.start, CellAddr::new(c, r_f + rows));
        }
        c += 2;
    }

    // Tabulation table: labels, latched outputs, target literals, absolute
    // errors, and an average row.
    let r_t = r_f + band_h + 2;
    label(wb, CellAddr::new(1, r_t - 1), "tabulate")?;
    label(wb, CellAddr::new(2, r_t - 1), "record#")?;
    let labels = RangeRef::new(CellAddr::new(2, r_t), CellAddr::new(2, r_t + s as u32 - 1));
    for r in 0..s {
        wb.set_value(sheet, CellAddr::new(2, r_t + r as u32), Scalar::Number(r as f64))?;
    }
    let col_of = |group: u32, tgt: u32| 3 + group * m_q as u32 + tgt;
    let mut out_cols = Vec::new();
    let mut targ_cols = Vec::new();
    let mut err_cols = Vec::new();
    let mut avg_cells = Vec::new();
    for tgt in 0..m_q as u32 {
        let col = |g| {
            RangeRef::new(
                CellAddr::new(col_of(g, tgt), r_t),
                CellAddr::new(col_of(g, tgt), r_t + s as u32 - 1),
            )
        };
        let (o, tc, e) = (col(0), col(1), col(2));
        label(wb, CellAddr::new(o.start.col, r_t - 1), &format!("out{}", tgt + 1))?;
        label(wb, CellAddr::new(tc.start.col, r_t - 1), &format!("targ{}", tgt + 1))?;
        label(wb, CellAddr::new(e.start.col, r_t - 1), &format!("err{}", tgt + 1))?;
        wb.enter_array_formula(
            sheet,
            o,
            &format!(
                "=IF({}={},{},{})",
                abs_text(driver),
                range_text(labels),
                abs_text(out_cells[tgt as usize]),
                range_text(o)
            ),
        )?;
        for (r, (_, targ)) in records.iter().enumerate() {
            wb.set_value(
                sheet,
                CellAddr::new(tc.start.col, r_t + r as u32),
                Scalar::Number(targ[tgt as usize]),
            )?;
        }
        wb.enter_array_formula(
            sheet,
            e,
            &format!("=ABS({}-{})", range_text(tc), range_text(o)),
        )?;
        let avg = CellAddr::new(e.start.col, r_t + s as u32);
        wb.enter_cell_formula(sheet, avg, &format!("=AVERAGE({})", range_text(e)))?;
        out_cols.push(o);
        targ_cols.push(tc);
        err_cols.push(e);
        avg_cells.push(avg);
    }
    label(wb, CellAddr::new(2, r_t + s as u32), "average")?;

    Ok(TabLayout {
        driver,
        input_row,
        out_cells,
        labels,
        out_cols,
        targ_cols,
        err_cols,
        avg_cells,
    })
}

/// Runs `passes` recalculations of the tabulation sheet.
pub fn run_tabulation(wb: &mut Workbook, passes: u32) -> Result<(), BuildError> {
    wb.settings.max_iterations = passes;
    engine::calculate_sheet(wb, TAB_SHEET)?;
    Ok(())
}

/// One-paragraph human summary of a built sheet, printed by the CLI.
pub fn layout_summary(spec: &NetworkSpec, layout: &RegionLayout) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "topology {} ({} parameters), {} records\n",
        NetworkSpec::format_topology(&spec.topology),
        spec.param_count(),
        layout.records
    ));
    s.push_str(&format!(
        "counters: iteration {} itc {} itcp1 {} ru {} eta {}\n",
        layout.iteration, layout.itc, layout.itcp1, layout.ru, layout.eta[0]
    ));
    s.push_str(&format!("data {}\n", range_text(layout.tr_data)));
    for (region, band) in [('A', &layout.a), ('B', &layout.b)] {
        s.push_str(&format!(
            "band {region}: targ {} inp {}",
            range_text(band.targ),
            range_text(band.inp_full)
        ));
        for h in 1..=band.w.len() {
            s.push_str(&format!(
                " w_{h} {} out_{h} {} del_{h} {}",
                range_text(band.w[h - 1]),
                range_text(band.out_full[h - 1]),
                range_text(band.del[h - 1])
            ));
        }
        s.push('\n');
    }
    s.push_str(&format!(
        "monitor: err {} ema {}\n",
        range_text(layout.err),
        range_text(layout.ema)
    ));
    s
}
