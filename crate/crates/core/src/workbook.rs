//! Sparse sheets, array-formula groups, named ranges, and the line-oriented
//! workbook text format.
//!
//! Entering a formula (via [`Workbook::enter_cell_formula`],
//! [`Workbook::enter_array_formula`], or a `CELL`/`ARRAY` script line)
//! evaluates it exactly once, immediately, against the values the workbook
//! holds at that moment, and splices the result into the grid. Script lines
//! execute in file order, so file order *is* entry order — circular sheets
//! depend on it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::addr::{AddrError, CellAddr, RangeRef};
use crate::engine;
use crate::formula::{self, Expr, FormulaError};
use crate::rng::SplitMix64;
use crate::value::{ErrorCode, Scalar};

/// Calculation settings. The engine is always in manual mode: nothing
/// recalculates until [`engine::calculate_sheet`] runs, and each run makes
/// exactly `max_iterations` passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalcSettings {
    pub max_iterations: u32,
    pub rng_seed: u64,
}

impl Default for CalcSettings {
    fn default() -> Self {
        CalcSettings { max_iterations: 1, rng_seed: 0 }
    }
}

/// One grid cell: its current value and, if it was entered as a formula,
/// the formula. Cells covered by an array group hold values only; the
/// shared formula lives on the group.
#[derive(Debug, Clone)]
pub struct Cell {
    pub value: Scalar,
    pub formula: Option<Arc<Expr>>,
}

/// A rectangular region sharing one array formula, anchored at its
/// top-left cell.
#[derive(Debug, Clone)]
pub struct ArrayGroup {
    pub range: RangeRef,
    pub formula: Arc<Expr>,
}

#[derive(Debug, Default)]
pub struct Sheet {
    pub name: String,
    /// Keyed `(row, col)` so natural iteration order is row-major.
    cells: BTreeMap<(u32, u32), Cell>,
    groups: Vec<ArrayGroup>,
    /// Cell → index into `groups`.
    membership: BTreeMap<(u32, u32), usize>,
}

impl Sheet {
    pub fn get(&self, addr: CellAddr) -> &Scalar {
        static BLANK: Scalar = Scalar::Blank;
        self.cells.get(&(addr.row, addr.col)).map(|c| &c.value).unwrap_or(&BLANK)
    }

    pub fn cell(&self, addr: CellAddr) -> Option<&Cell> {
        self.cells.get(&(addr.row, addr.col))
    }

    pub fn group_at(&self, addr: CellAddr) -> Option<&ArrayGroup> {
        self.membership.get(&(addr.row, addr.col)).map(|&i| &self.groups[i])
    }

    pub fn groups(&self) -> &[ArrayGroup] {
        &self.groups
    }

    /// `(row, col)` keys of all occupied cells, row-major.
    pub(crate) fn occupied(&self) -> impl Iterator<Item = (&(u32, u32), &Cell)> {
        self.cells.iter()
    }

    pub(crate) fn membership_of(&self, addr: CellAddr) -> Option<usize> {
        self.membership.get(&(addr.row, addr.col)).copied()
    }

    /// Writes a value while keeping any formula — the splice path used by
    /// evaluation, as opposed to user edits.
    pub(crate) fn write_value(&mut self, addr: CellAddr, v: Scalar) {
        self.cells
            .entry((addr.row, addr.col))
            .or_insert_with(|| Cell { value: Scalar::Blank, formula: None })
            .value = v;
    }
}

/// A workbook-scoped name bound to a rectangle on one sheet.
#[derive(Debug, Clone)]
pub struct NamedRange {
    pub name: String,
    pub sheet: usize,
    pub range: RangeRef,
}

#[derive(Debug, Error)]
pub enum WorkbookError {
    #[error("sheet `{0}` already exists")]
    DuplicateSheet(String),
    #[error("no sheet named `{0}`")]
    UnknownSheet(String),
    #[error("name `{0}` is already defined")]
    DuplicateName(String),
    #[error("`{0}` cannot be a name: it parses as a cell address")]
    NameIsCellLike(String),
    #[error("unknown name `{0}` in formula")]
    UnknownName(String),
    #[error("cell {0} belongs to an array group and cannot be edited individually")]
    CellInArrayGroup(CellAddr),
    #[error("region {0} overlaps an existing array group")]
    GroupOverlap(RangeRef),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Addr(#[from] AddrError),
}

#[derive(Debug)]
pub struct Workbook {
    sheets: Vec<Sheet>,
    /// Keyed by upper-cased name for case-insensitive resolution.
    names: BTreeMap<String, NamedRange>,
    pub settings: CalcSettings,
    pub rng: SplitMix64,
}

impl Default for Workbook {
    fn default() -> Self {
        Self::new()
    }
}

impl Workbook {
    pub fn new() -> Self {
        let settings = CalcSettings::default();
        Workbook { sheets: Vec::new(), names: BTreeMap::new(), settings, rng: SplitMix64::new(settings.rng_seed) }
    }

    pub fn add_sheet(&mut self, name: &str) -> Result<usize, WorkbookError> {
        if self.sheet_index(name).is_some() {
            return Err(WorkbookError::DuplicateSheet(name.to_string()));
        }
        self.sheets.push(Sheet { name: name.to_string(), ..Sheet::default() });
        Ok(self.sheets.len() - 1)
    }

    fn sheet_index_or_add(&mut self, name: &str) -> usize {
        match self.sheet_index(name) {
            Some(i) => i,
            None => self.add_sheet(name).expect("checked absent"),
        }
    }

    pub fn sheet_index(&self, name: &str) -> Option<usize> {
        self.sheets.iter().position(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn sheet(&self, idx: usize) -> &Sheet {
        &self.sheets[idx]
    }

    pub(crate) fn sheet_mut(&mut self, idx: usize) -> &mut Sheet {
        &mut self.sheets[idx]
    }

    pub fn sheet_count(&self) -> usize {
        self.sheets.len()
    }

    pub fn get(&self, sheet: usize, addr: CellAddr) -> &Scalar {
        self.sheets[sheet].get(addr)
    }

    /// Reads a range as a dense array of cloned scalars (blanks included).
    pub fn read_range(&self, sheet: usize, range: RangeRef) -> crate::value::Array {
        let data = range.iter_row_major().map(|a| self.get(sheet, a).clone()).collect();
        crate::value::Array::new(range.rows() as usize, range.cols() as usize, data)
    }

    /// Types a literal into a cell, replacing any formula there.
    pub fn set_value(&mut self, sheet: usize, addr: CellAddr, v: Scalar) -> Result<(), WorkbookError> {
        if self.sheets[sheet].membership_of(addr).is_some() {
            return Err(WorkbookError::CellInArrayGroup(addr));
        }
        self.sheets[sheet].cells.insert((addr.row, addr.col), Cell { value: v, formula: None });
        Ok(())
    }

    pub fn define_name(&mut self, name: &str, sheet: usize, range: RangeRef) -> Result<(), WorkbookError> {
        if CellAddr::parse(name).is_ok() {
            return Err(WorkbookError::NameIsCellLike(name.to_string()));
        }
        let key = name.to_ascii_uppercase();
        if self.names.contains_key(&key) {
            return Err(WorkbookError::DuplicateName(name.to_string()));
        }
        self.names.insert(key, NamedRange { name: name.to_string(), sheet, range });
        Ok(())
    }

    pub fn resolve_name(&self, name: &str) -> Option<&NamedRange> {
        self.names.get(&name.to_ascii_uppercase())
    }

    pub fn names(&self) -> impl Iterator<Item = &NamedRange> {
        self.names.values()
    }

    /// Enters a formula into a single cell: the formula is bound (every
    /// name it mentions must exist), stored, and evaluated once right now.
    pub fn enter_cell_formula(&mut self, sheet: usize, addr: CellAddr, text: &str) -> Result<(), WorkbookError> {
        if self.sheets[sheet].membership_of(addr).is_some() {
            return Err(WorkbookError::CellInArrayGroup(addr));
        }
        let expr = Arc::new(formula::parse_formula(text)?);
        self.check_names(&expr)?;
        // Bind the formula but keep the cell's current value: entry
        // evaluation runs against the pre-entry state, so a self-reference
        // reads whatever the cell held before (a preseeded constant, say).
        self.sheets[sheet]
            .cells
            .entry((addr.row, addr.col))
            .or_insert_with(|| Cell { value: Scalar::Blank, formula: None })
            .formula = Some(expr.clone());
        engine::entry_evaluate(self, sheet, RangeRef::cell(addr), &expr);
        Ok(())
    }

    /// Enters one shared formula over a rectangular region. The region may
    /// not overlap another array group; plain cells under it are replaced.
    pub fn enter_array_formula(&mut self, sheet: usize, range: RangeRef, text: &str) -> Result<(), WorkbookError> {
        if range.iter_row_major().any(|a| self.sheets[sheet].membership_of(a).is_some()) {
            return Err(WorkbookError::GroupOverlap(range));
        }
        let expr = Arc::new(formula::parse_formula(text)?);
        self.check_names(&expr)?;
        // Evaluate against the pre-entry state first (covered cells keep
        // their old values during the evaluation), then record the group.
        engine::entry_evaluate(self, sheet, range, &expr);
        let sheet_ref = &mut self.sheets[sheet];
        let idx = sheet_ref.groups.len();
        sheet_ref.groups.push(ArrayGroup { range, formula: expr });
        for a in range.iter_row_major() {
            let cell = sheet_ref
                .cells
                .entry((a.row, a.col))
                .or_insert_with(|| Cell { value: Scalar::Blank, formula: None });
            cell.formula = None;
            sheet_ref.membership.insert((a.row, a.col), idx);
        }
        Ok(())
    }

    /// The canonical formula text governing a cell (its own, or its array
    /// group's), if any.
    pub fn formula_text_at(&self, sheet: usize, addr: CellAddr) -> Option<String> {
        let s = &self.sheets[sheet];
        if let Some(g) = s.group_at(addr) {
            return Some(formula::format_formula(&g.formula));
        }
        s.cell(addr).and_then(|c| c.formula.as_ref()).map(|f| formula::format_formula(f))
    }

    fn check_names(&self, e: &Expr) -> Result<(), WorkbookError> {
        match e {
            Expr::Name(n) => {
                if self.resolve_name(n).is_none() {
                    return Err(WorkbookError::UnknownName(n.clone()));
                }
            }
            Expr::Unary(_, x) => self.check_names(x)?,
            Expr::Binary(_, l, r) => {
                self.check_names(l)?;
                self.check_names(r)?;
            }
            Expr::Call(_, args) => {
                for a in args {
                    if let formula::Arg::Expr(x) = a {
                        self.check_names(x)?;
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Re-seeds the random stream. Exposed for script loading and for
    /// running one built workbook under several seeds.
    pub fn reseed(&mut self, seed: u64) {
        self.settings.rng_seed = seed;
        self.rng = SplitMix64::new(seed);
    }
}

// ---------------------------------------------------------------------------
// Workbook text format
// ---------------------------------------------------------------------------

/// Errors from [`Workbook::load_script`], tagged with a 1-based line number.
#[derive(Debug, Error)]
#[error("line {line}: {kind}")]
pub struct ScriptError {
    pub line: usize,
    pub kind: ScriptErrorKind,
}

#[derive(Debug, Error)]
pub enum ScriptErrorKind {
    #[error("unknown directive `{0}` (expected OPTION, NAME, SET, CELL, or ARRAY)")]
    UnknownDirective(String),
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("unknown option `{0}`")]
    UnknownOption(String),
    #[error("invalid option value: {0}")]
    BadOptionValue(String),
    #[error("reference must be written `<sheet>!<range>`, got `{0}`")]
    MissingSheet(String),
    #[error("invalid literal `{0}`")]
    BadLiteral(String),
    #[error("formula must start with `=`")]
    MissingEquals,
    #[error(transparent)]
    Addr(#[from] AddrError),
    #[error(transparent)]
    Workbook(#[from] WorkbookError),
}

impl Workbook {
    /// Builds a workbook by executing script lines in order.
    ///
    /// ```text
    /// # comment
    /// OPTION max_iterations 1
    /// OPTION rng_seed 12345
    /// NAME itc sheet1!B3
    /// SET sheet1!B6 0.1
    /// CELL sheet1!B2 =B2+1
    /// ARRAY sheet1!D21:G21 =OFFSET(TrData,itc,)
    /// ```
    pub fn load_script(text: &str) -> Result<Workbook, ScriptError> {
        let mut wb = Workbook::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            wb.execute_line(raw).map_err(|kind| ScriptError { line: line_no, kind })?;
        }
        Ok(wb)
    }

    fn execute_line(&mut self, raw: &str) -> Result<(), ScriptErrorKind> {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return Ok(());
        }
        let (directive, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| ScriptErrorKind::Malformed(line.to_string()))?;
        let rest = rest.trim();
        match directive {
            "OPTION" => {
                let (key, value) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| ScriptErrorKind::Malformed(rest.to_string()))?;
                match key {
                    "max_iterations" => {
                        let n: u32 = value.trim().parse().map_err(|_| ScriptErrorKind::BadOptionValue(value.into()))?;
                        if n == 0 {
                            return Err(ScriptErrorKind::BadOptionValue("max_iterations must be >= 1".into()));
                        }
                        self.settings.max_iterations = n;
                    }
                    "rng_seed" => {
                        let n: u64 = value.trim().parse().map_err(|_| ScriptErrorKind::BadOptionValue(value.into()))?;
                        self.reseed(n);
                    }
                    other => return Err(ScriptErrorKind::UnknownOption(other.to_string())),
                }
            }
            "NAME" => {
                let (name, reftext) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| ScriptErrorKind::Malformed(rest.to_string()))?;
                let (sheet, range) = self.parse_sheet_range(reftext.trim())?;
                self.define_name(name, sheet, range)?;
            }
            "SET" => {
                let (reftext, literal) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| ScriptErrorKind::Malformed(rest.to_string()))?;
                let (sheet, range) = self.parse_sheet_range(reftext)?;
                let v = parse_literal(literal.trim())?;
                self.set_value(sheet, range.start, v)?;
            }
            "CELL" | "ARRAY" => {
                let (reftext, ftext) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| ScriptErrorKind::Malformed(rest.to_string()))?;
                let ftext = ftext.trim();
                if !ftext.starts_with('=') {
                    return Err(ScriptErrorKind::MissingEquals);
                }
                let (sheet, range) = self.parse_sheet_range(reftext)?;
                if directive == "CELL" {
                    self.enter_cell_formula(sheet, range.start, ftext)?;
                } else {
                    self.enter_array_formula(sheet, range, ftext)?;
                }
            }
            other => return Err(ScriptErrorKind::UnknownDirective(other.to_string())),
        }
        Ok(())
    }

    /// Parses `<sheet>!<range>`, creating the sheet on first mention.
    fn parse_sheet_range(&mut self, text: &str) -> Result<(usize, RangeRef), ScriptErrorKind> {
        let (sheet_name, range_text) = text
            .split_once('!')
            .ok_or_else(|| ScriptErrorKind::MissingSheet(text.to_string()))?;
        let range = RangeRef::parse(range_text)?;
        Ok((self.sheet_index_or_add(sheet_name), range))
    }
}

fn parse_literal(text: &str) -> Result<Scalar, ScriptErrorKind> {
    if text.starts_with('"') {
        if text.len() >= 2 && text.ends_with('"') {
            return Ok(Scalar::Text(text[1..text.len() - 1].replace("\"\"", "\"")));
        }
        return Err(ScriptErrorKind::BadLiteral(text.to_string()));
    }
    if text.eq_ignore_ascii_case("TRUE") {
        return Ok(Scalar::Bool(true));
    }
    if text.eq_ignore_ascii_case("FALSE") {
        return Ok(Scalar::Bool(false));
    }
    if let Some(e) = ErrorCode::parse(text) {
        return Ok(Scalar::Error(e));
    }
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Scalar::Number)
        .ok_or_else(|| ScriptErrorKind::BadLiteral(text.to_string()))
}

/// Renders a range's values or formulas as aligned rows, used by the CLI
/// `dump` command and handy in tests.
pub fn dump_range(wb: &Workbook, sheet: usize, range: RangeRef, formulas: bool) -> String {
    let mut out = String::new();
    for row in range.start.row..=range.end.row {
        let mut fields = Vec::new();
        for col in range.start.col..=range.end.col {
            let addr = CellAddr::new(col, row);
            if formulas {
                fields.push(wb.formula_text_at(sheet, addr).unwrap_or_else(|| wb.get(sheet, addr).to_string()));
            } else {
                fields.push(wb.get(sheet, addr).to_string());
            }
        }
        let _ = writeln!(out, "{}", fields.join("\t"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(s: &str) -> CellAddr {
        CellAddr::parse(s).unwrap()
    }

    #[test]
    fn entry_evaluation_happens_once_in_entry_order() {
        // Three mutually circular cells; values depend on entry order.
        let mut wb = Workbook::new();
        let s = wb.add_sheet("s").unwrap();
        wb.enter_cell_formula(s, addr("B2"), "=B2+1").unwrap();
        wb.enter_cell_formula(s, addr("D2"), "=D4+1").unwrap();
        wb.enter_cell_formula(s, addr("D4"), "=D2+1").unwrap();
        assert_eq!(wb.get(s, addr("B2")), &Scalar::Number(1.0));
        assert_eq!(wb.get(s, addr("D2")), &Scalar::Number(1.0));
        assert_eq!(wb.get(s, addr("D4")), &Scalar::Number(2.0));
    }

    #[test]
    fn entry_sees_previously_typed_literals() {
        let mut wb = Workbook::new();
        let s = wb.add_sheet("s").unwrap();
        wb.set_value(s, addr("A1"), Scalar::Number(10.0)).unwrap();
        wb.enter_cell_formula(s, addr("A2"), "=A1+1").unwrap();
        assert_eq!(wb.get(s, addr("A2")), &Scalar::Number(11.0));
        // Typing a literal over a formula replaces the formula.
        wb.set_value(s, addr("A2"), Scalar::Number(0.0)).unwrap();
        assert!(wb.formula_text_at(s, addr("A2")).is_none());
    }

    #[test]
    fn array_groups_reject_overlap_and_member_edits() {
        let mut wb = Workbook::new();
        let s = wb.add_sheet("s").unwrap();
        let r = RangeRef::parse("A1:B2").unwrap();
        wb.enter_array_formula(s, r, "=1+1").unwrap();
        for a in r.iter_row_major() {
            assert_eq!(wb.get(s, a), &Scalar::Number(2.0), "scalar result fills the region");
        }
        let overlapping = RangeRef::parse("B2:C3").unwrap();
        assert!(matches!(
            wb.enter_array_formula(s, overlapping, "=0"),
            Err(WorkbookError::GroupOverlap(_))
        ));
        assert!(matches!(
            wb.set_value(s, addr("A1"), Scalar::Number(9.0)),
            Err(WorkbookError::CellInArrayGroup(_))
        ));
        assert!(matches!(
            wb.enter_cell_formula(s, addr("B2"), "=1"),
            Err(WorkbookError::CellInArrayGroup(_))
        ));
    }

    #[test]
    fn names_are_case_insensitive_unique_and_not_cell_like() {
        let mut wb = Workbook::new();
        let s = wb.add_sheet("s").unwrap();
        wb.define_name("TrData", s, RangeRef::parse("A1:D4").unwrap()).unwrap();
        assert!(wb.resolve_name("trdata").is_some());
        assert!(matches!(
            wb.define_name("TRDATA", s, RangeRef::parse("A1").unwrap()),
            Err(WorkbookError::DuplicateName(_))
        ));
        assert!(matches!(
            wb.define_name("DD485", s, RangeRef::parse("A1").unwrap()),
            Err(WorkbookError::NameIsCellLike(_))
        ));
    }

    #[test]
    fn formulas_bind_names_at_entry() {
        let mut wb = Workbook::new();
        let s = wb.add_sheet("s").unwrap();
        assert!(matches!(
            wb.enter_cell_formula(s, addr("A1"), "=nosuch+1"),
            Err(WorkbookError::UnknownName(_))
        ));
    }

    #[test]
    fn script_round_trip_semantics() {
        let wb = Workbook::load_script(
            "# a tiny circular sheet\n\
             OPTION max_iterations 1\n\
             OPTION rng_seed 7\n\
             NAME x s!A1\n\
             SET s!A1 41\n\
             CELL s!A2 =x+1\n\
             ARRAY s!B1:B2 =A1:A2\n",
        )
        .unwrap();
        let s = wb.sheet_index("s").unwrap();
        assert_eq!(wb.settings.max_iterations, 1);
        assert_eq!(wb.settings.rng_seed, 7);
        assert_eq!(wb.get(s, addr("A2")), &Scalar::Number(42.0));
        assert_eq!(wb.get(s, addr("B1")), &Scalar::Number(41.0));
        assert_eq!(wb.get(s, addr("B2")), &Scalar::Number(42.0));
    }

    #[test]
    fn script_errors_carry_line_numbers() {
        let err = Workbook::load_script("OPTION max_iterations 1\nBOGUS x y\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(err.kind, ScriptErrorKind::UnknownDirective(_)));
        let err = Workbook::load_script("SET s1!A1 notanumber\n").unwrap_err();
        assert!(matches!(err.kind, ScriptErrorKind::BadLiteral(_)));
        let err = Workbook::load_script("SET A1 1\n").unwrap_err();
        assert!(matches!(err.kind, ScriptErrorKind::MissingSheet(_)));
        let err = Workbook::load_script("OPTION max_iterations 0\n").unwrap_err();
        assert!(matches!(err.kind, ScriptErrorKind::BadOptionValue(_)));
    }

    #[test]
    fn set_literals_parse_all_forms() {
        assert_eq!(parse_literal("1.5e3").unwrap(), Scalar::Number(1500.0));
        assert_eq!(parse_literal("TRUE").unwrap(), Scalar::Bool(true));
        assert_eq!(parse_literal("\"a \"\"b\"\"\"").unwrap(), Scalar::Text("a \"b\"".into()));
        assert_eq!(parse_literal("#N/A").unwrap(), Scalar::Error(ErrorCode::Na));
        assert!(parse_literal("nan").is_err());
    }
}
