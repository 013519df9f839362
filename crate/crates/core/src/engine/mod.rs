//! The calculation engine.
//!
//! Calculation is manual and iterative: one `calculate` runs a fixed number
//! of passes over the sheet, and each pass visits every formula in row-major
//! order of its anchor cell. There is no dependency graph — a formula simply
//! reads whatever value its inputs hold *right now*, which makes circular
//! sheets well-defined: references to cells above-left see this pass's
//! values, references below-right see last pass's.
//!
//! Results splice into the grid immediately, before the pass moves on:
//! a scalar result fills the whole target region, an array result maps
//! cell-for-cell from its top-left (no stretching), and target cells the
//! result does not cover get `#N/A`.
//!
//! Formulas that draw randomness on their taken branch are evaluated once
//! per output cell (row-major within the region) so each cell gets a fresh
//! draw; everything else is evaluated once per region per pass.

mod builtins;

use std::sync::Arc;

use thiserror::Error;

use crate::addr::{CellAddr, RangeRef, MAX_COL, MAX_ROW};
use crate::formula::{Arg, BinOp, Builtin, Expr, UnOp};
use crate::value::{Array, ErrorCode, Scalar, Value};
use crate::workbook::Workbook;

/// Largest range, in cells, the evaluator will materialize into an array.
/// Guards against formulas like `=SUM(A:A)`-scale references on a sparse
/// grid; well-formed training sheets stay far below it.
const MAX_MATERIALIZED_CELLS: u64 = 4_000_000;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no sheet named `{0}`")]
    UnknownSheet(String),
}

/// One observed cell write during a calculation pass. `pass` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub pass: u32,
    pub addr: CellAddr,
    pub old: Scalar,
    pub new: Scalar,
}

/// What a pass visits, in row-major anchor order.
enum Item {
    Cell(CellAddr, Arc<Expr>),
    Group(RangeRef, Arc<Expr>),
}

/// Runs `settings.max_iterations` passes over `sheet_name`.
pub fn calculate_sheet(wb: &mut Workbook, sheet_name: &str) -> Result<(), EngineError> {
    calculate_sheet_traced(wb, sheet_name, &mut |_| {})
}

/// As [`calculate_sheet`], reporting every cell whose value changes.
pub fn calculate_sheet_traced(
    wb: &mut Workbook,
    sheet_name: &str,
    trace: &mut dyn FnMut(&TraceEvent),
) -> Result<(), EngineError> {
    let sheet = wb
        .sheet_index(sheet_name)
        .ok_or_else(|| EngineError::UnknownSheet(sheet_name.to_string()))?;
    let schedule = build_schedule(wb, sheet);
    for pass in 1..=wb.settings.max_iterations {
        for item in &schedule {
            match item {
                Item::Cell(addr, expr) => {
                    evaluate_into(wb, sheet, RangeRef::cell(*addr), expr, pass, trace);
                }
                Item::Group(range, expr) => {
                    evaluate_into(wb, sheet, *range, expr, pass, trace);
                }
            }
        }
    }
    Ok(())
}

/// Collects the formulas on a sheet in visiting order: row-major by anchor
/// cell, where an array group's anchor is its top-left corner. The schedule
/// is frozen before the first pass, so formulas entered mid-calculation (not
/// possible via the public API) would not join it.
fn build_schedule(wb: &Workbook, sheet: usize) -> Vec<Item> {
    let s = wb.sheet(sheet);
    let mut items = Vec::new();
    for (&(row, col), cell) in s.occupied() {
        let addr = CellAddr::new(col, row);
        if let Some(idx) = s.membership_of(addr) {
            let g = &s.groups()[idx];
            if g.range.start == addr {
                items.push(Item::Group(g.range, g.formula.clone()));
            }
        } else if let Some(f) = &cell.formula {
            items.push(Item::Cell(addr, f.clone()));
        }
    }
    items
}

/// Evaluates a freshly entered formula once against current values.
/// Used by the workbook's entry path; traces nothing and counts as pass 0.
pub(crate) fn entry_evaluate(wb: &mut Workbook, sheet: usize, target: RangeRef, expr: &Expr) {
    evaluate_into(wb, sheet, target, expr, 0, &mut |_| {});
}

/// Evaluates one formula and splices the result into `target`.
fn evaluate_into(
    wb: &mut Workbook,
    sheet: usize,
    target: RangeRef,
    expr: &Expr,
    pass: u32,
    trace: &mut dyn FnMut(&TraceEvent),
) {
    let mut ev = Evaluator { wb, sheet };
    if ev.draws_when_evaluated(expr) {
        // Fresh draw per output cell: evaluate once per cell, row-major,
        // and keep the element this cell would receive from the splice.
        for (i, j, addr) in target_cells(target) {
            let v = ev.value(expr);
            let s = element_for_cell(&v, i, j);
            write_value(ev.wb, sheet, addr, s, pass, trace);
        }
    } else {
        let v = ev.value(expr);
        for (i, j, addr) in target_cells(target) {
            let s = splice_element(&v, i, j);
            write_value(wb, sheet, addr, s, pass, trace);
        }
    }
}

/// Row-major `(row offset, col offset, address)` walk of a target region.
fn target_cells(target: RangeRef) -> impl Iterator<Item = (usize, usize, CellAddr)> {
    target.iter_row_major().map(move |a| {
        ((a.row - target.start.row) as usize, (a.col - target.start.col) as usize, a)
    })
}

/// Splice rule: scalars fill, arrays map from the top-left without
/// stretching, and uncovered cells get `#N/A`.
fn splice_element(v: &Value, i: usize, j: usize) -> Scalar {
    match v {
        Value::Scalar(s) => s.clone(),
        Value::Array(a) => {
            if i < a.rows && j < a.cols {
                a.get(i, j).clone()
            } else {
                Scalar::Error(ErrorCode::Na)
            }
        }
    }
}

/// Per-cell (volatile) rule: like a splice, except length-1 dimensions do
/// stretch, because each cell evaluated the formula for itself and a scalar
/// or vector result legitimately stands for "this cell's value".
fn element_for_cell(v: &Value, i: usize, j: usize) -> Scalar {
    match v {
        Value::Scalar(s) => s.clone(),
        Value::Array(a) => {
            let r = if a.rows == 1 { 0 } else { i };
            let c = if a.cols == 1 { 0 } else { j };
            if r < a.rows && c < a.cols {
                a.get(r, c).clone()
            } else {
                Scalar::Error(ErrorCode::Na)
            }
        }
    }
}

fn write_value(
    wb: &mut Workbook,
    sheet: usize,
    addr: CellAddr,
    new: Scalar,
    pass: u32,
    trace: &mut dyn FnMut(&TraceEvent),
) {
    let old = wb.get(sheet, addr).clone();
    if old != new {
        trace(&TraceEvent { pass, addr, old, new: new.clone() });
    }
    wb.sheet_mut(sheet).write_value(addr, new);
}

/// Evaluates a parsed expression against the workbook's current values,
/// without writing anything. This is the expression evaluator the engine
/// and the entry path share; tests use it to probe single formulas.
pub fn evaluate(wb: &mut Workbook, sheet: usize, expr: &Expr) -> Value {
    Evaluator { wb, sheet }.value(expr)
}

struct Evaluator<'w> {
    wb: &'w mut Workbook,
    sheet: usize,
}

impl<'w> Evaluator<'w> {
    fn value(&mut self, e: &Expr) -> Value {
        match e {
            Expr::Number(n) => Value::Scalar(Scalar::Number(*n)),
            Expr::Text(t) => Value::Scalar(Scalar::Text(t.clone())),
            Expr::Bool(b) => Value::Scalar(Scalar::Bool(*b)),
            Expr::Cell(c) => Value::Scalar(self.wb.get(self.sheet, c.addr()).clone()),
            Expr::Range(..) | Expr::Name(_) | Expr::Call(Builtin::Offset, _) => {
                match self.reference(e) {
                    Ok((sheet, range)) => self.materialize(sheet, range),
                    Err(code) => Value::Scalar(Scalar::Error(code)),
                }
            }
            Expr::Unary(op, x) => {
                let v = self.value(x);
                match op {
                    UnOp::Neg => map_unary(&v, |n| Ok(-n)),
                    // Unary plus passes its operand through untouched.
                    UnOp::Plus => v,
                }
            }
            Expr::Binary(op, l, r) => {
                let lv = self.value(l);
                let rv = self.value(r);
                broadcast_binop(*op, &lv, &rv)
            }
            Expr::Call(b, args) => self.call(*b, args),
        }
    }

    /// Resolves an expression to a rectangle of cells, for functions with
    /// reference semantics. Only cells, ranges, names, and `OFFSET` calls
    /// denote references.
    fn reference(&mut self, e: &Expr) -> Result<(usize, RangeRef), ErrorCode> {
        match e {
            Expr::Cell(c) => Ok((self.sheet, RangeRef::cell(c.addr()))),
            Expr::Range(a, b) => Ok((self.sheet, RangeRef::new(a.addr(), b.addr()))),
            Expr::Name(n) => match self.wb.resolve_name(n) {
                Some(nr) => Ok((nr.sheet, nr.range)),
                None => Err(ErrorCode::Name),
            },
            Expr::Call(Builtin::Offset, args) => self.offset_reference(args),
            _ => Err(ErrorCode::Value),
        }
    }

    /// `OFFSET(base, rows, cols, [height], [width])`: displaces `base` and
    /// optionally resizes it, yielding a new reference. Omitted or empty
    /// `rows`/`cols` count as 0; omitted size keeps the base's size.
    fn offset_reference(&mut self, args: &[Arg]) -> Result<(usize, RangeRef), ErrorCode> {
        let base_expr = match &args[0] {
            Arg::Expr(e) => e,
            Arg::Empty => return Err(ErrorCode::Value),
        };
        let (sheet, base) = self.reference(base_expr)?;
        let rows = self.offset_arg(args.get(1), 0.0)?;
        let cols = self.offset_arg(args.get(2), 0.0)?;
        let height = self.offset_arg(args.get(3), base.rows() as f64)?;
        let width = self.offset_arg(args.get(4), base.cols() as f64)?;
        if height < 1.0 || width < 1.0 {
            return Err(ErrorCode::Ref);
        }
        let start_row = base.start.row as i64 + rows as i64;
        let start_col = base.start.col as i64 + cols as i64;
        let end_row = start_row + height as i64 - 1;
        let end_col = start_col + width as i64 - 1;
        if start_row < 1 || start_col < 1 || end_row > MAX_ROW as i64 || end_col > MAX_COL as i64 {
            return Err(ErrorCode::Ref);
        }
        Ok((
            sheet,
            RangeRef::new(
                CellAddr::new(start_col as u32, start_row as u32),
                CellAddr::new(end_col as u32, end_row as u32),
            ),
        ))
    }

    /// Evaluates one OFFSET argument to a whole number (truncating toward
    /// zero, as the displacement semantics require integers).
    fn offset_arg(&mut self, arg: Option<&Arg>, default: f64) -> Result<f64, ErrorCode> {
        match arg {
            None | Some(Arg::Empty) => Ok(default),
            Some(Arg::Expr(e)) => {
                let v = self.value(e);
                match v.as_scalar() {
                    Some(s) => s.to_number().map(f64::trunc),
                    None => Err(ErrorCode::Value),
                }
            }
        }
    }

    /// Reads a rectangle into a dense array value. A 1x1 rectangle still
    /// demotes to a scalar through [`Value::as_scalar`] where needed.
    fn materialize(&mut self, sheet: usize, range: RangeRef) -> Value {
        if range.rows() as u64 * range.cols() as u64 > MAX_MATERIALIZED_CELLS {
            return Value::Scalar(Scalar::Error(ErrorCode::Value));
        }
        if range.rows() == 1 && range.cols() == 1 {
            return Value::Scalar(self.wb.get(sheet, range.start).clone());
        }
        Value::Array(self.wb.read_range(sheet, range))
    }

    fn call(&mut self, b: Builtin, args: &[Arg]) -> Value {
        match b {
            Builtin::If => self.eval_if(args),
            Builtin::Rand => Value::Scalar(Scalar::Number(self.wb.rng.rand01())),
            Builtin::RandBetween => self.eval_randbetween(args),
            Builtin::Offset => unreachable!("OFFSET is routed through reference()"),
            _ => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    match a {
                        Arg::Expr(e) => vals.push(self.value(e)),
                        Arg::Empty => vals.push(Value::Scalar(Scalar::Blank)),
                    }
                }
                builtins::dispatch(b, &vals)
            }
        }
    }

    /// `IF` with a scalar condition is lazy: only the taken branch is
    /// evaluated. With an array condition both branches are evaluated and
    /// the result selects element-wise.
    fn eval_if(&mut self, args: &[Arg]) -> Value {
        let cond = match &args[0] {
            Arg::Expr(e) => self.value(e),
            Arg::Empty => Value::Scalar(Scalar::Blank),
        };
        let branch = |ev: &mut Self, idx: usize| match &args[idx] {
            Arg::Expr(e) => ev.value(e),
            Arg::Empty => Value::Scalar(Scalar::Blank),
        };
        match cond.as_scalar() {
            Some(s) => match s.to_condition() {
                Err(code) => Value::Scalar(Scalar::Error(code)),
                Ok(true) => branch(self, 1),
                Ok(false) => branch(self, 2),
            },
            None => {
                let t = branch(self, 1);
                let f = branch(self, 2);
                select_elementwise(&cond, &t, &f)
            }
        }
    }

    fn eval_randbetween(&mut self, args: &[Arg]) -> Value {
        let mut bound = |idx: usize| -> Result<f64, ErrorCode> {
            match &args[idx] {
                Arg::Expr(e) => {
                    let v = self.value(e);
                    match v.as_scalar() {
                        Some(s) => s.to_number(),
                        None => Err(ErrorCode::Value),
                    }
                }
                Arg::Empty => Err(ErrorCode::Value),
            }
        };
        let lo = match bound(0) {
            Ok(n) => n.ceil(),
            Err(c) => return Value::Scalar(Scalar::Error(c)),
        };
        let hi = match bound(1) {
            Ok(n) => n.floor(),
            Err(c) => return Value::Scalar(Scalar::Error(c)),
        };
        if lo > hi || lo < i64::MIN as f64 || hi > i64::MAX as f64 {
            return Value::Scalar(Scalar::Error(ErrorCode::Num));
        }
        Value::Scalar(Scalar::Number(self.wb.rng.randbetween(lo as i64, hi as i64) as f64))
    }

    /// Would evaluating this expression right now consume randomness?
    ///
    /// `RAND`/`RANDBETWEEN` anywhere outside an `IF` means yes. For an `IF`
    /// with a draw-free condition, the condition is evaluated (evaluating a
    /// condition never draws) to find the taken branch, and only that branch
    /// is inspected — so a formula like
    /// `IF(ru=0, RAND(), w+eta*gradient)` is volatile only in init passes.
    fn draws_when_evaluated(&mut self, e: &Expr) -> bool {
        match e {
            Expr::Call(b, args) => {
                if b.draws_randomness() {
                    return true;
                }
                if *b == Builtin::If {
                    let (cond, t, f) = (&args[0], &args[1], &args[2]);
                    let cond = match cond {
                        Arg::Expr(e) => e,
                        Arg::Empty => return false,
                    };
                    if cond.mentions_randomness() {
                        return true;
                    }
                    return match self.value(cond).as_scalar() {
                        Some(s) => match s.to_condition() {
                            Ok(true) => t.as_expr().is_some_and(|e| self.draws_when_evaluated(e)),
                            Ok(false) => f.as_expr().is_some_and(|e| self.draws_when_evaluated(e)),
                            // An error condition short-circuits to the error.
                            Err(_) => false,
                        },
                        // Array condition: both branches evaluate.
                        None => {
                            t.as_expr().is_some_and(Expr::mentions_randomness)
                                || f.as_expr().is_some_and(Expr::mentions_randomness)
                        }
                    };
                }
                let mut any = false;
                for a in args.iter().filter_map(Arg::as_expr) {
                    if self.draws_when_evaluated(a) {
                        any = true;
                        break;
                    }
                }
                any
            }
            Expr::Unary(_, x) => self.draws_when_evaluated(x),
            Expr::Binary(_, l, r) => {
                self.draws_when_evaluated(l) || self.draws_when_evaluated(r)
            }
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Broadcasting
// ---------------------------------------------------------------------------

/// Shape of the result of combining `a` and `b` element-wise, or `None` if
/// the shapes conflict. Dimensions agree when equal or when either is 1
/// (the length-1 side stretches).
fn broadcast_shape(a: (usize, usize), b: (usize, usize)) -> Option<(usize, usize)> {
    let dim = |x: usize, y: usize| {
        if x == y || y == 1 {
            Some(x.max(y))
        } else if x == 1 {
            Some(y)
        } else {
            None
        }
    };
    Some((dim(a.0, b.0)?, dim(a.1, b.1)?))
}

/// Applies a binary operator element-wise with broadcasting. On a shape
/// conflict every cell of the max-extent shape becomes `#VALUE!`.
pub(crate) fn broadcast_binop(op: BinOp, l: &Value, r: &Value) -> Value {
    if let (Value::Scalar(a), Value::Scalar(b)) = (l, r) {
        return Value::Scalar(scalar_binop(op, a, b));
    }
    let (lr, lc) = l.shape();
    let (rr, rc) = r.shape();
    match broadcast_shape((lr, lc), (rr, rc)) {
        Some((rows, cols)) => {
            let mut out = Array::fill(rows, cols, Scalar::Blank);
            for i in 0..rows {
                for j in 0..cols {
                    let s = scalar_binop(op, l.at(i, j), r.at(i, j));
                    out.set(i, j, s);
                }
            }
            Value::Array(out)
        }
        None => {
            let rows = lr.max(rr);
            let cols = lc.max(rc);
            Value::Array(Array::fill(rows, cols, Scalar::Error(ErrorCode::Value)))
        }
    }
}

fn map_unary(v: &Value, f: impl Fn(f64) -> Result<f64, ErrorCode>) -> Value {
    let apply = |s: &Scalar| -> Scalar {
        match s.to_number() {
            Ok(n) => match f(n) {
                Ok(r) => Scalar::Number(r),
                Err(c) => Scalar::Error(c),
            },
            Err(c) => Scalar::Error(c),
        }
    };
    match v {
        Value::Scalar(s) => Value::Scalar(apply(s)),
        Value::Array(a) => Value::Array(a.map(apply)),
    }
}

/// Element-wise branch selection for an array-condition `IF`.
fn select_elementwise(cond: &Value, t: &Value, f: &Value) -> Value {
    let shape = broadcast_shape(cond.shape(), t.shape())
        .and_then(|s| broadcast_shape(s, f.shape()));
    let (rows, cols) = match shape {
        Some(s) => s,
        None => {
            let rows = cond.shape().0.max(t.shape().0).max(f.shape().0);
            let cols = cond.shape().1.max(t.shape().1).max(f.shape().1);
            return Value::Array(Array::fill(rows, cols, Scalar::Error(ErrorCode::Value)));
        }
    };
    let mut out = Array::fill(rows, cols, Scalar::Blank);
    for i in 0..rows {
        for j in 0..cols {
            let s = match cond.at(i, j).to_condition() {
                Ok(true) => t.at(i, j).clone(),
                Ok(false) => f.at(i, j).clone(),
                Err(c) => Scalar::Error(c),
            };
            out.set(i, j, s);
        }
    }
    if rows == 1 && cols == 1 {
        Value::Scalar(out.get(0, 0).clone())
    } else {
        Value::Array(out)
    }
}

// ---------------------------------------------------------------------------
// Scalar operators
// ---------------------------------------------------------------------------

/// Rank for cross-type ordered comparison: numbers < text < booleans.
fn type_rank(s: &Scalar) -> u8 {
    match s {
        Scalar::Blank | Scalar::Number(_) => 0,
        Scalar::Text(_) => 1,
        Scalar::Bool(_) => 2,
        Scalar::Error(_) => 3,
    }
}

pub(crate) fn scalar_binop(op: BinOp, a: &Scalar, b: &Scalar) -> Scalar {
    if let Scalar::Error(e) = a {
        return Scalar::Error(*e);
    }
    if let Scalar::Error(e) = b {
        return Scalar::Error(*e);
    }
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Pow => {
            let x = match a.to_number() {
                Ok(n) => n,
                Err(c) => return Scalar::Error(c),
            };
            let y = match b.to_number() {
                Ok(n) => n,
                Err(c) => return Scalar::Error(c),
            };
            arith(op, x, y)
        }
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let ord = compare(a, b);
            let res = match op {
                BinOp::Eq => ord == std::cmp::Ordering::Equal,
                BinOp::Ne => ord != std::cmp::Ordering::Equal,
                BinOp::Lt => ord == std::cmp::Ordering::Less,
                BinOp::Le => ord != std::cmp::Ordering::Greater,
                BinOp::Gt => ord == std::cmp::Ordering::Greater,
                BinOp::Ge => ord != std::cmp::Ordering::Less,
                _ => unreachable!(),
            };
            Scalar::Bool(res)
        }
    }
}

fn arith(op: BinOp, x: f64, y: f64) -> Scalar {
    let r = match op {
        BinOp::Add => x + y,
        BinOp::Sub => x - y,
        BinOp::Mul => x * y,
        BinOp::Div => {
            if y == 0.0 {
                return Scalar::Error(ErrorCode::Div0);
            }
            x / y
        }
        BinOp::Pow => {
            if x == 0.0 && y == 0.0 {
                return Scalar::Error(ErrorCode::Num);
            }
            if x < 0.0 && y.fract() != 0.0 {
                return Scalar::Error(ErrorCode::Num);
            }
            pow(x, y)
        }
        _ => unreachable!("arith called with comparison"),
    };
    if r.is_finite() {
        Scalar::Number(r)
    } else {
        Scalar::Error(ErrorCode::Num)
    }
}

/// Exponentiation. Small whole exponents use repeated multiplication so
/// `out^2`-style formulas are bit-identical to hand-written `out*out` in
/// reference computations.
pub fn pow(x: f64, y: f64) -> f64 {
    if y == 2.0 {
        return x * x;
    }
    if y.fract() == 0.0 && y.abs() <= 64.0 {
        let mut r = 1.0;
        for _ in 0..y.abs() as u32 {
            r *= x;
        }
        return if y < 0.0 { 1.0 / r } else { r };
    }
    x.powf(y)
}

/// Comparison semantics: blanks coerce to the other side's type (0, empty
/// text, or FALSE); text compares case-insensitively; distinct types are
/// unequal and order by [`type_rank`].
fn compare(a: &Scalar, b: &Scalar) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let coerced: (Scalar, Scalar) = match (a, b) {
        (Scalar::Blank, Scalar::Number(_)) => (Scalar::Number(0.0), b.clone()),
        (Scalar::Number(_), Scalar::Blank) => (a.clone(), Scalar::Number(0.0)),
        (Scalar::Blank, Scalar::Text(_)) => (Scalar::Text(String::new()), b.clone()),
        (Scalar::Text(_), Scalar::Blank) => (a.clone(), Scalar::Text(String::new())),
        (Scalar::Blank, Scalar::Bool(_)) => (Scalar::Bool(false), b.clone()),
        (Scalar::Bool(_), Scalar::Blank) => (a.clone(), Scalar::Bool(false)),
        (Scalar::Blank, Scalar::Blank) => (Scalar::Number(0.0), Scalar::Number(0.0)),
        _ => (a.clone(), b.clone()),
    };
    match coerced {
        (Scalar::Number(x), Scalar::Number(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
        (Scalar::Text(x), Scalar::Text(y)) => x.to_ascii_uppercase().cmp(&y.to_ascii_uppercase()),
        (Scalar::Bool(x), Scalar::Bool(y)) => x.cmp(&y),
        (x, y) => type_rank(&x).cmp(&type_rank(&y)),
    }
}
