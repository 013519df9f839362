//! Builtin functions with plain value semantics. `IF`, `OFFSET`, `RAND`,
//! and `RANDBETWEEN` need the evaluator (laziness, references, or the
//! random stream) and live in the parent module.

use crate::formula::Builtin;
use crate::value::{Array, ErrorCode, Scalar, Value};

pub(super) fn dispatch(b: Builtin, vals: &[Value]) -> Value {
    match b {
        Builtin::Abs => map_numeric(&vals[0], |n| Ok(n.abs())),
        Builtin::Exp => map_numeric(&vals[0], |n| finite(n.exp())),
        Builtin::Tanh => map_numeric(&vals[0], |n| Ok(n.tanh())),
        Builtin::Mod => broadcast_numeric2(&vals[0], &vals[1], excel_mod),
        Builtin::IsNumber => is_number(&vals[0]),
        Builtin::Transpose => transpose(&vals[0]),
        Builtin::Mmult => mmult(&vals[0], &vals[1]),
        Builtin::Minverse => minverse(&vals[0]),
        Builtin::Sum | Builtin::Average | Builtin::Max | Builtin::Min | Builtin::Stdev => {
            aggregate(b, vals)
        }
        Builtin::If | Builtin::Offset | Builtin::Rand | Builtin::RandBetween => {
            unreachable!("{} is handled by the evaluator", b.name())
        }
    }
}

fn finite(n: f64) -> Result<f64, ErrorCode> {
    if n.is_finite() {
        Ok(n)
    } else {
        Err(ErrorCode::Num)
    }
}

/// Applies a numeric function element-wise (scalars included), with the
/// usual coercions: blanks are 0, booleans 0/1, text is `#VALUE!`.
fn map_numeric(v: &Value, f: impl Fn(f64) -> Result<f64, ErrorCode>) -> Value {
    let apply = |s: &Scalar| match s.to_number().and_then(&f) {
        Ok(n) => Scalar::Number(n),
        Err(c) => Scalar::Error(c),
    };
    match v {
        Value::Scalar(s) => Value::Scalar(apply(s)),
        Value::Array(a) => Value::Array(a.map(apply)),
    }
}

/// Element-wise binary numeric function with the same broadcasting rules
/// as the arithmetic operators.
fn broadcast_numeric2(l: &Value, r: &Value, f: impl Fn(f64, f64) -> Result<f64, ErrorCode>) -> Value {
    let apply = |a: &Scalar, b: &Scalar| -> Scalar {
        let x = match a.to_number() {
            Ok(n) => n,
            Err(c) => return Scalar::Error(c),
        };
        let y = match b.to_number() {
            Ok(n) => n,
            Err(c) => return Scalar::Error(c),
        };
        match f(x, y) {
            Ok(n) => Scalar::Number(n),
            Err(c) => Scalar::Error(c),
        }
    };
    if let (Value::Scalar(a), Value::Scalar(b)) = (l, r) {
        return Value::Scalar(apply(a, b));
    }
    let (lr, lc) = l.shape();
    let (rr, rc) = r.shape();
    let rows_ok = lr == rr || lr == 1 || rr == 1;
    let cols_ok = lc == rc || lc == 1 || rc == 1;
    let rows = lr.max(rr);
    let cols = lc.max(rc);
    if !rows_ok || !cols_ok {
        return Value::Array(Array::fill(rows, cols, Scalar::Error(ErrorCode::Value)));
    }
    let mut out = Array::fill(rows, cols, Scalar::Blank);
    for i in 0..rows {
        for j in 0..cols {
            out.set(i, j, apply(l.at(i, j), r.at(i, j)));
        }
    }
    Value::Array(out)
}

/// `MOD(n, d)`: remainder with the sign of the divisor
/// (`MOD(-1, 4) = 3`); zero divisor is `#DIV/0!`.
fn excel_mod(n: f64, d: f64) -> Result<f64, ErrorCode> {
    if d == 0.0 {
        return Err(ErrorCode::Div0);
    }
    finite(n - d * (n / d).floor())
}

/// `ISNUMBER` inspects rather than coerces: errors yield FALSE instead of
/// propagating, which is what makes it usable as a health probe.
fn is_number(v: &Value) -> Value {
    let apply = |s: &Scalar| Scalar::Bool(matches!(s, Scalar::Number(_)));
    match v {
        Value::Scalar(s) => Value::Scalar(apply(s)),
        Value::Array(a) => Value::Array(a.map(apply)),
    }
}

fn transpose(v: &Value) -> Value {
    match v {
        Value::Scalar(s) => Value::Scalar(s.clone()),
        Value::Array(a) => {
            let mut out = Array::fill(a.cols, a.rows, Scalar::Blank);
            for i in 0..a.rows {
                for j in 0..a.cols {
                    out.set(j, i, a.get(i, j).clone());
                }
            }
            Value::Array(out)
        }
    }
}

/// Extracts a dense numeric matrix. Blanks coerce to 0 and booleans to
/// 0/1 so partially initialized regions multiply as zeros instead of
/// poisoning the sheet with errors; text is still `#VALUE!`.
fn numeric_matrix(v: &Value) -> Result<(usize, usize, Vec<f64>), ErrorCode> {
    match v {
        Value::Scalar(s) => Ok((1, 1, vec![s.to_number()?])),
        Value::Array(a) => {
            let (rows, cols) = (a.rows, a.cols);
            Ok((rows, cols, a.to_numbers()?))
        }
    }
}

/// Matrix product. Each output element accumulates `a[i][k] * b[k][j]`
/// over `k` ascending from a 0.0 start — reference computations follow the
/// identical order, so both sides agree to the last bit.
fn mmult(l: &Value, r: &Value) -> Value {
    let (ar, ac, a) = match numeric_matrix(l) {
        Ok(m) => m,
        Err(c) => return Value::error(c),
    };
    let (br, bc, b) = match numeric_matrix(r) {
        Ok(m) => m,
        Err(c) => return Value::error(c),
    };
    if ac != br {
        return Value::error(ErrorCode::Value);
    }
    let mut out = Array::fill(ar, bc, Scalar::Blank);
    for i in 0..ar {
        for j in 0..bc {
            let mut acc = 0.0;
            for k in 0..ac {
                acc += a[i * ac + k] * b[k * bc + j];
            }
            out.set(i, j, if acc.is_finite() { Scalar::Number(acc) } else { Scalar::Error(ErrorCode::Num) });
        }
    }
    if ar == 1 && bc == 1 {
        Value::Scalar(out.get(0, 0).clone())
    } else {
        Value::Array(out)
    }
}

/// Matrix inverse by Gauss-Jordan elimination with partial pivoting.
/// Non-square input is `#VALUE!`; a zero pivot column (singular matrix)
/// is `#NUM!` for the whole result.
fn minverse(v: &Value) -> Value {
    let (rows, cols, m) = match numeric_matrix(v) {
        Ok(m) => m,
        Err(c) => return Value::error(c),
    };
    if rows != cols {
        return Value::error(ErrorCode::Value);
    }
    let n = rows;
    // Augmented [M | I], reduced in place.
    let mut aug = vec![0.0; n * 2 * n];
    let w = 2 * n;
    for i in 0..n {
        for j in 0..n {
            aug[i * w + j] = m[i * n + j];
        }
        aug[i * w + n + i] = 1.0;
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| {
                aug[p * w + col]
                    .abs()
                    .partial_cmp(&aug[q * w + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        let pivot = aug[pivot_row * w + col];
        if pivot == 0.0 {
            return Value::error(ErrorCode::Num);
        }
        if pivot_row != col {
            for j in 0..w {
                aug.swap(col * w + j, pivot_row * w + j);
            }
        }
        let inv = 1.0 / pivot;
        for j in 0..w {
            aug[col * w + j] *= inv;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = aug[i * w + col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..w {
                aug[i * w + j] -= factor * aug[col * w + j];
            }
        }
    }
    let mut out = Array::fill(n, n, Scalar::Blank);
    for i in 0..n {
        for j in 0..n {
            let x = aug[i * w + n + j];
            if !x.is_finite() {
                return Value::error(ErrorCode::Num);
            }
            out.set(i, j, Scalar::Number(x));
        }
    }
    if n == 1 {
        Value::Scalar(out.get(0, 0).clone())
    } else {
        Value::Array(out)
    }
}

/// Gathers the numbers an aggregate sees. Direct scalar arguments follow
/// typed-argument rules (booleans count as 0/1, text is `#VALUE!`); inside
/// arrays only numbers count and text/booleans/blanks are skipped. Any
/// error encountered propagates, first in argument order then row-major.
fn collect_numbers(vals: &[Value]) -> Result<Vec<f64>, ErrorCode> {
    let mut out = Vec::new();
    for v in vals {
        match v {
            Value::Scalar(s) => match s {
                Scalar::Blank => {}
                Scalar::Number(n) => out.push(*n),
                Scalar::Bool(b) => out.push(if *b { 1.0 } else { 0.0 }),
                Scalar::Text(_) => return Err(ErrorCode::Value),
                Scalar::Error(e) => return Err(*e),
            },
            Value::Array(a) => {
                for s in a.iter() {
                    match s {
                        Scalar::Number(n) => out.push(*n),
                        Scalar::Error(e) => return Err(*e),
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(out)
}

fn aggregate(b: Builtin, vals: &[Value]) -> Value {
    let nums = match collect_numbers(vals) {
        Ok(n) => n,
        Err(c) => return Value::error(c),
    };
    let n = nums.len();
    let result = match b {
        Builtin::Sum => nums.iter().sum::<f64>(),
        Builtin::Average => {
            if n == 0 {
                return Value::error(ErrorCode::Div0);
            }
            nums.iter().sum::<f64>() / n as f64
        }
        Builtin::Max => nums.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Builtin::Min => nums.iter().copied().fold(f64::INFINITY, f64::min),
        Builtin::Stdev => {
            if n < 2 {
                return Value::error(ErrorCode::Div0);
            }
            let mean = nums.iter().sum::<f64>() / n as f64;
            let ss = nums.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
            (ss / (n - 1) as f64).sqrt()
        }
        _ => unreachable!(),
    };
    if matches!(b, Builtin::Max | Builtin::Min) && n == 0 {
        // MAX()/MIN() of nothing is 0, matching sheet conventions.
        return Value::number(0.0);
    }
    match finite(result) {
        Ok(r) => Value::number(r),
        Err(c) => Value::error(c),
    }
}
