//! Cell values: scalars, error codes, and rectangular arrays.

use std::fmt;

/// Spreadsheet error codes. Errors are ordinary values: they are written
/// into cells and flow through arithmetic, and a calculation pass never
/// aborts because of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    Div0,
    Na,
    Name,
    Num,
    Ref,
    Value,
}

impl ErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::Div0 => "#DIV/0!",
            ErrorCode::Na => "#N/A",
            ErrorCode::Name => "#NAME?",
            ErrorCode::Num => "#NUM!",
            ErrorCode::Ref => "#REF!",
            ErrorCode::Value => "#VALUE!",
        }
    }

    pub fn parse(text: &str) -> Option<ErrorCode> {
        match text.to_ascii_uppercase().as_str() {
            "#DIV/0!" => Some(ErrorCode::Div0),
            "#N/A" => Some(ErrorCode::Na),
            "#NAME?" => Some(ErrorCode::Name),
            "#NUM!" => Some(ErrorCode::Num),
            "#REF!" => Some(ErrorCode::Ref),
            "#VALUE!" => Some(ErrorCode::Value),
            _ => None,
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a single cell holds.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Blank,
    Number(f64),
    Bool(bool),
    Text(String),
    Error(ErrorCode),
}

impl Scalar {
    /// Numeric coercion used by arithmetic and numeric builtins:
    /// blank → 0, booleans → 0/1, text → `#VALUE!`, errors propagate.
    pub fn to_number(&self) -> Result<f64, ErrorCode> {
        match self {
            Scalar::Blank => Ok(0.0),
            Scalar::Number(v) => Ok(*v),
            Scalar::Bool(b) => Ok(if *b { 1.0 } else { 0.0 }),
            Scalar::Text(_) => Err(ErrorCode::Value),
            Scalar::Error(e) => Err(*e),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Scalar::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Scalar::Blank)
    }

    /// Truthiness for `IF` conditions: numbers are true when nonzero,
    /// blank is false, text is not a condition.
    pub fn to_condition(&self) -> Result<bool, ErrorCode> {
        match self {
            Scalar::Blank => Ok(false),
            Scalar::Number(v) => Ok(*v != 0.0),
            Scalar::Bool(b) => Ok(*b),
            Scalar::Text(_) => Err(ErrorCode::Value),
            Scalar::Error(e) => Err(*e),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Blank => Ok(()),
            Scalar::Number(v) => write!(f, "{v}"),
            Scalar::Bool(b) => f.write_str(if *b { "TRUE" } else { "FALSE" }),
            Scalar::Text(t) => f.write_str(t),
            Scalar::Error(e) => write!(f, "{e}"),
        }
    }
}

/// A dense rectangular block of scalars, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Scalar>,
}

impl Array {
    pub fn new(rows: usize, cols: usize, data: Vec<Scalar>) -> Self {
        assert_eq!(rows * cols, data.len(), "array shape/data mismatch");
        assert!(rows > 0 && cols > 0, "arrays are never empty");
        Array { rows, cols, data }
    }

    pub fn fill(rows: usize, cols: usize, s: Scalar) -> Self {
        Array::new(rows, cols, vec![s; rows * cols])
    }

    pub fn from_numbers(rows: usize, cols: usize, nums: &[f64]) -> Self {
        Array::new(rows, cols, nums.iter().map(|v| Scalar::Number(*v)).collect())
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, s: Scalar) {
        self.data[r * self.cols + c] = s;
    }

    pub fn iter(&self) -> impl Iterator<Item = &Scalar> {
        self.data.iter()
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Array {
        Array::new(self.rows, self.cols, self.data.iter().map(f).collect())
    }

    /// All entries as numbers (with blank/bool coercion); the first
    /// non-coercible entry aborts with its error code.
    pub fn to_numbers(&self) -> Result<Vec<f64>, ErrorCode> {
        self.data.iter().map(|s| s.to_number()).collect()
    }
}

/// The result of evaluating a formula: a single scalar or an array.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(Scalar),
    Array(Array),
}

impl Value {
    pub fn error(e: ErrorCode) -> Value {
        Value::Scalar(Scalar::Error(e))
    }

    pub fn number(v: f64) -> Value {
        Value::Scalar(Scalar::Number(v))
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Value::Scalar(_) => (1, 1),
            Value::Array(a) => (a.rows, a.cols),
        }
    }

    /// The scalar view of this value: scalars as-is, 1×1 arrays demoted.
    /// Multi-cell arrays have no scalar view.
    pub fn as_scalar(&self) -> Option<&Scalar> {
        match self {
            Value::Scalar(s) => Some(s),
            Value::Array(a) if a.rows == 1 && a.cols == 1 => Some(a.get(0, 0)),
            Value::Array(_) => None,
        }
    }

    /// Broadcast-aware element access: size-1 dimensions stretch.
    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        match self {
            Value::Scalar(s) => s,
            Value::Array(a) => a.get(
                if a.rows == 1 { 0 } else { r },
                if a.cols == 1 { 0 } else { c },
            ),
        }
    }

    pub fn to_number(&self) -> Result<f64, ErrorCode> {
        match self.as_scalar() {
            Some(s) => s.to_number(),
            None => Err(ErrorCode::Value),
        }
    }
}

impl From<Scalar> for Value {
    fn from(s: Scalar) -> Value {
        Value::Scalar(s)
    }
}

impl From<Array> for Value {
    fn from(a: Array) -> Value {
        Value::Array(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes_round_trip() {
        for e in [ErrorCode::Div0, ErrorCode::Na, ErrorCode::Name, ErrorCode::Num, ErrorCode::Ref, ErrorCode::Value] {
            assert_eq!(ErrorCode::parse(e.as_str()), Some(e));
        }
        assert_eq!(ErrorCode::parse("#BOGUS!"), None);
    }

    #[test]
    fn numeric_coercions() {
        assert_eq!(Scalar::Blank.to_number(), Ok(0.0));
        assert_eq!(Scalar::Bool(true).to_number(), Ok(1.0));
        assert_eq!(Scalar::Text("x".into()).to_number(), Err(ErrorCode::Value));
        assert_eq!(Scalar::Error(ErrorCode::Na).to_number(), Err(ErrorCode::Na));
    }

    #[test]
    fn number_display_is_shortest_round_trip() {
        assert_eq!(Scalar::Number(18.0).to_string(), "18");
        assert_eq!(Scalar::Number(0.1).to_string(), "0.1");
        assert_eq!(Scalar::Number(-2.5e-3).to_string(), "-0.0025");
    }

    #[test]
    fn one_by_one_arrays_demote_to_scalars() {
        let v = Value::Array(Array::from_numbers(1, 1, &[7.0]));
        assert_eq!(v.as_scalar(), Some(&Scalar::Number(7.0)));
        assert_eq!(v.to_number(), Ok(7.0));
        let m = Value::Array(Array::from_numbers(2, 1, &[1.0, 2.0]));
        assert_eq!(m.as_scalar(), None);
    }

    #[test]
    fn broadcast_element_access_stretches_unit_dims() {
        let row = Value::Array(Array::from_numbers(1, 3, &[1.0, 2.0, 3.0]));
        assert_eq!(row.at(5, 2), &Scalar::Number(3.0));
        let col = Value::Array(Array::from_numbers(2, 1, &[4.0, 5.0]));
        assert_eq!(col.at(1, 7), &Scalar::Number(5.0));
    }
}
