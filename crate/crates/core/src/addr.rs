//! A1-style cell addresses and rectangular ranges.
//!
//! Columns are bijective base-26 (`A`=1 … `Z`=26, `AA`=27, `DD`=108), rows
//! are 1-based. `$` markers are accepted when parsing and preserved only in
//! formula references (see [`crate::formula`]); plain addresses drop them.

use std::fmt;
use thiserror::Error;

/// Largest addressable column (`XFD`) and row, matching common spreadsheet
/// limits. The grid is sparse, so these only bound parsing and validation.
pub const MAX_COL: u32 = 16_384;
pub const MAX_ROW: u32 = 1_048_576;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AddrError {
    #[error("invalid cell address `{0}`")]
    BadAddress(String),
    #[error("invalid range `{0}`")]
    BadRange(String),
    #[error("address `{0}` is out of sheet bounds")]
    OutOfBounds(String),
}

/// A single cell position. Both coordinates are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellAddr {
    pub col: u32,
    pub row: u32,
}

impl CellAddr {
    pub fn new(col: u32, row: u32) -> Self {
        debug_assert!(col >= 1 && row >= 1);
        CellAddr { col, row }
    }

    /// Parses `A1`-style text, tolerating `$` markers.
    pub fn parse(text: &str) -> Result<Self, AddrError> {
        let (addr, _, _) = parse_with_abs(text)?;
        Ok(addr)
    }
}

/// Parses an address, returning `(addr, col_absolute, row_absolute)`.
pub fn parse_with_abs(text: &str) -> Result<(CellAddr, bool, bool), AddrError> {
    let bad = || AddrError::BadAddress(text.to_string());
    let bytes = text.as_bytes();
    let mut i = 0;
    let col_abs = bytes.first() == Some(&b'$');
    if col_abs {
        i += 1;
    }
    let letters_start = i;
    while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
        i += 1;
    }
    let letters = &text[letters_start..i];
    if letters.is_empty() || letters.len() > 3 {
        return Err(bad());
    }
    let row_abs = bytes.get(i) == Some(&b'$');
    if row_abs {
        i += 1;
    }
    let digits = &text[i..];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let col = col_from_letters(letters).ok_or_else(bad)?;
    let row: u32 = digits.parse().map_err(|_| bad())?;
    if row == 0 || row > MAX_ROW || col > MAX_COL {
        return Err(AddrError::OutOfBounds(text.to_string()));
    }
    Ok((CellAddr::new(col, row), col_abs, row_abs))
}

/// `A` → 1, `Z` → 26, `AA` → 27, … Case-insensitive.
pub fn col_from_letters(letters: &str) -> Option<u32> {
    let mut col: u32 = 0;
    for b in letters.bytes() {
        if !b.is_ascii_alphabetic() {
            return None;
        }
        col = col.checked_mul(26)? + (b.to_ascii_uppercase() - b'A' + 1) as u32;
    }
    (col >= 1).then_some(col)
}

/// 1 → `A`, 26 → `Z`, 27 → `AA`, 108 → `DD`.
pub fn col_to_letters(mut col: u32) -> String {
    debug_assert!(col >= 1);
    let mut out = Vec::new();
    while col > 0 {
        let rem = (col - 1) % 26;
        out.push(b'A' + rem as u8);
        col = (col - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

impl fmt::Display for CellAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", col_to_letters(self.col), self.row)
    }
}

/// A rectangular, inclusive cell range. Always stored normalized
/// (`start` is the top-left corner, `end` the bottom-right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RangeRef {
    pub start: CellAddr,
    pub end: CellAddr,
}

impl RangeRef {
    pub fn new(a: CellAddr, b: CellAddr) -> Self {
        RangeRef {
            start: CellAddr::new(a.col.min(b.col), a.row.min(b.row)),
            end: CellAddr::new(a.col.max(b.col), a.row.max(b.row)),
        }
    }

    pub fn cell(addr: CellAddr) -> Self {
        RangeRef { start: addr, end: addr }
    }

    /// Parses `A1` or `A1:B3`, tolerating `$` markers.
    pub fn parse(text: &str) -> Result<Self, AddrError> {
        match text.split_once(':') {
            None => Ok(RangeRef::cell(CellAddr::parse(text)?)),
            Some((a, b)) => {
                if a.is_empty() || b.is_empty() {
                    return Err(AddrError::BadRange(text.to_string()));
                }
                Ok(RangeRef::new(CellAddr::parse(a)?, CellAddr::parse(b)?))
            }
        }
    }

    pub fn rows(&self) -> u32 {
        self.end.row - self.start.row + 1
    }

    pub fn cols(&self) -> u32 {
        self.end.col - self.start.col + 1
    }

    pub fn is_cell(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, a: CellAddr) -> bool {
        a.col >= self.start.col && a.col <= self.end.col && a.row >= self.start.row && a.row <= self.end.row
    }

    pub fn overlaps(&self, other: &RangeRef) -> bool {
        self.start.col <= other.end.col
            && other.start.col <= self.end.col
            && self.start.row <= other.end.row
            && other.start.row <= self.end.row
    }

    /// Iterates cells top-to-bottom, left-to-right within each row.
    pub fn iter_row_major(&self) -> impl Iterator<Item = CellAddr> {
        let (c0, c1) = (self.start.col, self.end.col);
        let (r0, r1) = (self.start.row, self.end.row);
        (r0..=r1).flat_map(move |r| (c0..=c1).map(move |c| CellAddr::new(c, r)))
    }
}

impl fmt::Display for RangeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_cell() {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}", self.start, self.end)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_letters_round_trip() {
        for (letters, col) in [("A", 1), ("Z", 26), ("AA", 27), ("AZ", 52), ("BA", 53), ("DD", 108), ("XFD", 16_384)] {
            assert_eq!(col_from_letters(letters), Some(col), "{letters}");
            assert_eq!(col_to_letters(col), letters);
        }
    }

    #[test]
    fn parse_addresses() {
        assert_eq!(CellAddr::parse("B2").unwrap(), CellAddr::new(2, 2));
        assert_eq!(CellAddr::parse("DD485").unwrap(), CellAddr::new(108, 485));
        assert_eq!(CellAddr::parse("$D$11").unwrap(), CellAddr::new(4, 11));
        assert_eq!(CellAddr::parse("w365").unwrap(), CellAddr::new(23, 365));
        assert!(CellAddr::parse("A0").is_err());
        assert!(CellAddr::parse("1A").is_err());
        assert!(CellAddr::parse("ABCD1").is_err());
        assert!(CellAddr::parse("XFE1").is_err());
        assert!(CellAddr::parse("A1048577").is_err());
    }

    #[test]
    fn parse_ranges_normalize() {
        let r = RangeRef::parse("C3:B1").unwrap();
        assert_eq!(r.start, CellAddr::new(2, 1));
        assert_eq!(r.end, CellAddr::new(3, 3));
        assert_eq!(r.rows(), 3);
        assert_eq!(r.cols(), 2);
        assert_eq!(r.to_string(), "B1:C3");
        assert_eq!(RangeRef::parse("A1").unwrap().to_string(), "A1");
    }

    #[test]
    fn row_major_iteration_order() {
        let r = RangeRef::parse("B2:C3").unwrap();
        let cells: Vec<String> = r.iter_row_major().map(|c| c.to_string()).collect();
        assert_eq!(cells, ["B2", "C2", "B3", "C3"]);
    }

    #[test]
    fn overlap_and_containment() {
        let a = RangeRef::parse("B2:D4").unwrap();
        assert!(a.contains(CellAddr::parse("C3").unwrap()));
        assert!(!a.contains(CellAddr::parse("E2").unwrap()));
        assert!(a.overlaps(&RangeRef::parse("D4:F6").unwrap()));
        assert!(!a.overlaps(&RangeRef::parse("E2:F6").unwrap()));
    }
}
