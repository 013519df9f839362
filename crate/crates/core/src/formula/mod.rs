//! The array-formula language: parsing, the expression tree, and the
//! canonical formatter. Evaluation lives in [`crate::engine`].

mod lexer;
mod parser;

pub use parser::{parse_formula, FormulaError};

use std::fmt;

/// A cell reference inside a formula. The `$` absolute markers carry no
/// evaluation semantics here (formulas are never copy-relocated) but are
/// preserved for round-tripping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRef {
    pub col: u32,
    pub row: u32,
    pub col_abs: bool,
    pub row_abs: bool,
}

impl CellRef {
    pub fn plain(col: u32, row: u32) -> Self {
        CellRef { col, row, col_abs: false, row_abs: false }
    }

    pub fn addr(&self) -> crate::addr::CellAddr {
        crate::addr::CellAddr::new(self.col, self.row)
    }
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.col_abs {
            f.write_str("$")?;
        }
        f.write_str(&crate::addr::col_to_letters(self.col))?;
        if self.row_abs {
            f.write_str("$")?;
        }
        write!(f, "{}", self.row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    /// Binding strength. Comparisons bind loosest; `^` binds tightest of
    /// the binary operators and associates to the right.
    pub fn precedence(&self) -> u8 {
        match self {
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 1,
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Mul | BinOp::Div => 3,
            BinOp::Pow => 4,
        }
    }

    pub fn right_assoc(&self) -> bool {
        matches!(self, BinOp::Pow)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Plus,
}

/// The closed builtin set. Anything else is rejected at parse time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Abs,
    Average,
    Exp,
    If,
    IsNumber,
    Max,
    Min,
    Minverse,
    Mmult,
    Mod,
    Offset,
    Rand,
    RandBetween,
    Stdev,
    Sum,
    Tanh,
    Transpose,
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Abs => "ABS",
            Builtin::Average => "AVERAGE",
            Builtin::Exp => "EXP",
            Builtin::If => "IF",
            Builtin::IsNumber => "ISNUMBER",
            Builtin::Max => "MAX",
            Builtin::Min => "MIN",
            Builtin::Minverse => "MINVERSE",
            Builtin::Mmult => "MMULT",
            Builtin::Mod => "MOD",
            Builtin::Offset => "OFFSET",
            Builtin::Rand => "RAND",
            Builtin::RandBetween => "RANDBETWEEN",
            Builtin::Stdev => "STDEV",
            Builtin::Sum => "SUM",
            Builtin::Tanh => "TANH",
            Builtin::Transpose => "TRANSPOSE",
        }
    }

    pub fn lookup(name: &str) -> Option<Builtin> {
        Some(match name.to_ascii_uppercase().as_str() {
            "ABS" => Builtin::Abs,
            "AVERAGE" => Builtin::Average,
            "EXP" => Builtin::Exp,
            "IF" => Builtin::If,
            "ISNUMBER" => Builtin::IsNumber,
            "MAX" => Builtin::Max,
            "MIN" => Builtin::Min,
            "MINVERSE" => Builtin::Minverse,
            "MMULT" => Builtin::Mmult,
            "MOD" => Builtin::Mod,
            "OFFSET" => Builtin::Offset,
            "RAND" => Builtin::Rand,
            "RANDBETWEEN" => Builtin::RandBetween,
            "STDEV" => Builtin::Stdev,
            "SUM" => Builtin::Sum,
            "TANH" => Builtin::Tanh,
            "TRANSPOSE" => Builtin::Transpose,
            _ => return None,
        })
    }

    /// Inclusive argument-count range.
    pub fn arity(&self) -> (usize, usize) {
        match self {
            Builtin::Rand => (0, 0),
            Builtin::Abs | Builtin::Exp | Builtin::IsNumber | Builtin::Minverse | Builtin::Tanh | Builtin::Transpose => (1, 1),
            Builtin::Mmult | Builtin::Mod | Builtin::RandBetween => (2, 2),
            Builtin::If => (3, 3),
            Builtin::Offset => (3, 5),
            Builtin::Average | Builtin::Max | Builtin::Min | Builtin::Stdev | Builtin::Sum => (1, usize::MAX),
        }
    }

    /// Whether empty argument slots (`OFFSET(TrData,itc,)`) are allowed,
    /// and from which position on.
    pub fn empty_args_from(&self) -> Option<usize> {
        match self {
            Builtin::Offset => Some(2),
            _ => None,
        }
    }

    pub fn draws_randomness(&self) -> bool {
        matches!(self, Builtin::Rand | Builtin::RandBetween)
    }
}

/// One argument slot of a call. `OFFSET` treats an empty slot as
/// "argument omitted"; every other builtin rejects empties at parse time.
#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Expr(Expr),
    Empty,
}

impl Arg {
    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            Arg::Expr(e) => Some(e),
            Arg::Empty => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Text(String),
    Bool(bool),
    Cell(CellRef),
    Range(CellRef, CellRef),
    /// A named range, stored with the case the author typed; resolution is
    /// case-insensitive.
    Name(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Builtin, Vec<Arg>),
}

impl Expr {
    /// True if a `RAND`/`RANDBETWEEN` call appears anywhere in the tree,
    /// including inside untaken `IF` branches.
    pub fn mentions_randomness(&self) -> bool {
        match self {
            Expr::Call(b, args) => {
                b.draws_randomness()
                    || args.iter().any(|a| match a {
                        Arg::Expr(e) => e.mentions_randomness(),
                        Arg::Empty => false,
                    })
            }
            Expr::Unary(_, e) => e.mentions_randomness(),
            Expr::Binary(_, l, r) => l.mentions_randomness() || r.mentions_randomness(),
            _ => false,
        }
    }
}

/// Formats the tree in canonical form: uppercase function names, no
/// whitespace, and the minimal parentheses that preserve the tree exactly.
/// `format(parse(format(e))) == format(e)` for every tree.
pub fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

/// Formats with the leading `=` used in workbook files and dumps.
pub fn format_formula(e: &Expr) -> String {
    format!("={}", format_expr(e))
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Number(v) => out.push_str(&format_number(*v)),
        Expr::Text(t) => {
            out.push('"');
            out.push_str(&t.replace('"', "\"\""));
            out.push('"');
        }
        Expr::Bool(b) => out.push_str(if *b { "TRUE" } else { "FALSE" }),
        Expr::Cell(c) => out.push_str(&c.to_string()),
        Expr::Range(a, b) => {
            out.push_str(&a.to_string());
            out.push(':');
            out.push_str(&b.to_string());
        }
        Expr::Name(n) => out.push_str(n),
        Expr::Unary(op, inner) => {
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Plus => '+',
            });
            // Unary binds tighter than any binary operator, so binary
            // operands need grouping: -(x^2) vs (-x)^2.
            if matches!(**inner, Expr::Binary(..)) {
                out.push('(');
                write_expr(out, inner);
                out.push(')');
            } else {
                write_expr(out, inner);
            }
        }
        Expr::Binary(op, l, r) => {
            write_operand(out, l, op, true);
            out.push_str(op.symbol());
            write_operand(out, r, op, false);
        }
        Expr::Call(b, args) => {
            out.push_str(b.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if let Arg::Expr(e) = a {
                    write_expr(out, e);
                }
            }
            out.push(')');
        }
    }
}

fn write_operand(out: &mut String, operand: &Expr, parent: &BinOp, is_left: bool) {
    let needs_parens = match operand {
        Expr::Binary(child, ..) => {
            let (c, p) = (child.precedence(), parent.precedence());
            if c != p {
                c < p
            } else if parent.right_assoc() {
                is_left // (a^b)^c needs parens, a^(b^c) prints bare
            } else {
                !is_left // a-(b-c) needs parens, (a-b)-c prints bare
            }
        }
        _ => false,
    };
    if needs_parens {
        out.push('(');
        write_expr(out, operand);
        out.push(')');
    } else {
        write_expr(out, operand);
    }
}

/// Numbers print in the shortest decimal form that parses back to the same
/// f64 (Rust's `Display`), which keeps emitted workbooks byte-stable.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(text: &str) -> String {
        format_expr(&parse_formula(text).unwrap())
    }

    #[test]
    fn canonical_form_is_a_fixpoint() {
        for t in [
            "IF(ru=0,RAND(),w_1B+eta*(TRANSPOSE(inpB)*del_1B))",
            "(targA-outA)*(1-outA^2)",
            "MMULT(TRANSPOSE(w_3A),delA)*(1-out_2A^2)",
            "1/(1+EXP(-MMULT(w_1A,inpA)))",
            "OFFSET(TrData,itc,)",
            "IF(S31:S32=0,R31:R32,0.4*R31:R32+0.6*S31:S32)",
            "2*RAND()-1",
            "-B2^2",
            "-(B2^2)",
            "MOD(itc+1,4)",
        ] {
            assert_eq!(round_trip(t), t, "canonical text should round-trip unchanged");
        }
    }

    #[test]
    fn redundant_parens_are_dropped_preserving_structure() {
        assert_eq!(round_trip("((A1))+((B1))"), "A1+B1");
        assert_eq!(round_trip("(A1+B1)+C1"), "A1+B1+C1");
        // Right-nested same-precedence grouping is structural, so it stays.
        assert_eq!(round_trip("A1+(B1+C1)"), "A1+(B1+C1)");
        assert_eq!(round_trip("A1-(B1-C1)"), "A1-(B1-C1)");
        assert_eq!(round_trip("(A1^B1)^C1"), "(A1^B1)^C1");
        assert_eq!(round_trip("A1^B1^C1"), "A1^B1^C1");
    }

    #[test]
    fn absolute_markers_survive() {
        assert_eq!(round_trip("IF($D$11=D30:D33,$P$18,E30:E33)"), "IF($D$11=D30:D33,$P$18,E30:E33)");
    }

    #[test]
    fn text_quotes_escape() {
        assert_eq!(round_trip("IF(ISNUMBER(SUM(ABS(C7:L7))),\"Yes\",\"No\")"), "IF(ISNUMBER(SUM(ABS(C7:L7))),\"Yes\",\"No\")");
        assert_eq!(round_trip("\"a\"\"b\""), "\"a\"\"b\"");
    }
}
