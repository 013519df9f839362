//! Tokenizer for the formula language.

use super::CellRef;
use crate::addr::{col_from_letters, MAX_COL, MAX_ROW};

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Token {
    Number(f64),
    Text(String),
    Bool(bool),
    /// A candidate cell reference (letters then digits, optional `$`s).
    Cell(CellRef),
    /// Any other identifier: function name or named range.
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LParen,
    RParen,
    Comma,
    Colon,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct SpannedToken {
    pub tok: Token,
    pub pos: usize,
}

pub(super) fn tokenize(text: &str) -> Result<Vec<SpannedToken>, super::FormulaError> {
    use super::FormulaError;
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let b = bytes[i];
        let tok = match b {
            b' ' | b'\t' => {
                i += 1;
                continue;
            }
            b'+' => {
                i += 1;
                Token::Plus
            }
            b'-' => {
                i += 1;
                Token::Minus
            }
            b'*' => {
                i += 1;
                Token::Star
            }
            b'/' => {
                i += 1;
                Token::Slash
            }
            b'^' => {
                i += 1;
                Token::Caret
            }
            b'(' => {
                i += 1;
                Token::LParen
            }
            b')' => {
                i += 1;
                Token::RParen
            }
            b',' => {
                i += 1;
                Token::Comma
            }
            b':' => {
                i += 1;
                Token::Colon
            }
            b'=' => {
                i += 1;
                Token::Eq
            }
            b'<' => {
                i += 1;
                if bytes.get(i) == Some(&b'>') {
                    i += 1;
                    Token::Ne
                } else if bytes.get(i) == Some(&b'=') {
                    i += 1;
                    Token::Le
                } else {
                    Token::Lt
                }
            }
            b'>' => {
                i += 1;
                if bytes.get(i) == Some(&b'=') {
                    i += 1;
                    Token::Ge
                } else {
                    Token::Gt
                }
            }
            b'"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    match bytes.get(i) {
                        None => return Err(FormulaError::Syntax { pos: start, msg: "unterminated string literal".into() }),
                        Some(b'"') if bytes.get(i + 1) == Some(&b'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some(b'"') => {
                            i += 1;
                            break;
                        }
                        Some(_) => {
                            // Strings are UTF-8; advance one char at a time.
                            let ch = text[i..].chars().next().unwrap();
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                Token::Text(s)
            }
            b'0'..=b'9' | b'.' => {
                let (v, len) = lex_number(&text[i..])
                    .ok_or_else(|| FormulaError::Syntax { pos: start, msg: "malformed number".into() })?;
                i += len;
                Token::Number(v)
            }
            b'$' | b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                let mut j = i;
                if bytes[j] == b'$' {
                    j += 1;
                }
                while j < bytes.len() && matches!(bytes[j], b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'_' | b'.' | b'$') {
                    j += 1;
                }
                let word = &text[i..j];
                i = j;
                classify_word(word).ok_or_else(|| FormulaError::Syntax { pos: start, msg: format!("unrecognized token `{word}`") })?
            }
            _ => {
                return Err(FormulaError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
                })
            }
        };
        toks.push(SpannedToken { tok, pos: start });
    }
    Ok(toks)
}

/// Number literal: digits with optional fraction and exponent. The lexer
/// never consumes a sign (unary operators handle that).
fn lex_number(s: &str) -> Option<(f64, usize)> {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i == 0 || s[..i].bytes().all(|b| b == b'.') {
        return None;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let digits_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > digits_start {
            i = j;
        }
    }
    s[..i].parse().ok().map(|v| (v, i))
}

/// Distinguishes cell references from identifiers: one to three letters
/// followed by digits (with optional `$` markers) is a cell reference when
/// it lands inside the sheet bounds; everything else is an identifier.
fn classify_word(word: &str) -> Option<Token> {
    match word.to_ascii_uppercase().as_str() {
        "TRUE" => return Some(Token::Bool(true)),
        "FALSE" => return Some(Token::Bool(false)),
        _ => {}
    }
    if let Some(cell) = parse_cell_word(word) {
        return Some(Token::Cell(cell));
    }
    if word.contains('$') {
        return None; // `$` is only legal inside cell references
    }
    Some(Token::Ident(word.to_string()))
}

fn parse_cell_word(word: &str) -> Option<CellRef> {
    let bytes = word.as_bytes();
    let mut i = 0;
    let col_abs = bytes.first() == Some(&b'$');
    if col_abs {
        i += 1;
    }
    let letters_start = i;
    while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
        i += 1;
    }
    let letters = &word[letters_start..i];
    if letters.is_empty() || letters.len() > 3 {
        return None;
    }
    let row_abs = bytes.get(i) == Some(&b'$');
    if row_abs {
        i += 1;
    }
    let digits = &word[i..];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let col = col_from_letters(letters)?;
    let row: u32 = digits.parse().ok()?;
    if row == 0 || row > MAX_ROW || col > MAX_COL {
        return None;
    }
    Some(CellRef { col, row, col_abs, row_abs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Token> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn cells_vs_identifiers() {
        assert_eq!(toks("W365"), [Token::Cell(CellRef::plain(23, 365))]);
        assert_eq!(toks("w_1A"), [Token::Ident("w_1A".into())]);
        assert_eq!(toks("TrData"), [Token::Ident("TrData".into())]);
        assert_eq!(
            toks("$D$11"),
            [Token::Cell(CellRef { col: 4, row: 11, col_abs: true, row_abs: true })]
        );
        // Four letters can't be a column, so this is a name.
        assert_eq!(toks("ABCD1"), [Token::Ident("ABCD1".into())]);
    }

    #[test]
    fn numbers_including_scientific() {
        assert_eq!(toks("2.29646E-15"), [Token::Number(2.29646e-15)]);
        assert_eq!(toks("0.4"), [Token::Number(0.4)]);
        assert_eq!(toks(".5"), [Token::Number(0.5)]);
        // `1e` is number 1 followed by identifier `e`, not an exponent.
        assert_eq!(toks("1e"), [Token::Number(1.0), Token::Ident("e".into())]);
    }

    #[test]
    fn comparison_operators() {
        assert_eq!(toks("<><=>="), [Token::Ne, Token::Le, Token::Ge]);
        assert_eq!(toks("a<b"), [Token::Ident("a".into()), Token::Lt, Token::Ident("b".into())]);
    }

    #[test]
    fn strings_with_escapes() {
        assert_eq!(toks("\"Yes\""), [Token::Text("Yes".into())]);
        assert_eq!(toks("\"a\"\"b\""), [Token::Text("a\"b".into())]);
        assert!(tokenize("\"open").is_err());
    }
}
