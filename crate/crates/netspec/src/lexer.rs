//! Tokenizer for network documents and operator expressions.

use crate::diag::{Code, Diagnostic, Pos, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Unsigned literal; `imag` marks a trailing `i`. `integer` is set when
    /// the text is a bare digit string.
    Number { value: f64, imag: bool, integer: bool },
    /// `(re±imi)` written without interior whitespace.
    Complex { re: f64, im: f64 },
    At,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Eq,
    Plus,
    Minus,
    Star,
    Caret,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number { .. } | Tok::Complex { .. } => "number".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::At => "@",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Caret => "^",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Cursor {
    chars: Vec<char>,
    at: usize,
    line: usize,
    col: usize,
}

impl Cursor {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.at + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.at += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Length of an unsigned float starting at `chars[0]`, if any.
fn float_len(chars: &[char]) -> std::result::Result<Option<usize>, usize> {
    let mut k = 0;
    while chars.get(k).is_some_and(|c| c.is_ascii_digit()) {
        k += 1;
    }
    let int_digits = k;
    if chars.get(k) == Some(&'.') {
        k += 1;
        let start = k;
        while chars.get(k).is_some_and(|c| c.is_ascii_digit()) {
            k += 1;
        }
        if int_digits == 0 && k == start {
            return Ok(None);
        }
        if k == start {
            return Err(k);
        }
    } else if int_digits == 0 {
        return Ok(None);
    }
    if matches!(chars.get(k), Some('e' | 'E')) {
        let mut j = k + 1;
        if matches!(chars.get(j), Some('+' | '-')) {
            j += 1;
        }
        let start = j;
        while chars.get(j).is_some_and(|c| c.is_ascii_digit()) {
            j += 1;
        }
        if j == start {
            return Err(j);
        }
        k = j;
    }
    Ok(Some(k))
}

fn parse_float(chars: &[char]) -> f64 {
    chars.iter().collect::<String>().parse().expect("validated float text")
}

/// Recognizes `(re±imi)` with optional leading `-` on `re` and no spaces.
fn complex_literal(chars: &[char]) -> Option<(usize, f64, f64)> {
    let mut k = 1;
    let neg_re = chars.get(k) == Some(&'-');
    if neg_re {
        k += 1;
    }
    let n = float_len(&chars[k..]).ok()??;
    let mut re = parse_float(&chars[k..k + n]);
    if neg_re {
        re = -re;
    }
    k += n;
    let neg_im = match chars.get(k)? {
        '+' => false,
        '-' => true,
        _ => return None,
    };
    k += 1;
    let n = float_len(&chars[k..]).ok()??;
    let mut im = parse_float(&chars[k..k + n]);
    if neg_im {
        im = -im;
    }
    k += n;
    if chars.get(k) != Some(&'i') || chars.get(k + 1) != Some(&')') {
        return None;
    }
    Some((k + 2, re, im))
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut cur = Cursor {
        chars: src.chars().collect(),
        at: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        while let Some(c) = cur.peek(0) {
            if c == '#' {
                while cur.peek(0).is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else if c.is_whitespace() {
                cur.bump();
            } else {
                break;
            }
        }
        let pos = cur.pos();
        let Some(c) = cur.peek(0) else {
            out.push(Token { tok: Tok::Eof, pos });
            return Ok(out);
        };
        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(c) = cur.peek(0).filter(|c| is_ident_char(*c)) {
                s.push(c);
                cur.bump();
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() || (c == '.' && cur.peek(1).is_some_and(|d| d.is_ascii_digit())) {
            let rest = &cur.chars[cur.at..];
            let n = match float_len(rest) {
                Ok(Some(n)) => n,
                Ok(None) | Err(_) => return Err(Diagnostic::new(Code::MalformedNumber, pos, "malformed number")),
            };
            let integer = rest[..n].iter().all(|c| c.is_ascii_digit());
            let value = parse_float(&rest[..n]);
            let imag = rest.get(n) == Some(&'i') && !rest.get(n + 1).is_some_and(|c| is_ident_char(*c));
            if rest.get(n).is_some_and(|c| is_ident_char(*c) || *c == '.') && !imag {
                return Err(Diagnostic::new(Code::MalformedNumber, pos, "malformed number"));
            }
            for _ in 0..n + usize::from(imag) {
                cur.bump();
            }
            Tok::Number { value, imag, integer }
        } else if c == '(' {
            if let Some((n, re, im)) = complex_literal(&cur.chars[cur.at..]) {
                for _ in 0..n {
                    cur.bump();
                }
                Tok::Complex { re, im }
            } else {
                cur.bump();
                Tok::LParen
            }
        } else {
            let tok = match c {
                '@' => Tok::At,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '^' => Tok::Caret,
                other => {
                    return Err(Diagnostic::new(
                        Code::UnexpectedChar,
                        pos,
                        format!("unexpected character `{other}`"),
                    ))
                }
            };
            cur.bump();
            tok
        };
        out.push(Token { tok, pos });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_complex_literals() {
        assert_eq!(
            toks("2 1.5e-3i (1-2i) ( 1"),
            vec![
                Tok::Number { value: 2.0, imag: false, integer: true },
                Tok::Number { value: 1.5e-3, imag: true, integer: false },
                Tok::Complex { re: 1.0, im: -2.0 },
                Tok::LParen,
                Tok::Number { value: 1.0, imag: false, integer: true },
                Tok::Eof
            ]
        );
        assert_eq!(toks("(-0.5+.25i)")[0], Tok::Complex { re: -0.5, im: 0.25 });
    }

    #[test]
    fn positions_skip_comments() {
        let t = tokenize("# note\n  a@cav").unwrap();
        assert_eq!(t[0].pos, Pos::new(2, 3));
        assert_eq!(t[1].pos, Pos::new(2, 4));
        assert_eq!(t[2].pos, Pos::new(2, 5));
    }

    #[test]
    fn rejects_bad_input() {
        let e = tokenize("a $").unwrap_err();
        assert_eq!((e.code, e.pos), (Code::UnexpectedChar, Pos::new(1, 3)));
        let e = tokenize("\n 1e+").unwrap_err();
        assert_eq!((e.code, e.pos), (Code::MalformedNumber, Pos::new(2, 2)));
        assert_eq!(tokenize("2x").unwrap_err().code, Code::MalformedNumber);
    }
}
