//! Positioned diagnostics with stable error codes.

use std::fmt;

use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub const START: Pos = Pos { line: 1, col: 1 };

    pub fn new(line: usize, col: usize) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Source position attached to syntax nodes. It never takes part in
/// equality, so trees parsed from differently formatted text compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Loc(pub Pos);

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    UnexpectedChar,
    MalformedNumber,
    UnexpectedToken,
    UnknownSymbol,
    UnknownSpace,
    SymbolSpaceMismatch,
    DuplicateName,
    UndefinedName,
    Arity,
    NonUnitary,
    NonHermitian,
    Top,
    Composition,
    InvalidSpace,
    WrongKind,
    InvalidClass,
    InvalidOperand,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::UnexpectedChar => "E001",
            Code::MalformedNumber => "E002",
            Code::UnexpectedToken => "E101",
            Code::UnknownSymbol => "E102",
            Code::UnknownSpace => "E103",
            Code::SymbolSpaceMismatch => "E104",
            Code::DuplicateName => "E201",
            Code::UndefinedName => "E202",
            Code::Arity => "E203",
            Code::NonUnitary => "E204",
            Code::NonHermitian => "E205",
            Code::Top => "E206",
            Code::Composition => "E207",
            Code::InvalidSpace => "E208",
            Code::WrongKind => "E209",
            Code::InvalidClass => "E210",
            Code::InvalidOperand => "E211",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pos}: error[{code}]: {message}")]
pub struct Diagnostic {
    pub code: Code,
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: Code, pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            pos,
            message: message.into(),
        }
    }

    /// `source:line:col: error[E###]: message`.
    pub fn render(&self, source: &str) -> String {
        format!("{source}:{self}")
    }
}

pub type Result<T> = std::result::Result<T, Diagnostic>;
