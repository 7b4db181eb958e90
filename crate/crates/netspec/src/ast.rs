//! Syntax trees for operator expressions and network documents.

use crate::diag::Loc;

/// Literal as written: real, imaginary (`2i`) or complex (`(1-2i)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Number {
    Real(f64),
    Imag(f64),
    Complex(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Number, Loc),
    /// `name@label`.
    Symbol { name: String, label: String, loc: Loc },
    Sum(Box<Expr>, Box<Expr>),
    Diff(Box<Expr>, Box<Expr>),
    Prod(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32, Loc),
    Neg(Box<Expr>, Loc),
    Adj(Box<Expr>, Loc),
}

impl Expr {
    pub fn loc(&self) -> Loc {
        match self {
            Expr::Num(_, loc) | Expr::Symbol { loc, .. } | Expr::Neg(_, loc) | Expr::Adj(_, loc) => *loc,
            Expr::Sum(a, _) | Expr::Diff(a, _) | Expr::Prod(a, _) | Expr::Pow(a, _, _) => a.loc(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Name {
    pub text: String,
    pub loc: Loc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceKind {
    Fock(usize),
    Qubit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: Vec<Vec<Expr>>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct List {
    pub items: Vec<Expr>,
    pub loc: Loc,
}

/// `{ S = …; L = …; H = … }`; omitted fields default to the identity,
/// no channels and a zero Hamiltonian.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TripleBody {
    pub s: Option<Matrix>,
    pub l: Option<List>,
    pub h: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExoDef {
    /// `trivial(n)`.
    Trivial { channels: usize, loc: Loc },
    /// `amplitudes(n [, grid = […]] [, K = […]])`.
    Amplitudes {
        channels: usize,
        grid: Option<Vec<f64>>,
        coupling: Option<List>,
        loc: Loc,
    },
    /// Operator-valued member given as a triple.
    Block(TripleBody),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Composition {
    Boxplus(Name, Name),
    /// `A series B` is `A ◁ B`: the outputs of `B` drive `A`.
    Series(Name, Name),
    /// `lft(A, k)` keeps the first `k` channels open and closes the rest.
    Lft(Name, usize, Loc),
    /// `wedge(A, B [, K = […], v = […]])`.
    Wedge {
        plant: Name,
        exo: Name,
        coupling: Option<(List, List)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Space { name: Name, kind: SpaceKind, loc: Loc },
    System { name: Name, body: TripleBody },
    Exosystem { name: Name, def: ExoDef },
    Observable { name: Name, expr: Expr },
    Compose { name: Name, def: Composition },
    Top(Name),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub items: Vec<Item>,
    /// Position just past the last token.
    pub end: Loc,
}
