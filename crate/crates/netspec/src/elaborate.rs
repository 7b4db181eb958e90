//! Turns a parsed document into core objects, validating names, arity,
//! unitarity and Hermiticity along the way.

use std::collections::BTreeMap;

use slh_core::dissipation::{AmplitudeGrid, Exosystem, ExosystemClass};
use slh_core::network::{concatenate, lft, series, wedge_series};
use slh_core::standard::{fock_ops, qubit_ops, FockOps, QubitOps};
use slh_core::{ChannelPartition, Complex64, DirectCoupling, Error as CoreError, Factor, Operator, SlhTriple};

use crate::ast::{Composition, Document, ExoDef, Expr, Item, List, Name, Number, SpaceKind, TripleBody};
use crate::diag::{Code, Diagnostic, Loc, Pos, Result};
use crate::parser::{parse_document, Parser};

const FOCK_SYMBOLS: [&str; 4] = ["a", "adag", "n", "id"];
const QUBIT_SYMBOLS: [&str; 6] = ["id", "sx", "sy", "sz", "sp", "sm"];

#[derive(Debug, Clone)]
enum SpaceOps {
    Fock(FockOps),
    Qubit(QubitOps),
}

impl SpaceOps {
    fn get(&self, name: &str) -> Option<&Operator> {
        match self {
            SpaceOps::Fock(f) => f.get(name),
            SpaceOps::Qubit(q) => q.get(name),
        }
    }

    fn factor(&self) -> &Factor {
        match self {
            SpaceOps::Fock(f) => &f.space().factors()[0],
            SpaceOps::Qubit(q) => &q.space().factors()[0],
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            SpaceOps::Fock(_) => "fock",
            SpaceOps::Qubit(_) => "qubit",
        }
    }
}

/// Declared operator spaces, keyed by label.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    spaces: BTreeMap<String, SpaceOps>,
    order: Vec<String>,
}

fn at(loc: Loc) -> Pos {
    loc.0
}

fn operand_error(loc: Loc, err: CoreError) -> Diagnostic {
    Diagnostic::new(Code::InvalidOperand, at(loc), err.to_string())
}

impl Scope {
    fn declare(&mut self, name: &Name, kind: SpaceKind, loc: Loc) -> Result<()> {
        if self.spaces.contains_key(&name.text) {
            return Err(Diagnostic::new(
                Code::DuplicateName,
                at(name.loc),
                format!("space `{}` declared twice", name.text),
            ));
        }
        let ops = match kind {
            SpaceKind::Qubit => SpaceOps::Qubit(qubit_ops(&name.text)),
            SpaceKind::Fock(d) => SpaceOps::Fock(
                fock_ops(&name.text, d).map_err(|e| Diagnostic::new(Code::InvalidSpace, at(loc), e.to_string()))?,
            ),
        };
        self.spaces.insert(name.text.clone(), ops);
        self.order.push(name.text.clone());
        Ok(())
    }

    /// Factors in declaration order.
    pub fn factors(&self) -> Vec<Factor> {
        self.order.iter().map(|l| self.spaces[l].factor().clone()).collect()
    }

    pub fn factor(&self, label: &str) -> Option<&Factor> {
        self.spaces.get(label).map(SpaceOps::factor)
    }

    /// Number operator for Fock factors, `σz` for qubits.
    pub fn population(&self, label: &str) -> Option<(String, Operator)> {
        let ops = self.spaces.get(label)?;
        Some(match ops {
            SpaceOps::Fock(f) => (format!("n@{label}"), f.n.clone()),
            SpaceOps::Qubit(q) => (format!("sz@{label}"), q.sz.clone()),
        })
    }

    pub fn eval(&self, e: &Expr) -> Result<Operator> {
        match e {
            Expr::Num(n, _) => Ok(Operator::scalar(match *n {
                Number::Real(x) => Complex64::new(x, 0.0),
                Number::Imag(x) => Complex64::new(0.0, x),
                Number::Complex(re, im) => Complex64::new(re, im),
            })),
            Expr::Symbol { name, label, loc } => {
                if !FOCK_SYMBOLS.contains(&name.as_str()) && !QUBIT_SYMBOLS.contains(&name.as_str()) {
                    return Err(Diagnostic::new(
                        Code::UnknownSymbol,
                        at(*loc),
                        format!("unknown operator symbol `{name}`"),
                    ));
                }
                let ops = self.spaces.get(label).ok_or_else(|| {
                    Diagnostic::new(Code::UnknownSpace, at(*loc), format!("space `{label}` is not declared"))
                })?;
                ops.get(name).cloned().ok_or_else(|| {
                    Diagnostic::new(
                        Code::SymbolSpaceMismatch,
                        at(*loc),
                        format!("`{name}` is not defined on the {} space `{label}`", ops.kind()),
                    )
                })
            }
            Expr::Sum(a, b) => self.eval(a)?.try_add(&self.eval(b)?).map_err(|err| operand_error(e.loc(), err)),
            Expr::Diff(a, b) => self
                .eval(a)?
                .try_add(&self.eval(b)?.scale_real(-1.0))
                .map_err(|err| operand_error(e.loc(), err)),
            Expr::Prod(a, b) => self.eval(a)?.try_mul(&self.eval(b)?).map_err(|err| operand_error(e.loc(), err)),
            Expr::Pow(a, k, _) => Ok(self.eval(a)?.pow(*k)),
            Expr::Neg(a, _) => Ok(self.eval(a)?.scale_real(-1.0)),
            Expr::Adj(a, _) => Ok(self.eval(a)?.adjoint()),
        }
    }

    /// Parses and evaluates a standalone expression such as a command-line
    /// argument.
    pub fn eval_text(&self, text: &str) -> Result<Operator> {
        let mut p = Parser::new(text)?;
        let e = p.expr()?;
        p.finish()?;
        self.eval(&e)
    }

    fn eval_list(&self, list: &List) -> Result<Vec<Operator>> {
        list.items.iter().map(|e| self.eval(e)).collect()
    }
}

/// Named exosystem class as declared.
#[derive(Debug, Clone)]
pub enum ExoEntry {
    Class(ExosystemClass),
    /// Operator-valued member; also usable as a system in compositions.
    Member(SlhTriple),
}

#[derive(Debug, Clone)]
pub enum Entity {
    System(SlhTriple),
    Exosystem(ExoEntry),
    Observable(Operator),
}

impl Entity {
    fn kind(&self) -> &'static str {
        match self {
            Entity::System(_) => "system",
            Entity::Exosystem(_) => "exosystem",
            Entity::Observable(_) => "observable",
        }
    }

    fn as_triple(&self) -> Option<&SlhTriple> {
        match self {
            Entity::System(g) | Entity::Exosystem(ExoEntry::Member(g)) => Some(g),
            _ => None,
        }
    }
}

/// A validated document.
#[derive(Debug, Clone)]
pub struct Model {
    pub scope: Scope,
    entities: BTreeMap<String, Entity>,
    top: String,
}

impl Model {
    pub fn top_name(&self) -> &str {
        &self.top
    }

    pub fn top(&self) -> &SlhTriple {
        self.entities[&self.top].as_triple().expect("top is a system")
    }

    pub fn get(&self, name: &str) -> Option<&Entity> {
        self.entities.get(name)
    }

    pub fn system(&self, name: &str) -> Option<&SlhTriple> {
        self.entities.get(name).and_then(Entity::as_triple)
    }

    pub fn observable(&self, name: &str) -> Option<&Operator> {
        match self.entities.get(name) {
            Some(Entity::Observable(v)) => Some(v),
            _ => None,
        }
    }

    /// Exosystem class by name; an operator-valued exosystem is a one-member
    /// class.
    pub fn class(&self, name: &str) -> Option<ExosystemClass> {
        match self.entities.get(name) {
            Some(Entity::Exosystem(ExoEntry::Class(c))) => Some(c.clone()),
            Some(Entity::Exosystem(ExoEntry::Member(g))) => {
                Some(ExosystemClass::OperatorFamily(vec![Exosystem::new(g.clone(), None)]))
            }
            _ => None,
        }
    }

    /// A declared observable name, or else an expression over the declared
    /// spaces.
    pub fn operator(&self, text: &str) -> Result<Operator> {
        match self.observable(text.trim()) {
            Some(v) => Ok(v.clone()),
            None => self.scope.eval_text(text),
        }
    }
}

fn triple_error(err: CoreError, body: &TripleBody, name: &Name) -> Diagnostic {
    let s_pos = body.s.as_ref().map_or(at(name.loc), |s| at(s.loc));
    let h_pos = body.h.as_ref().map_or(at(name.loc), |h| at(h.loc()));
    match err {
        CoreError::NonUnitary { .. } => Diagnostic::new(Code::NonUnitary, s_pos, err.to_string()),
        CoreError::NonHermitianHamiltonian { .. } => Diagnostic::new(Code::NonHermitian, h_pos, err.to_string()),
        CoreError::ChannelMismatch { .. } => Diagnostic::new(Code::Arity, s_pos, err.to_string()),
        other => Diagnostic::new(Code::InvalidOperand, at(name.loc), other.to_string()),
    }
}

fn build_triple(scope: &Scope, name: &Name, body: &TripleBody) -> Result<SlhTriple> {
    let l = match &body.l {
        Some(list) => scope.eval_list(list)?,
        None => Vec::new(),
    };
    let h = match &body.h {
        Some(h) => scope.eval(h)?,
        None => Operator::real(0.0),
    };
    let s = match &body.s {
        Some(m) => {
            let n = if body.l.is_some() { l.len() } else { m.rows.len() };
            if m.rows.len() != n {
                return Err(Diagnostic::new(
                    Code::Arity,
                    at(m.loc),
                    format!("S has {} rows but the system has {n} channels", m.rows.len()),
                ));
            }
            if let Some((i, row)) = m.rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                return Err(Diagnostic::new(
                    Code::Arity,
                    at(m.loc),
                    format!("row {} of S has {} entries, expected {n}", i + 1, row.len()),
                ));
            }
            let rows: Vec<Vec<Operator>> = m
                .rows
                .iter()
                .map(|r| r.iter().map(|e| scope.eval(e)).collect::<Result<_>>())
                .collect::<Result<_>>()?;
            Some((rows, n))
        }
        None => None,
    };
    let result = match s {
        Some((rows, n)) => {
            let l = if body.l.is_some() { l } else { vec![Operator::real(0.0); n] };
            SlhTriple::new(rows, l, h)
        }
        None => SlhTriple::with_coupling(l, h),
    };
    result.map_err(|e| triple_error(e, body, name))
}

fn composition_error(name: &Name, e: CoreError) -> Diagnostic {
    Diagnostic::new(Code::Composition, at(name.loc), e.to_string())
}

struct Builder {
    scope: Scope,
    entities: BTreeMap<String, Entity>,
    top: Option<String>,
}

impl Builder {
    fn define(&mut self, name: &Name, entity: Entity) -> Result<()> {
        if self.entities.contains_key(&name.text) {
            return Err(Diagnostic::new(
                Code::DuplicateName,
                at(name.loc),
                format!("`{}` is already defined", name.text),
            ));
        }
        self.entities.insert(name.text.clone(), entity);
        Ok(())
    }

    fn lookup(&self, name: &Name) -> Result<&Entity> {
        self.entities.get(&name.text).ok_or_else(|| {
            Diagnostic::new(Code::UndefinedName, at(name.loc), format!("`{}` is not defined", name.text))
        })
    }

    fn triple(&self, name: &Name) -> Result<&SlhTriple> {
        let e = self.lookup(name)?;
        e.as_triple().ok_or_else(|| {
            Diagnostic::new(
                Code::WrongKind,
                at(name.loc),
                format!("`{}` is an {}, expected a system", name.text, e.kind()),
            )
        })
    }

    fn compose(&self, def: &Composition) -> Result<SlhTriple> {
        match def {
            Composition::Boxplus(a, b) => concatenate(self.triple(a)?, self.triple(b)?).map_err(|e| composition_error(a, e)),
            Composition::Series(a, b) => series(self.triple(a)?, self.triple(b)?).map_err(|e| composition_error(a, e)),
            Composition::Lft(a, k, loc) => {
                let g = self.triple(a)?;
                let n = g.channels();
                if *k > n {
                    return Err(Diagnostic::new(
                        Code::Arity,
                        at(*loc),
                        format!("cannot keep {k} channels of a {n}-channel system"),
                    ));
                }
                lft(g, ChannelPartition::new(*k, n - k)).map_err(|e| composition_error(a, e))
            }
            Composition::Wedge { plant, exo, coupling } => {
                let p = self.triple(plant)?;
                let w = self.triple(exo)?;
                let direct = match coupling {
                    Some((k, v)) => {
                        if k.items.len() != v.items.len() {
                            return Err(Diagnostic::new(
                                Code::Arity,
                                at(v.loc),
                                format!("K has {} entries but v has {}", k.items.len(), v.items.len()),
                            ));
                        }
                        let dc = DirectCoupling::new(self.scope.eval_list(k)?, self.scope.eval_list(v)?)
                            .map_err(|e| composition_error(plant, e))?;
                        Some(dc)
                    }
                    None => None,
                };
                wedge_series(p, w, direct.as_ref()).map_err(|e| composition_error(plant, e))
            }
        }
    }

    fn exo(&self, name: &Name, def: &ExoDef) -> Result<ExoEntry> {
        match def {
            ExoDef::Trivial { channels, .. } => Ok(ExoEntry::Class(ExosystemClass::Trivial { channels: *channels })),
            ExoDef::Amplitudes {
                channels,
                grid,
                coupling,
                loc,
            } => {
                if grid.as_ref().is_some_and(Vec::is_empty) {
                    return Err(Diagnostic::new(Code::InvalidClass, at(*loc), "amplitude grid is empty"));
                }
                let coupling = coupling.as_ref().map(|k| self.scope.eval_list(k)).transpose()?;
                Ok(ExoEntry::Class(ExosystemClass::ScalarAmplitudes {
                    channels: *channels,
                    grid: grid.clone().map(AmplitudeGrid::new).unwrap_or_default(),
                    coupling,
                }))
            }
            ExoDef::Block(body) => Ok(ExoEntry::Member(build_triple(&self.scope, name, body)?)),
        }
    }
}

/// Validates a parsed document.
pub fn elaborate(doc: &Document) -> Result<Model> {
    let mut b = Builder {
        scope: Scope::default(),
        entities: BTreeMap::new(),
        top: None,
    };
    for item in &doc.items {
        match item {
            Item::Space { name, kind, loc } => b.scope.declare(name, *kind, *loc)?,
            Item::System { name, body } => {
                let g = build_triple(&b.scope, name, body)?;
                b.define(name, Entity::System(g))?;
            }
            Item::Exosystem { name, def } => {
                let e = b.exo(name, def)?;
                b.define(name, Entity::Exosystem(e))?;
            }
            Item::Observable { name, expr } => {
                let v = b.scope.eval(expr)?;
                b.define(name, Entity::Observable(v))?;
            }
            Item::Compose { name, def } => {
                let g = b.compose(def)?;
                b.define(name, Entity::System(g))?;
            }
            Item::Top(name) => {
                if b.top.is_some() {
                    return Err(Diagnostic::new(Code::Top, at(name.loc), "more than one `top` declaration"));
                }
                b.triple(name)?;
                b.top = Some(name.text.clone());
            }
        }
    }
    let top = b
        .top
        .ok_or_else(|| Diagnostic::new(Code::Top, at(doc.end), "missing `top` declaration"))?;
    Ok(Model {
        scope: b.scope,
        entities: b.entities,
        top,
    })
}

/// Parses and validates a document.
pub fn load(src: &str) -> Result<Model> {
    elaborate(&parse_document(src)?)
}
