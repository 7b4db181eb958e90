//! Composite Hilbert spaces built from labeled tensor factors.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorKind {
    Qubit,
    /// Truncated oscillator; the dimension is the number of retained levels.
    Fock,
    Custom,
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorKind::Qubit => f.write_str("qubit"),
            FactorKind::Fock => f.write_str("fock"),
            FactorKind::Custom => f.write_str("custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    label: String,
    dim: usize,
    kind: FactorKind,
}

impl Factor {
    pub fn new(label: impl Into<String>, dim: usize, kind: FactorKind) -> Result<Self> {
        let label = label.into();
        match kind {
            FactorKind::Qubit if dim != 2 => {
                return Err(Error::InvalidDimension {
                    label,
                    dim,
                    reason: "qubit factors have dimension 2",
                })
            }
            FactorKind::Fock if dim < 2 => {
                return Err(Error::InvalidDimension {
                    label,
                    dim,
                    reason: "fock truncation needs at least 2 levels",
                })
            }
            FactorKind::Custom if dim == 0 => {
                return Err(Error::InvalidDimension {
                    label,
                    dim,
                    reason: "dimension must be positive",
                })
            }
            _ => {}
        }
        Ok(Self { label, dim, kind })
    }

    pub fn qubit(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            dim: 2,
            kind: FactorKind::Qubit,
        }
    }

    pub fn fock(label: impl Into<String>, levels: usize) -> Result<Self> {
        Self::new(label, levels, FactorKind::Fock)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FactorKind::Qubit => write!(f, "{}(qubit)", self.label),
            kind => write!(f, "{}({} {})", self.label, kind, self.dim),
        }
    }
}

/// Ordered tensor product of labeled factors. The empty space has dimension 1
/// and carries scalars.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
}

impl HilbertSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::DuplicateLabel(f.label.clone()));
            }
        }
        Ok(Self { factors })
    }

    /// The one-dimensional space of scalars.
    pub fn scalar() -> Self {
        Self::default()
    }

    pub fn single(factor: Factor) -> Self {
        Self {
            factors: vec![factor],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn is_scalar(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn factor(&self, label: &str) -> Option<&Factor> {
        self.factors.iter().find(|f| f.label == label)
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    /// Every factor of `self` occurs in `other` with the same shape.
    pub fn is_subspace_of(&self, other: &HilbertSpace) -> bool {
        self.factors
            .iter()
            .all(|f| other.factor(&f.label).is_some_and(|g| g == f))
    }

    /// Union of factor labels. Identical spaces and scalar operands keep the
    /// other side's order; otherwise the factors are sorted by label.
    pub fn union(&self, other: &HilbertSpace) -> Result<HilbertSpace> {
        if self == other || other.is_scalar() {
            return Ok(self.clone());
        }
        if self.is_scalar() {
            return Ok(other.clone());
        }
        let mut factors = self.factors.clone();
        for f in &other.factors {
            match self.factor(&f.label) {
                Some(g) if g != f => {
                    return Err(Error::FactorClash {
                        label: f.label.clone(),
                        left: g.to_string(),
                        right: f.to_string(),
                    })
                }
                Some(_) => {}
                None => factors.push(f.clone()),
            }
        }
        factors.sort_by(|a, b| a.label.cmp(&b.label));
        Ok(HilbertSpace { factors })
    }

    pub(crate) fn union_arc(a: &Arc<HilbertSpace>, b: &Arc<HilbertSpace>) -> Result<Arc<HilbertSpace>> {
        if Arc::ptr_eq(a, b) || a == b || b.is_scalar() {
            return Ok(a.clone());
        }
        if a.is_scalar() {
            return Ok(b.clone());
        }
        Ok(Arc::new(a.union(b)?))
    }

    /// Row-major strides of each factor (last factor varies fastest).
    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].dim;
        }
        strides
    }

    /// Basis indices whose Fock components all lie below the top retained
    /// level. Qubit and custom factors are unrestricted.
    pub fn boundary_mask(&self) -> Vec<bool> {
        let strides = self.strides();
        (0..self.dim())
            .map(|idx| {
                self.factors.iter().zip(&strides).all(|(f, &s)| {
                    f.kind != FactorKind::Fock || (idx / s) % f.dim < f.dim - 1
                })
            })
            .collect()
    }

    pub fn has_fock(&self) -> bool {
        self.factors.iter().any(|f| f.kind == FactorKind::Fock)
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("{}");
        }
        f.write_str("{")?;
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{factor}")?;
        }
        f.write_str("}")
    }
}
