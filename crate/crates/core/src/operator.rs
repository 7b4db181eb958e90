//! Dense operators on composite Hilbert spaces.
//!
//! Binary arithmetic lifts both operands to the union of their spaces before
//! applying the matrix operation, so `sz@qb * a@cav` is the operator
//! `a ⊗ sz` on `{cav, qb}`. Scalars live on the empty space and lift to
//! multiples of the identity.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::space::HilbertSpace;

pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct Operator {
    space: Arc<HilbertSpace>,
    matrix: CMatrix,
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.matrix == other.matrix
    }
}

impl Operator {
    pub fn new(space: impl Into<Arc<HilbertSpace>>, matrix: CMatrix) -> Result<Self> {
        let space = space.into();
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Shape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                dim,
            });
        }
        Ok(Self { space, matrix })
    }

    pub(crate) fn from_parts(space: Arc<HilbertSpace>, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), space.dim());
        Self { space, matrix }
    }

    pub fn identity(space: impl Into<Arc<HilbertSpace>>) -> Self {
        let space = space.into();
        let d = space.dim();
        Self {
            space,
            matrix: CMatrix::identity(d, d),
        }
    }

    pub fn zero(space: impl Into<Arc<HilbertSpace>>) -> Self {
        let space = space.into();
        let d = space.dim();
        Self {
            space,
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn scalar(value: Complex64) -> Self {
        Self {
            space: Arc::new(HilbertSpace::scalar()),
            matrix: CMatrix::from_element(1, 1, value),
        }
    }

    pub fn real(value: f64) -> Self {
        Self::scalar(Complex64::new(value, 0.0))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub(crate) fn space_arc(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Value of a scalar operator (one on the empty space).
    pub fn as_scalar(&self) -> Option<Complex64> {
        self.space.is_scalar().then(|| self.matrix[(0, 0)])
    }

    pub fn adjoint(&self) -> Operator {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Operator {
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * c,
        }
    }

    pub fn scale_real(&self, c: f64) -> Operator {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn pow(&self, k: u32) -> Operator {
        let mut acc = Operator::identity(self.space.clone());
        for _ in 0..k {
            acc.matrix = &acc.matrix * &self.matrix;
        }
        acc
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Largest entry of `A - A†` in absolute value.
    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol * self.max_abs().max(1.0)
    }

    /// `(A + A†) / 2`
    pub fn herm_part(&self) -> Operator {
        Self {
            space: self.space.clone(),
            matrix: (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0),
        }
    }

    /// `Im{A} = (A − A†) / 2i`, Hermitian for any `A`.
    pub fn im_part(&self) -> Operator {
        Self {
            space: self.space.clone(),
            matrix: im_part(&self.matrix),
        }
    }

    pub fn is_skew_hermitian(&self, tol: f64) -> bool {
        let d = &self.matrix + self.matrix.adjoint();
        max_abs(&d) <= tol * self.max_abs().max(1.0)
    }

    /// Hilbert–Schmidt inner product `tr(A† B)`.
    pub fn hs_inner(&self, other: &Operator) -> Complex64 {
        let (a, b) = lift_pair(self, other);
        a.matrix.dotc(&b.matrix)
    }

    /// Largest absolute entry of `self - other` after lifting.
    pub fn distance(&self, other: &Operator) -> f64 {
        let (a, b) = lift_pair(self, other);
        max_abs(&(&a.matrix - &b.matrix))
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        let (a, b) = lift_pair(self, other);
        let m = &a.matrix * &b.matrix - &b.matrix * &a.matrix;
        Self {
            space: a.space,
            matrix: m,
        }
    }

    pub fn anticommutator(&self, other: &Operator) -> Operator {
        let (a, b) = lift_pair(self, other);
        let m = &a.matrix * &b.matrix + &b.matrix * &a.matrix;
        Self {
            space: a.space,
            matrix: m,
        }
    }

    /// Kronecker extension with the identity on every factor of `target`
    /// that `self` does not act on. Factor order follows `target`.
    pub fn embed(&self, target: &HilbertSpace) -> Result<Operator> {
        self.embed_arc(&Arc::new(target.clone()))
    }

    pub(crate) fn embed_arc(&self, target: &Arc<HilbertSpace>) -> Result<Operator> {
        if *self.space == **target {
            return Ok(Self {
                space: target.clone(),
                matrix: self.matrix.clone(),
            });
        }
        Ok(Self {
            space: target.clone(),
            matrix: embed_matrix(&self.matrix, &self.space, target)?,
        })
    }

    /// Restriction to the basis states selected by `mask`.
    pub fn compress(&self, mask: &[bool]) -> CMatrix {
        compress(&self.matrix, mask)
    }

    /// Restriction to basis states below every Fock truncation level.
    pub fn boundary_projected(&self) -> CMatrix {
        self.compress(&self.space.boundary_mask())
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        let (a, b) = try_lift_pair(self, other)?;
        Ok(Self {
            space: a.space.clone(),
            matrix: a.matrix + b.matrix,
        })
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        let (a, b) = try_lift_pair(self, other)?;
        Ok(Self {
            space: a.space.clone(),
            matrix: a.matrix * b.matrix,
        })
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "operator on {} (dim {})", self.space, self.dim())?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.matrix[(i, j)];
                if z.norm() > 0.0 {
                    writeln!(f, "  [{i},{j}] {:.12e} {:+.12e}i", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}

pub fn try_lift_pair(a: &Operator, b: &Operator) -> Result<(Operator, Operator)> {
    let space = HilbertSpace::union_arc(&a.space, &b.space)?;
    Ok((a.embed_arc(&space)?, b.embed_arc(&space)?))
}

/// Lifts both operands to the union of their spaces.
///
/// Panics if the two spaces reuse a label with different shapes; use
/// [`try_lift_pair`] where that can happen.
pub fn lift_pair(a: &Operator, b: &Operator) -> (Operator, Operator) {
    if Arc::ptr_eq(&a.space, &b.space) {
        return (a.clone(), b.clone());
    }
    try_lift_pair(a, b).unwrap_or_else(|e| panic!("operator spaces are incompatible: {e}"))
}

/// Lifts every operator to the common union space.
pub fn lift_all<'a>(ops: impl IntoIterator<Item = &'a Operator>) -> Result<(Arc<HilbertSpace>, Vec<Operator>)> {
    let ops: Vec<&Operator> = ops.into_iter().collect();
    let mut space = Arc::new(HilbertSpace::scalar());
    for op in &ops {
        space = HilbertSpace::union_arc(&space, &op.space)?;
    }
    let lifted = ops.iter().map(|op| op.embed_arc(&space)).collect::<Result<_>>()?;
    Ok((space, lifted))
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                let (a, b) = lift_pair(self, rhs);
                Operator { space: a.space, matrix: a.matrix $op b.matrix }
            }
        }
        impl $trait<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                (&self).$method(rhs)
            }
        }
        impl $trait<Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                self.$method(&rhs)
            }
        }
    };
}

binary_op!(Add, add, +);
binary_op!(Sub, sub, -);
binary_op!(Mul, mul, *);

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Mul<&Operator> for Complex64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(self)
    }
}

impl Mul<Operator> for Complex64 {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        rhs.scale(self)
    }
}

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale_real(self)
    }
}

impl Mul<Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        rhs.scale_real(self)
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn im_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()) * Complex64::new(0.0, -0.5)
}

pub(crate) fn compress(m: &CMatrix, mask: &[bool]) -> CMatrix {
    let idx: Vec<usize> = mask.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect();
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Embeds `m` acting on `source` into `target`, which must contain every
/// factor of `source` with the same shape.
pub(crate) fn embed_matrix(m: &CMatrix, source: &HilbertSpace, target: &HilbertSpace) -> Result<CMatrix> {
    let mut positions = Vec::with_capacity(source.factors().len());
    for f in source.factors() {
        match target.factor(f.label()) {
            Some(g) if g == f => positions.push(target.position(f.label()).unwrap()),
            Some(g) => {
                return Err(Error::FactorClash {
                    label: f.label().to_string(),
                    left: f.to_string(),
                    right: g.to_string(),
                })
            }
            None => return Err(Error::Embedding(f.label().to_string())),
        }
    }
    let strides = target.strides();
    let dims: Vec<usize> = target.factors().iter().map(|f| f.dim()).collect();
    let src_dim = source.dim();
    // Offset in the target basis of each source basis index.
    let src_strides = source.strides();
    let src_offsets: Vec<usize> = (0..src_dim)
        .map(|s| {
            positions
                .iter()
                .zip(&src_strides)
                .zip(source.factors())
                .map(|((&p, &st), f)| ((s / st) % f.dim()) * strides[p])
                .sum()
        })
        .collect();
    // Offsets of the spectator factors.
    let spectators: Vec<usize> = (0..dims.len()).filter(|i| !positions.contains(i)).collect();
    let spectator_dim: usize = spectators.iter().map(|&i| dims[i]).product();
    let spectator_offsets: Vec<usize> = (0..spectator_dim)
        .map(|mut r| {
            let mut off = 0;
            for &i in spectators.iter().rev() {
                off += (r % dims[i]) * strides[i];
                r /= dims[i];
            }
            off
        })
        .collect();
    let dim = target.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for (cj, col_off) in src_offsets.iter().enumerate() {
        for (ri, row_off) in src_offsets.iter().enumerate() {
            let z = m[(ri, cj)];
            if z == ZERO {
                continue;
            }
            for &so in &spectator_offsets {
                out[(row_off + so, col_off + so)] = z;
            }
        }
    }
    Ok(out)
}
