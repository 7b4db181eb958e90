//! Operator ordering `A ≤ B` and Hermitian spectral helpers.
//!
//! Every ordering, positivity and pseudo-inverse computation goes through a
//! single Hermitian eigensolver (Householder tridiagonalization followed by
//! implicit QR).

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{hermiticity_residual, lift_pair, max_abs, CMatrix, Operator, ZERO};
use crate::state::StateVector;
use crate::{HERMITIAN_TOL, ORDER_TOL};

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `f(A) = U f(Λ) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let s = Complex64::new(f(v), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Spectrum of the Hermitian part of `m`.
pub fn hermitian_spectrum(m: &CMatrix) -> Spectrum {
    let n = m.nrows();
    if n == 0 {
        return Spectrum {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Spectrum { values, vectors }
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_spectrum(m).min()
}

/// Which basis states an ordering check ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    /// The whole space.
    #[default]
    Full,
    /// Basis states below every Fock truncation level.
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderCheck {
    pub holds: bool,
    /// Largest eigenvalue of `A − B` on the checked subspace.
    pub margin: f64,
    /// Eigenvector of that eigenvalue, zero-padded to the full space.
    pub witness: StateVector,
}

/// Checks `A ≤ B` over the whole space.
pub fn order_leq(a: &Operator, b: &Operator, tol: f64) -> Result<OrderCheck> {
    order_leq_on(a, b, tol, Projection::Full)
}

/// Checks `A ≤ B` over the subspace selected by `projection`.
pub fn order_leq_on(a: &Operator, b: &Operator, tol: f64, projection: Projection) -> Result<OrderCheck> {
    let (a, b) = crate::operator::try_lift_pair(a, b)?;
    for op in [&a, &b] {
        if !op.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::OrderingUndefined {
                residual: op.hermiticity_residual(),
            });
        }
    }
    let diff = a.matrix() - b.matrix();
    Ok(upper_bound_check(&Operator::from_parts(a.space_arc().clone(), diff), tol, projection))
}

/// Checks `X ≤ 0` for an operator already known to be Hermitian.
pub(crate) fn upper_bound_check(x: &Operator, tol: f64, projection: Projection) -> OrderCheck {
    let mask = match projection {
        Projection::Full => None,
        Projection::Boundary if x.space().has_fock() => Some(x.space().boundary_mask()),
        Projection::Boundary => None,
    };
    let m = match &mask {
        Some(mask) => x.compress(mask),
        None => x.matrix().clone(),
    };
    let spec = hermitian_spectrum(&m);
    let top = spec.values.len() - 1;
    let margin = spec.values[top];
    let column = spec.vectors.column(top);
    let full = match &mask {
        Some(mask) => {
            let mut v = DVector::from_element(mask.len(), ZERO);
            let mut k = 0;
            for (i, keep) in mask.iter().enumerate() {
                if *keep {
                    v[i] = column[k];
                    k += 1;
                }
            }
            v
        }
        None => column.clone_owned(),
    };
    let norm = full.norm();
    let witness = StateVector::from_normalized(x.space_arc().clone(), full / Complex64::new(norm, 0.0)).canonical_phase();
    OrderCheck {
        holds: margin <= tol,
        margin,
        witness,
    }
}

/// `A ⪰ 0` within `tol`; returns the smallest eigenvalue on failure.
pub fn require_psd(a: &Operator, tol: f64) -> Result<()> {
    if !a.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::OrderingUndefined {
            residual: a.hermiticity_residual(),
        });
    }
    let min = min_eigenvalue(a.matrix());
    if min < -tol * max_abs(a.matrix()).max(1.0) {
        Err(Error::NotPositive { min_eigenvalue: min })
    } else {
        Ok(())
    }
}

/// Default-tolerance variant of [`order_leq`].
pub fn leq(a: &Operator, b: &Operator) -> Result<bool> {
    Ok(order_leq(a, b, ORDER_TOL)?.holds)
}

/// Hermiticity residual of the lifted difference `A − B`, for diagnostics.
pub fn difference_residual(a: &Operator, b: &Operator) -> f64 {
    let (a, b) = lift_pair(a, b);
    hermiticity_residual(&(a.matrix() - b.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standard::{fock_ops, qubit_ops};
    use crate::operator::ONE;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn number_operator_is_nonnegative() {
        let f = fock_ops("cav", 5).unwrap();
        let zero = Operator::zero(f.space().clone());
        let c = order_leq(&zero, &f.n, ORDER_TOL).unwrap();
        assert!(c.holds);
        assert_eq!(c.margin, 0.0);
        assert!((c.witness.amplitudes()[0] - ONE).norm() < 1e-12);
    }

    #[test]
    fn sz_below_identity() {
        let q = qubit_ops("qb");
        let c = order_leq(&q.sz, &q.id, ORDER_TOL).unwrap();
        assert!(c.holds);
        assert!(c.margin.abs() < 1e-14);
    }

    #[test]
    fn identity_not_below_zero() {
        let q = qubit_ops("qb");
        let c = order_leq(&q.id, &Operator::zero(q.space().clone()), ORDER_TOL).unwrap();
        assert!(!c.holds);
        assert!((c.margin - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let f = fock_ops("cav", 3).unwrap();
        assert!(matches!(
            order_leq(&f.a, &f.n, ORDER_TOL),
            Err(Error::OrderingUndefined { .. })
        ));
    }

    #[test]
    fn margin_bounds_rayleigh_quotients() {
        let f = fock_ops("cav", 6).unwrap();
        let (q, p) = f.quadratures();
        let a = &q * &q - &f.n.scale_real(0.7);
        let b = &p + &f.id.scale_real(0.3);
        let check = order_leq(&a, &b, ORDER_TOL).unwrap();
        let diff = (&a - &b).into_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let v = DVector::from_fn(6, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let v = &v / Complex64::new(v.norm(), 0.0);
            let r = v.dotc(&(&diff * &v)).re;
            assert!(r <= check.margin + 1e-9);
        }
    }

    #[test]
    fn boundary_projection_drops_top_level() {
        let f = fock_ops("cav", 4).unwrap();
        // [a, a†] equals the identity except at the top level.
        let ccr = f.a.commutator(&f.adag);
        let full = order_leq(&f.id, &ccr, ORDER_TOL).unwrap();
        assert!(!full.holds);
        let proj = order_leq_on(&f.id, &ccr, ORDER_TOL, Projection::Boundary).unwrap();
        assert!(proj.holds);
        assert!(proj.margin.abs() < 1e-14);
        assert_eq!(proj.witness.amplitudes()[3], ZERO);
    }

    #[test]
    fn spectrum_map_inverts() {
        let q = qubit_ops("qb");
        let m = (&q.sz.scale_real(2.0) + &q.sx + &q.id.scale_real(3.0)).into_matrix();
        let inv = hermitian_spectrum(&m).map(|x| 1.0 / x);
        let prod = &m * &inv;
        assert!(max_abs(&(prod - CMatrix::identity(2, 2))) < 1e-14);
    }
}
