use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{lift_pair, CMatrix, Operator, ONE, ZERO};
use crate::space::HilbertSpace;

pub type CVector = DVector<Complex64>;

const NORM_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: Arc<HilbertSpace>,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(space: impl Into<Arc<HilbertSpace>>, amplitudes: CVector) -> Result<Self> {
        let space = space.into();
        if amplitudes.len() != space.dim() {
            return Err(Error::Shape {
                rows: amplitudes.len(),
                cols: 1,
                dim: space.dim(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(Self { space, amplitudes })
    }

    /// Normalizes `amplitudes`, which must be non-zero.
    pub fn normalized(space: impl Into<Arc<HilbertSpace>>, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(space, amplitudes / Complex64::new(norm, 0.0))
    }

    pub(crate) fn from_normalized(space: impl Into<Arc<HilbertSpace>>, amplitudes: CVector) -> Self {
        Self {
            space: space.into(),
            amplitudes,
        }
    }

    pub fn basis(space: impl Into<Arc<HilbertSpace>>, index: usize) -> Result<Self> {
        let space = space.into();
        let dim = space.dim();
        if index >= dim {
            return Err(Error::InvalidState(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Ok(Self { space, amplitudes: v })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Tensor product of states on disjoint factors, ordered as the union of
    /// their spaces.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let joint = HilbertSpace::new(
            self.space
                .factors()
                .iter()
                .chain(other.space.factors())
                .cloned()
                .collect(),
        )?;
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        let target = self.space.union(&other.space)?;
        let reordered = reorder(&amps, &joint, &target);
        Ok(StateVector::from_normalized(target, reordered))
    }

    /// Extends the state to `target` with the ground state (basis index 0) on
    /// every additional factor.
    pub fn extend(&self, target: &HilbertSpace) -> Result<StateVector> {
        if !self.space.is_subspace_of(target) {
            let missing = self
                .space
                .factors()
                .iter()
                .find(|f| target.factor(f.label()) != Some(f))
                .map(|f| f.label().to_string())
                .unwrap_or_default();
            return Err(Error::Embedding(missing));
        }
        let mut acc = self.clone();
        for f in target.factors() {
            if acc.space.factor(f.label()).is_none() {
                let ground = StateVector::basis(HilbertSpace::single(f.clone()), 0)?;
                acc = acc.tensor(&ground)?;
            }
        }
        let reordered = reorder(&acc.amplitudes, &acc.space, target);
        Ok(StateVector::from_normalized(target.clone(), reordered))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// `⟨ψ, Aψ⟩`
    pub fn expectation(&self, op: &Operator) -> Result<Complex64> {
        let op = op.embed_arc(&self.space)?;
        Ok(self.amplitudes.dotc(&(op.matrix() * &self.amplitudes)))
    }

    /// Fixes the global phase so the largest-magnitude amplitude is real and
    /// positive (first index on ties).
    pub fn canonical_phase(mut self) -> StateVector {
        let mut best = 0;
        let mut best_norm = -1.0;
        for (i, z) in self.amplitudes.iter().enumerate() {
            if z.norm() > best_norm + 1e-12 {
                best = i;
                best_norm = z.norm();
            }
        }
        let z = self.amplitudes[best];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            self.amplitudes *= phase;
        }
        self
    }
}

/// Permutes amplitudes from `from` ordering to `to` ordering (same factors).
fn reorder(amps: &CVector, from: &HilbertSpace, to: &HilbertSpace) -> CVector {
    if from == to {
        return amps.clone();
    }
    let from_strides = from.strides();
    let to_strides = to.strides();
    let mut out = CVector::zeros(amps.len());
    for (idx, z) in amps.iter().enumerate() {
        let mut target = 0;
        for (f, s) in from.factors().iter().zip(&from_strides) {
            let digit = (idx / s) % f.dim();
            let p = to.position(f.label()).expect("same factors");
            target += digit * to_strides[p];
        }
        out[target] = *z;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: Arc<HilbertSpace>,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
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
        let herm = crate::operator::hermiticity_residual(&matrix);
        if herm > crate::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("density matrix is not Hermitian (residual {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("density matrix has trace {tr}")));
        }
        let min = crate::order::min_eigenvalue(&matrix);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(Self { space, matrix })
    }

    pub fn maximally_mixed(space: impl Into<Arc<HilbertSpace>>) -> Self {
        let space = space.into();
        let d = space.dim();
        Self {
            space,
            matrix: CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0),
        }
    }

    pub(crate) fn from_parts(space: Arc<HilbertSpace>, matrix: CMatrix) -> Self {
        Self { space, matrix }
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

    /// `tr(ρA)`
    pub fn expectation(&self, op: &Operator) -> Result<Complex64> {
        let op = op.embed_arc(&self.space)?;
        Ok(trace_product(&self.matrix, op.matrix()))
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix).re
    }

    /// Extends to `target` as `ρ ⊗ |0⟩⟨0|` on the additional factors.
    pub fn extend(&self, target: &HilbertSpace) -> Result<DensityMatrix> {
        let op = Operator::from_parts(self.space.clone(), self.matrix.clone());
        let mut ground = Operator::real(1.0);
        for f in target.factors() {
            if self.space.factor(f.label()).is_none() {
                let s = Arc::new(HilbertSpace::single(f.clone()));
                let mut m = CMatrix::zeros(f.dim(), f.dim());
                m[(0, 0)] = ONE;
                ground = &ground * &Operator::from_parts(s, m);
            }
        }
        let (a, b) = lift_pair(&op, &ground);
        let prod = (&a * &b).embed(target)?;
        Ok(DensityMatrix {
            space: Arc::new(target.clone()),
            matrix: prod.into_matrix(),
        })
    }
}

/// `tr(AB)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Expectation of an operator in either kind of state.
pub fn expectation(state: &State<'_>, op: &Operator) -> Result<Complex64> {
    match state {
        State::Pure(psi) => psi.expectation(op),
        State::Mixed(rho) => rho.expectation(op),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum State<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for State<'a> {
    fn from(s: &'a StateVector) -> Self {
        State::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for State<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        State::Mixed(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Factor;
    use crate::standard::{coherent_state, fock_ops, qubit_ops};

    #[test]
    fn vacuum_number_expectation() {
        let f = fock_ops("cav", 5).unwrap();
        let vac = StateVector::basis(f.space().clone(), 0).unwrap();
        assert_eq!(vac.expectation(&f.n).unwrap(), ZERO);
    }

    #[test]
    fn coherent_amplitude_expectation() {
        let d = 40;
        let factor = Factor::fock("cav", d).unwrap();
        let f = fock_ops("cav", d).unwrap();
        for alpha in [Complex64::new(2.5, -1.5), Complex64::new(0.0, 3.0), Complex64::new(-1.0, 0.5)] {
            assert!(alpha.norm_sqr() <= d as f64 / 4.0);
            let s = coherent_state(&factor, alpha);
            let e = s.expectation(&f.a).unwrap();
            assert!((e - alpha).norm() < 1e-8, "{e} vs {alpha}");
        }
    }

    #[test]
    fn small_truncations_lose_accuracy_at_the_warning_threshold() {
        // |α|² = d/4 does not warn, yet the amplitude error is far above 1e-8.
        let d = 16;
        let factor = Factor::fock("cav", d).unwrap();
        let f = fock_ops("cav", d).unwrap();
        let alpha = Complex64::new(2.0, 0.0);
        let (s, warning) = crate::standard::coherent_state_checked(&factor, alpha);
        assert!(warning.is_none());
        let err = (s.expectation(&f.a).unwrap() - alpha).norm();
        assert!(err > 1e-6 && err < 1e-4, "{err}");
    }

    #[test]
    fn coherent_photon_number_series_oracle() {
        // ⟨n⟩ = Σ n |α|^{2n}/n! / Σ |α|^{2n}/n! over the retained levels.
        let (d, alpha) = (20usize, 2.0f64);
        let mut weight = 1.0;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..d {
            if k > 0 {
                weight *= alpha * alpha / k as f64;
            }
            num += k as f64 * weight;
            den += weight;
        }
        let oracle = num / den;
        assert!((oracle - 4.0).abs() < 1e-6);
        let f = fock_ops("cav", d).unwrap();
        let s = coherent_state(&Factor::fock("cav", d).unwrap(), Complex64::new(alpha, 0.0));
        let e = s.expectation(&f.n).unwrap();
        assert!((e.re - oracle).abs() < 1e-12);
        assert!((e.re - 4.0).abs() < 1e-6);
    }

    #[test]
    fn maximally_mixed_qubit() {
        let q = qubit_ops("qb");
        let rho = DensityMatrix::maximally_mixed(q.space().clone());
        assert_eq!(rho.expectation(&q.sz).unwrap(), ZERO);
    }

    #[test]
    fn pure_and_density_expectations_agree() {
        let f = fock_ops("cav", 6).unwrap();
        let s = StateVector::normalized(
            f.space().clone(),
            CVector::from_fn(6, |i, _| Complex64::new(1.0 + i as f64, 0.5 * i as f64)),
        )
        .unwrap();
        let x = &f.a * &f.adag + f.adag.scale(Complex64::new(0.0, 2.0));
        let e1 = s.expectation(&x).unwrap();
        let e2 = s.density().expectation(&x).unwrap();
        assert!((e1 - e2).norm() < 1e-12);
    }

    #[test]
    fn tensor_orders_by_label() {
        let cav = fock_ops("cav", 3).unwrap();
        let q = qubit_ops("qb");
        let e1 = StateVector::basis(q.space().clone(), 1).unwrap();
        let c2 = StateVector::basis(cav.space().clone(), 2).unwrap();
        let joint = e1.tensor(&c2).unwrap();
        let labels: Vec<_> = joint.space().factors().iter().map(|f| f.label().to_string()).collect();
        assert_eq!(labels, ["cav", "qb"]);
        // index = 2 * 2 + 1
        assert_eq!(joint.amplitudes()[5], ONE);
        let n = joint.expectation(&cav.n).unwrap();
        assert_eq!(n, Complex64::new(2.0, 0.0));
        let z = joint.expectation(&q.sz).unwrap();
        assert_eq!(z, Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn density_validation() {
        let q = qubit_ops("qb");
        let bad = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]);
        assert!(DensityMatrix::new(q.space().clone(), bad).is_err());
        let neg = CMatrix::from_row_slice(2, 2, &[ONE * 1.5, ZERO, ZERO, -ONE * 0.5]);
        assert!(DensityMatrix::new(q.space().clone(), neg).is_err());
    }
}
