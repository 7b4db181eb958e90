//! Seeded random operators, triples and states for property checks.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::network::SlhTriple;
use crate::operator::{CMatrix, Operator};
use crate::space::HilbertSpace;
use crate::state::DensityMatrix;

fn entry(rng: &mut impl Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

pub fn matrix(rng: &mut impl Rng, n: usize, scale: f64) -> CMatrix {
    DMatrix::from_fn(n, n, |_, _| entry(rng, scale))
}

/// Entries uniform in the square `[−scale, scale]²`.
pub fn operator(rng: &mut impl Rng, space: &Arc<HilbertSpace>, scale: f64) -> Operator {
    Operator::from_parts(space.clone(), matrix(rng, space.dim(), scale))
}

pub fn hermitian(rng: &mut impl Rng, space: &Arc<HilbertSpace>, scale: f64) -> Operator {
    operator(rng, space, scale).herm_part()
}

/// `G G† ⪰ 0`.
pub fn positive(rng: &mut impl Rng, space: &Arc<HilbertSpace>, scale: f64) -> Operator {
    let g = matrix(rng, space.dim(), scale);
    Operator::from_parts(space.clone(), &g * g.adjoint())
}

/// Unitary factor of the QR decomposition of a random matrix.
pub fn unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let m = matrix(rng, n, 1.0);
    m.qr().q()
}

/// Triple with operator-valued unitary scattering, coupling entries of size
/// `scale` and a Hermitian Hamiltonian.
pub fn triple(rng: &mut impl Rng, space: &Arc<HilbertSpace>, channels: usize, scale: f64) -> SlhTriple {
    let d = space.dim();
    let s = unitary(rng, channels * d);
    let l = DMatrix::from_fn(channels * d, d, |_, _| entry(rng, scale));
    let h = matrix(rng, d, scale);
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    SlhTriple::from_blocks(space.clone(), channels, s, l, h)
}

/// Triple with identity scattering.
pub fn passive_triple(rng: &mut impl Rng, space: &Arc<HilbertSpace>, channels: usize, scale: f64) -> SlhTriple {
    let d = space.dim();
    let l = DMatrix::from_fn(channels * d, d, |_, _| entry(rng, scale));
    let h = matrix(rng, d, scale);
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    SlhTriple::from_blocks(space.clone(), channels, CMatrix::identity(channels * d, channels * d), l, h)
}

/// Full-rank density matrix.
pub fn density(rng: &mut impl Rng, space: &Arc<HilbertSpace>) -> DensityMatrix {
    let g = matrix(rng, space.dim(), 1.0);
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    DensityMatrix::from_parts(space.clone(), rho)
}
