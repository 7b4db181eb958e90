//! Lindblad generators in the Heisenberg and Schrödinger pictures.
//!
//! With `K = −iH − ½ Σ L_k†L_k` the Heisenberg generator is
//! `𝒢(X) = K†X + XK + Σ L_k† X L_k = −i[X, H] + ℒ_L(X)` and its trace dual is
//! `ρ ↦ Kρ + ρK† + Σ L_k ρ L_k†`. Scattering does not enter either.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::network::{concatenate, series, SlhTriple};
use crate::operator::{im_part, lift_all, max_abs, CMatrix, Operator};
use crate::space::HilbertSpace;
use crate::state::DensityMatrix;

/// Precomputed pieces of a triple's generator.
#[derive(Debug, Clone)]
pub struct GeneratorHandle {
    source: SlhTriple,
    drift: CMatrix,
    jumps: Vec<CMatrix>,
    jumps_adj: Vec<CMatrix>,
}

impl GeneratorHandle {
    pub fn new(source: &SlhTriple) -> Self {
        let gram = source.coupling_gram();
        let drift = source.hamiltonian_matrix() * Complex64::new(0.0, -1.0) - gram * Complex64::new(0.5, 0.0);
        let jumps: Vec<CMatrix> = (0..source.channels()).map(|k| source.coupling(k).into_matrix()).collect();
        let jumps_adj = jumps.iter().map(|l| l.adjoint()).collect();
        Self {
            source: source.clone(),
            drift,
            jumps,
            jumps_adj,
        }
    }

    pub fn source(&self) -> &SlhTriple {
        &self.source
    }

    pub fn space(&self) -> &HilbertSpace {
        self.source.space()
    }

    /// `K = −iH − ½ Σ L_k†L_k`.
    pub fn drift(&self) -> &CMatrix {
        &self.drift
    }

    pub(crate) fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    /// `𝒢(X)` for a matrix on the handle's own space.
    pub fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        let mut out = self.drift.adjoint() * x + x * &self.drift;
        for (l, ld) in self.jumps.iter().zip(&self.jumps_adj) {
            out += ld * x * l;
        }
        out
    }

    /// Trace dual of [`apply_matrix`](Self::apply_matrix).
    pub fn apply_adjoint_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut out = &self.drift * rho + rho * self.drift.adjoint();
        for (l, ld) in self.jumps.iter().zip(&self.jumps_adj) {
            out += l * rho * ld;
        }
        out
    }

    /// `𝒢(X)`, lifting the triple when `X` acts on additional factors.
    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        let space = HilbertSpace::union_arc(self.source.space_arc(), x.space_arc())?;
        if *space == *self.source.space() {
            let x = x.embed_arc(self.source.space_arc())?;
            return Ok(Operator::from_parts(
                self.source.space_arc().clone(),
                self.apply_matrix(x.matrix()),
            ));
        }
        GeneratorHandle::new(&self.source.lift_arc(&space)?).apply(x)
    }

    pub fn apply_adjoint(&self, rho: &DensityMatrix) -> Result<Operator> {
        let space = HilbertSpace::union_arc(self.source.space_arc(), rho.space_arc())?;
        let rho = if *space == *rho.space() {
            rho.clone()
        } else {
            rho.extend(&space)?
        };
        if *space == *self.source.space() {
            return Ok(Operator::from_parts(space, self.apply_adjoint_matrix(rho.matrix())));
        }
        GeneratorHandle::new(&self.source.lift_arc(&space)?).apply_adjoint(&rho)
    }
}

/// `ℒ_L(X) = Σ_k ( L_k† X L_k − ½ L_k†L_k X − ½ X L_k†L_k )`.
pub fn dissipator(couplings: &[Operator], x: &Operator) -> Result<Operator> {
    let (space, ops) = lift_all(couplings.iter().chain(std::iter::once(x)))?;
    let (ls, x) = ops.split_at(couplings.len());
    let x = x[0].matrix();
    Ok(Operator::from_parts(space, dissipator_matrix(ls.iter().map(Operator::matrix), x)))
}

pub(crate) fn dissipator_matrix<'a>(couplings: impl IntoIterator<Item = &'a CMatrix>, x: &CMatrix) -> CMatrix {
    let half = Complex64::new(0.5, 0.0);
    let mut out = CMatrix::zeros(x.nrows(), x.ncols());
    for l in couplings {
        let ld = l.adjoint();
        let gram = &ld * l;
        out += &ld * x * l - (&gram * x + x * &gram) * half;
    }
    out
}

/// Dissipator of a stacked `nD × D` coupling column.
fn stacked_dissipator(l: &CMatrix, x: &CMatrix) -> CMatrix {
    let d = x.nrows();
    let n = l.nrows() / d.max(1);
    dissipator_matrix(&split_blocks(l, n, d), x)
}

fn split_blocks(l: &CMatrix, n: usize, d: usize) -> Vec<CMatrix> {
    (0..n).map(|k| l.view((k * d, 0), (d, d)).clone_owned()).collect()
}

/// `I_n ⊗ X` in the channel-major block layout.
fn block_diagonal(x: &CMatrix, n: usize) -> CMatrix {
    let d = x.nrows();
    let mut out = CMatrix::zeros(n * d, n * d);
    for k in 0..n {
        out.view_mut((k * d, k * d), (d, d)).copy_from(x);
    }
    out
}

/// Stacked commutator `([X, L_k])_k`.
fn stacked_commutator(x: &CMatrix, l: &CMatrix) -> CMatrix {
    let n = l.nrows() / x.nrows().max(1);
    block_diagonal(x, n) * l - l * x
}

/// `𝒢_G(X) = −i[X, H] + ℒ_L(X)`.
pub fn generator(g: &SlhTriple, x: &Operator) -> Result<Operator> {
    GeneratorHandle::new(g).apply(x)
}

/// `dρ/dt = −i[H, ρ] + Σ_k (L_k ρ L_k† − ½ L_k†L_k ρ − ½ ρ L_k†L_k)`.
pub fn adjoint_generator(g: &SlhTriple, rho: &DensityMatrix) -> Result<Operator> {
    GeneratorHandle::new(g).apply_adjoint(rho)
}

/// Residuals of the generator identities for `G₂ ◁ G₁` and `G₁ ⊞ G₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesGeneratorCheck {
    /// `𝒢_{G₂◁G₁}(X)` against each of the three expanded right-hand sides.
    pub series_forms: [f64; 3],
    /// `𝒢_{G₁⊞G₂}(X)` against `𝒢_{G₁}(X) + 𝒢_{G₂}(X)`.
    pub concatenation: f64,
}

impl SeriesGeneratorCheck {
    pub fn margin(&self) -> f64 {
        self.series_forms.iter().fold(self.concatenation, |m, &x| m.max(x))
    }
}

/// Compares the generator of composite systems with the expanded composition
/// formulas. The second and third series forms expand the dissipator of
/// `L₂ + S₂L₁` into cross terms.
pub fn verify_series_generator(g1: &SlhTriple, g2: &SlhTriple, x: &Operator) -> Result<SeriesGeneratorCheck> {
    let (space, _) = lift_all([x, &g1.hamiltonian(), &g2.hamiltonian()])?;
    let a = g1.lift_arc(&space)?;
    let b = g2.lift_arc(&space)?;
    let xm = x.embed_arc(&space)?.into_matrix();

    let lhs = generator(&series(&b, &a)?, x)?.embed_arc(&space)?.into_matrix();
    let minus_i = Complex64::new(0.0, -1.0);
    let comm = |h: &CMatrix| (&xm * h - h * &xm) * minus_i;
    let (s2, l1, l2) = (b.scattering_matrix(), a.coupling_matrix(), b.coupling_matrix());
    let (h1, h2) = (a.hamiltonian_matrix(), b.hamiltonian_matrix());
    let h12 = h1 + h2;
    let s2l1 = s2 * l1;

    let form1 = stacked_dissipator(&(l2 + &s2l1), &xm) + comm(&(&h12 + im_part(&(l2.adjoint() * &s2l1))));
    let n = a.channels();
    let xb = block_diagonal(&xm, n);
    // L₁†S₂†[X, L₂] + [L₂†, X]S₂L₁
    let l2d = l2.adjoint();
    let cross = s2l1.adjoint() * stacked_commutator(&xm, l2) + (&l2d * &xb - &xm * &l2d) * &s2l1;
    let form2 = stacked_dissipator(&s2l1, &xm) + stacked_dissipator(l2, &xm) + &cross + comm(&h12);
    let scatter = l1.adjoint() * (s2.adjoint() * &xb * s2 - &xb) * l1;
    let form3 = stacked_dissipator(l1, &xm) + stacked_dissipator(l2, &xm) + scatter + &cross + comm(&h12);

    let concat_lhs = generator(&concatenate(&a, &b)?, x)?.embed_arc(&space)?.into_matrix();
    let concat_rhs = generator(&a, x)?.embed_arc(&space)?.into_matrix() + generator(&b, x)?.embed_arc(&space)?.into_matrix();

    Ok(SeriesGeneratorCheck {
        series_forms: [
            max_abs(&(&lhs - form1)),
            max_abs(&(&lhs - form2)),
            max_abs(&(&lhs - form3)),
        ],
        concatenation: max_abs(&(concat_lhs - concat_rhs)),
    })
}

/// Matrix units `E_ij` on `space`, an operator basis for generator identities.
pub fn matrix_unit_basis(space: &Arc<HilbertSpace>) -> Vec<Operator> {
    let d = space.dim();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = Complex64::new(1.0, 0.0);
            out.push(Operator::from_parts(space.clone(), m));
        }
    }
    out
}

/// Largest entrywise difference between the generators of two triples over
/// every matrix unit of their common space.
pub fn generator_distance(a: &SlhTriple, b: &SlhTriple) -> Result<f64> {
    let space = HilbertSpace::union_arc(a.space_arc(), b.space_arc())?;
    let ha = GeneratorHandle::new(&a.lift_arc(&space)?);
    let hb = GeneratorHandle::new(&b.lift_arc(&space)?);
    let d = space.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = Complex64::new(1.0, 0.0);
            worst = worst.max(max_abs(&(ha.apply_matrix(&m) - hb.apply_matrix(&m))));
        }
    }
    Ok(worst)
}
