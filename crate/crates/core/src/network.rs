//! (S, L, H) triples and their network algebra.
//!
//! A triple with `n` channels on a space of dimension `D` is stored as block
//! matrices: the scattering matrix as `nD × nD`, the coupling vector as a
//! stacked `nD × D` column, and the Hamiltonian as `D × D`. Block `(i, j)` of
//! the scattering matrix is the operator `S_ij`. With this layout every
//! composition rule is ordinary matrix algebra; scalar entries are stored as
//! multiples of the identity.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{embed_matrix, im_part, lift_all, max_abs, CMatrix, Operator, ONE};
use crate::space::HilbertSpace;
use crate::{HERMITIAN_TOL, UNITARITY_TOL, WELL_POSED_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct SlhTriple {
    space: Arc<HilbertSpace>,
    channels: usize,
    s: CMatrix,
    l: CMatrix,
    h: CMatrix,
}

impl SlhTriple {
    /// Builds a triple from operator entries, lifting them to a common space.
    ///
    /// Rejects non-square or non-unitary scattering matrices and non-Hermitian
    /// Hamiltonians.
    pub fn new(s: Vec<Vec<Operator>>, l: Vec<Operator>, h: Operator) -> Result<Self> {
        let n = l.len();
        if s.len() != n {
            return Err(Error::ChannelMismatch { left: s.len(), right: n });
        }
        if let Some(row) = s.iter().find(|row| row.len() != n) {
            return Err(Error::ChannelMismatch { left: row.len(), right: n });
        }
        let all = s.iter().flatten().chain(&l).chain(std::iter::once(&h));
        let (space, lifted) = lift_all(all)?;
        let d = space.dim();
        let mut iter = lifted.into_iter();
        let mut s_block = CMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                let op = iter.next().expect("entry count");
                s_block.view_mut((i * d, j * d), (d, d)).copy_from(op.matrix());
            }
        }
        let mut l_block = CMatrix::zeros(n * d, d);
        for i in 0..n {
            let op = iter.next().expect("entry count");
            l_block.view_mut((i * d, 0), (d, d)).copy_from(op.matrix());
        }
        let h_op = iter.next().expect("entry count");
        let triple = Self {
            space,
            channels: n,
            s: s_block,
            l: l_block,
            h: h_op.into_matrix(),
        };
        triple.validate()?;
        Ok(triple)
    }

    /// `(I, L, H)`.
    pub fn with_coupling(l: Vec<Operator>, h: Operator) -> Result<Self> {
        let n = l.len();
        let s = (0..n)
            .map(|i| (0..n).map(|j| Operator::real(if i == j { 1.0 } else { 0.0 })).collect())
            .collect();
        Self::new(s, l, h)
    }

    /// The channel-free system `(_, _, H)`.
    pub fn hamiltonian_only(h: Operator) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), h)
    }

    /// `(I_n, 0, 0)` on the scalar space.
    pub fn identity(n: usize) -> Self {
        Self {
            space: Arc::new(HilbertSpace::scalar()),
            channels: n,
            s: CMatrix::identity(n, n),
            l: CMatrix::zeros(n, 1),
            h: CMatrix::zeros(1, 1),
        }
    }

    /// Builds a triple from block matrices: `S` is `nd × nd`, `L` is `nd × d`
    /// with channel `k` in rows `kd..(k+1)d`, and `H` is `d × d`.
    pub fn from_matrices(space: impl Into<Arc<HilbertSpace>>, channels: usize, s: CMatrix, l: CMatrix, h: CMatrix) -> Result<Self> {
        let space = space.into();
        let d = space.dim();
        for (m, rows, cols) in [(&s, channels * d, channels * d), (&l, channels * d, d), (&h, d, d)] {
            if (m.nrows(), m.ncols()) != (rows, cols) {
                return Err(Error::Shape {
                    rows: m.nrows(),
                    cols: m.ncols(),
                    dim: rows,
                });
            }
        }
        let triple = Self::from_blocks(space, channels, s, l, h);
        triple.validate()?;
        Ok(triple)
    }

    pub(crate) fn from_blocks(space: Arc<HilbertSpace>, channels: usize, s: CMatrix, l: CMatrix, h: CMatrix) -> Self {
        let d = space.dim();
        debug_assert_eq!((s.nrows(), s.ncols()), (channels * d, channels * d));
        debug_assert_eq!((l.nrows(), l.ncols()), (channels * d, d));
        debug_assert_eq!((h.nrows(), h.ncols()), (d, d));
        Self {
            space,
            channels,
            s,
            l,
            h,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let residual = self.unitarity_residual();
        if residual > UNITARITY_TOL {
            return Err(Error::NonUnitary { residual });
        }
        let residual = crate::operator::hermiticity_residual(&self.h);
        if residual > HERMITIAN_TOL * max_abs(&self.h).max(1.0) {
            return Err(Error::NonHermitianHamiltonian { residual });
        }
        Ok(())
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub(crate) fn space_arc(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Scattering matrix as an `nD × nD` block matrix.
    pub fn scattering_matrix(&self) -> &CMatrix {
        &self.s
    }

    /// Coupling vector as an `nD × D` stacked matrix.
    pub fn coupling_matrix(&self) -> &CMatrix {
        &self.l
    }

    pub fn hamiltonian_matrix(&self) -> &CMatrix {
        &self.h
    }

    pub fn scattering(&self, i: usize, j: usize) -> Operator {
        let d = self.dim();
        Operator::from_parts(self.space.clone(), self.s.view((i * d, j * d), (d, d)).clone_owned())
    }

    pub fn coupling(&self, i: usize) -> Operator {
        let d = self.dim();
        Operator::from_parts(self.space.clone(), self.l.view((i * d, 0), (d, d)).clone_owned())
    }

    pub fn couplings(&self) -> Vec<Operator> {
        (0..self.channels).map(|i| self.coupling(i)).collect()
    }

    pub fn hamiltonian(&self) -> Operator {
        Operator::from_parts(self.space.clone(), self.h.clone())
    }

    /// `max(‖S†S − I‖, ‖SS† − I‖)` entrywise.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.s.nrows();
        let id = CMatrix::identity(n, n);
        let a = self.s.adjoint() * &self.s - &id;
        let b = &self.s * self.s.adjoint() - &id;
        max_abs(&a).max(max_abs(&b))
    }

    /// `Σ_k L_k† L_k`.
    pub fn coupling_gram(&self) -> CMatrix {
        self.l.adjoint() * &self.l
    }

    /// Re-expresses the triple on a larger space.
    pub fn lift(&self, target: &HilbertSpace) -> Result<Self> {
        self.lift_arc(&Arc::new(target.clone()))
    }

    pub(crate) fn lift_arc(&self, target: &Arc<HilbertSpace>) -> Result<Self> {
        if *self.space == **target {
            return Ok(Self {
                space: target.clone(),
                ..self.clone()
            });
        }
        let n = self.channels;
        Ok(Self {
            space: target.clone(),
            channels: n,
            s: lift_blocks(&self.s, n, n, &self.space, target)?,
            l: lift_blocks(&self.l, n, 1, &self.space, target)?,
            h: embed_matrix(&self.h, &self.space, target)?,
        })
    }

    /// Largest entrywise difference of the three components on a common space.
    pub fn distance(&self, other: &SlhTriple) -> Result<f64> {
        if self.channels != other.channels {
            return Err(Error::ChannelMismatch {
                left: self.channels,
                right: other.channels,
            });
        }
        let (a, b) = lift_pair(self, other)?;
        Ok(max_abs(&(&a.s - &b.s)).max(max_abs(&(&a.l - &b.l))).max(max_abs(&(&a.h - &b.h))))
    }

    /// `(S, L, H + extra)`.
    pub fn add_hamiltonian(&self, extra: &Operator) -> Result<Self> {
        let space = HilbertSpace::union_arc(&self.space, extra.space_arc())?;
        let mut g = self.lift_arc(&space)?;
        g.h += extra.embed_arc(&space)?.matrix();
        Ok(g)
    }

    pub fn scattering_is_identity(&self, tol: f64) -> bool {
        let n = self.s.nrows();
        max_abs(&(&self.s - CMatrix::identity(n, n))) <= tol
    }
}

impl fmt::Display for SlhTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system on {} with {} channel(s)", self.space, self.channels)?;
        for i in 0..self.channels {
            for j in 0..self.channels {
                write_entries(f, &format!("S[{i},{j}]"), &self.scattering(i, j))?;
            }
        }
        for i in 0..self.channels {
            write_entries(f, &format!("L[{i}]"), &self.coupling(i))?;
        }
        write_entries(f, "H", &self.hamiltonian())
    }
}

fn write_entries(f: &mut fmt::Formatter<'_>, name: &str, op: &Operator) -> fmt::Result {
    let m = op.matrix();
    let mut any = false;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.norm() > 0.0 {
                writeln!(f, "  {name} [{i},{j}] {:.12e} {:+.12e}i", z.re, z.im)?;
                any = true;
            }
        }
    }
    if !any {
        writeln!(f, "  {name} = 0")?;
    }
    Ok(())
}

fn lift_blocks(m: &CMatrix, rows: usize, cols: usize, from: &HilbertSpace, to: &HilbertSpace) -> Result<CMatrix> {
    let (d, e) = (from.dim(), to.dim());
    let mut out = CMatrix::zeros(rows * e, cols * e);
    for i in 0..rows {
        for j in 0..cols {
            let block = m.view((i * d, j * d), (d, d)).clone_owned();
            out.view_mut((i * e, j * e), (e, e))
                .copy_from(&embed_matrix(&block, from, to)?);
        }
    }
    Ok(out)
}

fn lift_pair(a: &SlhTriple, b: &SlhTriple) -> Result<(SlhTriple, SlhTriple)> {
    let space = HilbertSpace::union_arc(&a.space, &b.space)?;
    Ok((a.lift_arc(&space)?, b.lift_arc(&space)?))
}

/// Splits an `n`-channel system into a first block of `first` channels and a
/// second block of `second` channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelPartition {
    pub first: usize,
    pub second: usize,
}

impl ChannelPartition {
    pub fn new(first: usize, second: usize) -> Self {
        Self { first, second }
    }

    /// Keeps the first `kept` channels of an `n`-channel system.
    pub fn keep(kept: usize, n: usize) -> Result<Self> {
        if kept > n {
            return Err(Error::Partition {
                n1: kept,
                n2: 0,
                n,
            });
        }
        Ok(Self::new(kept, n - kept))
    }

    pub fn total(&self) -> usize {
        self.first + self.second
    }
}

/// Exchange of energy between a plant and an exosystem through
/// `H = −i(K†v − v†K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectCoupling {
    plant: Vec<Operator>,
    exo: Vec<Operator>,
}

impl DirectCoupling {
    pub fn new(plant: Vec<Operator>, exo: Vec<Operator>) -> Result<Self> {
        if plant.len() != exo.len() {
            return Err(Error::InconsistentCoupling(format!(
                "{} plant operators but {} exosystem operators",
                plant.len(),
                exo.len()
            )));
        }
        Ok(Self { plant, exo })
    }

    pub fn plant_operators(&self) -> &[Operator] {
        &self.plant
    }

    pub fn exo_operators(&self) -> &[Operator] {
        &self.exo
    }

    pub fn len(&self) -> usize {
        self.plant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plant.is_empty()
    }

    pub fn hamiltonian(&self) -> Result<Operator> {
        direct_coupling(&self.plant, &self.exo)
    }
}

/// Interaction Hamiltonian `−i(K†v − v†K) = −i Σ_j (K_j† v_j − v_j† K_j)`.
pub fn direct_coupling(plant: &[Operator], exo: &[Operator]) -> Result<Operator> {
    if plant.len() != exo.len() {
        return Err(Error::InconsistentCoupling(format!(
            "{} plant operators but {} exosystem operators",
            plant.len(),
            exo.len()
        )));
    }
    let (space, ops) = lift_all(plant.iter().chain(exo))?;
    let m = plant.len();
    let d = space.dim();
    let mut x = CMatrix::zeros(d, d);
    for j in 0..m {
        x += ops[j].matrix().adjoint() * ops[m + j].matrix();
    }
    let h = (&x - x.adjoint()) * Complex64::new(0.0, -1.0);
    let out = Operator::from_parts(space, h);
    if !out.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::InconsistentCoupling(format!(
            "interaction Hamiltonian is not Hermitian (residual {:.3e})",
            out.hermiticity_residual()
        )));
    }
    Ok(out)
}

/// `G₁ ⊞ G₂`.
pub fn concatenate(g1: &SlhTriple, g2: &SlhTriple) -> Result<SlhTriple> {
    let (a, b) = lift_pair(g1, g2)?;
    let d = a.dim();
    let (n1, n2) = (a.channels, b.channels);
    let n = n1 + n2;
    let mut s = CMatrix::zeros(n * d, n * d);
    s.view_mut((0, 0), (n1 * d, n1 * d)).copy_from(&a.s);
    s.view_mut((n1 * d, n1 * d), (n2 * d, n2 * d)).copy_from(&b.s);
    let mut l = CMatrix::zeros(n * d, d);
    l.view_mut((0, 0), (n1 * d, d)).copy_from(&a.l);
    l.view_mut((n1 * d, 0), (n2 * d, d)).copy_from(&b.l);
    Ok(SlhTriple::from_blocks(a.space, n, s, l, a.h + b.h))
}

/// `G₂ ◁ G₁`: the outputs of `g1` drive `g2`.
pub fn series(g2: &SlhTriple, g1: &SlhTriple) -> Result<SlhTriple> {
    if g1.channels != g2.channels {
        return Err(Error::ChannelMismatch {
            left: g2.channels,
            right: g1.channels,
        });
    }
    let (b, a) = lift_pair(g2, g1)?;
    let s2l1 = &b.s * &a.l;
    let h = &a.h + &b.h + im_part(&(b.l.adjoint() * &s2l1));
    Ok(SlhTriple::from_blocks(a.space.clone(), a.channels, &b.s * &a.s, &b.l + s2l1, h))
}

/// Series product of a chain listed in signal order reversed: `gs[0] ◁ gs[1] ◁ …`.
pub fn series_chain(gs: &[&SlhTriple]) -> Result<SlhTriple> {
    let (last, rest) = gs
        .split_last()
        .ok_or_else(|| Error::InvalidParameter("empty series chain".into()))?;
    let mut acc = (*last).clone();
    for g in rest.iter().rev() {
        acc = series(g, &acc)?;
    }
    Ok(acc)
}

/// `(S†, −S†L, −H)`.
pub fn inverse(g: &SlhTriple) -> SlhTriple {
    let sd = g.s.adjoint();
    let l = -(&sd * &g.l);
    SlhTriple::from_blocks(g.space.clone(), g.channels, sd, l, -&g.h)
}

/// `G̃₂` with `G₂ ◁ G₁ = G₁ ◁ G̃₂`, computed as `G₁⁻¹ ◁ G₂ ◁ G₁`.
pub fn conjugate_through(g1: &SlhTriple, g2: &SlhTriple) -> Result<SlhTriple> {
    series(&series(&inverse(g1), g2)?, g1)
}

/// Closed form of [`conjugate_through`]:
/// `(S₁†S₂S₁, S₁†(S₂ − I)L₁ + S₁†L₂, H₂ + Im{L₂†(S₂ + I)L₁ − L₁†S₂L₁})`.
pub fn conjugate_through_closed_form(g1: &SlhTriple, g2: &SlhTriple) -> Result<SlhTriple> {
    if g1.channels != g2.channels {
        return Err(Error::ChannelMismatch {
            left: g1.channels,
            right: g2.channels,
        });
    }
    let (a, b) = lift_pair(g1, g2)?;
    let n = a.s.nrows();
    let id = CMatrix::identity(n, n);
    let s1d = a.s.adjoint();
    let s = &s1d * &b.s * &a.s;
    let l = &s1d * (&b.s - &id) * &a.l + &s1d * &b.l;
    let x = b.l.adjoint() * (&b.s + &id) * &a.l - a.l.adjoint() * &b.s * &a.l;
    let h = &b.h + im_part(&x);
    Ok(SlhTriple::from_blocks(a.space.clone(), a.channels, s, l, h))
}

/// Feedback reduction `F(G)`: the last `partition.second` output channels are
/// fed back into the last `partition.second` input channels.
pub fn lft(g: &SlhTriple, partition: ChannelPartition) -> Result<SlhTriple> {
    let n = g.channels;
    if partition.total() != n {
        return Err(Error::Partition {
            n1: partition.first,
            n2: partition.second,
            n,
        });
    }
    let d = g.dim();
    let (p, q) = (partition.first * d, partition.second * d);
    let s11 = g.s.view((0, 0), (p, p));
    let s12 = g.s.view((0, p), (p, q));
    let s21 = g.s.view((p, 0), (q, p));
    let s22 = g.s.view((p, p), (q, q)).clone_owned();
    let l1 = g.l.view((0, 0), (p, d));
    let l2 = g.l.view((p, 0), (q, d));
    let loop_matrix = CMatrix::identity(q, q) - &s22;
    if q > 0 {
        let min_singular = loop_matrix
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(x));
        if min_singular <= WELL_POSED_TOL {
            return Err(Error::IllPosedLoop {
                block: format!("S22 (channels {}..{})", partition.first, n),
                min_singular,
            });
        }
    }
    let resolvent: CMatrix = if q == 0 {
        CMatrix::zeros(0, 0)
    } else {
        loop_matrix.try_inverse().ok_or_else(|| Error::IllPosedLoop {
            block: format!("S22 (channels {}..{})", partition.first, n),
            min_singular: 0.0,
        })?
    };
    let s12r = s12 * &resolvent;
    let s = s11 + &s12r * s21;
    let r_l2 = &resolvent * l2;
    let l = l1 + s12 * &r_l2;
    let h = &g.h + im_part(&(l1.adjoint() * &s12r * l2)) + im_part(&(l2.adjoint() * &s22 * &r_l2));
    Ok(SlhTriple::from_blocks(g.space.clone(), partition.first, s, l, h))
}

/// Static system `(T, 0, 0)` for a unitary complex matrix `T`.
pub fn static_system(t: &DMatrix<Complex64>) -> Result<SlhTriple> {
    if t.nrows() != t.ncols() {
        return Err(Error::ChannelMismatch {
            left: t.nrows(),
            right: t.ncols(),
        });
    }
    let n = t.nrows();
    let id = CMatrix::identity(n, n);
    let residual = max_abs(&(t.adjoint() * t - &id)).max(max_abs(&(t * t.adjoint() - &id)));
    if residual > 1e-10 {
        return Err(Error::NonUnitary { residual });
    }
    Ok(SlhTriple::from_blocks(
        Arc::new(HilbertSpace::scalar()),
        n,
        t.clone(),
        CMatrix::zeros(n, 1),
        CMatrix::zeros(1, 1),
    ))
}

/// Static routing system: output channel `i` carries input channel `perm[i]`.
pub fn permutation_system(perm: &[usize]) -> Result<SlhTriple> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let mut t = CMatrix::zeros(n, n);
    for (i, &p) in perm.iter().enumerate() {
        t[(i, p)] = ONE;
    }
    static_system(&t)
}

/// The two-channel swap `J`.
pub fn swap_system() -> SlhTriple {
    permutation_system(&[1, 0]).expect("valid permutation")
}

/// Plant driven in series by an exosystem, plus an optional direct coupling:
/// `(P ◁ W) ⊞ (_, _, H_PW)`.
pub fn wedge_series(plant: &SlhTriple, exo: &SlhTriple, coupling: Option<&DirectCoupling>) -> Result<SlhTriple> {
    let g = series(plant, exo)?;
    match coupling {
        Some(c) if !c.is_empty() => g.add_hamiltonian(&c.hamiltonian()?),
        _ => Ok(g),
    }
}

/// Two-channel plant and exosystem in a loop: the exosystem's second output
/// drives the plant's first input and the plant's first output returns to the
/// exosystem's second input. The exosystem's first channel and the plant's
/// second channel remain external.
///
/// Built as `F((I ⊞ J) ◁ (W ⊞ I) ◁ (I ⊞ P) ◁ (I ⊞ J))` with one channel fed
/// back, then concatenated with `(_, _, H_PW)`.
pub fn wedge_lft(plant: &SlhTriple, exo: &SlhTriple, coupling: Option<&DirectCoupling>) -> Result<SlhTriple> {
    for g in [plant, exo] {
        if g.channels != 2 {
            return Err(Error::ChannelMismatch {
                left: g.channels,
                right: 2,
            });
        }
    }
    let one = SlhTriple::identity(1);
    let route = concatenate(&one, &swap_system())?;
    let exo_block = concatenate(exo, &one)?;
    let plant_block = concatenate(&one, plant)?;
    let g = series_chain(&[&route, &exo_block, &plant_block, &route])?;
    let closed = lft(&g, ChannelPartition::new(2, 1))?;
    match coupling {
        Some(c) if !c.is_empty() => closed.add_hamiltonian(&c.hamiltonian()?),
        _ => Ok(closed),
    }
}
