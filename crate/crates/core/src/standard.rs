//! Standard operator sets for qubits and truncated oscillators.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::operator::{CMatrix, Operator, I, ONE, ZERO};
use crate::space::{Factor, HilbertSpace};
use crate::state::StateVector;

/// Pauli basis and ladder operators on one qubit factor.
///
/// Basis order follows `σz = diag(1, −1)`: index 0 is the `σz = +1` level,
/// so `σ₋ = ½(σx − iσy)` maps index 0 to index 1.
#[derive(Debug, Clone)]
pub struct QubitOps {
    pub id: Operator,
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
    pub sp: Operator,
    pub sm: Operator,
}

impl QubitOps {
    pub fn space(&self) -> &HilbertSpace {
        self.id.space()
    }

    /// `σ₁ = ½(I + σz)`, the projector onto the upper level.
    pub fn upper_projector(&self) -> Operator {
        (&self.id + &self.sz).scale_real(0.5)
    }

    pub fn get(&self, name: &str) -> Option<&Operator> {
        Some(match name {
            "id" => &self.id,
            "sx" => &self.sx,
            "sy" => &self.sy,
            "sz" => &self.sz,
            "sp" => &self.sp,
            "sm" => &self.sm,
            _ => return None,
        })
    }
}

pub fn qubit_ops(label: &str) -> QubitOps {
    let space = Arc::new(HilbertSpace::single(Factor::qubit(label)));
    let m = |a, b, c, d| CMatrix::from_row_slice(2, 2, &[a, b, c, d]);
    let op = |mat| Operator::from_parts(space.clone(), mat);
    let sx = op(m(ZERO, ONE, ONE, ZERO));
    let sy = op(m(ZERO, -I, I, ZERO));
    let sp = (&sx + &sy.scale(I)).scale_real(0.5);
    let sm = (&sx - &sy.scale(I)).scale_real(0.5);
    QubitOps {
        id: Operator::identity(space.clone()),
        sx,
        sy,
        sz: op(m(ONE, ZERO, ZERO, -ONE)),
        sp,
        sm,
    }
}

/// Ladder operators on a Fock factor truncated to `d` levels.
#[derive(Debug, Clone)]
pub struct FockOps {
    pub id: Operator,
    pub a: Operator,
    pub adag: Operator,
    pub n: Operator,
}

impl FockOps {
    pub fn space(&self) -> &HilbertSpace {
        self.id.space()
    }

    pub fn levels(&self) -> usize {
        self.id.dim()
    }

    /// Quadratures `q = a + a†`, `p = −i(a − a†)`.
    pub fn quadratures(&self) -> (Operator, Operator) {
        let q = &self.a + &self.adag;
        let p = (&self.a - &self.adag).scale(-I);
        (q, p)
    }

    pub fn get(&self, name: &str) -> Option<&Operator> {
        Some(match name {
            "id" => &self.id,
            "a" => &self.a,
            "adag" => &self.adag,
            "n" => &self.n,
            _ => return None,
        })
    }
}

pub fn fock_ops(label: &str, d: usize) -> Result<FockOps> {
    let space = Arc::new(HilbertSpace::single(Factor::fock(label, d)?));
    let mut a = CMatrix::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    let a = Operator::from_parts(space.clone(), a);
    let adag = a.adjoint();
    let n = Operator::from_parts(
        space.clone(),
        CMatrix::from_fn(d, d, |i, j| if i == j { Complex64::new(i as f64, 0.0) } else { ZERO }),
    );
    Ok(FockOps {
        id: Operator::identity(space),
        a,
        adag,
        n,
    })
}

/// Emitted when a coherent amplitude is too large for the truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationWarning {
    pub mean_occupation: f64,
    pub levels: usize,
    /// Norm of the untruncated coefficient vector lost above level `d − 1`.
    pub discarded_weight: f64,
}

/// Coherent state `|α⟩` truncated to `factor` and renormalized, together with a
/// warning when `|α|² > d/4`.
pub fn coherent_state_checked(factor: &Factor, alpha: Complex64) -> (StateVector, Option<TruncationWarning>) {
    let d = factor.dim();
    let mut amps = Vec::with_capacity(d);
    let mut c = ONE;
    amps.push(c);
    for k in 1..d {
        c = c * alpha / (k as f64).sqrt();
        amps.push(c);
    }
    let norm2: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let kept = norm2 * (-alpha.norm_sqr()).exp();
    let norm = norm2.sqrt();
    let amps: Vec<Complex64> = amps.into_iter().map(|z| z / norm).collect();
    let space = HilbertSpace::single(factor.clone());
    let state = StateVector::from_normalized(space, nalgebra::DVector::from_vec(amps));
    let mean = alpha.norm_sqr();
    let warning = (mean > d as f64 / 4.0).then(|| TruncationWarning {
        mean_occupation: mean,
        levels: d,
        discarded_weight: (1.0 - kept).max(0.0),
    });
    (state, warning)
}

pub fn coherent_state(factor: &Factor, alpha: Complex64) -> StateVector {
    let (state, warning) = coherent_state_checked(factor, alpha);
    if let Some(w) = warning {
        log::warn!(
            "coherent state with |alpha|^2 = {} in {} levels exceeds d/4; discarded weight {:.3e}",
            w.mean_occupation,
            w.levels,
            w.discarded_weight
        );
    }
    state
}
