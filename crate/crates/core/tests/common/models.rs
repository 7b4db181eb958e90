//! Reference models shared by the integration and acceptance suites.

#![allow(dead_code)]

use slh_core::network::{concatenate, series};
use slh_core::standard::{fock_ops, qubit_ops, FockOps, QubitOps};
use slh_core::{Complex64, Operator, SlhTriple};

/// `(1, √γ a, 0)`.
pub fn damped_cavity(gamma: f64, d: usize) -> (SlhTriple, FockOps) {
    let f = fock_ops("cav", d).unwrap();
    let p = SlhTriple::with_coupling(vec![f.a.scale_real(gamma.sqrt())], Operator::real(0.0)).unwrap();
    (p, f)
}

/// `(1, √γ σ₋, ω σz / 2)`.
pub fn two_level_atom(gamma: f64, omega: f64) -> (SlhTriple, QubitOps) {
    let q = qubit_ops("qb");
    let p = SlhTriple::with_coupling(vec![q.sm.scale_real(gamma.sqrt())], q.sz.scale_real(0.5 * omega)).unwrap();
    (p, q)
}

/// `(1, αa + βa†, 0)`.
pub fn open_oscillator(alpha: f64, beta: f64, d: usize) -> (SlhTriple, FockOps) {
    let f = fock_ops("cav", d).unwrap();
    let l = &f.a.scale_real(alpha) + &f.adag.scale_real(beta);
    (SlhTriple::with_coupling(vec![l], Operator::real(0.0)).unwrap(), f)
}

/// Cavity `(1, a, 0)` fed by a coherent source `(1, ν, 0)`, with the
/// storage `(a − α)†(a − α)` measuring distance from the target amplitude.
pub struct Regulation {
    pub plant: SlhTriple,
    pub source: SlhTriple,
    pub network: SlhTriple,
    pub storage: Operator,
    pub ops: FockOps,
}

pub fn regulation(alpha: Complex64, nu: Complex64, d: usize) -> Regulation {
    let ops = fock_ops("cav", d).unwrap();
    let plant = SlhTriple::with_coupling(vec![ops.a.clone()], Operator::real(0.0)).unwrap();
    let source = SlhTriple::with_coupling(vec![Operator::scalar(nu)], Operator::real(0.0)).unwrap();
    let network = series(&plant, &source).unwrap();
    let shifted = &ops.a - &ops.id.scale(alpha);
    let storage = shifted.adjoint() * shifted;
    Regulation {
        plant,
        source,
        network,
        storage,
        ops,
    }
}

/// The cavity with the source replaced by the drive Hamiltonian
/// `−i(νa† − ν*a)`.
pub fn driven_cavity(nu: Complex64, d: usize) -> SlhTriple {
    let ops = fock_ops("cav", d).unwrap();
    let plant = SlhTriple::with_coupling(vec![ops.a.clone()], Operator::real(0.0)).unwrap();
    let drive = (&ops.adag.scale(nu) - &ops.a.scale(nu.conj())).scale(Complex64::new(0.0, -1.0));
    concatenate(&plant, &SlhTriple::hamiltonian_only(drive).unwrap()).unwrap()
}

/// Plant `(1, a + a†, 0)` in series after the controller `(1, k(a − a†), 0)`.
pub fn quadrature_feedback(k: f64, d: usize) -> SlhTriple {
    let f = fock_ops("cav", d).unwrap();
    let plant = SlhTriple::with_coupling(vec![&f.a + &f.adag], Operator::real(0.0)).unwrap();
    let controller = SlhTriple::with_coupling(vec![(&f.a - &f.adag).scale_real(k)], Operator::real(0.0)).unwrap();
    series(&plant, &controller).unwrap()
}

/// Same plant after the controller `(1, k a, 0)`.
pub fn damping_feedback(k: f64, d: usize) -> SlhTriple {
    let f = fock_ops("cav", d).unwrap();
    let plant = SlhTriple::with_coupling(vec![&f.a + &f.adag], Operator::real(0.0)).unwrap();
    let controller = SlhTriple::with_coupling(vec![f.a.scale_real(k)], Operator::real(0.0)).unwrap();
    series(&plant, &controller).unwrap()
}
