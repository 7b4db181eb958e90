//! Randomized network-algebra identities. Each function draws one instance
//! and returns the largest entrywise violation.

#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use slh_core::dissipation::{dissipation_margin, Exosystem, Network, SupplyRate};
use slh_core::network::{conjugate_through, conjugate_through_closed_form, inverse, lft, series, static_system};
use slh_core::order::Projection;
use slh_core::{random, CMatrix, ChannelPartition, Complex64, Factor, HilbertSpace, SlhTriple};

pub fn space(rng: &mut ChaCha8Rng) -> Arc<HilbertSpace> {
    let factors = match rng.random_range(0..4) {
        0 => vec![Factor::qubit("a")],
        1 => vec![Factor::fock("f", 3).unwrap()],
        2 => vec![Factor::qubit("a"), Factor::qubit("c")],
        _ => vec![Factor::qubit("a"), Factor::fock("b", 2).unwrap()],
    };
    Arc::new(HilbertSpace::new(factors).unwrap())
}

fn channels(rng: &mut ChaCha8Rng) -> usize {
    rng.random_range(1..=2)
}

pub fn series_associativity(rng: &mut ChaCha8Rng) -> f64 {
    let n = channels(rng);
    let gs: Vec<SlhTriple> = (0..3)
        .map(|_| {
            let sp = space(rng);
            random::triple(rng, &sp, n, 1.0)
        })
        .collect();
    let left = series(&series(&gs[2], &gs[1]).unwrap(), &gs[0]).unwrap();
    let right = series(&gs[2], &series(&gs[1], &gs[0]).unwrap()).unwrap();
    left.distance(&right).unwrap()
}

/// `G⁻¹ ◁ G = G ◁ G⁻¹ = I` and `(G₂ ◁ G₁)⁻¹ = G₁⁻¹ ◁ G₂⁻¹`.
pub fn inverse_laws(rng: &mut ChaCha8Rng) -> f64 {
    let n = channels(rng);
    let sp = space(rng);
    let g1 = random::triple(rng, &sp, n, 1.0);
    let g2 = random::triple(rng, &sp, n, 1.0);
    let id = SlhTriple::identity(n);
    let a = series(&inverse(&g1), &g1).unwrap().distance(&id).unwrap();
    let b = series(&g1, &inverse(&g1)).unwrap().distance(&id).unwrap();
    let c = inverse(&series(&g2, &g1).unwrap())
        .distance(&series(&inverse(&g1), &inverse(&g2)).unwrap())
        .unwrap();
    a.max(b).max(c)
}

/// `(S, L, H) = (I, L, H) ◁ (S, 0, 0) = (S, 0, 0) ◁ (I, S†L, H)`.
pub fn factorization(rng: &mut ChaCha8Rng) -> f64 {
    let n = channels(rng);
    let sp = space(rng);
    let g = random::triple(rng, &sp, n, 1.0);
    let d = sp.dim();
    let s = g.scattering_matrix().clone();
    let zero_l = CMatrix::zeros(n * d, d);
    let zero_h = CMatrix::zeros(d, d);
    let pure_scattering = SlhTriple::from_matrices(sp.clone(), n, s.clone(), zero_l, zero_h).unwrap();
    let eye = CMatrix::identity(n * d, n * d);
    let coupling = SlhTriple::from_matrices(sp.clone(), n, eye.clone(), g.coupling_matrix().clone(), g.hamiltonian_matrix().clone()).unwrap();
    let pulled = SlhTriple::from_matrices(sp.clone(), n, eye, s.adjoint() * g.coupling_matrix(), g.hamiltonian_matrix().clone()).unwrap();
    let a = series(&coupling, &pure_scattering).unwrap().distance(&g).unwrap();
    let b = series(&pure_scattering, &pulled).unwrap().distance(&g).unwrap();
    a.max(b)
}

/// `G₂ ◁ G₁ = G₁ ◁ G̃₂` with the closed form of `G̃₂ = G₁⁻¹ ◁ G₂ ◁ G₁`.
pub fn conjugation(rng: &mut ChaCha8Rng) -> f64 {
    let n = channels(rng);
    let s1 = space(rng);
    let s2 = space(rng);
    let g1 = random::triple(rng, &s1, n, 1.0);
    let g2 = random::triple(rng, &s2, n, 1.0);
    let closed = conjugate_through_closed_form(&g1, &g2).unwrap();
    let a = closed.distance(&conjugate_through(&g1, &g2).unwrap()).unwrap();
    let b = series(&g2, &g1).unwrap().distance(&series(&g1, &closed).unwrap()).unwrap();
    a.max(b)
}

/// With `S₂₂ = 0` the feedback reduction is
/// `(S₁₁ + S₁₂S₂₁, L₁ + S₁₂L₂, H + Im{L₁†S₁₂L₂})`.
pub fn lft_collapse(rng: &mut ChaCha8Rng) -> f64 {
    let k = channels(rng);
    let sp = space(rng);
    let d = sp.dim();
    let kd = k * d;
    let upper = random::unitary(rng, kd);
    let lower = random::unitary(rng, kd);
    let mut s = CMatrix::zeros(2 * kd, 2 * kd);
    s.view_mut((0, kd), (kd, kd)).copy_from(&upper);
    s.view_mut((kd, 0), (kd, kd)).copy_from(&lower);
    let l = DMatrix::from_fn(2 * kd, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let h = random::hermitian(rng, &sp, 1.0).into_matrix();
    let g = SlhTriple::from_matrices(sp.clone(), 2 * k, s, l.clone(), h.clone()).unwrap();
    let reduced = lft(&g, ChannelPartition::new(k, k)).unwrap();
    let l1 = l.view((0, 0), (kd, d)).clone_owned();
    let l2 = l.view((kd, 0), (kd, d)).clone_owned();
    let cross = l1.adjoint() * &upper * &l2;
    let im = (&cross - cross.adjoint()) * Complex64::new(0.0, -0.5);
    let expected = SlhTriple::from_matrices(sp, k, &upper * &lower, &l1 + &upper * &l2, h + im).unwrap();
    reduced.distance(&expected).unwrap()
}

fn scalar_unitary_system(rng: &mut ChaCha8Rng, n: usize) -> (CMatrix, SlhTriple) {
    let u = random::unitary(rng, n);
    let sys = static_system(&u).unwrap();
    (u, sys)
}

/// Dissipation margins of `(S, L, H)` with `r(W)` equal those of `(I, L, H)`
/// with `r((S†, 0, 0) ◁ W)` at `W' = (S, 0, 0) ◁ W`.
pub fn scattering_absorption(rng: &mut ChaCha8Rng) -> f64 {
    let n = channels(rng);
    let sp = space(rng);
    let (u, scatter) = scalar_unitary_system(rng, n);
    let d = sp.dim();
    let s = CMatrix::from_fn(n * d, n * d, |r, c| {
        if r % d == c % d {
            u[(r / d, c / d)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let passive = random::passive_triple(rng, &sp, n, 1.0);
    let plant = SlhTriple::from_matrices(sp.clone(), n, s, passive.coupling_matrix().clone(), passive.hamiltonian_matrix().clone()).unwrap();
    let storage = random::positive(rng, &sp, 1.0);
    let weight = random::hermitian(rng, &sp, 1.0);
    // r(W) = Σ_j (w_j† X w_j) + X' with exosystem amplitudes w_j.
    let weight_for_rate = weight.clone();
    let rate = SupplyRate::custom(move |ctx| {
        let mut acc = weight_for_rate.scale_real(0.5);
        for w in ctx.exo.triple.couplings() {
            acc = acc.try_add(&w.adjoint().try_mul(&weight_for_rate)?.try_mul(&w)?)?;
        }
        Ok(acc)
    });
    let unscatter = static_system(&u.adjoint()).unwrap();
    let rate_moved = {
        let rate = rate.clone();
        SupplyRate::custom(move |ctx| {
            let moved = Exosystem::new(series(&unscatter, &ctx.exo.triple)?, ctx.exo.coupling.clone());
            let connected = Network::Series.connect(ctx.plant, &moved)?;
            rate.evaluate(&slh_core::dissipation::SupplyContext {
                exo: &moved,
                connected: &connected,
                ..*ctx
            })
        })
    };
    let amplitudes: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
        .collect();
    let exo = Exosystem::scalar(&amplitudes, None).unwrap();
    let moved = Exosystem::new(series(&scatter, &exo.triple).unwrap(), None);
    let (hi, lo, _) = dissipation_margin(&plant, Network::Series, &exo, &storage, &rate, Projection::Full).unwrap();
    let (hi2, lo2, _) = dissipation_margin(&passive, Network::Series, &moved, &storage, &rate_moved, Projection::Full).unwrap();
    (hi - hi2).abs().max((lo - lo2).abs())
}
