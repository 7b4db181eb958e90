mod common;

use std::sync::Arc;

use common::models::{damped_cavity, open_oscillator, two_level_atom};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slh_core::dissipation::{
    check_bounded_real, check_dissipation, check_positive_real, extract_quadratic_coeffs, natural_supply_rate,
    CheckOptions, Exosystem, ExosystemClass, LemmaOptions, Network, SupplyRate,
};
use slh_core::generator::generator;
use slh_core::network::{concatenate, conjugate_through_closed_form, series, static_system};
use slh_core::{random, CMatrix, Complex64, Factor, HilbertSpace, Operator};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn qubit(label: &str) -> Arc<HilbertSpace> {
    Arc::new(HilbertSpace::single(Factor::qubit(label)))
}

fn amplitudes(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect()
}

fn natural(storage: &Operator) -> SupplyRate {
    SupplyRate::Natural { storage: storage.clone() }
}

#[test]
fn damped_cavity_is_lossless_for_its_natural_rate() {
    let (p, f) = damped_cavity(1.0, 20);
    let r = check_dissipation(&p, Network::Series, &ExosystemClass::scalar(1), &f.n, &natural(&f.n), CheckOptions::default()).unwrap();
    assert_eq!(r.samples.len(), 25);
    assert!(r.equality_margin() <= 1e-10, "{}", r.equality_margin());
}

#[test]
fn atom_is_lossless_for_its_natural_rate() {
    let (p, q) = two_level_atom(0.7, 1.3);
    let v = q.upper_projector();
    let r = check_dissipation(&p, Network::Series, &ExosystemClass::scalar(1), &v, &natural(&v), CheckOptions::default()).unwrap();
    assert!(r.equality_margin() <= 1e-10);
}

#[test]
fn oscillator_natural_rate_closed_form() {
    let (alpha, beta) = (0.9, 0.4);
    let (p, f) = open_oscillator(alpha, beta, 12);
    let w = Complex64::new(1.5, -0.5);
    let exo = Exosystem::scalar(&[w], None).unwrap();
    let r = natural_supply_rate(&p, &exo, &f.n, Network::Series).unwrap();
    let z = &f.a.scale_real(-alpha) + &f.adag.scale_real(beta);
    let expected = &(&(&f.n.scale_real(beta * beta - alpha * alpha) + &z.scale(w.conj())) + &z.adjoint().scale(w))
        + &f.id.scale_real(beta * beta);
    let diff = (&r.total - &expected).boundary_projected();
    assert!(diff.iter().all(|x| x.norm() < 1e-10));
    assert!(r.decomposition_residual().unwrap() < 1e-12);
}

#[test]
fn natural_rate_vanishes_for_identity_storage() {
    let (p, f) = open_oscillator(0.4, 1.0, 6);
    let exo = Exosystem::scalar(&[Complex64::new(3.0, 1.0)], None).unwrap();
    assert!(natural_supply_rate(&p, &exo, &f.id, Network::Series).unwrap().total.max_abs() < 1e-12);
}

#[test]
fn amplifier_is_not_passive() {
    let (alpha, beta) = (0.5, 1.0);
    let (p, f) = open_oscillator(alpha, beta, 12);
    let l = p.coupling(0);
    let z = vec![f.n.commutator(&l)];
    let rate = SupplyRate::Passivity { z, n: vec![l], lambda: 0.0 };
    let r = check_dissipation(&p, Network::Series, &ExosystemClass::scalar(1), &f.n, &rate, CheckOptions::default()).unwrap();
    assert!(!r.holds);
    assert!(r.worst_margin > 0.0);
}

#[test]
fn quadratic_coefficients_of_gain_gap() {
    let gamma: f64 = 0.8;
    let (p, f) = damped_cavity(gamma, 10);
    let n = vec![f.a.scale_real(gamma.sqrt())];
    for g in [1.0, 1.7] {
        let rate = SupplyRate::gain_diagonal(Complex64::new(1.0, 0.0), n.clone(), g, 0.0);
        let (pp, ff) = (p.clone(), f.n.clone());
        let coeffs = extract_quadratic_coeffs(
            move |w| {
                let exo = Exosystem::scalar(w, None)?;
                let r0 = natural_supply_rate(&pp, &exo, &ff, Network::Series)?.total;
                let connected = Network::Series.connect(&pp, &exo)?;
                let ctx = slh_core::dissipation::SupplyContext {
                    plant: &pp,
                    exo: &exo,
                    network: Network::Series,
                    connected: &connected,
                    storage: &ff,
                };
                r0.try_add(&rate.evaluate(&ctx)?.scale_real(-1.0))
            },
            1,
        )
        .unwrap();
        let expected = -(g * g - 1.0);
        assert!(coeffs.quadratic[0][0].distance(&Operator::real(expected)) < 1e-9);
        // Linear coefficient vanishes: [V, L] + Z†N = 0.
        assert!(coeffs.linear[0].max_abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn concatenated_storages_add(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sa, sc) = (qubit("a"), qubit("c"));
        let p1 = random::passive_triple(&mut rng, &sa, 1, 1.0);
        let p2 = random::passive_triple(&mut rng, &sc, 1, 1.0);
        let v1 = random::positive(&mut rng, &sa, 1.0);
        let v2 = random::positive(&mut rng, &sc, 1.0);
        let w1 = Exosystem::scalar(&amplitudes(&mut rng, 1), None).unwrap();
        let w2 = Exosystem::scalar(&amplitudes(&mut rng, 1), None).unwrap();
        let joint = Exosystem::new(concatenate(&w1.triple, &w2.triple).unwrap(), None);
        let total = natural_supply_rate(&concatenate(&p1, &p2).unwrap(), &joint, &(&v1 + &v2), Network::Series).unwrap().total;
        let parts = &natural_supply_rate(&p1, &w1, &v1, Network::Series).unwrap().total
            + &natural_supply_rate(&p2, &w2, &v2, Network::Series).unwrap().total;
        prop_assert!(total.distance(&parts) <= 1e-10);
    }

    #[test]
    fn series_supply_rate_splits(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sa, sc) = (qubit("a"), qubit("c"));
        let phase = |rng: &mut ChaCha8Rng| {
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            static_system(&CMatrix::from_element(1, 1, Complex64::from_polar(1.0, t))).unwrap()
        };
        let s1 = phase(&mut rng);
        let s2 = phase(&mut rng);
        let p1 = series(&random::passive_triple(&mut rng, &sa, 1, 1.0), &s1).unwrap();
        let p2 = series(&random::passive_triple(&mut rng, &sc, 1, 1.0), &s2).unwrap();
        let v1 = random::positive(&mut rng, &sa, 1.0);
        let v2 = random::positive(&mut rng, &sc, 1.0);
        let w = Exosystem::scalar(&amplitudes(&mut rng, 1), None).unwrap();
        let net = series(&p2, &p1).unwrap();
        let lhs = generator(&series(&net, &w.triple).unwrap(), &(&v1 + &v2)).unwrap();
        let p2_through = conjugate_through_closed_form(&p1, &p2).unwrap();
        let r1 = generator(&series(&p1, &series(&p2_through, &w.triple).unwrap()).unwrap(), &v1).unwrap();
        let r2 = generator(&series(&p2, &series(&p1, &w.triple).unwrap()).unwrap(), &v2).unwrap();
        prop_assert!(lhs.distance(&(&r1 + &r2)) <= 1e-9);
    }

    #[test]
    fn positive_real_agrees_with_grid(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sp = qubit("a");
        let p = random::passive_triple(&mut rng, &sp, 1, 0.8);
        let v = random::positive(&mut rng, &sp, 0.8);
        let n = vec![random::operator(&mut rng, &sp, 0.5)];
        let grid_opts = LemmaOptions { grid: Some(slh_core::dissipation::AmplitudeGrid::new(vec![-2.0, 0.0, 2.0])), ..LemmaOptions::default() };
        let probe = check_positive_real(&p, &v, &[], &n, 0.0, &LemmaOptions { grid: None, ..LemmaOptions::default() }).unwrap();
        let lambda = (probe.certificate.worst_margin + rng.random_range(-0.3..0.3)).max(0.0);
        let r = check_positive_real(&p, &v, &[], &n, lambda, &grid_opts).unwrap();
        let grid = r.grid.unwrap();
        if r.certificate.holds {
            prop_assert!(grid.holds, "lemma holds, grid {}", grid.worst_margin);
        } else {
            prop_assert!(grid.worst_margin > 0.0);
            prop_assert!(grid.worst_margin >= r.certificate.worst_margin - 1e-9);
        }
    }

    #[test]
    fn bounded_real_agrees_with_grid(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sp = qubit("a");
        let p = random::passive_triple(&mut rng, &sp, 1, 0.8);
        let v = random::positive(&mut rng, &sp, 0.8);
        let n = vec![random::operator(&mut rng, &sp, 0.5)];
        let z = vec![vec![Operator::scalar(Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)))]];
        let g = rng.random_range(1.0..2.0);
        let opts = LemmaOptions { grid: Some(slh_core::dissipation::AmplitudeGrid::new(vec![-2.0, 0.0, 2.0])), ..LemmaOptions::default() };
        let lambda = rng.random_range(0.0..6.0);
        let r = check_bounded_real(&p, &v, &z, &n, g, lambda, &opts).unwrap();
        let grid = r.grid.unwrap();
        if r.certificate.holds {
            prop_assert!(grid.holds, "lemma holds, grid {}", grid.worst_margin);
        }
        prop_assert!(r.gamma_min > 0.0);
    }
}
