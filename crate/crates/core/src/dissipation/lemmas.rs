//! Positive-real and bounded-real lemma conditions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generator::dissipator;
use crate::operator::{lift_all, max_abs, CMatrix, Operator, I};
use crate::order::{hermitian_spectrum, require_psd, upper_bound_check};
use crate::network::SlhTriple;

use super::{
    check_dissipation, AmplitudeGrid, CertificateKind, CertificateReport, CheckOptions, ExosystemClass, Method,
    Network, SupplyRate, STORAGE_PSD_TOL,
};

/// Eigenvalues of `Γ` above this count as invertible directions.
const GAMMA_RANGE_TOL: f64 = 1e-8;

/// Options shared by the lemma checks.
#[derive(Debug, Clone)]
pub struct LemmaOptions {
    pub check: CheckOptions,
    /// Grid for the cross-check against the sampled dissipation inequality;
    /// `None` skips it.
    pub grid: Option<AmplitudeGrid>,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        Self {
            check: CheckOptions::default(),
            grid: Some(AmplitudeGrid::default()),
        }
    }
}

impl LemmaOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            check: CheckOptions::with_tol(tol),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct PositiveRealReport {
    pub certificate: CertificateReport,
    /// `Z = [V, (L; K)]`.
    pub z: Vec<Operator>,
    /// Sampled dissipation check with the matching passivity rate.
    pub grid: Option<CertificateReport>,
}

#[derive(Debug, Clone)]
pub struct BoundedRealReport {
    pub certificate: CertificateReport,
    /// Smallest eigenvalue of `Γ = g² − Z†Z` on `ℂ^m ⊗ H`.
    pub gamma_min: f64,
    /// Size of the linear coefficient on `ker Γ`, when `Γ` is singular.
    pub kernel_residual: Option<f64>,
    /// `w★ = Γ⁻¹([V,L] + Z†N)` when `Γ` is invertible. Diagnostic only: it
    /// is an operator and not a member of the scalar class.
    pub optimal_input: Option<Vec<Operator>>,
    pub grid: Option<CertificateReport>,
}

fn identity_scattering(plant: &SlhTriple) -> Result<()> {
    if plant.scattering_is_identity(1e-12) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("lemma conditions need a plant with identity scattering".into()))
    }
}

fn nonnegative(lambda: f64) -> Result<()> {
    if lambda < 0.0 {
        Err(Error::InvalidParameter(format!("supply-rate constant must be non-negative, got {lambda}")))
    } else {
        Ok(())
    }
}

/// `ℒ_L(V) − i[V,H] + N†N − λ` on the common space.
fn constant_term(plant: &SlhTriple, storage: &Operator, n: &[Operator], lambda: f64) -> Result<Operator> {
    let mut c0 = dissipator(&plant.couplings(), storage)?
        .try_add(&storage.commutator(&plant.hamiltonian()).scale(-I))?
        .try_add(&Operator::real(-lambda))?;
    for ni in n {
        c0 = c0.try_add(&ni.adjoint().try_mul(ni)?)?;
    }
    Ok(c0)
}

fn lemma_certificate(kind: CertificateKind, method: Method, c: &Operator, extra: f64, options: &CheckOptions) -> CertificateReport {
    let check = upper_bound_check(&c.herm_part(), 0.0, options.projection);
    CertificateReport::single(kind, method, options.tol, check.margin.max(extra), check.witness)
}

/// Checks `ℒ_L(V) − i[V,H] + N†N − λ ≤ 0` and returns `Z = [V, (L; K)]`.
pub fn check_positive_real(
    plant: &SlhTriple,
    storage: &Operator,
    k: &[Operator],
    n: &[Operator],
    lambda: f64,
    options: &LemmaOptions,
) -> Result<PositiveRealReport> {
    identity_scattering(plant)?;
    nonnegative(lambda)?;
    require_psd(storage, STORAGE_PSD_TOL)?;
    let c0 = constant_term(plant, storage, n, lambda)?;
    let certificate = lemma_certificate(CertificateKind::PositiveReal, Method::Lemma, &c0, f64::NEG_INFINITY, &options.check);
    let z: Vec<Operator> = plant.couplings().iter().chain(k).map(|x| storage.commutator(x)).collect();
    let grid = match &options.grid {
        Some(grid) => {
            let class = ExosystemClass::ScalarAmplitudes {
                channels: plant.channels(),
                grid: grid.clone(),
                coupling: (!k.is_empty()).then(|| k.to_vec()),
            };
            let rate = SupplyRate::Passivity {
                z: z.clone(),
                n: n.to_vec(),
                lambda,
            };
            Some(check_dissipation(plant, Network::Series, &class, storage, &rate, options.check)?)
        }
        None => None,
    };
    Ok(PositiveRealReport { certificate, z, grid })
}

/// Dense `rows·d × cols·d` matrix from `d × d` blocks.
fn assemble(rows: usize, cols: usize, d: usize, block: impl Fn(usize, usize) -> CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(rows * d, cols * d);
    for i in 0..rows {
        for j in 0..cols {
            out.view_mut((i * d, j * d), (d, d)).copy_from(&block(i, j));
        }
    }
    out
}

/// Checks the bounded-real conditions for gain `g` with output `N + Zw`.
///
/// `z` is indexed `z[output][channel]`. With `Γ` invertible the completed
/// square `C₀ + B†Γ⁻¹B ≤ 0` is checked, where `B = [V,L] + Z†N`. With `Γ`
/// singular, `B` must vanish on `ker Γ` and `C₀ + B†Γ⁺B ≤ 0` must hold.
pub fn check_bounded_real(
    plant: &SlhTriple,
    storage: &Operator,
    z: &[Vec<Operator>],
    n: &[Operator],
    g: f64,
    lambda: f64,
    options: &LemmaOptions,
) -> Result<BoundedRealReport> {
    identity_scattering(plant)?;
    nonnegative(lambda)?;
    if g <= 0.0 {
        return Err(Error::InvalidParameter(format!("gain must be positive, got {g}")));
    }
    let m = plant.channels();
    if z.len() != n.len() || z.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidParameter(format!(
            "output weight must be {} x {m} to match the output and the channels",
            n.len()
        )));
    }
    require_psd(storage, STORAGE_PSD_TOL)?;

    let couplings = plant.couplings();
    let c0 = constant_term(plant, storage, n, lambda)?;
    let (space, ops) = lift_all(
        std::iter::once(&c0)
            .chain(&couplings)
            .chain(z.iter().flatten())
            .chain(n)
            .chain(std::iter::once(storage)),
    )?;
    let d = space.dim();
    let c0 = &ops[0];
    let l = &ops[1..=m];
    let zs = &ops[1 + m..1 + m + n.len() * m];
    let ns = &ops[1 + m + n.len() * m..1 + m + n.len() * m + n.len()];
    let v = ops.last().expect("storage is lifted last");
    let zij = |i: usize, j: usize| zs[i * m + j].matrix();

    let gamma = assemble(m, m, d, |j, k| {
        let mut b = if j == k {
            CMatrix::identity(d, d) * Complex64::new(g * g, 0.0)
        } else {
            CMatrix::zeros(d, d)
        };
        for i in 0..n.len() {
            b -= zij(i, j).adjoint() * zij(i, k);
        }
        b
    });
    let linear = assemble(m, 1, d, |j, _| {
        let mut b = v.commutator(&l[j]).into_matrix();
        for (i, ni) in ns.iter().enumerate() {
            b += zij(i, j).adjoint() * ni.matrix();
        }
        b
    });

    let spec = hermitian_spectrum(&gamma);
    let gamma_min = spec.min();
    let invertible = m > 0 && gamma_min > GAMMA_RANGE_TOL;
    let pinv = spec.map(|x| if x > GAMMA_RANGE_TOL { 1.0 / x } else { 0.0 });
    let schur = Operator::from_parts(space.clone(), c0.matrix() + linear.adjoint() * &pinv * &linear);
    let (method, kernel_residual, optimal_input) = if invertible || m == 0 {
        let w = &pinv * &linear;
        let blocks = (0..m)
            .map(|j| Operator::from_parts(space.clone(), w.view((j * d, 0), (d, d)).clone_owned()))
            .collect();
        (Method::Lemma, None, Some(blocks))
    } else {
        let kernel = spec.map(|x| if x > GAMMA_RANGE_TOL { 0.0 } else { 1.0 });
        (Method::LemmaDegenerate, Some(max_abs(&(kernel * &linear))), None)
    };
    let extra = (-gamma_min).max(kernel_residual.unwrap_or(f64::NEG_INFINITY));
    let certificate = lemma_certificate(CertificateKind::BoundedReal, method, &schur, extra, &options.check);

    let grid = match &options.grid {
        Some(grid) => {
            let class = ExosystemClass::ScalarAmplitudes {
                channels: m,
                grid: grid.clone(),
                coupling: None,
            };
            let rate = SupplyRate::Gain {
                z: z.to_vec(),
                n: n.to_vec(),
                g,
                lambda,
            };
            Some(check_dissipation(plant, Network::Series, &class, storage, &rate, options.check)?)
        }
        None => None,
    };
    Ok(BoundedRealReport {
        certificate,
        gamma_min: if m == 0 { f64::INFINITY } else { gamma_min },
        kernel_residual,
        optimal_input,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standard::{fock_ops, qubit_ops};

    fn cavity(gamma: f64, d: usize) -> (SlhTriple, crate::standard::FockOps) {
        let f = fock_ops("cav", d).unwrap();
        let p = SlhTriple::with_coupling(vec![f.a.scale_real(gamma.sqrt())], Operator::real(0.0)).unwrap();
        (p, f)
    }

    fn one() -> Vec<Vec<Operator>> {
        vec![vec![Operator::real(1.0)]]
    }

    #[test]
    fn cavity_is_passive_with_commutator_weight() {
        let gamma: f64 = 0.8;
        let (p, f) = cavity(gamma, 8);
        let n = [f.a.scale_real(gamma.sqrt())];
        let r = check_positive_real(&p, &f.n, &[], &n, 0.0, &LemmaOptions::default()).unwrap();
        assert!(r.certificate.holds);
        assert!(r.certificate.worst_margin.abs() < 1e-12);
        assert!(r.z[0].distance(&f.a.scale_real(-gamma.sqrt())) < 1e-12);
        let grid = r.grid.unwrap();
        assert!(grid.holds);
        assert!(grid.equality_margin() < 1e-10);
    }

    #[test]
    fn atom_is_passive() {
        let gamma: f64 = 1.3;
        let q = qubit_ops("qb");
        let p = SlhTriple::with_coupling(vec![q.sm.scale_real(gamma.sqrt())], q.sz.scale_real(0.5)).unwrap();
        let n = [q.sm.scale_real(gamma.sqrt())];
        let r = check_positive_real(&p, &q.upper_projector(), &[], &n, 0.0, &LemmaOptions::default()).unwrap();
        assert!(r.certificate.holds);
        assert!(r.z[0].distance(&q.sm.scale_real(-gamma.sqrt())) < 1e-12);
        assert!(r.grid.unwrap().holds);
    }

    #[test]
    fn zero_storage_passive_trivially() {
        let (p, f) = cavity(1.0, 4);
        let zero = Operator::zero(f.space().clone());
        let r = check_positive_real(&p, &zero, &[], &[], 0.0, &LemmaOptions::default()).unwrap();
        assert!(r.certificate.holds);
        assert!(r.z[0].max_abs() == 0.0);
    }

    #[test]
    fn cavity_gain_one_is_degenerate() {
        let gamma: f64 = 0.6;
        let (p, f) = cavity(gamma, 8);
        let n = [f.a.scale_real(gamma.sqrt())];
        let r = check_bounded_real(&p, &f.n, &one(), &n, 1.0, 0.0, &LemmaOptions::default()).unwrap();
        assert_eq!(r.certificate.method, Method::LemmaDegenerate);
        assert!(r.gamma_min.abs() < 1e-12);
        assert!(r.kernel_residual.unwrap() < 1e-12);
        assert!(r.certificate.holds);
        assert!(r.optimal_input.is_none());
        assert!(r.grid.unwrap().holds);
    }

    #[test]
    fn atom_gain_one() {
        let gamma: f64 = 2.0;
        let q = qubit_ops("qb");
        let p = SlhTriple::with_coupling(vec![q.sm.scale_real(gamma.sqrt())], Operator::real(0.0)).unwrap();
        let n = [q.sm.scale_real(gamma.sqrt())];
        let r = check_bounded_real(&p, &q.upper_projector(), &one(), &n, 1.0, 0.0, &LemmaOptions::default()).unwrap();
        assert!(r.certificate.holds);
        assert!(r.grid.unwrap().holds);
    }

    #[test]
    fn gain_below_one_fails_with_unmatched_kernel() {
        let gamma: f64 = 1.0;
        let q = qubit_ops("qb");
        let p = SlhTriple::with_coupling(vec![q.sm.scale_real(gamma.sqrt())], Operator::real(0.0)).unwrap();
        let n = [q.sm.scale_real(gamma.sqrt())];
        let r = check_bounded_real(&p, &q.upper_projector(), &one(), &n, 0.5, 0.0, &LemmaOptions::default()).unwrap();
        assert!(!r.certificate.holds);
        assert!((r.gamma_min + 0.75).abs() < 1e-12);
        assert!(!r.grid.unwrap().holds);
    }

    #[test]
    fn zero_weight_optimal_input() {
        let g = 2.0;
        let (p, f) = cavity(1.0, 5);
        let z = vec![vec![Operator::real(0.0)]];
        let n = [Operator::zero(f.space().clone())];
        let r = check_bounded_real(&p, &f.n, &z, &n, g, 0.0, &LemmaOptions::default()).unwrap();
        assert_eq!(r.certificate.method, Method::Lemma);
        assert!((r.gamma_min - g * g).abs() < 1e-12);
        let expected = f.n.commutator(&f.a).scale_real(1.0 / (g * g));
        assert!(r.optimal_input.unwrap()[0].distance(&expected) < 1e-12);
        assert!(r.certificate.holds);
    }

    #[test]
    fn amplifier_fails_positive_real() {
        let (alpha, beta): (f64, f64) = (0.5, 1.0);
        let f = fock_ops("cav", 10).unwrap();
        let l = &f.a.scale_real(alpha) + &f.adag.scale_real(beta);
        let p = SlhTriple::with_coupling(vec![l.clone()], Operator::real(0.0)).unwrap();
        let r = check_positive_real(&p, &f.n, &[], &[l], 0.0, &LemmaOptions::default()).unwrap();
        assert!(!r.certificate.holds);
        assert!(r.certificate.worst_margin > 0.0);
        let grid = r.grid.unwrap();
        assert!(!grid.holds);
        assert!(grid.worst_margin >= r.certificate.worst_margin - 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (p, f) = cavity(1.0, 4);
        let opts = LemmaOptions::default();
        assert!(matches!(
            check_positive_real(&p, &f.n, &[], &[], -1.0, &opts),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            check_bounded_real(&p, &f.n, &one(), std::slice::from_ref(&f.a), -1.0, 0.0, &opts),
            Err(Error::InvalidParameter(_))
        ));
        let phase = SlhTriple::new(
            vec![vec![Operator::scalar(Complex64::new(0.0, 1.0))]],
            vec![f.a.clone()],
            Operator::real(0.0),
        )
        .unwrap();
        assert!(matches!(
            check_positive_real(&phase, &f.n, &[], &[], 0.0, &opts),
            Err(Error::InvalidParameter(_))
        ));
    }
}
