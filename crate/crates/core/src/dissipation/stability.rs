//! Stability certificates from differential inequalities.

use crate::error::{Error, Result};
use crate::generator::generator;
use crate::network::SlhTriple;
use crate::operator::Operator;
use crate::order::{require_psd, upper_bound_check};

use super::{
    CertificateKind, CertificateReport, CheckOptions, Exosystem, Method, Network, SupplyContext, SupplyRate,
    STORAGE_PSD_TOL,
};

/// `⟨V(t)⟩ ≤ e^{−ct}⟨V(0)⟩ + λ/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub c: f64,
    pub lambda: f64,
}

impl DecayBound {
    pub fn value(&self, t: f64, initial: f64) -> f64 {
        (-self.c * t).exp() * initial + self.lambda / self.c
    }
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub certificate: CertificateReport,
    pub bound: DecayBound,
}

/// Checks `𝒢_P(V) + cV − λ ≤ 0`.
pub fn stability_certificate(
    plant: &SlhTriple,
    storage: &Operator,
    c: f64,
    lambda: f64,
    options: CheckOptions,
) -> Result<StabilityReport> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidParameter(format!("decay rate must be positive, got {c}")));
    }
    require_psd(storage, STORAGE_PSD_TOL)?;
    let lhs = generator(plant, storage)?
        .try_add(&storage.scale_real(c))?
        .try_add(&Operator::real(-lambda))?;
    let check = upper_bound_check(&lhs.herm_part(), 0.0, options.projection);
    Ok(StabilityReport {
        certificate: CertificateReport::single(
            CertificateKind::Stability,
            Method::Direct,
            options.tol,
            check.margin,
            check.witness,
        ),
        bound: DecayBound { c, lambda },
    })
}

/// Checks `r(I) + cV ≤ 0` at the trivial exosystem, then the stability
/// inequality with `λ = 0`. The report carries the larger of the two margins.
pub fn check_strict_passivity_stability(
    plant: &SlhTriple,
    storage: &Operator,
    rate: &SupplyRate,
    c: f64,
    options: CheckOptions,
) -> Result<StabilityReport> {
    let exo = Exosystem::trivial(plant.channels());
    let connected = Network::Series.connect(plant, &exo)?;
    let ctx = SupplyContext {
        plant,
        exo: &exo,
        network: Network::Series,
        connected: &connected,
        storage,
    };
    let lhs = rate.evaluate(&ctx)?.try_add(&storage.scale_real(c))?;
    let strict = upper_bound_check(&lhs.herm_part(), 0.0, options.projection);
    let mut report = stability_certificate(plant, storage, c, 0.0, options)?;
    let cert = &mut report.certificate;
    cert.kind = CertificateKind::StrictPassivity;
    if strict.margin > cert.worst_margin {
        cert.worst_margin = strict.margin;
        cert.witness = strict.witness;
    }
    cert.holds = cert.worst_margin <= cert.tol;
    Ok(report)
}

/// Splits a perturbed plant `(I, (1+ε)L₀, H₀ + D)` into a nominal plant
/// `(I, L₀, H₀)` and an uncertainty exosystem `(I, εL₀, D)`.
pub fn uncertainty_decompose(
    nominal_coupling: &[Operator],
    nominal_hamiltonian: &Operator,
    epsilon: f64,
    detuning: &Operator,
) -> Result<(SlhTriple, SlhTriple)> {
    let nominal = SlhTriple::with_coupling(nominal_coupling.to_vec(), nominal_hamiltonian.clone())?;
    let uncertainty = SlhTriple::with_coupling(
        nominal_coupling.iter().map(|l| l.scale_real(epsilon)).collect(),
        detuning.clone(),
    )?;
    Ok((nominal, uncertainty))
}
