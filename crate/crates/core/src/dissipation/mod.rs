//! Supply rates, storage functions and the dissipation inequality.
//!
//! A plant `P` is dissipative for a storage function `V ⪰ 0`, a supply rate
//! `r` and a class of exosystems when `𝒢_{P∧W}(V) − r(W) ≤ 0` for every `W`
//! in the class. Classes are finite: a grid of scalar amplitudes, or an
//! explicit list of operator-valued exosystems. The positive-real and
//! bounded-real lemmas in [`lemmas`] give exact verdicts for scalar classes.

mod lemmas;
mod quadratic;
mod stability;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::{dissipator, generator, GeneratorHandle};
use crate::network::{wedge_lft, wedge_series, DirectCoupling, SlhTriple};
use crate::operator::{lift_all, Operator};
use crate::order::{require_psd, upper_bound_check, Projection};
use crate::state::StateVector;
use crate::{CERTIFICATE_TOL, HERMITIAN_TOL};

pub use lemmas::{check_bounded_real, check_positive_real, BoundedRealReport, LemmaOptions, PositiveRealReport};
pub use quadratic::{extract_quadratic_coeffs, QuadraticCoeffs};
pub use stability::{
    check_strict_passivity_stability, stability_certificate, uncertainty_decompose, DecayBound, StabilityReport,
};

/// Tolerance for the storage-function positivity precondition.
const STORAGE_PSD_TOL: f64 = 1e-10;

/// An exosystem: a triple, plus the exosystem half `v` of an optional direct
/// coupling `−i(K†v − v†K)` with the plant.
#[derive(Debug, Clone)]
pub struct Exosystem {
    pub triple: SlhTriple,
    pub coupling: Option<DirectCoupling>,
}

impl Exosystem {
    pub fn new(triple: SlhTriple, coupling: Option<DirectCoupling>) -> Self {
        Self { triple, coupling }
    }

    /// `(I_n, 0, 0)` with no direct coupling.
    pub fn trivial(channels: usize) -> Self {
        Self::new(SlhTriple::identity(channels), None)
    }

    /// `(I, w, 0)` with scalar amplitudes `w`, optionally coupled directly
    /// through `K` with scalar amplitudes `v`.
    pub fn scalar(w: &[Complex64], coupling: Option<(&[Operator], &[Complex64])>) -> Result<Self> {
        let triple = SlhTriple::with_coupling(w.iter().map(|&z| Operator::scalar(z)).collect(), Operator::real(0.0))?;
        let coupling = match coupling {
            Some((k, v)) => Some(DirectCoupling::new(
                k.to_vec(),
                v.iter().map(|&z| Operator::scalar(z)).collect(),
            )?),
            None => None,
        };
        Ok(Self::new(triple, coupling))
    }

    /// Field amplitudes `w` (the exosystem's coupling operators).
    pub fn field_amplitudes(&self) -> Vec<Operator> {
        self.triple.couplings()
    }

    /// Direct-coupling amplitudes `v`.
    pub fn direct_amplitudes(&self) -> Vec<Operator> {
        self.coupling
            .as_ref()
            .map(|c| c.exo_operators().to_vec())
            .unwrap_or_default()
    }

    /// `(w; v)`.
    pub fn inputs(&self) -> Vec<Operator> {
        let mut u = self.field_amplitudes();
        u.extend(self.direct_amplitudes());
        u
    }
}

/// How the plant and exosystem are wired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Network {
    /// `P ∧ W = (P ◁ W) ⊞ (_, _, H_PW)`.
    #[default]
    Series,
    /// Two-channel loop; see [`wedge_lft`].
    Lft,
}

impl Network {
    pub fn connect(self, plant: &SlhTriple, exo: &Exosystem) -> Result<SlhTriple> {
        match self {
            Network::Series => wedge_series(plant, &exo.triple, exo.coupling.as_ref()),
            Network::Lft => wedge_lft(plant, &exo.triple, exo.coupling.as_ref()),
        }
    }
}

/// Real and imaginary parts sampled per amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeGrid {
    pub values: Vec<f64>,
}

impl Default for AmplitudeGrid {
    fn default() -> Self {
        Self {
            values: vec![-4.0, -2.0, 0.0, 2.0, 4.0],
        }
    }
}

impl AmplitudeGrid {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Number of complex values per amplitude.
    pub fn points(&self) -> usize {
        self.values.len() * self.values.len()
    }

    /// The `index`-th point of the product grid over `count` amplitudes; the
    /// first amplitude varies slowest, and for each amplitude the real part
    /// varies slower than the imaginary part.
    pub fn sample(&self, count: usize, mut index: usize) -> Vec<Complex64> {
        let k = self.values.len();
        let p = self.points();
        let mut out = vec![Complex64::new(0.0, 0.0); count];
        for slot in out.iter_mut().rev() {
            let digit = index % p;
            index /= p;
            *slot = Complex64::new(self.values[digit / k], self.values[digit % k]);
        }
        out
    }

    pub fn len(&self, count: usize) -> usize {
        self.points().pow(count as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A finite family of exosystems standing in for an exosystem class.
#[derive(Debug, Clone)]
pub enum ExosystemClass {
    /// Only `W = (I, 0, 0)`.
    Trivial { channels: usize },
    /// `W = (I, w, 0)` with `w` (and direct-coupling amplitudes `v` when
    /// `coupling` lists the plant operators `K`) ranging over a grid.
    ScalarAmplitudes {
        channels: usize,
        grid: AmplitudeGrid,
        coupling: Option<Vec<Operator>>,
    },
    /// Explicit, possibly operator-valued, members.
    OperatorFamily(Vec<Exosystem>),
}

impl ExosystemClass {
    pub fn scalar(channels: usize) -> Self {
        ExosystemClass::ScalarAmplitudes {
            channels,
            grid: AmplitudeGrid::default(),
            coupling: None,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ExosystemClass::Trivial { .. } => 1,
            ExosystemClass::ScalarAmplitudes {
                channels,
                grid,
                coupling,
            } => grid.len(channels + coupling.as_ref().map_or(0, Vec::len)),
            ExosystemClass::OperatorFamily(members) => members.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn channels(&self) -> Option<usize> {
        match self {
            ExosystemClass::Trivial { channels } | ExosystemClass::ScalarAmplitudes { channels, .. } => Some(*channels),
            ExosystemClass::OperatorFamily(members) => members.first().map(|m| m.triple.channels()),
        }
    }

    fn validate(&self, expected_channels: usize) -> Result<()> {
        match self {
            ExosystemClass::ScalarAmplitudes { grid, .. } if grid.is_empty() => {
                return Err(Error::MalformedClass("amplitude grid is empty".into()))
            }
            ExosystemClass::OperatorFamily(members) if members.is_empty() => {
                return Err(Error::MalformedClass("operator family has no members".into()))
            }
            ExosystemClass::OperatorFamily(members) => {
                if let Some(m) = members.iter().find(|m| m.triple.channels() != expected_channels) {
                    return Err(Error::MalformedClass(format!(
                        "member has {} channels, the plant network needs {expected_channels}",
                        m.triple.channels()
                    )));
                }
            }
            _ => {}
        }
        match self.channels() {
            Some(n) if n != expected_channels => Err(Error::MalformedClass(format!(
                "class has {n} channels, the plant network needs {expected_channels}"
            ))),
            _ => Ok(()),
        }
    }

    /// The `index`-th member and its scalar amplitudes `(w; v)` when scalar.
    pub fn member(&self, index: usize) -> Result<(Exosystem, Vec<Complex64>)> {
        match self {
            ExosystemClass::Trivial { channels } => Ok((Exosystem::trivial(*channels), Vec::new())),
            ExosystemClass::ScalarAmplitudes {
                channels,
                grid,
                coupling,
            } => {
                let k = coupling.as_ref().map_or(0, Vec::len);
                let amps = grid.sample(channels + k, index);
                let (w, v) = amps.split_at(*channels);
                let exo = Exosystem::scalar(w, coupling.as_deref().map(|k| (k, v)))?;
                Ok((exo, amps))
            }
            ExosystemClass::OperatorFamily(members) => Ok((members[index].clone(), Vec::new())),
        }
    }
}

/// Everything a supply rate may depend on for one exosystem.
#[derive(Debug, Clone, Copy)]
pub struct SupplyContext<'a> {
    pub plant: &'a SlhTriple,
    pub exo: &'a Exosystem,
    pub network: Network,
    /// `P ∧ W`.
    pub connected: &'a SlhTriple,
    pub storage: &'a Operator,
}

pub type SupplyFn = dyn Fn(&SupplyContext<'_>) -> Result<Operator> + Send + Sync;

/// Supply rate `r(W)`.
#[derive(Clone)]
pub enum SupplyRate {
    /// `r₀(W) = 𝒢_{P∧W}(V₀)`, evaluated through its structured decomposition
    /// when the exosystem is in series with scalar amplitudes.
    Natural { storage: Operator },
    /// `−N†N + (w† v†)Z + Z†(w; v) + λ`.
    Passivity {
        z: Vec<Operator>,
        n: Vec<Operator>,
        lambda: f64,
    },
    /// `g² w†w − (N + Zw)†(N + Zw) + λ`, with `Z` a `p × m` operator matrix.
    Gain {
        z: Vec<Vec<Operator>>,
        n: Vec<Operator>,
        g: f64,
        lambda: f64,
    },
    /// `−cV + λ` for the storage function `V` under test.
    StabilityForm { c: f64, lambda: f64 },
    /// Any other Hermitian-valued rate.
    Custom(Arc<SupplyFn>),
}

impl fmt::Debug for SupplyRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupplyRate::Natural { .. } => f.write_str("Natural"),
            SupplyRate::Passivity { lambda, .. } => write!(f, "Passivity {{ lambda: {lambda} }}"),
            SupplyRate::Gain { g, lambda, .. } => write!(f, "Gain {{ g: {g}, lambda: {lambda} }}"),
            SupplyRate::StabilityForm { c, lambda } => write!(f, "StabilityForm {{ c: {c}, lambda: {lambda} }}"),
            SupplyRate::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl SupplyRate {
    pub fn custom(f: impl Fn(&SupplyContext<'_>) -> Result<Operator> + Send + Sync + 'static) -> Self {
        SupplyRate::Custom(Arc::new(f))
    }

    /// Gain rate with a scalar output weight `Z = z·I_m` (`p = m`).
    pub fn gain_diagonal(z: Complex64, n: Vec<Operator>, g: f64, lambda: f64) -> Self {
        let m = n.len();
        let z = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| Operator::scalar(if i == j { z } else { Complex64::new(0.0, 0.0) }))
                    .collect()
            })
            .collect();
        SupplyRate::Gain { z, n, g, lambda }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SupplyRate::Passivity { lambda, .. } | SupplyRate::Gain { lambda, .. } if *lambda < 0.0 => Err(
                Error::InvalidParameter(format!("supply-rate constant must be non-negative, got {lambda}")),
            ),
            SupplyRate::Gain { g, .. } if *g <= 0.0 => {
                Err(Error::InvalidParameter(format!("gain must be positive, got {g}")))
            }
            SupplyRate::Gain { z, n, .. } if z.len() != n.len() => Err(Error::InvalidParameter(format!(
                "gain weight has {} rows but the output has {} entries",
                z.len(),
                n.len()
            ))),
            _ => Ok(()),
        }
    }

    /// `r(W)`; fails if the value is not Hermitian.
    pub fn evaluate(&self, ctx: &SupplyContext<'_>) -> Result<Operator> {
        let value = self.evaluate_unchecked(ctx)?;
        if !value.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NonHermitianSupply {
                residual: value.hermiticity_residual(),
            });
        }
        Ok(value)
    }

    fn evaluate_unchecked(&self, ctx: &SupplyContext<'_>) -> Result<Operator> {
        match self {
            SupplyRate::Natural { storage } => {
                if ctx.network == Network::Series && exo_is_scalar(ctx.exo) && ctx.plant.scattering_is_identity(1e-12) {
                    Ok(natural_decomposition(ctx.plant, ctx.exo, storage)?.sum()?)
                } else {
                    generator(ctx.connected, storage)
                }
            }
            SupplyRate::Passivity { z, n, lambda } => {
                let u = ctx.exo.inputs();
                if u.len() != z.len() {
                    return Err(Error::InvalidParameter(format!(
                        "passivity weight Z has {} entries but the exosystem supplies {} inputs",
                        z.len(),
                        u.len()
                    )));
                }
                let mut acc = Operator::real(*lambda);
                for ni in n {
                    acc = acc.try_add(&(ni.adjoint().try_mul(ni)?.scale_real(-1.0)))?;
                }
                for (uj, zj) in u.iter().zip(z) {
                    let t = uj.adjoint().try_mul(zj)?;
                    acc = acc.try_add(&t)?.try_add(&t.adjoint())?;
                }
                Ok(acc)
            }
            SupplyRate::Gain { z, n, g, lambda } => {
                let w = ctx.exo.field_amplitudes();
                let mut acc = Operator::real(*lambda);
                for wj in &w {
                    acc = acc.try_add(&wj.adjoint().try_mul(wj)?.scale_real(g * g))?;
                }
                for (row, ni) in z.iter().zip(n) {
                    if row.len() != w.len() {
                        return Err(Error::InvalidParameter(format!(
                            "gain weight row has {} entries but the exosystem has {} channels",
                            row.len(),
                            w.len()
                        )));
                    }
                    let mut out = ni.clone();
                    for (zij, wj) in row.iter().zip(&w) {
                        out = out.try_add(&zij.try_mul(wj)?)?;
                    }
                    acc = acc.try_add(&out.adjoint().try_mul(&out)?.scale_real(-1.0))?;
                }
                Ok(acc)
            }
            SupplyRate::StabilityForm { c, lambda } => ctx.storage.scale_real(-c).try_add(&Operator::real(*lambda)),
            SupplyRate::Custom(f) => f(ctx),
        }
    }
}

fn exo_is_scalar(exo: &Exosystem) -> bool {
    exo.triple.space().is_scalar() && exo.direct_amplitudes().iter().all(|v| v.space().is_scalar())
}

/// Terms of the natural supply rate for `P ◁ W` with commuting amplitudes.
#[derive(Debug, Clone)]
pub struct NaturalDecomposition {
    /// `ℒ_w(V₀)`.
    pub exo_dissipation: Operator,
    /// `ℒ_L(V₀)`.
    pub plant_dissipation: Operator,
    /// `Z = [V₀, (L; K)]`.
    pub z: Vec<Operator>,
    /// `(w† v†)Z + Z†(w; v)`.
    pub exchange: Operator,
    /// `−i[V₀, H]`; zero when the storage commutes with the plant Hamiltonian.
    pub hamiltonian: Operator,
    /// `−i[V₀, D]` for the exosystem's own Hamiltonian `D`.
    pub exo_hamiltonian: Operator,
}

impl NaturalDecomposition {
    pub fn sum(&self) -> Result<Operator> {
        let (_, ops) = lift_all([
            &self.exo_dissipation,
            &self.plant_dissipation,
            &self.exchange,
            &self.hamiltonian,
            &self.exo_hamiltonian,
        ])?;
        Ok(ops.iter().skip(1).fold(ops[0].clone(), |acc, x| &acc + x))
    }
}

#[derive(Debug, Clone)]
pub struct NaturalSupplyRate {
    /// `𝒢_{P∧W}(V₀)`.
    pub total: Operator,
    pub decomposition: Option<NaturalDecomposition>,
}

impl NaturalSupplyRate {
    /// Largest entrywise difference between the total and the decomposition.
    pub fn decomposition_residual(&self) -> Option<f64> {
        let d = self.decomposition.as_ref()?;
        d.sum().ok().map(|s| s.distance(&self.total))
    }
}

/// `r₀(W) = 𝒢_{P∧W}(V₀)`, with its structured decomposition when `W` is in
/// series with commuting amplitudes.
pub fn natural_supply_rate(plant: &SlhTriple, exo: &Exosystem, storage: &Operator, network: Network) -> Result<NaturalSupplyRate> {
    require_psd(storage, STORAGE_PSD_TOL)?;
    let connected = network.connect(plant, exo)?;
    let total = generator(&connected, storage)?;
    let decomposition = if network == Network::Series && plant.scattering_is_identity(1e-12) {
        Some(natural_decomposition(plant, exo, storage)?)
    } else {
        None
    };
    Ok(NaturalSupplyRate { total, decomposition })
}

fn natural_decomposition(plant: &SlhTriple, exo: &Exosystem, storage: &Operator) -> Result<NaturalDecomposition> {
    let w = exo.field_amplitudes();
    let v = exo.direct_amplitudes();
    let mut ops: Vec<Operator> = plant.couplings();
    if let Some(c) = &exo.coupling {
        ops.extend(c.plant_operators().iter().cloned());
    }
    let z: Vec<Operator> = ops.iter().map(|x| storage.commutator(x)).collect();
    let u: Vec<&Operator> = w.iter().chain(&v).collect();
    let mut exchange = Operator::real(0.0);
    for (uj, zj) in u.iter().zip(&z) {
        let t = uj.adjoint().try_mul(zj)?;
        exchange = exchange.try_add(&t)?.try_add(&t.adjoint())?;
    }
    let minus_i = Complex64::new(0.0, -1.0);
    Ok(NaturalDecomposition {
        exo_dissipation: dissipator(&w, storage)?,
        plant_dissipation: dissipator(&plant.couplings(), storage)?,
        z,
        exchange,
        hamiltonian: storage.commutator(&plant.hamiltonian()).scale(minus_i),
        exo_hamiltonian: storage.commutator(&exo.triple.hamiltonian()).scale(minus_i),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    Dissipation,
    PositiveReal,
    BoundedReal,
    Stability,
    StrictPassivity,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateKind::Dissipation => "dissipation",
            CertificateKind::PositiveReal => "positive-real",
            CertificateKind::BoundedReal => "bounded-real",
            CertificateKind::Stability => "stability",
            CertificateKind::StrictPassivity => "strict-passivity",
        })
    }
}

/// What produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact operator condition from a lemma.
    Lemma,
    /// Lemma condition with a singular `Γ`, checked through its kernel.
    LemmaDegenerate,
    /// Finite sample of an exosystem class.
    Grid,
    /// A single operator inequality.
    Direct,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Lemma => "lemma",
            Method::LemmaDegenerate => "lemma (singular gamma, kernel conditions)",
            Method::Grid => "grid",
            Method::Direct => "direct",
        })
    }
}

/// Margin of the dissipation inequality at one exosystem.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMargin {
    pub index: usize,
    /// Scalar amplitudes `(w; v)`; empty for operator-valued members.
    pub amplitudes: Vec<Complex64>,
    /// Largest eigenvalue of `𝒢_{P∧W}(V) − r(W)`.
    pub margin: f64,
    /// Smallest eigenvalue of the same operator.
    pub lower: f64,
    pub witness: StateVector,
}

#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    pub method: Method,
    pub holds: bool,
    pub tol: f64,
    pub worst_margin: f64,
    pub witness: StateVector,
    /// Per-sample margins for grid checks.
    pub samples: Vec<SampleMargin>,
    /// Index into `samples` of the worst margin (first on ties).
    pub worst_sample: Option<usize>,
}

impl CertificateReport {
    pub(crate) fn single(kind: CertificateKind, method: Method, tol: f64, margin: f64, witness: StateVector) -> Self {
        Self {
            kind,
            method,
            holds: margin <= tol,
            tol,
            worst_margin: margin,
            witness,
            samples: Vec::new(),
            worst_sample: None,
        }
    }

    /// `max |eigenvalue|` over all samples: how far the inequality is from
    /// equality.
    pub fn equality_margin(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.margin.abs().max(s.lower.abs()))
            .fold(self.worst_margin.abs(), f64::max)
    }
}

/// Tolerance and projection used by certificate checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub tol: f64,
    /// Oscillator inequalities are asserted below the top Fock level by
    /// default; truncation corrupts only that level.
    pub projection: Projection,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tol: CERTIFICATE_TOL,
            projection: Projection::Boundary,
        }
    }
}

impl CheckOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Spectrum extremes of `𝒢_{P∧W}(V) − r(W)` for a single exosystem.
pub fn dissipation_margin(
    plant: &SlhTriple,
    network: Network,
    exo: &Exosystem,
    storage: &Operator,
    rate: &SupplyRate,
    projection: Projection,
) -> Result<(f64, f64, StateVector)> {
    let connected = network.connect(plant, exo)?;
    let ctx = SupplyContext {
        plant,
        exo,
        network,
        connected: &connected,
        storage,
    };
    let r = rate.evaluate(&ctx)?;
    let gv = GeneratorHandle::new(&connected).apply(storage)?;
    let (_, ops) = lift_all([&gv, &r])?;
    let diff = (&ops[0] - &ops[1]).herm_part();
    let upper = upper_bound_check(&diff, 0.0, projection);
    let lower = upper_bound_check(&diff.scale_real(-1.0), 0.0, projection);
    Ok((upper.margin, -lower.margin, upper.witness))
}

/// Checks `𝒢_{P∧W}(V) − r(W) ≤ 0` for every member of `class`.
pub fn check_dissipation(
    plant: &SlhTriple,
    network: Network,
    class: &ExosystemClass,
    storage: &Operator,
    rate: &SupplyRate,
    options: CheckOptions,
) -> Result<CertificateReport> {
    require_psd(storage, STORAGE_PSD_TOL)?;
    rate.validate()?;
    let channels = match network {
        Network::Series => plant.channels(),
        Network::Lft => 2,
    };
    class.validate(channels)?;
    let samples: Vec<SampleMargin> = (0..class.len())
        .into_par_iter()
        .map(|index| {
            let (exo, amplitudes) = class.member(index)?;
            let (margin, lower, witness) = dissipation_margin(plant, network, &exo, storage, rate, options.projection)?;
            Ok(SampleMargin {
                index,
                amplitudes,
                margin,
                lower,
                witness,
            })
        })
        .collect::<Result<_>>()?;
    let mut worst = 0;
    for (i, s) in samples.iter().enumerate() {
        if s.margin > samples[worst].margin {
            worst = i;
        }
    }
    let worst_margin = samples[worst].margin;
    Ok(CertificateReport {
        kind: CertificateKind::Dissipation,
        method: Method::Grid,
        holds: worst_margin <= options.tol,
        tol: options.tol,
        worst_margin,
        witness: samples[worst].witness.clone(),
        worst_sample: Some(worst),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standard::{fock_ops, qubit_ops};

    #[test]
    fn grid_ordering() {
        let g = AmplitudeGrid::default();
        assert_eq!(g.len(1), 25);
        assert_eq!(g.sample(1, 0), [Complex64::new(-4.0, -4.0)]);
        assert_eq!(g.sample(1, 1), [Complex64::new(-4.0, -2.0)]);
        assert_eq!(g.sample(1, 12), [Complex64::new(0.0, 0.0)]);
        assert_eq!(g.sample(2, 1), [Complex64::new(-4.0, -4.0), Complex64::new(-4.0, -2.0)]);
        assert_eq!(g.sample(2, 25)[0], Complex64::new(-4.0, -2.0));
    }

    #[test]
    fn cavity_with_zero_rate_attains_zero_at_vacuum() {
        let gamma: f64 = 1.0;
        let f = fock_ops("cav", 8).unwrap();
        let p = SlhTriple::with_coupling(vec![f.a.scale_real(gamma.sqrt())], Operator::real(0.0)).unwrap();
        let zero = SupplyRate::custom(|_| Ok(Operator::real(0.0)));
        let r = check_dissipation(
            &p,
            Network::Series,
            &ExosystemClass::Trivial { channels: 1 },
            &f.n,
            &zero,
            CheckOptions::default(),
        )
        .unwrap();
        assert!(r.holds);
        assert!(r.worst_margin.abs() < 1e-12);
        assert!((r.witness.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn natural_rate_of_atom() {
        let gamma: f64 = 0.5;
        let q = qubit_ops("qb");
        let p = SlhTriple::with_coupling(vec![q.sm.scale_real(gamma.sqrt())], q.sz.scale_real(0.35)).unwrap();
        let v0 = q.upper_projector();
        let w = Complex64::new(0.7, -1.2);
        let exo = Exosystem::scalar(&[w], None).unwrap();
        let r = natural_supply_rate(&p, &exo, &v0, Network::Series).unwrap();
        // −γσ₁ − √γ(w*σ₋ + σ₊w)
        let expected = &v0.scale_real(-gamma) - &(&q.sm.scale(w.conj()) + &q.sp.scale(w)).scale_real(gamma.sqrt());
        assert!(r.total.distance(&expected) < 1e-12);
        assert!(r.decomposition_residual().unwrap() < 1e-12);
    }

    #[test]
    fn natural_rate_of_identity_vanishes() {
        let f = fock_ops("cav", 5).unwrap();
        let p = SlhTriple::with_coupling(vec![&f.a + &f.adag.scale_real(0.3)], f.n.clone()).unwrap();
        let exo = Exosystem::scalar(&[Complex64::new(2.0, 1.0)], None).unwrap();
        let r = natural_supply_rate(&p, &exo, &f.id, Network::Series).unwrap();
        assert!(r.total.max_abs() < 1e-12);
    }

    #[test]
    fn negative_storage_is_rejected() {
        let q = qubit_ops("qb");
        let p = SlhTriple::with_coupling(vec![q.sm.clone()], Operator::real(0.0)).unwrap();
        let err = check_dissipation(
            &p,
            Network::Series,
            &ExosystemClass::scalar(1),
            &q.sz,
            &SupplyRate::StabilityForm { c: 1.0, lambda: 0.0 },
            CheckOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotPositive { .. }));
    }

    #[test]
    fn malformed_classes() {
        let q = qubit_ops("qb");
        let p = SlhTriple::with_coupling(vec![q.sm.clone()], Operator::real(0.0)).unwrap();
        let rate = SupplyRate::StabilityForm { c: 1.0, lambda: 0.0 };
        let run = |class: &ExosystemClass| {
            check_dissipation(&p, Network::Series, class, &q.upper_projector(), &rate, CheckOptions::default())
        };
        assert!(matches!(run(&ExosystemClass::scalar(2)), Err(Error::MalformedClass(_))));
        assert!(matches!(run(&ExosystemClass::OperatorFamily(vec![])), Err(Error::MalformedClass(_))));
        let empty = ExosystemClass::ScalarAmplitudes {
            channels: 1,
            grid: AmplitudeGrid::new(vec![]),
            coupling: None,
        };
        assert!(matches!(run(&empty), Err(Error::MalformedClass(_))));
    }

    #[test]
    fn non_hermitian_supply_is_rejected() {
        let q = qubit_ops("qb");
        let p = SlhTriple::with_coupling(vec![q.sm.clone()], Operator::real(0.0)).unwrap();
        let sm = q.sm.clone();
        let rate = SupplyRate::custom(move |_| Ok(sm.clone()));
        let err = check_dissipation(
            &p,
            Network::Series,
            &ExosystemClass::Trivial { channels: 1 },
            &q.upper_projector(),
            &rate,
            CheckOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonHermitianSupply { .. }));
    }
}
