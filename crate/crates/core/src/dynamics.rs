//! Master-equation integration and mean-quadrature drift.
//!
//! `dρ/dt = Kρ + ρK† + Σ LρL†` is integrated with fixed-step classical RK4.
//! The trace is renormalized after each step and positivity is monitored at
//! a fixed stride; neither is silently enforced beyond that.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dissipation::DecayBound;
use crate::error::{Error, Result};
use crate::generator::{generator, GeneratorHandle};
use crate::network::SlhTriple;
use crate::operator::{hermiticity_residual, max_abs, CMatrix, Operator, ONE};
use crate::order::min_eigenvalue;
use crate::space::{FactorKind, HilbertSpace};
use crate::standard::fock_ops;
use crate::state::{trace_product, DensityMatrix};
use crate::HERMITIAN_TOL;

const POSITIVITY_FLOOR: f64 = -1e-6;
const STIFFNESS_WARNING: f64 = 0.1;
const BOUND_SLACK: f64 = 1e-6;
const LINEARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub dt: f64,
    /// Check the smallest eigenvalue every `positivity_stride` steps.
    pub positivity_stride: usize,
}

impl EvolveOptions {
    pub fn new(dt: f64) -> Self {
        Self { dt, positivity_stride: 25 }
    }
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self::new(1e-3)
    }
}

/// Per-run integrator diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunStats {
    pub steps: usize,
    /// Largest `|tr ρ − 1|` removed by renormalization.
    pub max_trace_drift: f64,
    pub max_hermiticity_residual: f64,
    /// Smallest eigenvalue seen at the monitored steps.
    pub min_eigenvalue: f64,
    /// Upper estimate of `‖𝒢†‖·dt`.
    pub stiffness: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub stats: RunStats,
}

struct Integrator {
    handle: GeneratorHandle,
    space: Arc<HilbertSpace>,
    rho: CMatrix,
    dt: f64,
    stride: usize,
    step: usize,
    stats: RunStats,
}

impl Integrator {
    fn new(g: &SlhTriple, rho0: &DensityMatrix, opts: EvolveOptions) -> Result<Self> {
        if !(opts.dt > 0.0 && opts.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {}", opts.dt)));
        }
        let space = HilbertSpace::union_arc(g.space_arc(), rho0.space_arc())?;
        let g = g.lift_arc(&space)?;
        let rho = if *rho0.space() == *space {
            rho0.matrix().clone()
        } else {
            rho0.extend(&space)?.matrix().clone()
        };
        let handle = GeneratorHandle::new(&g);
        let stiffness = norm_estimate(&handle) * opts.dt;
        if stiffness > STIFFNESS_WARNING {
            log::warn!("generator norm estimate times dt is {stiffness:.3}; the integrator may be inaccurate");
        }
        Ok(Self {
            handle,
            space,
            rho,
            dt: opts.dt,
            stride: opts.positivity_stride.max(1),
            step: 0,
            stats: RunStats {
                min_eigenvalue: f64::INFINITY,
                stiffness,
                ..RunStats::default()
            },
        })
    }

    fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    fn advance(&mut self) -> Result<()> {
        let h = Complex64::new(self.dt, 0.0);
        let half = Complex64::new(0.5 * self.dt, 0.0);
        let f = |m: &CMatrix| self.handle.apply_adjoint_matrix(m);
        let k1 = f(&self.rho);
        let k2 = f(&(&self.rho + &k1 * half));
        let k3 = f(&(&self.rho + &k2 * half));
        let k4 = f(&(&self.rho + &k3 * h));
        let sixth = Complex64::new(self.dt / 6.0, 0.0);
        let mut next = &self.rho + (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * sixth;
        let trace = next.trace();
        self.stats.max_trace_drift = self.stats.max_trace_drift.max((trace - ONE).norm());
        next /= trace;
        self.rho = next;
        self.step += 1;
        self.stats.steps = self.step;
        self.stats.max_hermiticity_residual = self.stats.max_hermiticity_residual.max(hermiticity_residual(&self.rho));
        if self.step.is_multiple_of(self.stride) {
            self.monitor()?;
        }
        Ok(())
    }

    fn monitor(&mut self) -> Result<()> {
        let min = min_eigenvalue(&self.rho);
        self.stats.min_eigenvalue = self.stats.min_eigenvalue.min(min);
        if min < POSITIVITY_FLOOR {
            return Err(Error::StepSize {
                min_eigenvalue: min,
                time: self.time(),
            });
        }
        Ok(())
    }

    fn state(&self) -> DensityMatrix {
        DensityMatrix::from_parts(self.space.clone(), self.rho.clone())
    }
}

/// Frobenius bound on the superoperator norm of the adjoint generator.
fn spectral_norm(m: &CMatrix) -> f64 {
    m.singular_values().iter().fold(0.0, |a: f64, &x| a.max(x))
}

/// `2‖K‖₂ + Σ‖L_k‖₂²`, an upper bound on the induced norm of `𝒢†`.
fn norm_estimate(handle: &GeneratorHandle) -> f64 {
    2.0 * spectral_norm(handle.drift()) + handle.jumps().iter().map(|l| spectral_norm(l).powi(2)).sum::<f64>()
}

fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!("final time must be non-negative, got {t_final}")));
    }
    Ok((t_final / dt).round() as usize)
}

/// Integrates from `rho0` to `t_final`, recording every step.
pub fn evolve(g: &SlhTriple, rho0: &DensityMatrix, t_final: f64, opts: EvolveOptions) -> Result<Trajectory> {
    let mut it = Integrator::new(g, rho0, opts)?;
    let steps = step_count(t_final, opts.dt)?;
    let mut times = vec![0.0];
    let mut states = vec![it.state()];
    for _ in 0..steps {
        it.advance()?;
        times.push(it.time());
        states.push(it.state());
    }
    it.monitor()?;
    Ok(Trajectory {
        times,
        states,
        stats: it.stats,
    })
}

/// A recorded decay bound and where the trace exceeded it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub bound: DecayBound,
    /// Largest `⟨V(t)⟩ − bound(t)`.
    pub max_excess: f64,
    /// Grid indices exceeding the bound by more than `1e-6`.
    pub violations: Vec<usize>,
}

impl BoundCheck {
    pub fn respected(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `⟨V(t_k)⟩` on a uniform grid.
#[derive(Debug, Clone)]
pub struct SimTrace {
    pub dt: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest `|Im ⟨V(t_k)⟩|`.
    pub max_imaginary: f64,
    pub initial: String,
    pub bound: Option<BoundCheck>,
    pub stats: RunStats,
}

impl SimTrace {
    /// CSV with header `t,value`, `%.12e` fields and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", format_sci(*t), format_sci(*v));
        }
        out
    }
}

/// C-style `%.12e`.
pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// `⟨V(t)⟩` along the evolution of `rho0`, checked against `bound` if given.
pub fn expectation_trace(
    g: &SlhTriple,
    observable: &Operator,
    rho0: &DensityMatrix,
    t_final: f64,
    opts: EvolveOptions,
    bound: Option<DecayBound>,
) -> Result<SimTrace> {
    if !observable.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::InvalidParameter(format!(
            "observable must be Hermitian (residual {:.3e})",
            observable.hermiticity_residual()
        )));
    }
    let space = HilbertSpace::union_arc(g.space_arc(), observable.space_arc())?;
    let g = g.lift_arc(&space)?;
    let mut it = Integrator::new(&g, rho0, opts)?;
    let v = observable.embed_arc(&it.space)?;
    let steps = step_count(t_final, opts.dt)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut max_imaginary: f64 = 0.0;
    let mut record = |it: &Integrator| {
        let e = trace_product(v.matrix(), &it.rho);
        max_imaginary = max_imaginary.max(e.im.abs());
        times.push(it.time());
        values.push(e.re);
    };
    record(&it);
    for _ in 0..steps {
        it.advance()?;
        record(&it);
    }
    it.monitor()?;
    let bound = bound.map(|b| {
        let v0 = values[0];
        let mut max_excess = f64::NEG_INFINITY;
        let mut violations = Vec::new();
        for (k, (&t, &val)) in times.iter().zip(&values).enumerate() {
            let excess = val - b.value(t, v0);
            max_excess = max_excess.max(excess);
            if excess > BOUND_SLACK {
                violations.push(k);
            }
        }
        BoundCheck {
            bound: b,
            max_excess,
            violations,
        }
    });
    Ok(SimTrace {
        dt: opts.dt,
        times,
        values,
        max_imaginary,
        initial: describe(rho0),
        bound,
        stats: it.stats,
    })
}

fn describe(rho: &DensityMatrix) -> String {
    format!("density matrix on {} (purity {:.6})", rho.space(), rho.purity())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub offset: f64,
}

/// Fits `y(t) = A e^{−ct} + B`.
///
/// The offset comes from the linear recurrence `y_{k+1} = r·y_k + B(1 − r)`
/// over the whole trace; the rate from a least-squares line through
/// `log(y − B)` over the first half.
pub fn decay_fit(trace: &SimTrace) -> Result<DecayFit> {
    let y = &trace.values;
    if y.len() < 4 {
        return Err(Error::FitUndefined("need at least four samples".into()));
    }
    let (xs, ys) = (&y[..y.len() - 1], &y[1..]);
    let (slope, intercept) = least_squares(xs, ys).ok_or_else(|| Error::FitUndefined("constant trace".into()))?;
    if !(slope < 1.0 && slope > 0.0) {
        return Err(Error::FitUndefined(format!("trace does not decay (step ratio {slope:.6})")));
    }
    let offset = intercept / (1.0 - slope);
    let half = (y.len() / 2).max(2);
    let mut logs = Vec::with_capacity(half);
    for &v in &y[..half] {
        let shifted = v - offset;
        if shifted.is_nan() || shifted <= 0.0 {
            return Err(Error::FitUndefined(format!("non-positive value {shifted:.3e} after removing the offset")));
        }
        logs.push(shifted.ln());
    }
    let (log_slope, _) =
        least_squares(&trace.times[..half], &logs).ok_or_else(|| Error::FitUndefined("degenerate time grid".into()))?;
    Ok(DecayFit {
        rate: -log_slope,
        offset,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// `d⟨(q, p)⟩/dt = M⟨(q, p)⟩ + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftMatrix {
    pub matrix: [[f64; 2]; 2],
    pub offset: [f64; 2],
    /// Eigenvalues of `M`, ascending by real part.
    pub eigenvalues: [Complex64; 2],
    /// Largest component of `𝒢(q), 𝒢(p)` outside `span{I, q, p}`.
    pub residual: f64,
}

/// Mean-quadrature drift of a single-oscillator system, with `q = a + a†`
/// and `p = −i(a − a†)`.
pub fn mean_drift_matrix(g: &SlhTriple) -> Result<DriftMatrix> {
    let factors = g.space().factors();
    let factor = match factors {
        [f] if f.kind() == FactorKind::Fock => f,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "drift extraction needs a single oscillator factor, got {}",
                g.space()
            )))
        }
    };
    let ops = fock_ops(factor.label(), factor.dim())?;
    let (q, p) = ops.quadratures();
    let mask = g.space().boundary_mask();
    let basis = orthonormal(&[ops.id.compress(&mask), q.compress(&mask), p.compress(&mask)]);

    let mut matrix = [[0.0; 2]; 2];
    let mut offset = [0.0; 2];
    let mut residual: f64 = 0.0;
    for (row, x) in [&q, &p].into_iter().enumerate() {
        let gx = generator(g, x)?.compress(&mask);
        let mut fitted = CMatrix::zeros(gx.nrows(), gx.ncols());
        for b in &basis {
            fitted += b * hs_inner(b, &gx);
        }
        residual = residual.max(max_abs(&(&gx - &fitted)));
        // In the raw basis the coefficients must be real for Hermitian data.
        let coeffs = raw_coefficients(&ops.id.compress(&mask), &q.compress(&mask), &p.compress(&mask), &gx);
        residual = residual.max(coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max));
        offset[row] = coeffs[0].re;
        matrix[row] = [coeffs[1].re, coeffs[2].re];
    }
    if residual > LINEARITY_TOL {
        return Err(Error::NotLinear { residual });
    }
    Ok(DriftMatrix {
        eigenvalues: eigenvalues_2x2(&matrix),
        matrix,
        offset,
        residual,
    })
}

fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Gram–Schmidt in the Hilbert–Schmidt inner product.
fn orthonormal(vectors: &[CMatrix]) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = Vec::new();
    for v in vectors {
        let mut u = v.clone();
        for b in &out {
            u -= b * hs_inner(b, &u);
        }
        let norm = u.norm();
        if norm > 1e-12 {
            out.push(u / Complex64::new(norm, 0.0));
        }
    }
    out
}

/// Coefficients of `x` in the (non-orthogonal) basis `{I, q, p}` from the
/// 3 × 3 Gram system.
fn raw_coefficients(i: &CMatrix, q: &CMatrix, p: &CMatrix, x: &CMatrix) -> [Complex64; 3] {
    let basis = [i, q, p];
    let gram = nalgebra::Matrix3::from_fn(|r, c| hs_inner(basis[r], basis[c]));
    let rhs = nalgebra::Vector3::from_fn(|r, _| hs_inner(basis[r], x));
    let sol = gram.lu().solve(&rhs).unwrap_or_else(nalgebra::Vector3::zeros);
    [sol[0], sol[1], sol[2]]
}

fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    let half = Complex64::new(tr / 2.0, 0.0);
    let (a, b) = (half - disc, half + disc);
    if a.re <= b.re {
        [a, b]
    } else {
        [b, a]
    }
}
