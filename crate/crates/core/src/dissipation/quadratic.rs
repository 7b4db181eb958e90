//! Coefficients of operator-valued quadratic forms in scalar amplitudes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::{lift_all, Operator, I, ONE, ZERO};

/// Number of random points used to confirm the reconstruction.
const RESIDUAL_SAMPLES: usize = 10;
const RESIDUAL_TOL: f64 = 1e-9;
const RESIDUAL_SEED: u64 = 0x5eed_c0ef;

/// `F(w) = A + Σ_j (w̄_j B_j + B_j† w_j) + Σ_jk w̄_j C_jk w_k`.
#[derive(Debug, Clone)]
pub struct QuadraticCoeffs {
    pub constant: Operator,
    pub linear: Vec<Operator>,
    /// `quadratic[j][k] = C_jk`.
    pub quadratic: Vec<Vec<Operator>>,
}

impl QuadraticCoeffs {
    pub fn channels(&self) -> usize {
        self.linear.len()
    }

    pub fn evaluate(&self, w: &[Complex64]) -> Operator {
        let mut acc = self.constant.clone();
        for (j, bj) in self.linear.iter().enumerate() {
            acc = &acc + &(&bj.scale(w[j].conj()) + &bj.adjoint().scale(w[j]));
            for (k, cjk) in self.quadratic[j].iter().enumerate() {
                acc = &acc + &cjk.scale(w[j].conj() * w[k]);
            }
        }
        acc
    }
}

fn unit(m: usize, j: usize, z: Complex64) -> Vec<Complex64> {
    let mut w = vec![ZERO; m];
    w[j] = z;
    w
}

/// Recovers `(A, B, C)` from evaluations at `0`, `±e_j`, `i·e_j`, `e_j + e_k`
/// and `e_j + i·e_k`, then confirms the fit at seeded random points.
pub fn extract_quadratic_coeffs(f: impl Fn(&[Complex64]) -> Result<Operator>, m: usize) -> Result<QuadraticCoeffs> {
    let eval = |w: Vec<Complex64>| f(&w);
    let mut raw = vec![eval(vec![ZERO; m])?];
    for j in 0..m {
        raw.push(eval(unit(m, j, ONE))?);
        raw.push(eval(unit(m, j, -ONE))?);
        raw.push(eval(unit(m, j, I))?);
    }
    let mut pairs = Vec::new();
    for j in 0..m {
        for k in j + 1..m {
            let mut w = unit(m, j, ONE);
            w[k] = ONE;
            let real = eval(w.clone())?;
            w[k] = I;
            pairs.push((j, k, real, eval(w)?));
        }
    }
    let (_, lifted) = lift_all(raw.iter().chain(pairs.iter().flat_map(|(_, _, p, q)| [p, q])))?;
    let a = lifted[0].clone();
    let half = Complex64::new(0.5, 0.0);

    let mut diag = Vec::with_capacity(m);
    let mut s1 = Vec::with_capacity(m);
    let mut s2 = Vec::with_capacity(m);
    let mut linear = Vec::with_capacity(m);
    for j in 0..m {
        let (plus, minus, imag) = (&lifted[1 + 3 * j], &lifted[2 + 3 * j], &lifted[3 + 3 * j]);
        let cjj = &(plus + minus).scale(half) - &a;
        let re = &(plus - &a) - &cjj;
        let im = &(imag - &a) - &cjj;
        linear.push((&re + &im.scale(I)).scale(half));
        diag.push(cjj);
        s1.push(re);
        s2.push(im);
    }

    let zero = Operator::zero(a.space().clone());
    let mut quadratic = vec![vec![zero; m]; m];
    for (j, cjj) in diag.iter().enumerate() {
        quadratic[j][j] = cjj.clone();
    }
    let offset = 1 + 3 * m;
    for (n, (j, k, _, _)) in pairs.iter().enumerate() {
        let (real, imag) = (&lifted[offset + 2 * n], &lifted[offset + 2 * n + 1]);
        let base = &(&a + &diag[*j]) + &diag[*k];
        // P = C_jk + C_kj, Q = i(C_jk − C_kj)
        let p = &(&(real - &base) - &s1[*j]) - &s1[*k];
        let q = &(&(imag - &base) - &s1[*j]) - &s2[*k];
        quadratic[*j][*k] = (&p - &q.scale(I)).scale(half);
        quadratic[*k][*j] = (&p + &q.scale(I)).scale(half);
    }

    let coeffs = QuadraticCoeffs {
        constant: a,
        linear,
        quadratic,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(RESIDUAL_SEED);
    for _ in 0..RESIDUAL_SAMPLES {
        let w: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        let exact = f(&w)?;
        let fitted = coeffs.evaluate(&w);
        let residual = exact.distance(&fitted);
        if residual > RESIDUAL_TOL * exact.max_abs().max(1.0) {
            return Err(Error::NotQuadratic { residual });
        }
    }
    Ok(coeffs)
}
