//! Monodromy matrices of `hY′ = A(x; z) Y`, `Y(0) = I`, over one period.
//!
//! The propagator is the fourth-order commutator-free Magnus scheme with two
//! Gauss–Legendre nodes per step:
//!
//! ```text
//! Y_{n+1} = exp(δ(α₁A₁ + α₂A₂)/h) · exp(δ(α₂A₁ + α₁A₂)/h) · Y_n
//! α₁ = 1/4 − √3/6,  α₂ = 1/4 + √3/6,  Aᵢ = A(xₙ + cᵢδ),  c₁,₂ = 1/2 ∓ √3/6
//! ```
//!
//! Each factor is the exponential of a traceless 2×2 matrix and is evaluated
//! in closed form, so every step has unit determinant up to rounding. Error
//! control compares `N` against `2N` steps and doubles until the relative
//! Richardson estimate `‖M₂ₙ − Mₙ‖ / (15‖M₂ₙ‖)` meets the tolerance.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::potentials::PeriodicPotential;

const SQRT3_6: f64 = 0.288_675_134_594_812_9; // √3 / 6
const GAUSS_LO: f64 = 0.5 - SQRT3_6;
const GAUSS_HI: f64 = 0.5 + SQRT3_6;
const ALPHA_LO: f64 = 0.25 - SQRT3_6;
const ALPHA_HI: f64 = 0.25 + SQRT3_6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub samples_per_wavelength: f64,
    pub min_steps: usize,
    pub max_steps: usize,
    /// Relative tolerance on the monodromy matrix.
    pub richardson_tol: f64,
    /// Accepted `|det M − 1|`, scaled by `max(1, ‖M‖²)` to absorb rounding
    /// in exponentially growing solutions.
    pub det_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            samples_per_wavelength: 24.0,
            min_steps: 64,
            max_steps: 1 << 22,
            richardson_tol: 1e-9,
            det_tol: 1e-10,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.samples_per_wavelength >= 8.0) {
            return Err(Error::InvalidParameter(format!(
                "samples_per_wavelength must be >= 8, got {}",
                self.samples_per_wavelength
            )));
        }
        if self.min_steps == 0 || self.min_steps > self.max_steps {
            return Err(Error::InvalidParameter(format!(
                "need 0 < min_steps <= max_steps, got {} and {}",
                self.min_steps, self.max_steps
            )));
        }
        if !(self.richardson_tol > 0.0) || !(self.det_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "integrator tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Monodromy matrix plus the Floquet data derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub z: Complex64,
    pub h: f64,
    pub monodromy: Mat2,
    /// Floquet discriminant `tr M / 2`.
    pub delta: Complex64,
    /// `(ϱ₁, ϱ₂)` with `|ϱ₁| ≥ 1`.
    pub multipliers: (Complex64, Complex64),
    /// Principal logarithms of the multipliers.
    pub exponents: (Complex64, Complex64),
    pub det_defect: f64,
    pub steps_used: usize,
    pub est_error: f64,
}

/// Initial step count from the local oscillation rate `(|z| + ‖Q‖∞)/h` and
/// the potential's own bandwidth.
pub fn step_count(pot: &PeriodicPotential, z: Complex64, h: f64, cfg: &IntegratorConfig) -> usize {
    let rate = (z.norm() + pot.amplitude_bound()) / h + TAU * pot.max_wavenumber() as f64;
    let n = (cfg.samples_per_wavelength * rate / TAU).ceil();
    if !n.is_finite() {
        return cfg.max_steps;
    }
    (n as usize).clamp(cfg.min_steps, cfg.max_steps)
}

#[inline]
fn step_factors(pot: &PeriodicPotential, x0: f64, dx: f64, z: Complex64, h: f64) -> (Mat2, Mat2) {
    let (p1, q1) = pot.eval_pq(x0 + GAUSS_LO * dx);
    let (p2, q2) = pot.eval_pq(x0 + GAUSS_HI * dx);
    let s = dx / h;
    // α₁ + α₂ = 1/2, so both factors carry half of the diagonal part.
    let diag = Complex64::new(0.0, -0.5) * z * s;
    let first = Mat2::new(
        diag,
        (q1 * ALPHA_HI + q2 * ALPHA_LO) * s,
        (p1 * ALPHA_HI + p2 * ALPHA_LO) * s,
        -diag,
    );
    let second = Mat2::new(
        diag,
        (q1 * ALPHA_LO + q2 * ALPHA_HI) * s,
        (p1 * ALPHA_LO + p2 * ALPHA_HI) * s,
        -diag,
    );
    (first.exp_traceless(), second.exp_traceless())
}

/// Fundamental matrix `Y(1; z, h)` from `n_steps` uniform Magnus steps.
pub fn propagate(pot: &PeriodicPotential, z: Complex64, h: f64, n_steps: usize) -> Mat2 {
    let dx = 1.0 / n_steps as f64;
    if pot.constant_values().is_some() {
        // Every step is the same matrix: square repeatedly where possible.
        let (e1, e2) = step_factors(pot, 0.0, dx, z, h);
        return matrix_power(e2 * e1, n_steps);
    }
    let mut y = Mat2::identity();
    for n in 0..n_steps {
        let (e1, e2) = step_factors(pot, n as f64 * dx, dx, z, h);
        y = e2 * (e1 * y);
    }
    y
}

fn matrix_power(mut base: Mat2, mut exp: usize) -> Mat2 {
    let mut acc = Mat2::identity();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = base * acc;
        }
        base = base * base;
        exp >>= 1;
    }
    acc
}

/// Solution `Ψ(x) = Y(x)v` sampled at `x = k / n_samples`, `k = 0..=n_samples`.
///
/// `n_steps` is rounded up to a multiple of `n_samples`.
pub fn propagate_vector(
    pot: &PeriodicPotential,
    z: Complex64,
    h: f64,
    v: [Complex64; 2],
    n_steps: usize,
    n_samples: usize,
) -> Vec<(f64, [Complex64; 2])> {
    let n_samples = n_samples.max(1);
    let per_sample = n_steps.div_ceil(n_samples).max(1);
    let total = per_sample * n_samples;
    let dx = 1.0 / total as f64;
    let mut out = Vec::with_capacity(n_samples + 1);
    let mut psi = v;
    out.push((0.0, psi));
    for k in 0..n_samples {
        for s in 0..per_sample {
            let x0 = (k * per_sample + s) as f64 * dx;
            let (e1, e2) = step_factors(pot, x0, dx, z, h);
            psi = e2.apply(e1.apply(psi));
        }
        out.push(((k + 1) as f64 / n_samples as f64, psi));
    }
    out
}

/// Canonical monodromy matrix with Richardson-controlled accuracy.
pub fn integrate_monodromy(
    pot: &PeriodicPotential,
    z: Complex64,
    h: f64,
    cfg: &IntegratorConfig,
) -> Result<MonodromyResult> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    cfg.validate()?;
    let mut n = step_count(pot, z, h, cfg);
    let mut coarse = propagate(pot, z, h, n);
    if !coarse.is_finite() {
        return Err(Error::NonFinite { z });
    }
    loop {
        if 2 * n > cfg.max_steps {
            return Err(Error::StepBudgetExceeded {
                z,
                max_steps: cfg.max_steps,
                estimate: f64::NAN,
            });
        }
        let fine = propagate(pot, z, h, 2 * n);
        if !fine.is_finite() {
            return Err(Error::NonFinite { z });
        }
        let scale = fine.frobenius();
        let est = (fine - coarse).frobenius() / (15.0 * scale);
        if est <= cfg.richardson_tol {
            return finish(z, h, fine, 2 * n, est, cfg);
        }
        if 4 * n > cfg.max_steps {
            return Err(Error::StepBudgetExceeded {
                z,
                max_steps: cfg.max_steps,
                estimate: est,
            });
        }
        n *= 2;
        coarse = fine;
    }
}

fn finish(
    z: Complex64,
    h: f64,
    m: Mat2,
    steps: usize,
    est: f64,
    cfg: &IntegratorConfig,
) -> Result<MonodromyResult> {
    let det_defect = (m.det() - 1.0).norm();
    let norm = m.frobenius();
    if det_defect > cfg.det_tol * norm.powi(2).max(1.0) {
        return Err(Error::DeterminantDrift { z, defect: det_defect });
    }
    let delta = m.trace() * 0.5;
    let multipliers = floquet_multipliers(delta);
    Ok(MonodromyResult {
        z,
        h,
        monodromy: m,
        delta,
        multipliers,
        exponents: (multipliers.0.ln(), multipliers.1.ln()),
        det_defect,
        steps_used: steps,
        est_error: est,
    })
}

/// Floquet discriminant `Δ(z; h) = tr M / 2`.
pub fn discriminant(
    pot: &PeriodicPotential,
    z: Complex64,
    h: f64,
    cfg: &IntegratorConfig,
) -> Result<Complex64> {
    integrate_monodromy(pot, z, h, cfg).map(|r| r.delta)
}

/// Roots of `ϱ² − 2Δϱ + 1 = 0`, ordered so that `|ϱ₁| ≥ 1`; when both lie
/// on the unit circle, `ϱ₁` is the one with nonnegative imaginary part.
///
/// `ϱ₂` is formed as `1/ϱ₁`, which avoids cancellation for large `|Δ|`.
pub fn floquet_multipliers(delta: Complex64) -> (Complex64, Complex64) {
    let root = (delta * delta - 1.0).sqrt();
    let plus = delta + root;
    let minus = delta - root;
    let (big, small) = if plus.norm() >= minus.norm() {
        (plus, minus)
    } else {
        (minus, plus)
    };
    let tie = (big.norm() - small.norm()).abs() <= 1e-12 * big.norm().max(1.0);
    let first = if tie && big.im < 0.0 { small } else { big };
    if first.norm() == 0.0 {
        return (first, small);
    }
    (first, first.inv())
}
