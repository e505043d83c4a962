use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PeriodicPotential;
use crate::transfer::{integrate_monodromy, propagate_vector, IntegratorConfig};

pub const DEFAULT_BLOCH_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochSample {
    pub x: f64,
    pub psi: [Complex64; 2],
}

/// `Ψ(x + 1) = e^{iξ} Ψ(x)`, sampled on `[0, 1]` with unit L² norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochEigenfunction {
    pub z: Complex64,
    pub h: f64,
    pub xi: f64,
    pub multiplier: Complex64,
    pub samples: Vec<BlochSample>,
    /// `‖Ψ(1) − e^{iξ}Ψ(0)‖ / ‖Ψ(0)‖`.
    pub periodicity_defect: f64,
}

/// Bloch solution at a point of the spectrum.
///
/// `tol` bounds how far `Δ(z)` may sit from `[−1, 1]`.
pub fn bloch_eigenfunction(
    pot: &PeriodicPotential,
    h: f64,
    z: Complex64,
    cfg: &IntegratorConfig,
    n_samples: usize,
    tol: f64,
) -> Result<BlochEigenfunction> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    let mono = integrate_monodromy(pot, z, h, cfg)?;
    let d = mono.delta;
    if d.im.abs() > tol || d.re.abs() > 1.0 + tol {
        return Err(Error::NotOnSpectrum {
            z,
            delta_abs: d.norm(),
        });
    }
    let (rho, _) = mono.multipliers;
    // |ϱ₁ − ϱ₂|² = 4|Δ² − 1|; rounding in Δ only resolves the gap to about √ε.
    if (d * d - 1.0).norm() <= 1e-8 {
        return Err(Error::DefectiveMonodromy { z });
    }

    // Kernel of M − ϱI from whichever row is better conditioned.
    let m = &mono.monodromy.m;
    let from_top = [m[0][1], rho - m[0][0]];
    let from_bottom = [rho - m[1][1], m[1][0]];
    let norm2 = |v: &[Complex64; 2]| v[0].norm_sqr() + v[1].norm_sqr();
    let v = if norm2(&from_top) >= norm2(&from_bottom) {
        from_top
    } else {
        from_bottom
    };
    let scale = norm2(&v).sqrt();
    let v = [v[0] / scale, v[1] / scale];

    let path = propagate_vector(pot, z, h, v, mono.steps_used, n_samples);
    let weight = |k: usize| {
        let w = 1.0 / n_samples as f64;
        if k == 0 || k == n_samples {
            0.5 * w
        } else {
            w
        }
    };
    let l2: f64 = path
        .iter()
        .enumerate()
        .map(|(k, (_, p))| weight(k) * (p[0].norm_sqr() + p[1].norm_sqr()))
        .sum::<f64>()
        .sqrt();
    let samples: Vec<BlochSample> = path
        .iter()
        .map(|(x, p)| BlochSample {
            x: *x,
            psi: [p[0] / l2, p[1] / l2],
        })
        .collect();

    let xi = rho.arg();
    let phase = Complex64::cis(xi);
    let first = samples[0].psi;
    let last = samples[n_samples].psi;
    let defect = ((last[0] - phase * first[0]).norm_sqr() + (last[1] - phase * first[1]).norm_sqr())
        .sqrt()
        / (first[0].norm_sqr() + first[1].norm_sqr()).sqrt();

    Ok(BlochEigenfunction {
        z,
        h,
        xi,
        multiplier: rho,
        samples,
        periodicity_defect: defect,
    })
}

/// Both sides of `Im z = −Re⟨ψ₁, qψ₂⟩/⟨ψ₁, ψ₁⟩ = Re⟨pψ₁, ψ₂⟩/⟨ψ₂, ψ₂⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagIdentity {
    pub z: Complex64,
    pub lhs: f64,
    pub rhs_q: f64,
    pub rhs_p: f64,
    /// Largest discrepancy over `max(1, |Im z|)`.
    pub max_rel_err: f64,
}

/// Evaluates the imaginary-part identity on a Bloch eigenfunction.
pub fn verify_imag_identity(pot: &PeriodicPotential, f: &BlochEigenfunction) -> ImagIdentity {
    let n = f.samples.len() - 1;
    let mut psi1_sq = 0.0;
    let mut psi2_sq = 0.0;
    let mut q_term = Complex64::new(0.0, 0.0);
    let mut p_term = Complex64::new(0.0, 0.0);
    for (k, s) in f.samples.iter().enumerate() {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 } / n as f64;
        let (p, q) = pot.eval_pq(s.x);
        let [a, b] = s.psi;
        psi1_sq += w * a.norm_sqr();
        psi2_sq += w * b.norm_sqr();
        // ⟨u, v⟩ = ∫ u v̄.
        q_term += a * (q * b).conj() * w;
        p_term += p * a * b.conj() * w;
    }
    let lhs = f.z.im;
    let rhs_q = -q_term.re / psi1_sq;
    let rhs_p = p_term.re / psi2_sq;
    let max_rel_err = (rhs_q - lhs).abs().max((rhs_p - lhs).abs()) / lhs.abs().max(1.0);
    ImagIdentity {
        z: f.z,
        lhs,
        rhs_q,
        rhs_p,
        max_rel_err,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_bloch_function_is_plane_wave() {
        let f = bloch_eigenfunction(&PeriodicPotential::zero(), 1.0, c(0.7, 0.0), &Default::default(), 64, 1e-6).unwrap();
        assert!((f.xi.abs() - 0.7).abs() < 1e-9);
        assert!(f.periodicity_defect < 1e-9);
        let l2: f64 = f.samples.iter().map(|s| s.psi[0].norm_sqr() + s.psi[1].norm_sqr()).sum::<f64>() / 64.0;
        assert!((l2 - 1.0).abs() < 0.05);
    }

    #[test]
    fn off_spectrum_and_defective_points_rejected() {
        let pot = PeriodicPotential::zero();
        let cfg = IntegratorConfig::default();
        assert!(matches!(
            bloch_eigenfunction(&pot, 1.0, c(0.7, 0.5), &cfg, 64, 1e-6),
            Err(Error::NotOnSpectrum { .. })
        ));
        let sixteen_i = PeriodicPotential::constant(c(1.0, 0.0), c(0.0, 16.0));
        let bp = c(2.0 * 2f64.sqrt(), 2.0 * 2f64.sqrt());
        assert!(matches!(
            bloch_eigenfunction(&sixteen_i, 1.0, bp, &cfg, 64, 1e-6),
            Err(Error::DefectiveMonodromy { .. })
        ));
    }

    #[test]
    fn identity_on_focusing_imaginary_band() {
        let pot = PeriodicPotential::constant(c(-1.0, -1.0), c(1.0, -1.0));
        let z = c(0.0, 1.0);
        let f = bloch_eigenfunction(&pot, 1.0, z, &Default::default(), DEFAULT_BLOCH_SAMPLES, 1e-6).unwrap();
        let id = verify_imag_identity(&pot, &f);
        assert!((id.rhs_q - 1.0).abs() < 1e-8, "{id:?}");
        assert!((id.rhs_p - 1.0).abs() < 1e-8, "{id:?}");
    }
}
