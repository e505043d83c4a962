//! Monodromy symmetries of real, even and odd potentials, and the
//! reflection symmetries they induce on the spectrum.
//!
//! | hypothesis | monodromy relation         | spectrum        |
//! |------------|----------------------------|-----------------|
//! | real       | `M(z) = conj M(−z̄)`        | `z ↦ −z̄`        |
//! | even       | `M(z) = σ₃ M(−z)⁻¹ σ₃`     | `z ↦ −z`        |
//! | odd        | `M(z) = M(−z)⁻¹`           | `z ↦ −z`        |

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::potentials::{PeriodicPotential, SymmetryFlags};
use crate::spectrum::SpectrumArcs;
use crate::transfer::{integrate_monodromy, IntegratorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryRelation {
    RealConj,
    EvenConj,
    OddConj,
    /// `z ↦ −z̄`, induced by real potentials.
    SpectrumReflectReal,
    /// `z ↦ −z`, induced by even or odd potentials.
    SpectrumReflectImag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheckResult {
    pub relation: SymmetryRelation,
    pub max_defect: f64,
    pub n_samples: usize,
}

/// Relative Frobenius defect of each applicable monodromy relation over `z_samples`.
pub fn check_monodromy_symmetry(
    pot: &PeriodicPotential,
    flags: &SymmetryFlags,
    h: f64,
    z_samples: &[Complex64],
    cfg: &IntegratorConfig,
) -> Result<Vec<SymmetryCheckResult>> {
    if !flags.any() {
        return Err(Error::InvalidParameter(
            "potential has no real, even or odd symmetry".into(),
        ));
    }
    if z_samples.is_empty() {
        return Err(Error::InvalidParameter("no sample points".into()));
    }
    let mut relations = Vec::new();
    if flags.is_real {
        relations.push(SymmetryRelation::RealConj);
    }
    if flags.is_even {
        relations.push(SymmetryRelation::EvenConj);
    }
    if flags.is_odd {
        relations.push(SymmetryRelation::OddConj);
    }

    let mono = |z: Complex64| integrate_monodromy(pot, z, h, cfg).map(|r| r.monodromy);
    let mut defects = vec![0.0f64; relations.len()];
    for &z in z_samples {
        let m = mono(z)?;
        let m_neg = if flags.is_even || flags.is_odd {
            Some(mono(-z)?)
        } else {
            None
        };
        for (rel, defect) in relations.iter().zip(defects.iter_mut()) {
            let rhs = match rel {
                SymmetryRelation::RealConj => mono(-z.conj())?.conj(),
                SymmetryRelation::EvenConj => {
                    let s = Mat2::sigma3();
                    s * invert(m_neg.unwrap(), z)? * s
                }
                SymmetryRelation::OddConj => invert(m_neg.unwrap(), z)?,
                _ => unreachable!(),
            };
            *defect = defect.max((m - rhs).frobenius() / m.frobenius());
        }
    }
    Ok(relations
        .into_iter()
        .zip(defects)
        .map(|(relation, max_defect)| SymmetryCheckResult {
            relation,
            max_defect,
            n_samples: z_samples.len(),
        })
        .collect())
}

fn invert(m: Mat2, z: Complex64) -> Result<Mat2> {
    m.inverse().ok_or(Error::NonFinite { z })
}

/// One-sided Hausdorff distance from the reflected spectrum to the spectrum.
///
/// Reflected points falling outside the window have no counterpart to
/// compare against and are skipped.
pub fn check_spectrum_symmetry(arcs: &SpectrumArcs, flags: &SymmetryFlags) -> Result<Vec<SymmetryCheckResult>> {
    if arcs.is_empty() {
        return Err(Error::EmptyArcs);
    }
    let points = arcs.sample_points();
    let lines = arcs.polylines();
    let mut out = Vec::new();
    let mut check = |relation: SymmetryRelation, reflect: &dyn Fn(Complex64) -> Complex64| {
        let mut worst = 0.0f64;
        let mut n = 0;
        for &z in &points {
            let r = reflect(z);
            if !arcs.window.contains(r, 0.0) {
                continue;
            }
            n += 1;
            worst = worst.max(distance_to_polylines(r, &lines));
        }
        out.push(SymmetryCheckResult {
            relation,
            max_defect: worst,
            n_samples: n,
        });
    };
    if flags.is_real {
        check(SymmetryRelation::SpectrumReflectReal, &|z| -z.conj());
    }
    if flags.is_even || flags.is_odd {
        check(SymmetryRelation::SpectrumReflectImag, &|z| -z);
    }
    Ok(out)
}

pub fn distance_to_polylines(z: Complex64, lines: &[Vec<Complex64>]) -> f64 {
    let mut best = f64::INFINITY;
    for line in lines {
        if line.len() == 1 {
            best = best.min((z - line[0]).norm());
        }
        for seg in line.windows(2) {
            best = best.min(segment_distance(z, seg[0], seg[1]));
        }
    }
    best
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{discriminant_field, trace_spectrum, Window};
    use crate::transfer::discriminant;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn flags_of(pot: &PeriodicPotential) -> SymmetryFlags {
        pot.detect_symmetries(&pot.sup_norms(512).unwrap(), 1e-10).unwrap()
    }

    fn sample_points() -> Vec<Complex64> {
        (0..20)
            .map(|k| {
                let t = k as f64 * 0.77;
                c(2.0 * (1.3 * t).sin(), 2.0 * (0.9 * t + 0.4).cos())
            })
            .collect()
    }

    fn cos_pair() -> PeriodicPotential {
        let t = [(1, c(0.5, 0.0)), (-1, c(0.5, 0.0))];
        PeriodicPotential::fourier(&t, &t)
    }

    fn sin_pair() -> PeriodicPotential {
        let t = [(1, c(0.0, -0.5)), (-1, c(0.0, 0.5))];
        PeriodicPotential::fourier(&t, &t)
    }

    #[test]
    fn cosine_potential_is_real_and_even() {
        let pot = cos_pair();
        let r = check_monodromy_symmetry(&pot, &flags_of(&pot), 1.0, &sample_points(), &Default::default()).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|s| s.max_defect <= 1e-8), "{r:?}");
    }

    #[test]
    fn sine_potential_is_odd() {
        let pot = sin_pair();
        let r = check_monodromy_symmetry(&pot, &flags_of(&pot), 1.0, &sample_points(), &Default::default()).unwrap();
        let odd = r.iter().find(|s| s.relation == SymmetryRelation::OddConj).unwrap();
        assert!(odd.max_defect <= 1e-8);
    }

    #[test]
    fn free_operator_satisfies_all_relations() {
        let pot = PeriodicPotential::zero();
        let r = check_monodromy_symmetry(&pot, &flags_of(&pot), 1.0, &sample_points(), &Default::default()).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|s| s.max_defect <= 1e-12), "{r:?}");
    }

    #[test]
    fn asymmetric_potential_is_rejected_and_broken_relation_detected() {
        let pot = PeriodicPotential::fourier(&[(1, c(1.0, 0.3))], &[(2, c(0.5, 0.0))]);
        assert!(check_monodromy_symmetry(&pot, &flags_of(&pot), 1.0, &sample_points(), &Default::default()).is_err());
        let forced = SymmetryFlags { is_real: true, is_even: false, is_odd: false, pq_real: false, tol: 1e-10 };
        let r = check_monodromy_symmetry(&pot, &forced, 1.0, &sample_points(), &Default::default()).unwrap();
        assert!(r[0].max_defect > 1e-3);
    }

    #[test]
    fn discriminant_symmetries() {
        let pot = cos_pair();
        let cfg = IntegratorConfig::default();
        for z in sample_points() {
            let d = discriminant(&pot, z, 0.7, &cfg).unwrap();
            let d_ref = discriminant(&pot, -z.conj(), 0.7, &cfg).unwrap();
            let d_neg = discriminant(&pot, -z, 0.7, &cfg).unwrap();
            let scale = d.norm().max(1.0);
            assert!((d - d_ref.conj()).norm() <= 1e-8 * scale);
            assert!((d - d_neg).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn spectrum_reflections() {
        let pot = PeriodicPotential::zero();
        let arcs = trace_spectrum(
            &discriminant_field(&pot, 1.0, Window::new(-5.0, 5.0, -2.0, 2.0), 11, 9, &Default::default()).unwrap(),
            1e-6,
        )
        .unwrap();
        let r = check_spectrum_symmetry(&arcs, &flags_of(&pot)).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|s| s.max_defect == 0.0));

        let pot = PeriodicPotential::constant(c(1.0, 0.0), c(0.0, 16.0));
        let field = discriminant_field(&pot, 1.0, Window::new(-6.0, 6.0, -5.0, 5.0), 41, 41, &Default::default()).unwrap();
        let arcs = trace_spectrum(&field, 1e-6).unwrap();
        let r = check_spectrum_symmetry(&arcs, &flags_of(&pot)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].relation, SymmetryRelation::SpectrumReflectImag);
        assert!(r[0].max_defect <= 2.0 * arcs.cell.0.max(arcs.cell.1), "{r:?}");

        // The p₀ = 1, q₀ = 16i spectrum is not symmetric under z ↦ −z̄.
        let forced = SymmetryFlags { is_real: true, is_even: false, is_odd: false, pq_real: false, tol: 1e-10 };
        let r = check_spectrum_symmetry(&arcs, &forced).unwrap();
        assert!(r[0].max_defect > 1.0);
    }

    #[test]
    fn segment_distance_cases() {
        assert_eq!(segment_distance(c(0.5, 1.0), c(0.0, 0.0), c(1.0, 0.0)), 1.0);
        assert_eq!(segment_distance(c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)), 1.0);
        assert_eq!(segment_distance(c(3.0, 4.0), c(0.0, 0.0), c(0.0, 0.0)), 5.0);
    }
}
