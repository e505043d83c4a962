use std::f64::consts::PI;

use dirac_floquet::bounds::cross_distance;
use dirac_floquet::oracle::ConstantModel;
use dirac_floquet::potentials::PeriodicPotential;
use dirac_floquet::spectrum::{
    bloch_eigenfunction, bloch_eigenvalues, discriminant_field, trace_spectrum, NewtonOptions, Window,
    DEFAULT_BLOCH_SAMPLES, DEFAULT_TRACE_TOL,
};
use dirac_floquet::transfer::{discriminant, integrate_monodromy, IntegratorConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn arb_c(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

fn arb_terms() -> impl Strategy<Value = Vec<(i64, Complex64)>> {
    prop::collection::vec((-3i64..=3, arb_c(1.0)), 1..4)
}

/// `Σ aₖ cos 2πkx` or `Σ aₖ sin 2πkx` with real `aₖ`.
fn real_series(coefs: &[f64], odd: bool) -> Vec<(i64, Complex64)> {
    coefs
        .iter()
        .enumerate()
        .flat_map(|(k, &a)| {
            let k = k as i64 + 1;
            if odd {
                [(k, c(0.0, -a / 2.0)), (-k, c(0.0, a / 2.0))]
            } else {
                [(k, c(a / 2.0, 0.0)), (-k, c(a / 2.0, 0.0))]
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn floquet_identities(p in arb_terms(), q in arb_terms(), z in arb_c(4.0), h in 0.3f64..1.0) {
        let pot = PeriodicPotential::fourier(&p, &q);
        let r = integrate_monodromy(&pot, z, h, &IntegratorConfig::default()).unwrap();
        let m = r.monodromy;
        let scale = m.frobenius().powi(2).max(1.0);
        prop_assert!((m.det() - 1.0).norm() <= 1e-10 * scale);
        prop_assert!((r.delta - m.trace() / 2.0).norm() <= 1e-15 * m.frobenius());
        let (r1, r2) = r.multipliers;
        prop_assert!((r1 * r2 - 1.0).norm() <= 1e-10);
        prop_assert!((r1 + r2 - 2.0 * r.delta).norm() <= 1e-10 * r1.norm());
        prop_assert!(r1.norm() >= 1.0 - 1e-12);
    }

    #[test]
    fn real_even_discriminant_reflections(a in prop::collection::vec(-1.0f64..1.0, 1..3),
                                          b in prop::collection::vec(-1.0f64..1.0, 1..3),
                                          z in arb_c(3.0)) {
        let pot = PeriodicPotential::fourier(&real_series(&a, false), &real_series(&b, false));
        let cfg = IntegratorConfig::default();
        let d = discriminant(&pot, z, 0.6, &cfg).unwrap();
        let scale = d.norm().max(1.0);
        prop_assert!((discriminant(&pot, -z.conj(), 0.6, &cfg).unwrap() - d.conj()).norm() <= 1e-8 * scale);
        prop_assert!((discriminant(&pot, -z, 0.6, &cfg).unwrap() - d).norm() <= 1e-8 * scale);
    }

    #[test]
    fn odd_discriminant_is_even_in_z(a in prop::collection::vec(-1.0f64..1.0, 1..3),
                                     b in prop::collection::vec(-1.0f64..1.0, 1..3),
                                     z in arb_c(3.0)) {
        let pot = PeriodicPotential::fourier(&real_series(&a, true), &real_series(&b, true));
        let cfg = IntegratorConfig::default();
        let d = discriminant(&pot, z, 0.6, &cfg).unwrap();
        prop_assert!((discriminant(&pot, -z, 0.6, &cfg).unwrap() - d).norm() <= 1e-8 * d.norm().max(1.0));
    }

    #[test]
    fn real_pq_members_lie_on_the_cross(r in 0.1f64..3.0, s in 0.1f64..3.0, theta in 0.0f64..6.3,
                                        sign in prop::bool::ANY, lam in 0.0f64..5.0) {
        // p₀q₀ = ±rs is real; z² = λ² + p₀q₀ with real λ is a member.
        let p0 = Complex64::from_polar(r, theta);
        let q0 = Complex64::from_polar(if sign { s } else { -s }, -theta);
        let model = ConstantModel::new(p0, q0, 1.0).unwrap();
        let z = (c(lam * lam, 0.0) + p0 * q0).sqrt();
        prop_assert!(model.spectrum_membership(z, 1e-9));
        prop_assert!(cross_distance(z, (r * s).sqrt()) <= 1e-9);
    }
}

#[test]
fn constant_membership_is_h_independent() {
    let tol = 1e-9;
    let m1 = ConstantModel::new(c(1.0, 0.0), c(0.0, 16.0), 1.0).unwrap();
    let m2 = m1.with_h(0.5).unwrap();
    let mut compared = 0;
    for i in 0..64 {
        for j in 0..64 {
            let z = c(-6.0 + 12.0 * i as f64 / 63.0, -5.0 + 10.0 * j as f64 / 63.0);
            // Skip the tolerance shell around the spectrum.
            let shell = |m: &ConstantModel| {
                let d = m.discriminant(z);
                d.im.abs() <= 10.0 * tol || (d.re.abs() - 1.0).abs() <= 10.0 * tol
            };
            if shell(&m1) || shell(&m2) {
                continue;
            }
            compared += 1;
            assert_eq!(m1.spectrum_membership(z, tol), m2.spectrum_membership(z, tol), "{z}");
        }
    }
    assert!(compared > 3000);
}

#[test]
fn free_bloch_eigenvalues_fill_the_axis() {
    let pot = PeriodicPotential::zero();
    let cfg = IntegratorConfig::default();
    let seeds: Vec<Complex64> = (0..=50).map(|k| c(0.1 * k as f64, 0.05)).collect();
    let mut roots = Vec::new();
    for k in 0..=16 {
        let xi = -PI + k as f64 * PI / 8.0;
        let r = bloch_eigenvalues(&pot, 1.0, &cfg, xi, &seeds, &NewtonOptions::default()).unwrap();
        // ξ = 0, ±π give double roots, which Newton resolves only to about √tol.
        let limit = if k % 8 == 0 { 1e-4 } else { 1e-8 };
        assert!(r.roots.iter().all(|b| b.z.im.abs() <= limit), "{xi}: {:?}", r.roots);
        roots.extend(r.roots.iter().map(|b| b.z));
    }
    let mut re: Vec<f64> = roots.iter().map(|z| z.re).filter(|x| (-1e-6..=5.0).contains(x)).collect();
    re.sort_by(f64::total_cmp);
    assert!(re[0] < 1e-5);
    assert!(5.0 - re[re.len() - 1] < PI / 8.0);
    // Consecutive eigenvalues are exactly π/8 apart; double roots at the
    // band edges converge only to about 1e-5.
    assert!(re.windows(2).all(|w| w[1] - w[0] <= PI / 8.0 + 1e-4), "{re:?}");
}

#[test]
fn traced_vertices_have_unimodular_multipliers_and_periodic_bloch_functions() {
    let cos = [(1, c(0.5, 0.0)), (-1, c(0.5, 0.0))];
    let cases = [
        (PeriodicPotential::constant(c(1.0, 0.0), c(0.0, 16.0)), 1.0, Window::new(-6.0, 6.0, -5.0, 5.0)),
        (PeriodicPotential::fourier(&cos, &[(0, c(0.0, 1.0))]), 0.5, Window::new(-2.0, 2.0, -1.5, 1.5)),
    ];
    let cfg = IntegratorConfig::default();
    for (pot, h, w) in cases {
        let field = discriminant_field(&pot, h, w, 48, 48, &cfg).unwrap();
        let arcs = trace_spectrum(&field, DEFAULT_TRACE_TOL).unwrap();
        assert!(arcs.vertex_count() > 0);
        let mut bloch_checked = 0;
        for p in arcs.arcs.iter().flatten() {
            let r = integrate_monodromy(&pot, p.z, h, &cfg).unwrap();
            assert!((r.multipliers.0.norm() - 1.0).abs() <= 1e-6, "{p:?}");
            if let Ok(f) = bloch_eigenfunction(&pot, h, p.z, &cfg, DEFAULT_BLOCH_SAMPLES, DEFAULT_TRACE_TOL) {
                assert!(f.periodicity_defect <= 1e-6, "{p:?}");
                bloch_checked += 1;
            }
        }
        assert!(bloch_checked > 0);
    }
}
