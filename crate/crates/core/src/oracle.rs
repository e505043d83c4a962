//! Closed-form Floquet data for constant potentials `p ≡ p₀`, `q ≡ q₀`.
//!
//! With `ω² = p₀q₀` and `λ(z) = (z² − ω²)^{1/2}` the generator satisfies
//! `A² = −λ² I`, so everything is explicit: the eigenvector matrix `P(z)`,
//! the fundamental matrix `F(x) = P e^{iλxσ₃/h}`, the diagonal monodromy
//! `F(0)⁻¹F(1) = diag(e^{iλ/h}, e^{−iλ/h})`, and `Δ = cos(λ/h)`.
//!
//! Exported scalar quantities only depend on `λ²`, so they are free of
//! square-root branch choices. `P` and `F` do depend on the branch and are
//! exposed for eigenfunction checks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::{cosh_sinhc, Mat2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantModel {
    pub p0: Complex64,
    pub q0: Complex64,
    pub omega_sq: Complex64,
    pub h: f64,
}

impl ConstantModel {
    pub fn new(p0: Complex64, q0: Complex64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
        }
        Ok(Self {
            p0,
            q0,
            omega_sq: p0 * q0,
            h,
        })
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::new(self.p0, self.q0, h)
    }

    fn is_free_product(&self) -> bool {
        self.omega_sq == Complex64::new(0.0, 0.0)
    }

    /// `λ(z)`, principal branch; exactly `z` when `ω² = 0`.
    pub fn lambda(&self, z: Complex64) -> Complex64 {
        if self.is_free_product() {
            return z;
        }
        (z * z - self.omega_sq).sqrt()
    }

    /// `Δ(z) = cos(λ/h)`.
    pub fn discriminant(&self, z: Complex64) -> Complex64 {
        (self.lambda(z) / self.h).cos()
    }

    /// The canonical monodromy `exp(A/h)` (the solution with `Y(0) = I`):
    /// `cos(λ/h) I + (sin(λ/h)/λ) A`, written through `λ²` only.
    pub fn monodromy(&self, z: Complex64) -> Mat2 {
        let iz = Complex64::i() * z;
        let a = Mat2::new(-iz, self.q0, self.p0, iz);
        // exp(B) with B = A/h and B² = −(λ/h)² I.
        let mu_sq = -(z * z - self.omega_sq) / (self.h * self.h);
        let (c, s) = cosh_sinhc(mu_sq);
        Mat2::identity().scale_c(c) + a.scale(1.0 / self.h).scale_c(s)
    }

    /// `F(0)⁻¹F(1) = diag(e^{iλ/h}, e^{−iλ/h})`.
    pub fn monodromy_diagonal(&self, z: Complex64) -> Mat2 {
        let phase = Complex64::i() * self.lambda(z) / self.h;
        Mat2::diag(phase.exp(), (-phase).exp())
    }

    /// `z + λ`, switching to `ω²/(z − λ)` when the direct sum cancels.
    fn z_plus_lambda(&self, z: Complex64, lambda: Complex64) -> Result<Complex64> {
        let direct = z + lambda;
        let scale = z.norm().max(lambda.norm());
        if direct.norm() > 1e-8 * scale {
            return Ok(direct);
        }
        let other = z - lambda;
        if other.norm() > 1e-8 * scale && other.norm() > 0.0 {
            return Ok(self.omega_sq / other);
        }
        Err(Error::DegenerateFrame { z })
    }

    /// Eigenvector matrix `P(z)`; column 1 belongs to `iλ/h`, column 2 to `−iλ/h`.
    ///
    /// When `p₀ = 0` or `q₀ = 0` the usual formula divides by zero and the
    /// triangular system's eigenvectors are used instead.
    pub fn eigenvector_matrix(&self, z: Complex64) -> Result<Mat2> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        let lambda = self.lambda(z);
        let p = match (self.p0 == zero, self.q0 == zero) {
            (true, true) => Mat2::new(zero, one, one, zero),
            (true, false) => Mat2::new(one, one, 2.0 * i * z / self.q0, zero),
            (false, true) => Mat2::new(zero, -2.0 * i * z / self.p0, one, one),
            (false, false) => {
                let zl = self.z_plus_lambda(z, lambda)?;
                Mat2::new(one, -i * zl / self.p0, i * zl / self.q0, one)
            }
        };
        // λ is only known to about √ε near ±ω, so the cut-off is loose.
        let det = p.det();
        if !det.is_finite() || det.norm() <= 1e-6 * p.frobenius().powi(2) {
            return Err(Error::DegenerateFrame { z });
        }
        Ok(p)
    }

    /// `F(x; z, h) = P(z) e^{iλxσ₃/h}`.
    pub fn fundamental(&self, x: f64, z: Complex64) -> Result<Mat2> {
        let p = self.eigenvector_matrix(z)?;
        let phase = Complex64::i() * self.lambda(z) * x / self.h;
        Ok(p * Mat2::diag(phase.exp(), (-phase).exp()))
    }

    /// Membership in `{z : cos(λ/h) ∈ [−1, 1]}` at tolerance `tol`.
    pub fn spectrum_membership(&self, z: Complex64, tol: f64) -> bool {
        let d = self.discriminant(z);
        d.im.abs() <= tol && d.re >= -1.0 - tol && d.re <= 1.0 + tol
    }

    /// Branch points `±ω` where the multipliers collide.
    pub fn branch_points(&self) -> [Complex64; 2] {
        let w = self.omega_sq.sqrt();
        [w, -w]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sixteen_i(h: f64) -> ConstantModel {
        ConstantModel::new(c(1.0, 0.0), c(0.0, 16.0), h).unwrap()
    }

    #[test]
    fn lambda_examples() {
        let branch = c(1.0, 1.0) * (2.0 * 2f64.sqrt());
        assert!(sixteen_i(1.0).lambda(branch).norm() < 1e-7);
        let m = ConstantModel::new(c(1.0, 1.0), c(1.0, -1.0), 1.0).unwrap();
        assert!((m.lambda(c(0.0, 0.0)) - c(0.0, 2f64.sqrt())).norm() < 1e-15);
        let free = ConstantModel::new(c(0.0, 0.0), c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(free.lambda(c(-2.0, 0.5)), c(-2.0, 0.5));
    }

    #[test]
    fn discriminant_examples() {
        let free = ConstantModel::new(c(0.0, 0.0), c(0.0, 0.0), 1.0).unwrap();
        let z = c(0.4, -0.3);
        assert_eq!(free.discriminant(z), z.cos());
        let m = ConstantModel::new(c(1.0, 1.0), c(1.0, -1.0), 1.0).unwrap();
        assert_relative_eq!(m.discriminant(c(0.0, 0.0)).re, 2f64.sqrt().cosh(), max_relative = 1e-15);
        let branch = c(1.0, 1.0) * (2.0 * 2f64.sqrt());
        for h in [1.0, 0.3, 0.01] {
            assert!((sixteen_i(h).discriminant(branch) - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn free_monodromy_is_diagonal() {
        let free = ConstantModel::new(c(0.0, 0.0), c(0.0, 0.0), 0.5).unwrap();
        let z = c(1.3, 0.2);
        let m = free.monodromy_diagonal(z);
        let expect = Mat2::diag((Complex64::i() * z / 0.5).exp(), (-Complex64::i() * z / 0.5).exp());
        assert!((m - expect).frobenius() < 1e-14);
        assert!((m.det() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn traces_agree_with_discriminant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let model = ConstantModel::new(
                c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                rng.gen_range(0.25..1.0),
            )
            .unwrap();
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-1.5..1.5));
            let d = model.discriminant(z);
            let scale = d.norm().max(1.0);
            assert!((model.monodromy_diagonal(z).trace() * 0.5 - d).norm() <= 1e-12 * scale);
            assert!((model.monodromy(z).trace() * 0.5 - d).norm() <= 1e-12 * scale);
            assert!((model.monodromy_diagonal(z).det() - 1.0).norm() <= 1e-12 * scale * scale);
        }
    }

    #[test]
    fn eigenframe_route_matches_closed_form_exponential() {
        // P diag(e^{±iλ/h}) P⁻¹ = F(1)F(0)⁻¹ must equal exp(A/h).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let model = ConstantModel::new(
                c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                rng.gen_range(0.5..1.0),
            )
            .unwrap();
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0));
            let f0 = model.fundamental(0.0, z).unwrap();
            let f1 = model.fundamental(1.0, z).unwrap();
            let via_frame = f1 * f0.inverse().unwrap();
            let direct = model.monodromy(z);
            let rel = (via_frame - direct).frobenius() / direct.frobenius();
            assert!(rel < 1e-9, "{rel} at {z}");
            // And the frame monodromy is the diagonal one.
            let diag = f0.inverse().unwrap() * f1;
            assert!((diag - model.monodromy_diagonal(z)).frobenius() < 1e-9 * diag.frobenius());
        }
    }

    #[test]
    fn fundamental_matrix_solves_the_ode() {
        let model = ConstantModel::new(c(-1.0, -1.0), c(1.0, -1.0), 0.7).unwrap();
        let z = c(0.4, 0.9);
        let a = Mat2::new(-Complex64::i() * z, model.q0, model.p0, Complex64::i() * z);
        let x = 0.3;
        let eps = 1e-5;
        let deriv = (model.fundamental(x + eps, z).unwrap() - model.fundamental(x - eps, z).unwrap())
            .scale(1.0 / (2.0 * eps));
        let rhs = (a * model.fundamental(x, z).unwrap()).scale(1.0 / model.h);
        assert!((deriv.scale(1.0) - rhs).frobenius() < 1e-7 * rhs.frobenius());
    }

    #[test]
    fn triangular_frames() {
        for (p0, q0) in [(c(0.0, 0.0), c(1.0, 2.0)), (c(0.5, -1.0), c(0.0, 0.0)), (c(0.0, 0.0), c(0.0, 0.0))] {
            let model = ConstantModel::new(p0, q0, 0.5).unwrap();
            let z = c(0.8, 0.3);
            let f0 = model.fundamental(0.0, z).unwrap();
            let f1 = model.fundamental(1.0, z).unwrap();
            let via_frame = f1 * f0.inverse().unwrap();
            assert!((via_frame - model.monodromy(z)).frobenius() < 1e-10 * via_frame.frobenius());
        }
        let model = ConstantModel::new(c(0.0, 0.0), c(1.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            model.eigenvector_matrix(c(0.0, 0.0)),
            Err(Error::DegenerateFrame { .. })
        ));
    }

    #[test]
    fn branch_point_frame_is_degenerate() {
        let branch = c(1.0, 1.0) * (2.0 * 2f64.sqrt());
        assert!(sixteen_i(1.0).eigenvector_matrix(branch).is_err());
    }

    #[test]
    fn z_plus_lambda_uses_opposite_branch() {
        // z ≈ −λ: the direct sum cancels, ω²/(z − λ) does not.
        let model = ConstantModel::new(c(1e-6, 0.0), c(1e-6, 0.0), 1.0).unwrap();
        let z = c(-3.0, 0.0);
        let lambda = model.lambda(z);
        let zl = model.z_plus_lambda(z, lambda).unwrap();
        let expect = model.omega_sq / (z - lambda);
        assert!((zl - expect).norm() <= 1e-12 * expect.norm());
    }

    #[test]
    fn nls_reduction_memberships() {
        let defocusing = ConstantModel::new(c(1.0, 1.0), c(1.0, -1.0), 1.0).unwrap();
        assert!(!defocusing.spectrum_membership(c(0.0, 0.0), 1e-9));
        assert!(defocusing.spectrum_membership(c(1.5, 0.0), 1e-9));
        assert!(defocusing.spectrum_membership(c(-2.0, 0.0), 1e-9));
        assert!(!defocusing.spectrum_membership(c(1.4, 0.0), 1e-9));

        let focusing = ConstantModel::new(c(-1.0, -1.0), c(1.0, -1.0), 1.0).unwrap();
        assert!(focusing.spectrum_membership(c(0.0, 1.0), 1e-9));
        assert!(focusing.spectrum_membership(c(0.7, 0.0), 1e-9));
        assert!(!focusing.spectrum_membership(c(0.0, 2.0), 1e-9));

        let free = ConstantModel::new(c(0.0, 0.0), c(0.0, 0.0), 1.0).unwrap();
        assert!(free.spectrum_membership(c(2.5, 0.0), 1e-9));
        assert!(!free.spectrum_membership(c(2.5, 0.1), 1e-9));
    }

    #[test]
    fn branch_invariance_of_discriminant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let model = sixteen_i(rng.gen_range(0.2..1.0));
            let z = c(rng.gen_range(-6.0..6.0), rng.gen_range(-5.0..5.0));
            let l = model.lambda(z);
            assert_eq!((l / model.h).cos(), (-l / model.h).cos());
        }
    }
}
