use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PeriodicPotential;
use crate::transfer::{discriminant, IntegratorConfig};

/// Axis-aligned rectangle `[re₀, re₁] × [im₀, im₁]` in the spectral plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re: [re_min, re_max],
            im: [im_min, im_max],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.re.iter().chain(&self.im).all(|v| v.is_finite())
            && self.re[1] > self.re[0]
            && self.im[1] > self.im[0];
        if ok {
            Ok(())
        } else {
            Err(Error::WindowDegenerate(format!(
                "[{}, {}] x [{}, {}]",
                self.re[0], self.re[1], self.im[0], self.im[1]
            )))
        }
    }

    pub fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.re[0] - margin
            && z.re <= self.re[1] + margin
            && z.im >= self.im[0] - margin
            && z.im <= self.im[1] + margin
    }
}

/// `Δ(z; h)` sampled on the nodes of a rectangular grid.
#[derive(Debug, Clone)]
pub struct DiscriminantField {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Node values, `values[i * ny + j]` at `z_ij`; NaN where integration failed.
    values: Vec<Complex64>,
    pub failures: Vec<(usize, usize)>,
    potential: PeriodicPotential,
    integrator: IntegratorConfig,
}

impl DiscriminantField {
    pub fn cell_size(&self) -> (f64, f64) {
        (
            (self.window.re[1] - self.window.re[0]) / (self.nx - 1) as f64,
            (self.window.im[1] - self.window.im[0]) / (self.ny - 1) as f64,
        )
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let (dre, dim) = self.cell_size();
        Complex64::new(
            self.window.re[0] + i as f64 * dre,
            self.window.im[0] + j as f64 * dim,
        )
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.ny + j]
    }

    pub fn potential(&self) -> &PeriodicPotential {
        &self.potential
    }

    pub fn integrator(&self) -> &IntegratorConfig {
        &self.integrator
    }

    /// Off-grid evaluation with the field's potential, `h` and integrator.
    pub fn discriminant_at(&self, z: Complex64) -> Result<Complex64> {
        discriminant(&self.potential, z, self.h, &self.integrator)
    }
}

/// Evaluates `Δ` at every node; failures are recorded, not fatal.
pub fn discriminant_field(
    pot: &PeriodicPotential,
    h: f64,
    window: Window,
    nx: usize,
    ny: usize,
    cfg: &IntegratorConfig,
) -> Result<DiscriminantField> {
    window.validate()?;
    if nx < 8 || ny < 8 {
        return Err(Error::WindowDegenerate(format!(
            "grid must be at least 8x8, got {nx}x{ny}"
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    cfg.validate()?;

    let mut field = DiscriminantField {
        window,
        nx,
        ny,
        h,
        values: Vec::new(),
        failures: Vec::new(),
        potential: pot.clone(),
        integrator: *cfg,
    };
    let nodes: Vec<Complex64> = (0..nx * ny).map(|k| field.node(k / ny, k % ny)).collect();
    let results: Vec<Option<Complex64>> = nodes
        .par_iter()
        .map(|&z| discriminant(pot, z, h, cfg).ok())
        .collect();
    field.values = results
        .iter()
        .map(|r| r.unwrap_or(Complex64::new(f64::NAN, f64::NAN)))
        .collect();
    field.failures = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_none())
        .map(|(k, _)| (k / ny, k % ny))
        .collect();
    Ok(field)
}
