//! Enclosures of the spectrum and their certification against traced arcs.
//!
//! `Λʰ` is the strip `|Im z| ≤ B₁` cut down by the hyperbolic region
//! `|Re z||Im z| ≤ C(h)`; when `pq` is real the sharper `c(h)` replaces
//! `C(h)`. As `h → 0` with `pq` real the spectrum is pushed into a
//! neighbourhood of the cross `Σ = ℝ ∪ i[−B₁, B₁]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{PotentialNorms, SymmetryFlags};
use crate::spectrum::{SpectrumArcs, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnclosureParams {
    /// `(‖p‖∞‖q‖∞)^{1/2}`.
    pub b1: f64,
    /// `(h/2)(‖p′‖∞ + ‖q′‖∞) + ¼‖p̄q̄ − pq‖∞`.
    pub c_big_h: f64,
    /// `(h/2)(‖p′‖∞‖q′‖∞)^{1/2}`, only when `pq` is real.
    pub c_small_h: Option<f64>,
    /// `(‖p′‖∞‖q′‖∞)^{1/2} / 2`.
    pub c0: f64,
    pub h: f64,
    pub pq_real: bool,
}

impl EnclosureParams {
    /// The hyperbola constant in force: `c(h)` if available, else `C(h)`.
    pub fn hyperbola(&self) -> f64 {
        self.c_small_h.unwrap_or(self.c_big_h)
    }
}

pub fn enclosure_params(norms: &PotentialNorms, flags: &SymmetryFlags, h: f64) -> Result<EnclosureParams> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let geo = (norms.sup_dp * norms.sup_dq).sqrt();
    Ok(EnclosureParams {
        b1: (norms.sup_p * norms.sup_q).sqrt(),
        c_big_h: 0.5 * h * (norms.sup_dp + norms.sup_dq) + 0.25 * norms.sup_pq_defect,
        c_small_h: flags.pq_real.then_some(0.5 * h * geo),
        c0: 0.5 * geo,
        h,
        pq_real: flags.pq_real,
    })
}

/// Membership in `Λʰ` (or `Λ̃ʰ` when `pq` is real).
pub fn in_lambda(z: Complex64, params: &EnclosureParams) -> bool {
    z.im.abs() <= params.b1 && z.im.abs() * z.re.abs() <= params.hyperbola()
}

/// Distance from `z` to `ℝ ∪ i[−B₁, B₁]`.
pub fn cross_distance(z: Complex64, b1: f64) -> f64 {
    let (x, y) = (z.re.abs(), z.im.abs());
    let to_segment = if y <= b1 { x } else { x.hypot(y - b1) };
    y.min(to_segment)
}

/// `h₀ = δ²/(2c₀)`; infinite when `c₀ = 0`.
pub fn h_threshold(delta: f64, c0: f64) -> f64 {
    if c0 == 0.0 {
        f64::INFINITY
    } else {
        delta * delta / (2.0 * c0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub strip: bool,
    pub hyperbola: bool,
    /// `None` unless `pq` is real.
    pub sharp_hyperbola: Option<bool>,
    /// `None` unless `pq` is real and `h < h₀(δ)`.
    pub confinement: Option<bool>,
}

impl Verdicts {
    pub fn all_pass(&self) -> bool {
        self.strip
            && self.hyperbola
            && self.sharp_hyperbola.unwrap_or(true)
            && self.confinement.unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfinementReport {
    pub h: f64,
    pub n_points: usize,
    pub params: EnclosureParams,
    pub max_strip_violation: f64,
    /// Against `C(h)`.
    pub max_hyperbola_violation: f64,
    /// Against `c(h)`.
    pub max_sharp_hyperbola_violation: Option<f64>,
    pub max_cross_distance: f64,
    pub delta: f64,
    pub h0_for_delta: f64,
    pub verdict: Verdicts,
}

/// Pointwise tolerance for the enclosure checks.
pub fn violation_tolerance(z: Complex64) -> f64 {
    1e-6 * (1.0 + z.norm_sqr())
}

/// Checks every traced point against the strip, both hyperbolas and the cross.
pub fn certify(arcs: &SpectrumArcs, params: &EnclosureParams, delta: f64) -> Result<ConfinementReport> {
    if (arcs.h - params.h).abs() > 1e-12 * params.h {
        return Err(Error::MismatchedH {
            arcs: arcs.h,
            params: params.h,
        });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let points = arcs.sample_points();
    let mut strip = (0.0f64, true);
    let mut hyper = (0.0f64, true);
    let mut sharp = params.c_small_h.map(|_| (0.0f64, true));
    let mut cross = 0.0f64;
    let track = |acc: &mut (f64, bool), excess: f64, tol: f64| {
        let v = excess.max(0.0);
        acc.0 = acc.0.max(v);
        acc.1 &= v <= tol;
    };
    for &z in &points {
        let tol = violation_tolerance(z);
        let prod = z.re.abs() * z.im.abs();
        track(&mut strip, z.im.abs() - params.b1, tol);
        track(&mut hyper, prod - params.c_big_h, tol);
        if let (Some(acc), Some(c)) = (sharp.as_mut(), params.c_small_h) {
            track(acc, prod - c, tol);
        }
        cross = cross.max(cross_distance(z, params.b1));
    }
    let h0 = h_threshold(delta, params.c0);
    Ok(ConfinementReport {
        h: params.h,
        n_points: points.len(),
        params: *params,
        max_strip_violation: strip.0,
        max_hyperbola_violation: hyper.0,
        max_sharp_hyperbola_violation: sharp.map(|s| s.0),
        max_cross_distance: cross,
        delta,
        h0_for_delta: h0,
        verdict: Verdicts {
            strip: strip.1,
            hyperbola: hyper.1,
            sharp_hyperbola: sharp.map(|s| s.1),
            confinement: (params.pq_real && params.h < h0).then_some(cross <= delta),
        },
    })
}

/// Boundary curves for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct EnclosureCurves {
    /// Upper and lower boundary of `Λʰ` (or `Λ̃ʰ`) across the window.
    pub lambda: Vec<Vec<Complex64>>,
    /// The cross `Σ`, clipped to the window.
    pub cross: Vec<Vec<Complex64>>,
}

pub fn enclosure_curves(params: &EnclosureParams, window: &Window, n: usize) -> EnclosureCurves {
    let n = n.max(2);
    let c = params.hyperbola();
    let lambda = [1.0, -1.0]
        .iter()
        .map(|&s| {
            (0..n)
                .map(|k| {
                    let x = window.re[0] + (window.re[1] - window.re[0]) * k as f64 / (n - 1) as f64;
                    let y = if x == 0.0 { params.b1 } else { params.b1.min(c / x.abs()) };
                    Complex64::new(x, s * y)
                })
                .collect()
        })
        .collect();
    let clip_im = |y: f64| y.clamp(window.im[0], window.im[1]);
    let cross = vec![
        vec![Complex64::new(window.re[0], 0.0), Complex64::new(window.re[1], 0.0)],
        vec![
            Complex64::new(0.0, clip_im(-params.b1)),
            Complex64::new(0.0, clip_im(params.b1)),
        ],
    ];
    EnclosureCurves { lambda, cross }
}
