use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PeriodicPotential;
use crate::transfer::{discriminant, IntegratorConfig};

/// What a Newton iteration drives to zero, expressed through `Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Target {
    /// `Δ − c`.
    Value(Complex64),
    /// `i Im Δ`; the step leaves `Re Δ` unchanged to first order.
    RealAxis,
    /// `Δ² − 1`.
    BandEdge,
}

impl Target {
    /// Residual and its derivative with respect to `Δ`.
    fn residual(&self, d: Complex64) -> (Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Target::Value(c) => (d - c, one),
            Target::RealAxis => (Complex64::new(0.0, d.im), one),
            Target::BandEdge => (d * d - 1.0, d * 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NewtonOutcome {
    pub z: Complex64,
    pub delta: Complex64,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub max_step: f64,
}

/// Newton iteration on `target(Δ(z))` with a central-difference `Δ′`.
pub(crate) fn newton(
    eval: &dyn Fn(Complex64) -> Result<Complex64>,
    z0: Complex64,
    target: Target,
    s: &NewtonSettings,
) -> Result<NewtonOutcome> {
    let mut z = z0;
    let mut d = eval(z)?;
    for _ in 0..s.max_iter {
        let (r, dr) = target.residual(d);
        if r.norm() <= s.tol {
            return Ok(NewtonOutcome {
                z,
                delta: d,
                residual: r.norm(),
                converged: true,
            });
        }
        let dd = (eval(z + s.fd_step)? - eval(z - s.fd_step)?) / (2.0 * s.fd_step);
        let slope = dr * dd;
        if slope.norm() == 0.0 || !slope.is_finite() {
            break;
        }
        let mut dz = -r / slope;
        if dz.norm() > s.max_step {
            dz *= s.max_step / dz.norm();
        }
        z += dz;
        d = eval(z)?;
        if dz.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    let residual = target.residual(d).0.norm();
    Ok(NewtonOutcome {
        z,
        delta: d,
        residual,
        converged: residual <= s.tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    /// Residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Roots closer than this are reported once.
    pub dedup_radius: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            fd_step: 1e-5,
            dedup_radius: 1e-3,
        }
    }
}

impl NewtonOptions {
    fn settings(&self) -> Result<NewtonSettings> {
        if !(self.tol > 0.0) || !(self.fd_step > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "Newton options need positive tol, fd_step and max_iter".into(),
            ));
        }
        Ok(NewtonSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            fd_step: self.fd_step,
            max_step: 1.0,
        })
    }
}

/// Converged roots plus the seeds that did not converge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport<T> {
    pub roots: Vec<T>,
    pub failed_seeds: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdge {
    pub z: Complex64,
    pub delta: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochEigenvalue {
    pub z: Complex64,
    pub xi: f64,
    pub residual: f64,
}

fn solve_from_seeds(
    pot: &PeriodicPotential,
    h: f64,
    cfg: &IntegratorConfig,
    seeds: &[Complex64],
    target: Target,
    opts: &NewtonOptions,
) -> Result<RootReport<NewtonOutcome>> {
    let settings = opts.settings()?;
    let eval = |z: Complex64| discriminant(pot, z, h, cfg);
    let mut report = RootReport {
        roots: Vec::new(),
        failed_seeds: Vec::new(),
    };
    for &seed in seeds {
        match newton(&eval, seed, target, &settings) {
            Ok(out) if out.converged => {
                if report
                    .roots
                    .iter()
                    .all(|r: &NewtonOutcome| (r.z - out.z).norm() > opts.dedup_radius)
                {
                    report.roots.push(out);
                }
            }
            _ => report.failed_seeds.push(seed),
        }
    }
    Ok(report)
}

/// Solutions of `Δ(z)² = 1` (periodic and antiperiodic eigenvalues) near the seeds.
pub fn band_edges(
    pot: &PeriodicPotential,
    h: f64,
    cfg: &IntegratorConfig,
    seeds: &[Complex64],
    opts: &NewtonOptions,
) -> Result<RootReport<BandEdge>> {
    let r = solve_from_seeds(pot, h, cfg, seeds, Target::BandEdge, opts)?;
    Ok(RootReport {
        roots: r
            .roots
            .into_iter()
            .map(|o| BandEdge {
                z: o.z,
                delta: o.delta,
                residual: o.residual,
            })
            .collect(),
        failed_seeds: r.failed_seeds,
    })
}

/// Solutions of `Δ(z) = cos ξ` near the seeds.
pub fn bloch_eigenvalues(
    pot: &PeriodicPotential,
    h: f64,
    cfg: &IntegratorConfig,
    xi: f64,
    seeds: &[Complex64],
    opts: &NewtonOptions,
) -> Result<RootReport<BlochEigenvalue>> {
    let target = Target::Value(Complex64::new(xi.cos(), 0.0));
    let r = solve_from_seeds(pot, h, cfg, seeds, target, opts)?;
    Ok(RootReport {
        roots: r
            .roots
            .into_iter()
            .map(|o| BlochEigenvalue {
                z: o.z,
                xi,
                residual: o.residual,
            })
            .collect(),
        failed_seeds: r.failed_seeds,
    })
}
