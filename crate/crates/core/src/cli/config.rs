use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::potentials::{PeriodicPotential, DEFAULT_SYMMETRY_TOL};
use crate::spectrum::{NewtonOptions, Window, DEFAULT_TRACE_TOL};
use crate::transfer::IntegratorConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub k: i64,
    pub c: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Constant { p: Complex64, q: Complex64 },
    Fourier { p: Vec<FourierTerm>, q: Vec<FourierTerm> },
    Sampled { p: Vec<Complex64>, q: Vec<Complex64> },
}

impl PotentialSpec {
    pub fn build(&self) -> crate::Result<PeriodicPotential> {
        let terms = |t: &[FourierTerm]| t.iter().map(|t| (t.k, t.c)).collect::<Vec<_>>();
        match self {
            PotentialSpec::Constant { p, q } => Ok(PeriodicPotential::constant(*p, *q)),
            PotentialSpec::Fourier { p, q } => Ok(PeriodicPotential::fourier(&terms(p), &terms(q))),
            PotentialSpec::Sampled { p, q } => PeriodicPotential::sampled(p, q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub trace_tol: f64,
    pub newton_tol: f64,
    /// Overrides `integrator.richardson_tol` when present.
    pub richardson_tol: Option<f64>,
    pub symmetry_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            trace_tol: DEFAULT_TRACE_TOL,
            newton_tol: NewtonOptions::default().tol,
            richardson_tol: None,
            symmetry_tol: DEFAULT_SYMMETRY_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

fn default_delta() -> f64 {
    0.3
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub potential: PotentialSpec,
    pub h_list: Vec<f64>,
    pub window: Window,
    pub grid: [usize; 2],
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

/// Problems with the configuration document itself.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("unsupported schema {} (expected {SCHEMA_VERSION})", self.schema));
        }
        if self.h_list.is_empty() {
            return bad("h_list is empty".into());
        }
        if let Some(h) = self.h_list.iter().find(|h| !(**h > 0.0) || !h.is_finite()) {
            return bad(format!("h values must be positive, got {h}"));
        }
        if self.grid[0] < 8 || self.grid[1] < 8 {
            return bad(format!("grid must be at least 8x8, got {:?}", self.grid));
        }
        if let Err(e) = self.window.validate() {
            return bad(e.to_string());
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        let t = &self.tolerances;
        if !(t.trace_tol > 0.0 && t.newton_tol > 0.0 && t.symmetry_tol > 0.0)
            || t.richardson_tol.is_some_and(|r| !(r > 0.0))
        {
            return bad("tolerances must be positive".into());
        }
        if let Err(e) = self.integrator_config().validate() {
            return bad(e.to_string());
        }
        if let Err(e) = self.potential.build() {
            return bad(e.to_string());
        }
        Ok(())
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        let mut cfg = self.integrator;
        if let Some(r) = self.tolerances.richardson_tol {
            cfg.richardson_tol = r;
        }
        cfg
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.tolerances.newton_tol,
            ..Default::default()
        }
    }
}
