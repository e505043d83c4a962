use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("sampled potential has no samples")]
    EmptyRepresentation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step budget exceeded at z = {z}: needed more than {max_steps} steps (last estimate {estimate:.3e})")]
    StepBudgetExceeded {
        z: Complex64,
        max_steps: usize,
        estimate: f64,
    },

    #[error("integration produced non-finite values at z = {z}")]
    NonFinite { z: Complex64 },

    #[error("monodromy determinant drifted at z = {z}: |det M - 1| = {defect:.3e}")]
    DeterminantDrift { z: Complex64, defect: f64 },

    #[error("degenerate window: {0}")]
    WindowDegenerate(String),

    #[error("discriminant field has {0} failed nodes")]
    FieldHasFailures(usize),

    #[error("Newton iteration did not converge from seed {seed}")]
    NoConvergence { seed: Complex64 },

    #[error("z = {z} is not on the spectrum (|delta| = {delta_abs:.6})")]
    NotOnSpectrum { z: Complex64, delta_abs: f64 },

    #[error("monodromy is defective at z = {z} (coincident multipliers)")]
    DefectiveMonodromy { z: Complex64 },

    #[error("eigenvector frame is degenerate at z = {z}")]
    DegenerateFrame { z: Complex64 },

    #[error("semiclassical parameter mismatch: arcs at h = {arcs}, parameters at h = {params}")]
    MismatchedH { arcs: f64, params: f64 },

    #[error("spectrum has no points")]
    EmptyArcs,
}
