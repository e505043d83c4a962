//! The conditional stability set `{z : Δ(z; h) ∈ [−1, 1]}` and Bloch data on it.

mod bloch;
mod field;
mod roots;
mod trace;

pub use bloch::{
    bloch_eigenfunction, verify_imag_identity, BlochEigenfunction, BlochSample, ImagIdentity,
    DEFAULT_BLOCH_SAMPLES,
};
pub use field::{discriminant_field, DiscriminantField, Window};
pub use roots::{band_edges, bloch_eigenvalues, BandEdge, BlochEigenvalue, NewtonOptions, RootReport};
pub use trace::{trace_spectrum, ArcPoint, FlaggedVertex, SpectrumArcs, DEFAULT_TRACE_TOL};
