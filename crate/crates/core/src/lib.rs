//! Dirac operators on simplicial complexes of dimension two, the Dirac
//! decomposition of topological spinors, and adaptive Dirac signal filtering.
//!
//! The numerical core is generic over [`Real`]; `f64` aliases are exported at
//! the crate root.

pub mod complex;
pub mod decompose;
pub mod error;
pub mod filter;
pub mod generators;
pub mod io;
pub mod operators;
pub mod rank;
pub mod scalar;
pub mod signals;
pub mod spectral;
pub mod spinor;

pub use complex::{BoundaryMatrix, Link, SimplicialComplex, Triangle};
pub use decompose::{decompose, dirac_project, harmonic_project, DiracDecomposition};
pub use error::{Error, Result};
pub use filter::{
    attenuation, dirac_filter, dirac_filter_factored, error as signal_error, hodge_filter, learn, rayleigh_m,
    FilterConfig, InitialGuess, LearnOutcome, RunTrace, TraceRow,
};
pub use generators::{ngf_generate, NgfParams};
pub use operators::{DiracOperator, LaplacianPart, Order};
pub use scalar::Real;
pub use signals::{
    eigenmode_signal, gaussian_mix_signal, lift_signal, sample_noise, select, snr, NoiseModel, Selector,
    SignalSpec, VarianceConvention,
};
pub use spectral::{EigenClass, SpectralBasis};
pub use spinor::{Block, Layout, TopologicalSpinor};

pub type Spinor = TopologicalSpinor<f64>;
pub type Operator = DiracOperator<f64>;
pub type Basis = SpectralBasis<f64>;
pub type Outcome = LearnOutcome<f64>;

pub type Spinor32 = TopologicalSpinor<f32>;
pub type Operator32 = DiracOperator<f32>;
pub type Basis32 = SpectralBasis<f32>;
