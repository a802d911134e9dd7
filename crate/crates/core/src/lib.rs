//! Decay rates of `ü + 2f(A)u̇ + Au = 0` for a self-adjoint `A > 0` with
//! discrete spectrum, computed mode by mode.
//!
//! Each eigenvalue `s` of `A` gives a 2×2 system whose slowest rate is
//! `φ(s)`; the semigroup decays like `e^{-m* t}` with `m* = inf φ`, with an
//! extra factor `(1 + t)` exactly when a critically damped mode attains
//! the infimum.

pub mod damping;
pub mod error;
pub mod fractional;
pub mod lyapunov;
pub mod mode_analysis;
pub mod partition;
pub mod propagator;
mod serde_ext;
pub mod sim;
pub mod spectrum;

pub use damping::{parse_damping, DampingSpec};
pub use error::{Error, Result};
pub use fractional::{analyze_fractional, FractionalAnalysis};
pub use lyapunov::{certify, CertifiedBound};
pub use mode_analysis::{analyze, phi, AnalysisOptions, DampedSystem, DecayReport};
pub use partition::{PartitionParams, Region};
pub use propagator::{envelope, propagate};
pub use sim::RunConfig;
pub use spectrum::{make_spectrum, SpectrumSpec, Tail};
