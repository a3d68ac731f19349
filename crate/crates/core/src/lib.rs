//! Numerical laboratory for the Ablowitz–Ladik hierarchy on finite lattice windows.
//!
//! Modules, bottom up:
//!
//! - [`lattice`]: windows, boundary modes, the state pair, weights and norms.
//! - [`flows`]: the AL system and the printed low-order members of the hierarchy.
//! - [`hierarchy`]: coefficient recursions and AL_r for arbitrary order.
//! - [`lax`]: zero-curvature matrices, the Lax operator and spectral diagnostics.
//! - [`integrator`]: fixed-step RK4 time stepping.
//! - [`experiments`]: closeness, asymptotics and support-spread runs.
//! - [`suite`]: the invariant checks run by `al check`.

pub mod error;
pub mod experiments;
pub mod flows;
pub mod hierarchy;
pub mod integrator;
pub mod lattice;
pub mod lax;
pub mod suite;

pub use error::{Error, Result};
pub use flows::{Flow, FlowDerivative};
pub use hierarchy::FlowSpec;
pub use lattice::{BoundaryMode, LatticeWindow, NormExponent, SequencePair, Weight, WeightRule};
