//! Periodic dnoidal-peak standing waves of the cubic nonlinear Schrödinger
//! equation with a point defect,
//!
//! ```text
//! i u_t + u_xx + Z δ(x) u + |u|² u = 0,   x ∈ [−L, L] periodic,
//! ```
//!
//! together with their linearized spectra, a stability classifier and a
//! time integrator for empirical checks.
//!
//! Module map:
//!
//! * [`elliptic`]: complete and incomplete elliptic integrals, Jacobi functions.
//! * [`delta_op`]: the periodic Laplacian with a δ-interaction.
//! * [`wave`]: construction of the standing-wave profile.
//! * [`linops`]: the linearized operators `L₁`, `L₂` and their spectra.
//! * [`stability`]: slope condition and index verdicts.
//! * [`evolve`]: split-step time integration and orbit tracking.

pub mod delta_op;
pub mod elliptic;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod linops;
pub mod matrix;
pub mod quadrature;
pub mod roots;
pub mod stability;
pub mod wave;

#[cfg(test)]
pub(crate) mod oracle;

pub use delta_op::{Coupling, DeltaEigenpair, DeltaOperator, EigenKind};
pub use elliptic::{Jacobi, Modulus};
pub use error::{Admissibility, Error, Result};
pub use evolve::{EvolutionTrace, EvolveConfig, LinearStep, Perturbation, State};
pub use grid::Grid;
pub use linops::{LinearizedOperator, Parity, Spectrum, Which};
pub use num_complex::Complex64;
pub use stability::{ClassifyConfig, StabilityReport, Verdict};
pub use wave::{Branch, WaveParams, WaveProfile};

/// Library version, recorded in output provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
