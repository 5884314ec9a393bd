//! Beamsplitter-centric quantum optics simulation.
//!
//! Two independent engines live here:
//!
//! * [`fock`]: an exact sparse multimode Fock-space state algebra with the
//!   linear-optical unitaries (beamsplitter, phase shifter, PBS routing).
//! * [`gaussian`]: a covariance-matrix calculus for Gaussian states with
//!   symplectic transforms, physicality checks and homodyne conditioning.
//!
//! [`measurement`] adds photon counting, post-selection, seeded sampling and
//! the HBT / homodyne observables on top of the Fock engine, and [`dv`]
//! builds the discrete-variable protocols (Bell analysis, teleportation,
//! QKD, dual-rail gates) from those pieces.

pub mod dv;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod measurement;

pub use error::{Error, Result};
pub use fock::{BsParams, FockState, ModeId, Occupation, Polarization};
pub use gaussian::{GaussianState, Quadrature, SymplecticOp};
pub use measurement::{Count, DetectionPattern, OutcomeDistribution};

pub use num_complex::Complex64;
