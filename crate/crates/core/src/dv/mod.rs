//! Discrete-variable protocols built from beamsplitters, PBSs and photon
//! counting.
//!
//! Spatial-mode labels used throughout:
//!
//! | label | role                                                  |
//! |-------|-------------------------------------------------------|
//! | 0     | `a`: first photon of a Bell pair / Alice's mode       |
//! | 1     | `b`: second photon of a Bell pair / Bob's mode        |
//! | 2     | `c`: teleportation input, or Alice's reflected arm `X` |
//! | 3     | Bob's reflected arm `Y`                               |
//!
//! Ancilla ports for the Bell analyzer PBSs are allocated above the largest
//! label present in the state.

mod bell;
mod gates;
mod qkd;
mod subtract;
mod teleport;

pub use bell::{
    analyze_bell_arms, bell_measure, bell_state, bell_transform, classify, BellBranch, BellClass,
    BellKind, BellOutcome, BellTable, Detector,
};
pub use gates::{
    cnot_dualrail, cnot_matrix, hadamard_dualrail, hadamard_matrix, hom_distribution, mzi,
    rng_bit, rng_distribution, DualRailPair, DualRailQubit,
};
pub use qkd::{
    derive_mdi_table, mdi_extra_flip, mdi_qkd_round, qkd_exact, qkd_pre_waveplate_state,
    qkd_round, Basis, BitRelation, MdiChoice, MdiRecord, QkdAnalysis, QkdRoundRecord,
};
pub use subtract::photon_subtract;
pub use teleport::{pauli_z, teleport_dv, teleport_dv_exact, Correction, TeleportAnalysis, TeleportRecord};

use num_complex::Complex64;

use crate::error::Result;
use crate::fock::{FockState, ModeId, DEFAULT_CUTOFF};

pub(crate) const SPATIAL_A: u16 = 0;
pub(crate) const SPATIAL_B: u16 = 1;
pub(crate) const SPATIAL_C: u16 = 2;
pub(crate) const SPATIAL_X: u16 = 2;
pub(crate) const SPATIAL_Y: u16 = 3;

/// `(H, V)` modes of one spatial label.
pub(crate) fn pol_pair(spatial: u16) -> [ModeId; 2] {
    [ModeId::h(spatial), ModeId::v(spatial)]
}

/// Single photon `h|H⟩ + v|V⟩` on one spatial label.
pub fn polarization_qubit(spatial: u16, h: Complex64, v: Complex64) -> Result<FockState> {
    FockState::from_terms(
        pol_pair(spatial).to_vec(),
        [(vec![1, 0], h), (vec![0, 1], v)],
        DEFAULT_CUTOFF,
    )
}
