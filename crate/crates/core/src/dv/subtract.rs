use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::fock::{apply_beamsplitter, BsParams, FockState, ModeId};
use crate::measurement::{post_select, DetectionPattern};

/// Photon subtraction: mixes `mode` with a vacuum ancilla on a weakly
/// reflecting beamsplitter of angle `theta` and keeps the branch where the
/// ancilla detector counts exactly one photon.
///
/// Returns the normalized conditional state on the original modes and the
/// heralding probability. The ancilla takes the next free spatial label with
/// the polarization of `mode`.
pub fn photon_subtract(state: &FockState, mode: ModeId, theta: f64) -> Result<(FockState, f64)> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "subtraction angle must lie in (0, π/2), got {theta}"
        )));
    }
    state.check_normalized()?;
    state.mode_index(mode)?;
    let next = state.modes().iter().map(|m| m.spatial).max().unwrap_or(0) + 1;
    let ancilla = ModeId::new(next, mode.polarization);
    let joint = state.with_vacuum_modes(&[ancilla])?;
    let mixed = apply_beamsplitter(&joint, mode, ancilla, BsParams::with_theta(theta))?;
    let (cond, p) = post_select(&mixed, &DetectionPattern::new().exact(ancilla, 1))?;
    if p == 0.0 {
        return Err(Error::ZeroProbability);
    }
    Ok((cond, p))
}
