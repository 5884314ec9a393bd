use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::bell::{analyze_bell_arms, bell_state, sample_index, BellClass, BellKind, BellOutcome};
use super::{pol_pair, polarization_qubit, SPATIAL_A, SPATIAL_B, SPATIAL_C};
use crate::error::{Error, Result};
use crate::fock::{apply_beamsplitter, apply_phase, fidelity, BsParams, FockState, ModeId};

/// Pauli Z on a polarization qubit: a half-wave retardation of the V
/// component.
pub fn pauli_z(state: &FockState, spatial: u16) -> Result<FockState> {
    apply_phase(state, ModeId::v(spatial), PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    Identity,
    PauliZ,
}

impl Correction {
    fn for_class(class: BellClass) -> Option<Self> {
        match class {
            BellClass::PhiMinus => Some(Correction::Identity),
            BellClass::PhiPlus => Some(Correction::PauliZ),
            BellClass::Ambiguous => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Correction::Identity => "identity",
            Correction::PauliZ => "pauli-z",
        }
    }
}

/// One teleportation round.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportRecord {
    pub outcome: BellOutcome,
    pub correction: Option<Correction>,
    /// Bob's corrected, normalized qubit on `(b_H, b_V)`; `None` on failure.
    pub bob_state: Option<FockState>,
    pub success: bool,
    pub fidelity: Option<f64>,
}

/// Exact statistics over every analyzer pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportAnalysis {
    pub success_probability: f64,
    /// `(outcome, probability, post-correction fidelity on success)`.
    pub branches: Vec<(BellOutcome, f64, Option<f64>)>,
}

fn check_input(alpha: Complex64, beta: Complex64) -> Result<()> {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::Unnormalized(n));
    }
    Ok(())
}

/// Input qubit in `c` and the φ− channel on `(a, b)`, after the
/// beamsplitter on `(c, a)`.
fn mixed_state(alpha: Complex64, beta: Complex64) -> Result<FockState> {
    let input = polarization_qubit(SPATIAL_C, alpha, beta)?;
    let joint = input.tensor(&bell_state(BellKind::PhiMinus))?;
    let bs = BsParams::symmetric();
    let s = apply_beamsplitter(&joint, ModeId::h(SPATIAL_C), ModeId::h(SPATIAL_A), bs)?;
    apply_beamsplitter(&s, ModeId::v(SPATIAL_C), ModeId::v(SPATIAL_A), bs)
}

struct Branch {
    outcome: BellOutcome,
    probability: f64,
    correction: Option<Correction>,
    bob: Option<FockState>,
}

fn branches(alpha: Complex64, beta: Complex64) -> Result<Vec<Branch>> {
    check_input(alpha, beta)?;
    let mixed = mixed_state(alpha, beta)?;
    let mut out = Vec::new();
    for b in analyze_bell_arms(&mixed, SPATIAL_C, SPATIAL_A)? {
        let bob_modes: Vec<usize> = pol_pair(SPATIAL_B)
            .iter()
            .map(|m| b.remainder.mode_index(*m))
            .collect::<Result<_>>()?;
        let correction = Correction::for_class(b.outcome.classification);
        let bob = match correction {
            None => None,
            Some(c) => {
                let reduced = b
                    .remainder
                    .project_out_vacuum(&bob_modes)
                    .ok_or_else(|| Error::InvalidParameter("photon left in Alice's ports".into()))?;
                let (bob, _) = reduced.normalize()?;
                Some(match c {
                    Correction::Identity => bob,
                    Correction::PauliZ => pauli_z(&bob, SPATIAL_B)?,
                })
            }
        };
        out.push(Branch {
            outcome: b.outcome,
            probability: b.probability,
            correction,
            bob,
        });
    }
    Ok(out)
}

/// Exact success probability and per-branch fidelities of teleporting
/// `α|H⟩ + β|V⟩` through the φ− channel.
pub fn teleport_dv_exact(alpha: Complex64, beta: Complex64) -> Result<TeleportAnalysis> {
    let target = polarization_qubit(SPATIAL_B, alpha, beta)?;
    let mut success_probability = 0.0;
    let mut rows = Vec::new();
    for b in branches(alpha, beta)? {
        let f = match &b.bob {
            Some(bob) => {
                success_probability += b.probability;
                Some(fidelity(bob, &target)?)
            }
            None => None,
        };
        rows.push((b.outcome, b.probability, f));
    }
    Ok(TeleportAnalysis {
        success_probability,
        branches: rows,
    })
}

/// One seeded teleportation round: Bell analysis of `(c, a)`, then the
/// identity or Pauli-Z correction on Bob's photon.
pub fn teleport_dv(alpha: Complex64, beta: Complex64, seed: u64) -> Result<TeleportRecord> {
    let all = branches(alpha, beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = sample_index(all.iter().map(|b| b.probability), &mut rng);
    let b = all.into_iter().nth(pick).expect("index in range");
    let fid = match &b.bob {
        Some(bob) => Some(fidelity(bob, &polarization_qubit(SPATIAL_B, alpha, beta)?)?),
        None => None,
    };
    Ok(TeleportRecord {
        success: b.bob.is_some(),
        outcome: b.outcome,
        correction: b.correction,
        bob_state: b.bob,
        fidelity: fid,
    })
}
