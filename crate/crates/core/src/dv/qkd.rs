//! Entanglement-based QKD with passive basis choice, and the
//! measurement-device-independent variant with an untrusted Bell analyzer.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::bell::{bell_measure, bell_state, BellClass, BellKind, BellOutcome};
use super::{pol_pair, polarization_qubit, SPATIAL_A, SPATIAL_B, SPATIAL_X, SPATIAL_Y};
use crate::error::{Error, Result};
use crate::fock::{
    apply_beamsplitter, apply_polarization_unitary, BsParams, FockState, Mat2, ModeId,
};
use crate::measurement::photon_distribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    Rectilinear,
    Diagonal,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Rectilinear, Basis::Diagonal];

    pub fn name(self) -> &'static str {
        match self {
            Basis::Rectilinear => "rectilinear",
            Basis::Diagonal => "diagonal",
        }
    }
}

/// One round of the entanglement-based protocol. Bits are present only on
/// kept rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QkdRoundRecord {
    pub alice_basis: Basis,
    pub bob_basis: Basis,
    pub alice_bit: Option<u8>,
    pub bob_bit: Option<u8>,
    pub kept: bool,
}

/// Waveplate taking `H → (H+V)/√2`, `V → (H−V)/√2`.
fn diagonal_waveplate() -> Mat2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

fn qkd_modes() -> Vec<ModeId> {
    [SPATIAL_X, SPATIAL_Y]
        .iter()
        .flat_map(|s| pol_pair(*s))
        .collect()
}

/// `|ψ+⟩` after Alice's and Bob's beamsplitters, before the waveplates.
/// Alice's photon exits in `A` (label 0) or `X` (label 2), Bob's in `B`
/// (label 1) or `Y` (label 3).
pub fn qkd_pre_waveplate_state() -> Result<FockState> {
    let s = bell_state(BellKind::PsiPlus).with_vacuum_modes(&qkd_modes())?;
    let bs = BsParams::symmetric();
    let mut s = s;
    for (input, arm) in [(SPATIAL_A, SPATIAL_X), (SPATIAL_B, SPATIAL_Y)] {
        s = apply_beamsplitter(&s, ModeId::h(input), ModeId::h(arm), bs)?;
        s = apply_beamsplitter(&s, ModeId::v(input), ModeId::v(arm), bs)?;
    }
    Ok(s)
}

fn detector_state() -> Result<FockState> {
    let wp = diagonal_waveplate();
    let s = apply_polarization_unitary(&qkd_pre_waveplate_state()?, SPATIAL_X, &wp)?;
    apply_polarization_unitary(&s, SPATIAL_Y, &wp)
}

fn all_detectors() -> Vec<ModeId> {
    [SPATIAL_A, SPATIAL_X, SPATIAL_B, SPATIAL_Y]
        .iter()
        .flat_map(|s| pol_pair(*s))
        .collect()
}

/// Reads one party's (basis, bit) off its four detectors `(R_H, R_V, D_H, D_V)`.
fn party_result(counts: &[u32]) -> (Basis, u8) {
    match counts {
        [1, 0, 0, 0] => (Basis::Rectilinear, 0),
        [0, 1, 0, 0] => (Basis::Rectilinear, 1),
        [0, 0, 1, 0] => (Basis::Diagonal, 0),
        [0, 0, 0, 1] => (Basis::Diagonal, 1),
        _ => unreachable!("each party receives exactly one photon: {counts:?}"),
    }
}

fn record_from_counts(counts: &[u32]) -> QkdRoundRecord {
    let (alice_basis, a) = party_result(&counts[0..4]);
    let (bob_basis, b) = party_result(&counts[4..8]);
    let kept = alice_basis == bob_basis;
    QkdRoundRecord {
        alice_basis,
        bob_basis,
        alice_bit: kept.then_some(a),
        bob_bit: kept.then_some(b),
        kept,
    }
}

fn qkd_outcomes() -> Result<Vec<(QkdRoundRecord, f64)>> {
    let dist = photon_distribution(&detector_state()?, &all_detectors())?;
    Ok(dist
        .entries()
        .map(|(o, p)| (record_from_counts(o.counts()), p))
        .collect())
}

/// Exhaustive branch statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QkdAnalysis {
    pub sift_probability: f64,
    /// Probability that kept bits agree, conditioned on keeping the round.
    pub agreement_probability: f64,
    pub qber: f64,
}

pub fn qkd_exact() -> Result<QkdAnalysis> {
    let (mut kept, mut agree) = (0.0, 0.0);
    for (r, p) in qkd_outcomes()? {
        if r.kept {
            kept += p;
            if r.alice_bit == r.bob_bit {
                agree += p;
            }
        }
    }
    let agreement_probability = agree / kept;
    Ok(QkdAnalysis {
        sift_probability: kept,
        agreement_probability,
        qber: 1.0 - agreement_probability,
    })
}

/// One seeded round: both photons are counted after the basis-choice
/// beamsplitters and waveplates; the round is kept when both photons land
/// in matching-basis arms.
pub fn qkd_round(seed: u64) -> Result<QkdRoundRecord> {
    let dist = photon_distribution(&detector_state()?, &all_detectors())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(record_from_counts(dist.sample(&mut rng).counts()))
}

/// A BB84-style single-photon preparation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MdiChoice {
    pub basis: Basis,
    pub bit: u8,
}

impl MdiChoice {
    pub fn new(basis: Basis, bit: u8) -> Result<Self> {
        if bit > 1 {
            return Err(Error::InvalidParameter(format!("bit must be 0 or 1, got {bit}")));
        }
        Ok(Self { basis, bit })
    }

    pub fn all() -> Vec<MdiChoice> {
        Basis::ALL
            .iter()
            .flat_map(|b| [0, 1].map(|bit| MdiChoice { basis: *b, bit }))
            .collect()
    }

    fn photon(self, spatial: u16) -> Result<FockState> {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let (ah, av) = match (self.basis, self.bit) {
            (Basis::Rectilinear, 0) => (one, zero),
            (Basis::Rectilinear, _) => (zero, one),
            (Basis::Diagonal, 0) => (h, h),
            (Basis::Diagonal, _) => (h, -h),
        };
        polarization_qubit(spatial, ah, av)
    }
}

/// Bit relation implied by an announced Bell outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitRelation {
    Equal,
    Opposite,
}

/// Extra flip Bob applies on top of flipping every key bit, per basis and
/// announced outcome. Generated from [`derive_mdi_table`].
pub fn mdi_extra_flip(basis: Basis, class: BellClass) -> bool {
    matches!((basis, class), (Basis::Diagonal, BellClass::PhiPlus))
}

/// Evaluates every basis-matched input pair through the Bell analyzer and
/// records which bit relation each announced outcome certifies. Fails if an
/// outcome is compatible with both relations.
pub fn derive_mdi_table() -> Result<BTreeMap<(Basis, BellClass), BitRelation>> {
    let mut table = BTreeMap::new();
    for alice in MdiChoice::all() {
        for bob in MdiChoice::all() {
            if alice.basis != bob.basis {
                continue;
            }
            let state = alice.photon(SPATIAL_A)?.tensor(&bob.photon(SPATIAL_B)?)?;
            let (_, bell) = bell_measure(&state, 0)?;
            let rel = if alice.bit == bob.bit {
                BitRelation::Equal
            } else {
                BitRelation::Opposite
            };
            for class in [BellClass::PhiPlus, BellClass::PhiMinus] {
                if bell.probability(class) <= 1e-12 {
                    continue;
                }
                if let Some(prev) = table.insert((alice.basis, class), rel) {
                    if prev != rel {
                        return Err(Error::InvalidParameter(format!(
                            "{} in the {} basis certifies no bit relation",
                            class.name(),
                            alice.basis.name()
                        )));
                    }
                }
            }
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdiRecord {
    pub outcome: BellOutcome,
    pub kept: bool,
    pub alice_bit: Option<u8>,
    /// Bob's bit after the announced-outcome flips.
    pub bob_bit: Option<u8>,
}

/// One MDI round: Alice and Bob each send a prepared photon to Charlie, who
/// performs the linear-optical Bell measurement and announces the outcome.
pub fn mdi_qkd_round(alice: MdiChoice, bob: MdiChoice, seed: u64) -> Result<MdiRecord> {
    MdiChoice::new(alice.basis, alice.bit)?;
    MdiChoice::new(bob.basis, bob.bit)?;
    let state = alice.photon(SPATIAL_A)?.tensor(&bob.photon(SPATIAL_B)?)?;
    let (outcome, _) = bell_measure(&state, seed)?;
    let class = outcome.classification;
    let kept = class != BellClass::Ambiguous && alice.basis == bob.basis;
    let (alice_bit, bob_bit) = if kept {
        let flipped = bob.bit ^ 1 ^ u8::from(mdi_extra_flip(bob.basis, class));
        (Some(alice.bit), Some(flipped))
    } else {
        (None, None)
    };
    Ok(MdiRecord {
        outcome,
        kept,
        alice_bit,
        bob_bit,
    })
}
