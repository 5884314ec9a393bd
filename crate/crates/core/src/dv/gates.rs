//! Dual-rail single-photon gates, the Mach-Zehnder interferometer, the
//! beamsplitter random number generator and Hong-Ou-Mandel interference.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{
    apply_beamsplitter, apply_controlled_phase, apply_mirror, apply_phase, BsParams, FockState,
    ModeId, DEFAULT_CUTOFF,
};
use crate::measurement::{photon_distribution, OutcomeDistribution};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A qubit carried by one photon shared between two path modes:
/// `|0⟩_L = |1,0⟩`, `|1⟩_L = |0,1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualRailQubit {
    rail0: ModeId,
    rail1: ModeId,
    state: FockState,
}

impl DualRailQubit {
    pub fn new(rail0: ModeId, rail1: ModeId, a0: Complex64, a1: Complex64) -> Result<Self> {
        let state = FockState::from_terms(
            vec![rail0, rail1],
            [(vec![1, 0], a0), (vec![0, 1], a1)],
            DEFAULT_CUTOFF,
        )?;
        state.check_normalized()?;
        Ok(Self { rail0, rail1, state })
    }

    /// Wraps an existing two-mode state after checking that every term holds
    /// exactly one photon.
    pub fn from_state(state: FockState) -> Result<Self> {
        if state.modes().len() != 2 {
            return Err(Error::DualRail(format!(
                "expected 2 rails, got {} modes",
                state.modes().len()
            )));
        }
        for (o, _) in state.terms() {
            if o.total() != 1 {
                return Err(Error::DualRail(format!("term {o} is not single-photon")));
            }
        }
        state.check_normalized()?;
        Ok(Self {
            rail0: state.modes()[0],
            rail1: state.modes()[1],
            state,
        })
    }

    pub fn rails(&self) -> (ModeId, ModeId) {
        (self.rail0, self.rail1)
    }

    pub fn state(&self) -> &FockState {
        &self.state
    }

    /// `(⟨0_L|ψ⟩, ⟨1_L|ψ⟩)`.
    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.state.amplitude(&[1, 0]), self.state.amplitude(&[0, 1])]
    }
}

/// Two dual-rail qubits on four rails `(c0, c1, t0, t1)`; the first pair is
/// the control.
#[derive(Debug, Clone, PartialEq)]
pub struct DualRailPair {
    state: FockState,
}

impl DualRailPair {
    /// Rails are `path(0..4)`. `amps` are in the order
    /// `|00⟩, |01⟩, |10⟩, |11⟩`, control first.
    pub fn new(amps: [Complex64; 4]) -> Result<Self> {
        let terms = (0..4).map(|k| (logical_counts(k >> 1, k & 1).to_vec(), amps[k]));
        let state = FockState::from_terms(pair_rails().to_vec(), terms, DEFAULT_CUTOFF)?;
        state.check_normalized()?;
        Ok(Self { state })
    }

    pub fn product(control: &DualRailQubit, target: &DualRailQubit) -> Result<Self> {
        let [c0, c1] = control.amplitudes();
        let [t0, t1] = target.amplitudes();
        Self::new([c0 * t0, c0 * t1, c1 * t0, c1 * t1])
    }

    pub fn state(&self) -> &FockState {
        &self.state
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        std::array::from_fn(|k| self.state.amplitude(&logical_counts(k >> 1, k & 1)))
    }

    /// Probability that some term left the logical subspace.
    pub fn leakage(&self) -> f64 {
        let inside: f64 = self.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        (self.state.norm_sqr() - inside).max(0.0)
    }
}

fn pair_rails() -> [ModeId; 4] {
    [0, 1, 2, 3].map(ModeId::path)
}

fn logical_counts(c: usize, t: usize) -> [u32; 4] {
    let mut counts = [0; 4];
    counts[c] = 1;
    counts[2 + t] = 1;
    counts
}

fn hadamard_on(state: &FockState, rail0: ModeId, rail1: ModeId) -> Result<FockState> {
    let s = apply_phase(state, rail1, -FRAC_PI_2)?;
    let s = apply_beamsplitter(&s, rail0, rail1, BsParams::symmetric())?;
    apply_phase(&s, rail1, -FRAC_PI_2)
}

/// Hadamard from a symmetric beamsplitter sandwiched between two `−π/2`
/// phase plates on rail 1.
pub fn hadamard_dualrail(q: &DualRailQubit) -> Result<DualRailQubit> {
    let state = hadamard_on(&q.state, q.rail0, q.rail1)?;
    Ok(DualRailQubit {
        rail0: q.rail0,
        rail1: q.rail1,
        state,
    })
}

/// Matrix of [`hadamard_dualrail`] in the logical basis, column `j` being
/// the image of `|j⟩_L`.
pub fn hadamard_matrix() -> Result<[[Complex64; 2]; 2]> {
    let mut m = [[ZERO; 2]; 2];
    for j in 0..2 {
        let mut a = [ZERO; 2];
        a[j] = ONE;
        let out = hadamard_dualrail(&DualRailQubit::new(ModeId::path(0), ModeId::path(1), a[0], a[1])?)?
            .amplitudes();
        for i in 0..2 {
            m[i][j] = out[i];
        }
    }
    Ok(m)
}

/// CNOT from a controlled phase between `c1` and `t1` wrapped in two
/// beamsplitters on the target rails, with fixed phase plates on `t1`.
pub fn cnot_dualrail(pair: &DualRailPair) -> Result<DualRailPair> {
    let [_, c1, t0, t1] = pair_rails();
    let bs = BsParams::symmetric();
    let s = apply_phase(&pair.state, t1, -FRAC_PI_2)?;
    let s = apply_beamsplitter(&s, t0, t1, bs)?;
    let s = apply_phase(&s, t1, PI)?;
    let s = apply_controlled_phase(&s, c1, t1, PI)?;
    let s = apply_beamsplitter(&s, t0, t1, bs)?;
    let s = apply_phase(&s, t1, -FRAC_PI_2)?;
    Ok(DualRailPair { state: s })
}

/// Matrix of [`cnot_dualrail`] in the logical basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn cnot_matrix() -> Result<[[Complex64; 4]; 4]> {
    let mut m = [[ZERO; 4]; 4];
    for j in 0..4 {
        let mut a = [ZERO; 4];
        a[j] = ONE;
        let out = cnot_dualrail(&DualRailPair::new(a)?)?.amplitudes();
        for i in 0..4 {
            m[i][j] = out[i];
        }
    }
    Ok(m)
}

/// Mach-Zehnder interferometer: beamsplitter, a mirror on each arm, and a
/// second identical beamsplitter, fed with `|0⟩_L = |1,0⟩` on `path(0),
/// path(1)`.
pub fn mzi(theta: f64) -> Result<DualRailQubit> {
    let (r0, r1) = (ModeId::path(0), ModeId::path(1));
    let bs = BsParams::with_theta(theta);
    let s = FockState::basis(vec![r0, r1], &[1, 0], DEFAULT_CUTOFF)?;
    let s = apply_beamsplitter(&s, r0, r1, bs)?;
    let s = apply_mirror(&s, r0)?;
    let s = apply_mirror(&s, r1)?;
    DualRailQubit::from_state(apply_beamsplitter(&s, r0, r1, bs)?)
}

/// Detector statistics of one photon split by a symmetric beamsplitter.
pub fn rng_distribution() -> Result<OutcomeDistribution> {
    let (r0, r1) = (ModeId::path(0), ModeId::path(1));
    let s = FockState::basis(vec![r0, r1], &[1, 0], DEFAULT_CUTOFF)?;
    let s = apply_beamsplitter(&s, r0, r1, BsParams::new(FRAC_PI_4, FRAC_PI_2))?;
    photon_distribution(&s, &[r0, r1])
}

/// One random bit: 0 if the transmitted detector fires, 1 if the reflected
/// one does.
pub fn rng_bit(seed: u64) -> Result<u8> {
    let dist = rng_distribution()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(u8::from(dist.sample(&mut rng).counts()[1] == 1))
}

/// Output statistics of `|1,1⟩` through a beamsplitter.
pub fn hom_distribution(params: BsParams) -> Result<OutcomeDistribution> {
    let (a, b) = (ModeId::path(0), ModeId::path(1));
    let s = FockState::basis(vec![a, b], &[1, 1], DEFAULT_CUTOFF)?;
    let s = apply_beamsplitter(&s, a, b, params)?;
    photon_distribution(&s, &[a, b])
}
